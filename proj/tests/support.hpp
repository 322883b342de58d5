#pragma once
// Shared helpers for the test suites: seeded instance generators, reference
// implementations written directly from the definitions, fixture loading.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "labelerr/core.hpp"
#include "labelerr/rng.hpp"
#include "labelerr/validation.hpp"

namespace support {

using labelerr::ClassId;

struct Instance {
  labelerr::ProbabilityMatrix probs;
  labelerr::NoisyLabels labels;
  std::vector<std::string> ids;
};

// Every class gets at least one label. With `coarse`, probabilities are
// multiples of 0.1 so threshold ties and multi-class rows are common.
inline Instance random_instance(labelerr::Rng& rng, std::size_t n, std::size_t m, bool coarse) {
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i < m ? static_cast<ClassId>(i) : static_cast<ClassId>(rng.below(m));
  }
  rng.shuffle(labels.begin(), labels.end());

  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = values.data() + i * m;
    if (coarse) {
      std::vector<int> tenths(m, 0);
      for (int k = 0; k < 10; ++k) ++tenths[rng.below(m)];
      for (std::size_t j = 0; j < m; ++j) row[j] = tenths[j] / 10.0;
    } else {
      const double sharpness = 0.5 + 4.0 * rng.uniform();
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        row[j] = std::exp(sharpness * rng.normal());
        if (static_cast<ClassId>(j) == labels[i] && rng.uniform() < 0.6) row[j] *= 4.0;
        sum += row[j];
      }
      for (std::size_t j = 0; j < m; ++j) row[j] /= sum;
    }
  }
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "x%04zu", i);
    ids[i] = buf;
  }
  return {labelerr::ProbabilityMatrix(n, m, std::move(values)), labelerr::NoisyLabels(labels, m),
          std::move(ids)};
}

// Confident joint by direct enumeration over (example, class) pairs.
struct OracleJoint {
  std::vector<std::int64_t> counts;
  std::int64_t uncounted = 0;
};

inline OracleJoint oracle_confident_joint(const labelerr::ProbabilityMatrix& p,
                                          const labelerr::NoisyLabels& y) {
  const std::size_t n = p.rows(), m = p.cols();
  std::vector<double> t(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> own;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] == static_cast<ClassId>(j)) own.push_back(p(i, j));
    }
    std::sort(own.begin(), own.end());
    t[j] = std::accumulate(own.begin(), own.end(), 0.0) / static_cast<double>(own.size());
  }
  OracleJoint out;
  out.counts.assign(m * m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> confident;
    for (std::size_t j = 0; j < m; ++j) {
      if (p(i, j) >= t[j]) confident.push_back(j);
    }
    if (confident.empty()) {
      ++out.uncounted;
      continue;
    }
    std::size_t pick = confident.front();
    for (std::size_t j : confident) {
      if (p(i, j) > p(i, pick)) pick = j;
    }
    ++out.counts[static_cast<std::size_t>(y[i]) * m + pick];
  }
  return out;
}

// Category from the definition: count votes, then apply the rules in order.
inline labelerr::Category oracle_category(const std::vector<labelerr::Choice>& votes, int a) {
  using labelerr::Category;
  using labelerr::Choice;
  const int w = static_cast<int>(votes.size());
  const int majority = static_cast<int>(std::ceil((w + 1) / 2.0));
  auto count = [&](Choice c) { return static_cast<int>(std::count(votes.begin(), votes.end(), c)); };
  if (count(Choice::Given) >= a) return Category::NonError;
  if (count(Choice::Alternative) >= majority) return Category::Correctable;
  if (count(Choice::Both) >= majority) return Category::MultiLabel;
  if (count(Choice::Neither) >= majority) return Category::Neither;
  return Category::NonAgreement;
}

inline std::string fixture_path(const std::string& name) {
  return std::string(LABELERR_FIXTURE_DIR) + "/" + name;
}

// Rows of a small comma-separated fixture, header dropped.
inline std::vector<std::vector<std::string>> read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace support
