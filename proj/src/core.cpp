#include "labelerr/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "labelerr/error.hpp"

namespace labelerr {

ProbabilityMatrix::ProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (cols_ < 2) throw Error(ErrorKind::DimensionMismatch, "need at least 2 classes");
  if (rows_ < 1) throw Error(ErrorKind::DimensionMismatch, "need at least 1 example");
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(rows_ * cols_) +
                                                  " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    double* row = values_.data() + i * cols_;
    double sum = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!std::isfinite(row[j])) {
        throw Error(ErrorKind::NonFinite, "row " + std::to_string(i) + " has a non-finite entry");
      }
      if (row[j] < 0.0) {
        throw Error(ErrorKind::NegativeEntry, "row " + std::to_string(i) + " has a negative entry");
      }
      sum += row[j];
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorKind::RowSumOutOfTolerance,
                  "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    if (sum != 1.0) {
      for (std::size_t j = 0; j < cols_; ++j) row[j] /= sum;
    }
  }
}

ClassId ProbabilityMatrix::argmax(std::size_t i) const {
  const auto r = row(i);
  return static_cast<ClassId>(std::max_element(r.begin(), r.end()) - r.begin());
}

NoisyLabels::NoisyLabels(std::vector<ClassId> labels, std::size_t num_classes)
    : labels_(std::move(labels)), counts_(num_classes, 0) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const ClassId y = labels_[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw Error(ErrorKind::InvalidArgument,
                  "label " + std::to_string(y) + " at position " + std::to_string(i) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    ++counts_[static_cast<std::size_t>(y)];
  }
}

std::int64_t ConfidentJoint::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) + uncounted;
}

namespace {

void check_shapes(const ProbabilityMatrix& probs, const NoisyLabels& labels) {
  if (probs.rows() != labels.size() || probs.cols() != labels.num_classes()) {
    throw Error(ErrorKind::DimensionMismatch,
                "probabilities are " + std::to_string(probs.rows()) + "x" +
                    std::to_string(probs.cols()) + " but labels cover " +
                    std::to_string(labels.size()) + " examples over " +
                    std::to_string(labels.num_classes()) + " classes");
  }
}

}  // namespace

ClassThresholds compute_thresholds(const ProbabilityMatrix& probs, const NoisyLabels& labels) {
  check_shapes(probs, labels);
  const std::size_t m = probs.cols();
  std::vector<std::vector<double>> self_confidence(m);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    self_confidence[y].push_back(probs(i, y));
  }
  ClassThresholds out;
  out.t.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    auto& values = self_confidence[j];
    if (values.empty()) {
      throw Error(ErrorKind::EmptyClass, "class " + std::to_string(j) + " has no labeled examples");
    }
    // Sorted summation makes the mean independent of example order.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.t[j] = sum / static_cast<double>(values.size());
  }
  return out;
}

ConfidentJoint compute_confident_joint(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                       const ClassThresholds& thresholds) {
  check_shapes(probs, labels);
  const std::size_t m = probs.cols();
  if (thresholds.t.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "threshold count does not match class count");
  }
  ConfidentJoint cj;
  cj.num_classes = m;
  cj.counts.assign(m * m, 0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto row = probs.row(i);
    // Among classes clearing their threshold, keep the most probable one.
    std::size_t best = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (row[j] >= thresholds.t[j] && (best == m || row[j] > row[best])) best = j;
    }
    if (best == m) {
      ++cj.uncounted;
    } else {
      ++cj.counts[static_cast<std::size_t>(labels[i]) * m + best];
    }
  }
  return cj;
}

CalibratedJoint calibrate_joint(const ConfidentJoint& cj, const NoisyLabels& labels) {
  const std::size_t m = cj.num_classes;
  if (labels.num_classes() != m || cj.counts.size() != m * m) {
    throw Error(ErrorKind::DimensionMismatch, "confident joint and labels disagree on class count");
  }
  const auto& class_counts = labels.class_counts();
  std::vector<double> scaled(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t row_sum = 0;
    for (std::size_t j = 0; j < m; ++j) row_sum += cj.at(i, j);
    const auto prior_mass = static_cast<double>(class_counts[i]);
    if (row_sum == 0) {
      scaled[i * m + i] = prior_mass;
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      scaled[i * m + j] = static_cast<double>(cj.at(i, j)) / static_cast<double>(row_sum) * prior_mass;
    }
  }
  double total = 0.0;
  for (double v : scaled) total += v;

  CalibratedJoint out;
  out.num_classes = m;
  out.q.assign(m * m, 0.0);
  if (total > 0.0) {
    for (std::size_t k = 0; k < scaled.size(); ++k) out.q[k] = scaled[k] / total;
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < m; ++i) trace += out.q[i * m + i];
  out.rho = std::clamp(1.0 - trace, 0.0, 1.0);
  out.estimated_error_count = std::llround(out.rho * static_cast<double>(labels.size()));
  return out;
}

double normalized_margin(std::span<const double> row, ClassId given) {
  const auto g = static_cast<std::size_t>(given);
  double other = -1.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != g) other = std::max(other, row[j]);
  }
  return row[g] - other;
}

namespace {

template <typename Less>
RankedCandidates rank_by_margin(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                const CalibratedJoint& cal, Less tie_less,
                                std::span<const std::string> ids) {
  check_shapes(probs, labels);
  const std::size_t n = probs.rows();
  const auto count = static_cast<std::size_t>(std::clamp<std::int64_t>(
      cal.estimated_error_count, 0, static_cast<std::int64_t>(n)));

  std::vector<double> margins(n);
  for (std::size_t i = 0; i < n; ++i) margins[i] = normalized_margin(probs.row(i), labels[i]);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_margin = [&](std::size_t a, std::size_t b) {
    if (margins[a] != margins[b]) return margins[a] < margins[b];
    return tie_less(a, b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    by_margin);

  RankedCandidates out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = order[k];
    out.push_back(Candidate{ids.empty() ? std::to_string(i) : ids[i], i, labels[i],
                            probs.argmax(i), margins[i]});
  }
  return out;
}

}  // namespace

RankedCandidates flag_candidates(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                 const CalibratedJoint& cal, std::span<const std::string> ids) {
  if (ids.size() != probs.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "need one id per example");
  }
  return rank_by_margin(
      probs, labels, cal, [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; }, ids);
}

RankedCandidates flag_candidates(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                 const CalibratedJoint& cal) {
  return rank_by_margin(
      probs, labels, cal, [](std::size_t a, std::size_t b) { return a < b; }, {});
}

JointEstimate estimate_joint(const ProbabilityMatrix& probs, const NoisyLabels& labels) {
  JointEstimate est;
  est.thresholds = compute_thresholds(probs, labels);
  est.confident_joint = compute_confident_joint(probs, labels, est.thresholds);
  est.calibrated = calibrate_joint(est.confident_joint, labels);
  return est;
}

}  // namespace labelerr
