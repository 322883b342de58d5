#include "labelerr/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "labelerr/error.hpp"
#include "labelerr/rng.hpp"

namespace labelerr {
namespace {

constexpr double kStochasticTolerance = 1e-9;

void check_distribution(const double* p, std::size_t m, const char* what) {
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!(p[j] >= 0.0) || !std::isfinite(p[j])) {
      throw Error(ErrorKind::InvalidArgument, std::string(what) + " has an invalid entry");
    }
    sum += p[j];
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " does not sum to 1");
  }
}

std::string padded_id(std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  return "ex" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

void NoiseSpec::validate() const {
  const std::size_t m = prior.size();
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 classes");
  if (transition.size() != m * m) throw Error(ErrorKind::DimensionMismatch, "transition must be m x m");
  if (dim < 1 || class_means.size() != m * dim) {
    throw Error(ErrorKind::DimensionMismatch, "class means must be m x dim");
  }
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  check_distribution(prior.data(), m, "prior");
  for (std::size_t i = 0; i < m; ++i) check_distribution(transition.data() + i * m, m, "transition row");
}

std::vector<double> joint_from_transition(const std::vector<double>& prior,
                                          const std::vector<double>& transition) {
  const std::size_t m = prior.size();
  if (transition.size() != m * m) throw Error(ErrorKind::DimensionMismatch, "transition must be m x m");
  std::vector<double> joint(m * m);
  for (std::size_t truth = 0; truth < m; ++truth) {
    for (std::size_t noisy = 0; noisy < m; ++noisy) {
      joint[noisy * m + truth] = prior[truth] * transition[truth * m + noisy];
    }
  }
  return joint;
}

SyntheticDataset sample_noisy_dataset(const NoiseSpec& spec) {
  spec.validate();
  const std::size_t m = spec.num_classes();
  const std::size_t d = spec.dim;
  Rng rng(spec.seed);

  SyntheticDataset out;
  out.data.dim = d;
  out.data.ids.reserve(spec.n);
  out.data.features.reserve(spec.n * d);
  out.true_labels.reserve(spec.n);
  out.flip_mask.reserve(spec.n);
  std::vector<ClassId> noisy;
  noisy.reserve(spec.n);

  const std::size_t width = std::max<std::size_t>(6, std::to_string(spec.n ? spec.n - 1 : 0).size());
  for (std::size_t k = 0; k < spec.n; ++k) {
    const std::size_t truth = rng.categorical(spec.prior);
    for (std::size_t j = 0; j < d; ++j) {
      out.data.features.push_back(spec.class_means[truth * d + j] + spec.sigma * rng.normal());
    }
    const std::size_t given = rng.categorical({spec.transition.data() + truth * m, m});
    out.data.ids.push_back(padded_id(k, width));
    out.true_labels.push_back(static_cast<ClassId>(truth));
    noisy.push_back(static_cast<ClassId>(given));
    out.flip_mask.push_back(given != truth);
  }
  out.data.labels = NoisyLabels(std::move(noisy), m);
  return out;
}

NoiseSpec make_uniform_noise_spec(std::size_t num_classes, std::size_t dim, std::size_t n,
                                  double trace, double separation, double sigma,
                                  std::uint64_t seed) {
  if (num_classes < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 classes");
  if (!(trace >= 0.0 && trace <= 1.0)) throw Error(ErrorKind::InvalidArgument, "trace must lie in [0, 1]");
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dim must be >= 1");
  const std::size_t m = num_classes;
  NoiseSpec spec;
  spec.prior.assign(m, 1.0 / static_cast<double>(m));
  spec.transition.assign(m * m, (1.0 - trace) / static_cast<double>(m - 1));
  for (std::size_t i = 0; i < m; ++i) spec.transition[i * m + i] = trace;
  spec.dim = dim;
  spec.sigma = sigma;
  spec.n = n;
  spec.seed = seed;
  spec.class_means.assign(m * dim, 0.0);
  const double gap = separation * sigma;
  if (dim == 1) {
    for (std::size_t i = 0; i < m; ++i) spec.class_means[i] = gap * static_cast<double>(i);
  } else {
    // Adjacent points on a circle of radius R are 2 R sin(pi / m) apart.
    const double radius = m == 2 ? gap / 2.0 : gap / (2.0 * std::sin(std::numbers::pi / static_cast<double>(m)));
    for (std::size_t i = 0; i < m; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
      spec.class_means[i * dim] = radius * std::cos(angle);
      spec.class_means[i * dim + 1] = radius * std::sin(angle);
    }
  }
  spec.validate();
  return spec;
}

DetectionScore evaluate_detection(const RankedCandidates& candidates, const SyntheticDataset& truth) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(truth.data.size());
  for (std::size_t i = 0; i < truth.data.size(); ++i) index.emplace(truth.data.ids[i], i);

  DetectionScore score;
  for (bool f : truth.flip_mask) score.flipped += f ? 1 : 0;
  score.flagged = candidates.size();
  for (const auto& c : candidates) {
    const auto it = index.find(c.id);
    if (it == index.end()) throw Error(ErrorKind::UnknownExampleId, "candidate '" + c.id + "' not in dataset");
    if (truth.flip_mask[it->second]) ++score.hits;
  }
  if (score.flagged > 0) score.precision = static_cast<double>(score.hits) / static_cast<double>(score.flagged);
  if (score.flipped > 0) score.recall = static_cast<double>(score.hits) / static_cast<double>(score.flipped);
  return score;
}

}  // namespace labelerr
