#pragma once

// Synthetic datasets with known class-conditional label noise.

#include <cstdint>
#include <optional>
#include <vector>

#include "labelerr/core.hpp"
#include "labelerr/probs.hpp"

namespace labelerr {

struct NoiseSpec {
  std::vector<double> prior;        // m
  std::vector<double> transition;   // m x m, row i = p(noisy = . | true = i)
  std::vector<double> class_means;  // m x dim
  std::size_t dim = 2;
  double sigma = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  std::size_t num_classes() const noexcept { return prior.size(); }
  void validate() const;
};

struct SyntheticDataset {
  FeatureDataset data;  // labels are the noisy labels
  std::vector<ClassId> true_labels;
  std::vector<bool> flip_mask;
};

// joint[noisy * m + true] = prior[true] * T[true][noisy].
std::vector<double> joint_from_transition(const std::vector<double>& prior,
                                          const std::vector<double>& transition);

SyntheticDataset sample_noisy_dataset(const NoiseSpec& spec);

// Uniform prior, `trace` on the diagonal of T with the rest spread evenly,
// and class means `separation * sigma` apart from their nearest neighbour
// (arranged on a circle in the first two dimensions, or a line when dim = 1).
NoiseSpec make_uniform_noise_spec(std::size_t num_classes, std::size_t dim, std::size_t n,
                                  double trace, double separation, double sigma,
                                  std::uint64_t seed);

struct DetectionScore {
  std::optional<double> precision;  // absent when nothing was flagged
  std::optional<double> recall;     // absent when nothing was flipped
  std::size_t flagged = 0;
  std::size_t flipped = 0;
  std::size_t hits = 0;
};

DetectionScore evaluate_detection(const RankedCandidates& candidates, const SyntheticDataset& truth);

}  // namespace labelerr
