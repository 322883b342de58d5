#pragma once

// Out-of-sample predicted probabilities: a full-batch multinomial logistic
// regression trained inside seeded, stratified k-fold cross-validation.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "labelerr/core.hpp"

namespace labelerr {

struct FeatureDataset {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> features;  // row-major, ids.size() x dim
  NoisyLabels labels;

  std::size_t size() const noexcept { return ids.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

  // Throws unless shapes agree, dim >= 1 and all features are finite.
  void validate() const;
};

struct ClassifierWeights {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> weights;  // dim x num_classes, row-major
  std::vector<double> bias;     // num_classes

  static ClassifierWeights zeros(std::size_t dim, std::size_t num_classes);

  // Softmax of x^T W + b, written into `out` (size num_classes).
  void predict_proba(std::span<const double> x, std::span<double> out) const;
};

struct CvConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
  double learning_rate = 0.1;
  std::size_t max_iters = 500;
  double grad_tol = 1e-6;
};

// Mean cross-entropy plus (l2 / 2) * ||W||^2; the bias is not penalized.
// When `gradient` is non-null it receives d loss / d params laid out as the
// weights followed by the bias.
double logit_loss(const FeatureDataset& data, const ClassifierWeights& params, double l2,
                  std::vector<double>* gradient);

struct TrainingTrace {
  std::vector<double> losses;  // loss at each accepted iterate, starting at the initial point
  std::size_t iterations = 0;
  double final_grad_norm = 0.0;
};

ClassifierWeights train_multinomial_logit(const FeatureDataset& train, const CvConfig& cfg,
                                          TrainingTrace* trace = nullptr);

// Fold index (0..k-1) per example. Examples are ordered by id inside each
// class before the seeded shuffle, so the assignment depends only on the set
// of (id, label) pairs, not on input order.
std::vector<std::size_t> stratified_folds(const FeatureDataset& data, std::size_t k,
                                          std::uint64_t seed);

ProbabilityMatrix out_of_sample_probs(const FeatureDataset& data, const CvConfig& cfg);

}  // namespace labelerr
