#pragma once

// Confident-learning estimation: per-class thresholds, the confident joint,
// its calibration into a joint distribution over (noisy, true) labels, and
// margin-ranked label-error candidates.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace labelerr {

using ClassId = int;

// Row-major n x m matrix of predicted class probabilities. Construction
// validates entries; rows whose sum is within kRowSumTolerance of 1 are
// renormalized, anything further off is rejected.
class ProbabilityMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-6;

  ProbabilityMatrix() = default;
  ProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

  // Index of the largest entry in row i; lowest index on ties.
  ClassId argmax(std::size_t i) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

class NoisyLabels {
 public:
  NoisyLabels() = default;
  NoisyLabels(std::vector<ClassId> labels, std::size_t num_classes);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_classes() const noexcept { return counts_.size(); }
  ClassId operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  // |X_{y~=j}| for each class j.
  const std::vector<std::size_t>& class_counts() const noexcept { return counts_; }

 private:
  std::vector<ClassId> labels_;
  std::vector<std::size_t> counts_;
};

struct ClassThresholds {
  std::vector<double> t;
};

struct ConfidentJoint {
  std::size_t num_classes = 0;
  // counts[i * num_classes + j]: examples labeled i confidently in class j.
  std::vector<std::int64_t> counts;
  std::int64_t uncounted = 0;

  std::int64_t at(std::size_t noisy, std::size_t truth) const {
    return counts[noisy * num_classes + truth];
  }
  std::int64_t total() const;
};

struct CalibratedJoint {
  std::size_t num_classes = 0;
  // q[i * num_classes + j] estimates p(noisy = i, true = j).
  std::vector<double> q;
  double rho = 0.0;
  std::int64_t estimated_error_count = 0;

  double at(std::size_t noisy, std::size_t truth) const { return q[noisy * num_classes + truth]; }
};

struct Candidate {
  std::string id;
  std::size_t index = 0;  // row in the input matrix
  ClassId given_label = 0;
  ClassId predicted_label = 0;
  double margin = 0.0;
};

using RankedCandidates = std::vector<Candidate>;

ClassThresholds compute_thresholds(const ProbabilityMatrix& probs, const NoisyLabels& labels);

ConfidentJoint compute_confident_joint(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                       const ClassThresholds& thresholds);

CalibratedJoint calibrate_joint(const ConfidentJoint& cj, const NoisyLabels& labels);

// Given-label probability minus the largest other-class probability.
double normalized_margin(std::span<const double> row, ClassId given);

// The estimated_error_count examples with the smallest margin, ascending.
// Ties break on ascending id (lexicographic); `ids` must have one entry per row.
RankedCandidates flag_candidates(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                 const CalibratedJoint& cal, std::span<const std::string> ids);

// Same, with decimal row indices as ids and ties broken by row index.
RankedCandidates flag_candidates(const ProbabilityMatrix& probs, const NoisyLabels& labels,
                                 const CalibratedJoint& cal);

struct JointEstimate {
  ClassThresholds thresholds;
  ConfidentJoint confident_joint;
  CalibratedJoint calibrated;
};

JointEstimate estimate_joint(const ProbabilityMatrix& probs, const NoisyLabels& labels);

}  // namespace labelerr
