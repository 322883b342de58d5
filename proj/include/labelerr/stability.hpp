#pragma once

// How label errors move benchmark conclusions: test-set partitions into
// benign / correctable / unknown examples, original vs corrected accuracy,
// noise-prevalence sweeps, ranking crossovers.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "labelerr/core.hpp"
#include "labelerr/validation.hpp"

namespace labelerr {

struct LabeledId {
  std::string id;
  ClassId label = 0;
};

struct CorrectedExample {
  std::string id;
  ClassId label = 0;  // as originally shipped
  ClassId corrected_label = 0;
};

struct TestPartition {
  std::vector<LabeledId> benign;             // B: never flagged, or flagged and confirmed
  std::vector<CorrectedExample> correctable; // C
  std::vector<LabeledId> unknown;            // U: no usable consensus, pruned

  std::size_t pruned_size() const noexcept { return benign.size() + correctable.size(); }
  std::size_t total_size() const noexcept { return pruned_size() + unknown.size(); }
  // Disjoint ids and corrected labels that differ from the originals.
  void validate() const;
};

// Places every example of the full test set: unflagged and NON_ERROR
// candidates go to B, CORRECTABLE to C, every other verdict to U.
TestPartition build_partition(std::span<const std::string> ids, const NoisyLabels& labels,
                              const RankedCandidates& candidates, std::span<const Verdict> verdicts);

// Ranked class predictions (best first) per example id, for one model.
struct ModelPredictions {
  std::string model_id;
  std::map<std::string, std::vector<ClassId>> ranked;
};

bool in_top_k(std::span<const ClassId> ranked, ClassId label, int k);

// Fraction of `subset` whose label is among the model's first k predictions.
double topk_accuracy(const ModelPredictions& preds, std::span<const LabeledId> subset, int k);

struct ModelEval {
  std::string model_id;
  double original_accuracy = 0.0;   // over P, original labels
  double corrected_accuracy = 0.0;  // over P, corrected labels
  std::optional<double> benign_accuracy;                 // over B
  std::optional<double> correctable_original_accuracy;   // over C, original labels
  std::optional<double> correctable_corrected_accuracy;  // over C, corrected labels
};

ModelEval evaluate_model(const TestPartition& partition, const ModelPredictions& preds, int k);

// |C| / |P|
double noise_prevalence(const TestPartition& partition);

// Prevalence after dropping a fraction x of B: 1 - (1 - x)(1 - c).
double prevalence_after_removal(double x, double c);

// Expected accuracy on a random subset with correctable share N.
double accuracy_at_prevalence(double acc_benign, double acc_correctable, double prevalence);

struct ModelPoint {
  std::string model_id;
  double acc_benign = 0.0;
  double acc_correctable = 0.0;
};

struct Crossover {
  std::string model_a;
  std::string model_b;
  double prevalence = 0.0;
  std::string leader_below;
  std::string leader_above;
};

// Prevalence N* in (c, 1] where the two accuracy lines meet, if any.
std::optional<Crossover> find_crossover(const ModelPoint& a, const ModelPoint& b, double c);

enum class TieRule { AscendingId, DescendingId, InputOrder };

struct RankEntry {
  std::string model_id;
  double score = 0.0;
  int rank = 0;        // 1-based position after tie-breaking
  int dense_rank = 0;  // equal scores share a rank, no gaps
};

struct Ranking {
  std::vector<RankEntry> entries;                 // in rank order
  std::vector<std::vector<std::string>> ties;     // groups of >= 2 equal scores

  int rank_of(const std::string& model_id) const;
};

Ranking rank_models(std::span<const std::pair<std::string, double>> scores,
                    TieRule rule = TieRule::AscendingId);

struct SweepPoint {
  double removed_fraction = 0.0;  // x
  double prevalence = 0.0;        // N(x)
  std::vector<double> original;   // per model, report model order
  std::vector<double> corrected;
  std::vector<int> original_rank;
  std::vector<int> corrected_rank;
};

struct CrossoverRecord {
  std::string kind;  // "original" or "corrected"
  Crossover crossover;
};

struct StabilityReport {
  int top_k = 1;
  std::optional<int> agreement_threshold;
  std::size_t benign_size = 0;
  std::size_t correctable_size = 0;
  std::size_t unknown_size = 0;
  double baseline_prevalence = 0.0;
  std::vector<ModelEval> models;  // sorted by model id
  Ranking original_ranking;       // Acc on C with original labels
  Ranking corrected_ranking;      // Acc on C with corrected labels
  Ranking pruned_original_ranking;
  Ranking pruned_corrected_ranking;
  std::vector<SweepPoint> sweep;
  std::vector<CrossoverRecord> crossovers;
};

// `grid_points` evenly spaced removal fractions in [0, 1] (at least 2).
StabilityReport build_report(const TestPartition& partition,
                             std::span<const ModelPredictions> predictions,
                             std::optional<ValidationPolicy> policy, std::size_t grid_points,
                             int k = 1);

}  // namespace labelerr
