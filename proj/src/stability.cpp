#include "labelerr/stability.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "labelerr/error.hpp"

namespace labelerr {

void TestPartition::validate() const {
  std::set<std::string_view> seen;
  auto claim = [&](const std::string& id) {
    if (!seen.insert(id).second) {
      throw Error(ErrorKind::InvalidArgument, "id '" + id + "' appears in more than one place");
    }
  };
  for (const auto& e : benign) claim(e.id);
  for (const auto& e : correctable) {
    claim(e.id);
    if (e.corrected_label == e.label) {
      throw Error(ErrorKind::InvalidArgument, "correctable id '" + e.id + "' keeps its original label");
    }
  }
  for (const auto& e : unknown) claim(e.id);
}

TestPartition build_partition(std::span<const std::string> ids, const NoisyLabels& labels,
                              const RankedCandidates& candidates, std::span<const Verdict> verdicts) {
  if (ids.size() != labels.size()) throw Error(ErrorKind::DimensionMismatch, "need one id per label");
  std::unordered_map<std::string_view, const Verdict*> by_id;
  for (const auto& v : verdicts) by_id.emplace(v.candidate_id, &v);
  std::unordered_map<std::string_view, const Verdict*> flagged;
  for (const auto& c : candidates) {
    const auto it = by_id.find(c.id);
    if (it == by_id.end()) throw Error(ErrorKind::UnknownCandidate, "no verdict for candidate '" + c.id + "'");
    flagged.emplace(c.id, it->second);
  }

  TestPartition p;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const ClassId label = labels[i];
    const auto it = flagged.find(ids[i]);
    if (it == flagged.end()) {
      p.benign.push_back({ids[i], label});
      continue;
    }
    const Verdict& v = *it->second;
    switch (v.category) {
      case Category::NonError:
        p.benign.push_back({ids[i], label});
        break;
      case Category::Correctable:
        if (v.corrected_label && *v.corrected_label != label) {
          p.correctable.push_back({ids[i], label, *v.corrected_label});
        } else {
          p.benign.push_back({ids[i], label});
        }
        break;
      default:
        p.unknown.push_back({ids[i], label});
        break;
    }
  }
  if (flagged.size() != candidates.size()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate candidate ids");
  }
  p.validate();
  if (p.total_size() != ids.size()) throw Error(ErrorKind::InvalidArgument, "duplicate example ids");
  return p;
}

bool in_top_k(std::span<const ClassId> ranked, ClassId label, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (ranked.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InvalidArgument, "fewer than k ranked predictions");
  }
  return std::find(ranked.begin(), ranked.begin() + k, label) != ranked.begin() + k;
}

namespace {

const std::vector<ClassId>& lookup(const ModelPredictions& preds, const std::string& id) {
  const auto it = preds.ranked.find(id);
  if (it == preds.ranked.end()) {
    throw Error(ErrorKind::UnknownExampleId,
                "model '" + preds.model_id + "' has no prediction for '" + id + "'");
  }
  return it->second;
}

struct Hits {
  std::size_t original = 0;
  std::size_t corrected = 0;
};

}  // namespace

double topk_accuracy(const ModelPredictions& preds, std::span<const LabeledId> subset, int k) {
  if (subset.empty()) throw Error(ErrorKind::EmptySubset, "accuracy over an empty subset");
  std::size_t hits = 0;
  for (const auto& e : subset) hits += in_top_k(lookup(preds, e.id), e.label, k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(subset.size());
}

ModelEval evaluate_model(const TestPartition& partition, const ModelPredictions& preds, int k) {
  const std::size_t pruned = partition.pruned_size();
  if (pruned == 0) throw Error(ErrorKind::EmptyPruned, "pruned set is empty");

  std::size_t benign_hits = 0;
  for (const auto& e : partition.benign) benign_hits += in_top_k(lookup(preds, e.id), e.label, k) ? 1 : 0;
  Hits c;
  for (const auto& e : partition.correctable) {
    const auto& ranked = lookup(preds, e.id);
    c.original += in_top_k(ranked, e.label, k) ? 1 : 0;
    c.corrected += in_top_k(ranked, e.corrected_label, k) ? 1 : 0;
  }

  ModelEval ev;
  ev.model_id = preds.model_id;
  const auto p = static_cast<double>(pruned);
  ev.original_accuracy = static_cast<double>(benign_hits + c.original) / p;
  ev.corrected_accuracy = static_cast<double>(benign_hits + c.corrected) / p;
  if (!partition.benign.empty()) {
    ev.benign_accuracy = static_cast<double>(benign_hits) / static_cast<double>(partition.benign.size());
  }
  if (!partition.correctable.empty()) {
    const auto nc = static_cast<double>(partition.correctable.size());
    ev.correctable_original_accuracy = static_cast<double>(c.original) / nc;
    ev.correctable_corrected_accuracy = static_cast<double>(c.corrected) / nc;
  }
  return ev;
}

double noise_prevalence(const TestPartition& partition) {
  if (partition.pruned_size() == 0) throw Error(ErrorKind::EmptyPruned, "pruned set is empty");
  return static_cast<double>(partition.correctable.size()) / static_cast<double>(partition.pruned_size());
}

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must lie in [0, 1]");
}

}  // namespace

double prevalence_after_removal(double x, double c) {
  check_unit(x, "removed fraction");
  check_unit(c, "baseline prevalence");
  // 1 - (1 - x)(1 - c), arranged so both endpoints come out exact.
  if (x == 1.0) return 1.0;
  return c + x * (1.0 - c);
}

double accuracy_at_prevalence(double acc_benign, double acc_correctable, double prevalence) {
  check_unit(acc_benign, "benign accuracy");
  check_unit(acc_correctable, "correctable accuracy");
  check_unit(prevalence, "prevalence");
  return (1.0 - prevalence) * acc_benign + prevalence * acc_correctable;
}

std::optional<Crossover> find_crossover(const ModelPoint& a, const ModelPoint& b, double c) {
  const double gap_benign = a.acc_benign - b.acc_benign;
  const double gap_correctable = a.acc_correctable - b.acc_correctable;
  const double slope = gap_benign - gap_correctable;
  if (slope == 0.0) return std::nullopt;  // parallel lines
  const double n_star = gap_benign / slope;
  if (!(n_star > c && n_star <= 1.0)) return std::nullopt;
  Crossover x;
  x.model_a = a.model_id;
  x.model_b = b.model_id;
  x.prevalence = n_star;
  // Below N* the sign of the gap follows the benign-set difference.
  const bool a_leads_below = gap_benign > 0.0;
  x.leader_below = a_leads_below ? a.model_id : b.model_id;
  x.leader_above = a_leads_below ? b.model_id : a.model_id;
  return x;
}

int Ranking::rank_of(const std::string& model_id) const {
  for (const auto& e : entries) {
    if (e.model_id == model_id) return e.rank;
  }
  throw Error(ErrorKind::InvalidArgument, "model '" + model_id + "' not ranked");
}

Ranking rank_models(std::span<const std::pair<std::string, double>> scores, TieRule rule) {
  if (scores.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to rank");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].second != scores[b].second) return scores[a].second > scores[b].second;
    switch (rule) {
      case TieRule::AscendingId: return scores[a].first < scores[b].first;
      case TieRule::DescendingId: return scores[a].first > scores[b].first;
      case TieRule::InputOrder: return false;
    }
    return false;
  });

  Ranking out;
  out.entries.reserve(scores.size());
  int dense = 0;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& [id, score] = scores[order[pos]];
    if (pos == 0 || score != out.entries.back().score) ++dense;
    out.entries.push_back({id, score, static_cast<int>(pos) + 1, dense});
  }
  for (std::size_t start = 0; start < out.entries.size();) {
    std::size_t stop = start + 1;
    while (stop < out.entries.size() && out.entries[stop].dense_rank == out.entries[start].dense_rank) ++stop;
    if (stop - start > 1) {
      auto& group = out.ties.emplace_back();
      for (std::size_t k = start; k < stop; ++k) group.push_back(out.entries[k].model_id);
    }
    start = stop;
  }
  return out;
}

namespace {

double curve_value(const std::optional<double>& benign, const std::optional<double>& correctable,
                   double prevalence) {
  if (!correctable) return *benign;
  if (!benign) return *correctable;
  return accuracy_at_prevalence(*benign, *correctable, prevalence);
}

std::vector<int> ranks_in_model_order(const std::vector<ModelEval>& models,
                                      const std::vector<double>& values) {
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) scores.emplace_back(models[i].model_id, values[i]);
  const auto ranking = rank_models(scores);
  std::vector<int> ranks(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) ranks[i] = ranking.rank_of(models[i].model_id);
  return ranks;
}

template <typename Get>
Ranking rank_by(const std::vector<ModelEval>& models, Get get) {
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& m : models) scores.emplace_back(m.model_id, get(m));
  return rank_models(scores);
}

}  // namespace

StabilityReport build_report(const TestPartition& partition,
                             std::span<const ModelPredictions> predictions,
                             std::optional<ValidationPolicy> policy, std::size_t grid_points, int k) {
  if (predictions.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one model");
  if (grid_points < 2) throw Error(ErrorKind::InvalidArgument, "sweep grid needs at least 2 points");
  partition.validate();

  StabilityReport r;
  r.top_k = k;
  if (policy) {
    policy->validate();
    r.agreement_threshold = policy->agreement_threshold;
  }
  r.benign_size = partition.benign.size();
  r.correctable_size = partition.correctable.size();
  r.unknown_size = partition.unknown.size();
  r.baseline_prevalence = noise_prevalence(partition);

  for (const auto& p : predictions) r.models.push_back(evaluate_model(partition, p, k));
  std::sort(r.models.begin(), r.models.end(),
            [](const ModelEval& a, const ModelEval& b) { return a.model_id < b.model_id; });
  for (std::size_t i = 1; i < r.models.size(); ++i) {
    if (r.models[i].model_id == r.models[i - 1].model_id) {
      throw Error(ErrorKind::InvalidArgument, "duplicate model id '" + r.models[i].model_id + "'");
    }
  }

  const auto& models = r.models;
  r.pruned_original_ranking = rank_by(models, [](const ModelEval& m) { return m.original_accuracy; });
  r.pruned_corrected_ranking = rank_by(models, [](const ModelEval& m) { return m.corrected_accuracy; });
  if (!partition.correctable.empty()) {
    r.original_ranking = rank_by(models, [](const ModelEval& m) { return *m.correctable_original_accuracy; });
    r.corrected_ranking = rank_by(models, [](const ModelEval& m) { return *m.correctable_corrected_accuracy; });
  }

  const double c = r.baseline_prevalence;
  r.sweep.reserve(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    SweepPoint pt;
    pt.removed_fraction = g + 1 == grid_points ? 1.0 : static_cast<double>(g) / static_cast<double>(grid_points - 1);
    pt.prevalence = prevalence_after_removal(pt.removed_fraction, c);
    for (const auto& m : models) {
      pt.original.push_back(curve_value(m.benign_accuracy, m.correctable_original_accuracy, pt.prevalence));
      pt.corrected.push_back(curve_value(m.benign_accuracy, m.correctable_corrected_accuracy, pt.prevalence));
    }
    pt.original_rank = ranks_in_model_order(models, pt.original);
    pt.corrected_rank = ranks_in_model_order(models, pt.corrected);
    r.sweep.push_back(std::move(pt));
  }

  if (!partition.benign.empty() && !partition.correctable.empty()) {
    for (const char* kind : {"original", "corrected"}) {
      const bool corrected = std::string_view(kind) == "corrected";
      auto point = [&](const ModelEval& m) {
        return ModelPoint{m.model_id, *m.benign_accuracy,
                          corrected ? *m.correctable_corrected_accuracy : *m.correctable_original_accuracy};
      };
      for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t j = i + 1; j < models.size(); ++j) {
          if (auto x = find_crossover(point(models[i]), point(models[j]), c)) {
            r.crossovers.push_back({kind, std::move(*x)});
          }
        }
      }
    }
  }
  return r;
}

}  // namespace labelerr
