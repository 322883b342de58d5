#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "labelerr/error.hpp"
#include "labelerr/rng.hpp"
#include "labelerr/stability.hpp"
#include "support.hpp"

using namespace labelerr;

namespace {

struct TableRow {
  std::string model;
  double acc1, cacc1, acc5, cacc5;
  int rank1, crank1, rank5, crank5;
};

std::vector<TableRow> imagenet_table() {
  std::vector<TableRow> rows;
  for (const auto& r : support::read_fixture("imagenet_correctable.csv")) {
    rows.push_back({r[0] + "/" + r[1], std::stod(r[2]), std::stod(r[3]), std::stod(r[4]), std::stod(r[5]),
                    std::stoi(r[6]), std::stoi(r[7]), std::stoi(r[8]), std::stoi(r[9])});
  }
  return rows;
}

// Every published percentage is hits / 1405 rounded to two decimals.
constexpr int kCorrectable = 1405;

int hits_for(double pct) { return static_cast<int>(std::lround(pct * kCorrectable / 100.0)); }

// Ranked top-5 lists over a correctable set where every example's original
// label is 0 and corrected label is 1, hitting the requested counts.
ModelPredictions predictions_for(const TableRow& row, const std::vector<LabeledId>& ids) {
  const int o1 = hits_for(row.acc1), c1 = hits_for(row.cacc1);
  const int o5 = hits_for(row.acc5), c5 = hits_for(row.cacc5);
  ModelPredictions p{row.model, {}};
  for (int i = 0; i < kCorrectable; ++i) {
    std::vector<ClassId> ranked;
    if (i < o1) ranked.push_back(0);
    else if (i < o1 + c1) ranked.push_back(1);
    else ranked.push_back(2);
    ranked.push_back(3);
    ranked.push_back(4);
    ranked.push_back(5);
    ranked.push_back(6);
    p.ranked[ids[static_cast<std::size_t>(i)].id] = ranked;
  }
  // Fill the lower ranks: exactly o5 lists contain 0 and c5 contain 1.
  std::vector<std::string> order;
  for (const auto& e : ids) order.push_back(e.id);
  int have0 = o1, have1 = c1;
  for (int i = 0; i < kCorrectable; ++i) {
    auto& ranked = p.ranked[order[static_cast<std::size_t>(i)]];
    if (have0 < o5 && ranked[0] != 0) {
      ranked[1] = 0;
      ++have0;
    }
  }
  for (int i = kCorrectable; i-- > 0;) {
    auto& ranked = p.ranked[order[static_cast<std::size_t>(i)]];
    if (have1 < c5 && ranked[0] != 1) {
      ranked[2] = 1;
      ++have1;
    }
  }
  REQUIRE(have0 == o5);
  REQUIRE(have1 == c5);
  return p;
}

double two_decimals(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

// Compares ranks up to reordering inside groups of equal published score.
void check_ranks_modulo_ties(const std::vector<TableRow>& rows, const Ranking& ranking,
                             double TableRow::*score, int TableRow::*published) {
  std::map<double, std::multiset<int>> ours, theirs;
  for (const auto& r : rows) {
    ours[r.*score].insert(ranking.rank_of(r.model));
    theirs[r.*score].insert(r.*published);
  }
  CHECK(ours == theirs);
}

}  // namespace

TEST_CASE("crossover of the two-model fixture") {
  const ModelPoint a{"A", 0.8, 0.6}, b{"B", 0.75, 0.7};
  const auto x = find_crossover(a, b, 0.0);
  REQUIRE(x.has_value());
  CHECK(std::abs(x->prevalence - 1.0 / 3.0) <= 1e-12);
  CHECK(x->leader_below == "A");
  CHECK(x->leader_above == "B");

  const auto swapped = find_crossover(b, a, 0.0);
  REQUIRE(swapped.has_value());
  CHECK(std::abs(swapped->prevalence - x->prevalence) <= 1e-15);
  CHECK(swapped->leader_below == "A");
  CHECK(swapped->leader_above == "B");

  CHECK_FALSE(find_crossover(a, b, 0.5).has_value());
  CHECK_FALSE(find_crossover(a, a, 0.0).has_value());
  CHECK_FALSE(find_crossover(a, ModelPoint{"C", 0.7, 0.5}, 0.0).has_value());
}

TEST_CASE("prevalence after removal hits its endpoints exactly") {
  for (int k = 0; k <= 997; ++k) {
    const double c = k / 997.0;
    CHECK(prevalence_after_removal(0.0, c) == c);
    CHECK(prevalence_after_removal(1.0, c) == 1.0);
  }
  CHECK(prevalence_after_removal(0.5, 0.0583) == doctest::Approx(0.52915));
  double prev = -1.0;
  for (int g = 0; g <= 100; ++g) {
    const double n = prevalence_after_removal(g / 100.0, 0.2);
    CHECK(n > prev);
    prev = n;
  }
  CHECK_THROWS_AS(prevalence_after_removal(1.5, 0.1), Error);
}

TEST_CASE("interpolated accuracy equals the mean over random benign removals") {
  // n = 1000 fixture: 900 benign (765 right), 100 correctable (30 right).
  const int nb = 900, nc = 100, hb = 765, hc = 30;
  std::vector<char> benign(nb, 0);
  std::fill(benign.begin(), benign.begin() + hb, 1);
  Rng rng(2718);
  for (double x : {0.1, 0.5, 0.9}) {
    const int removed = static_cast<int>(std::lround(x * nb));
    double sum = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      rng.shuffle(benign.begin(), benign.end());
      int kept_hits = 0;
      for (int i = removed; i < nb; ++i) kept_hits += benign[i];
      sum += double(kept_hits + hc) / double(nb - removed + nc);
    }
    const double realized = double(nc) / double(nb - removed + nc);
    CAPTURE(x);
    CHECK(std::abs(sum / 10000.0 - accuracy_at_prevalence(0.85, 0.3, realized)) < 0.005);
  }
  CHECK(accuracy_at_prevalence(0.8, 0.6, 0.5) == doctest::Approx(0.7));
  CHECK(accuracy_at_prevalence(0.8, 0.6, 0.0) == 0.8);
  CHECK(accuracy_at_prevalence(0.8, 0.6, 1.0) == 0.6);
}

TEST_CASE("the removal formula is an estimate, not the realized prevalence") {
  // Removing half of B from c = 0.0583 leaves 0.0583 / (0.5 * 0.9417 + 0.0583) correctable.
  const double c = 0.0583;
  const double realized = c / (0.5 * (1.0 - c) + c);
  CHECK(realized == doctest::Approx(0.11021).epsilon(1e-4));
  CHECK(prevalence_after_removal(0.5, c) > realized);
}

TEST_CASE("rank_models: descending scores, tie groups, tie rules") {
  const std::vector<std::pair<std::string, double>> s{{"b", 0.8}, {"a", 0.9}, {"d", 0.8}, {"c", 0.8}};
  const auto r = rank_models(s);
  CHECK(r.rank_of("a") == 1);
  CHECK(r.rank_of("b") == 2);
  CHECK(r.rank_of("c") == 3);
  CHECK(r.rank_of("d") == 4);
  CHECK(r.entries[3].dense_rank == 2);
  REQUIRE(r.ties.size() == 1);
  CHECK(r.ties[0] == std::vector<std::string>{"b", "c", "d"});
  const auto desc = rank_models(s, TieRule::DescendingId);
  CHECK(desc.rank_of("d") == 2);
  const auto input = rank_models(s, TieRule::InputOrder);
  CHECK(input.rank_of("b") == 2);
  CHECK(input.rank_of("d") == 3);

  const std::vector<std::pair<std::string, double>> same{{"x", 0.5}, {"y", 0.5}};
  const auto all = rank_models(same);
  CHECK(all.entries[0].dense_rank == 1);
  CHECK(all.entries[1].dense_rank == 1);

  auto shifted = s;
  for (auto& [id, v] : shifted) v += 3.0;
  const auto r2 = rank_models(shifted);
  for (const auto& e : r.entries) CHECK(r2.rank_of(e.model_id) == e.rank);
}

TEST_CASE("appendix ImageNet table: ranks recomputed from the accuracy columns") {
  const auto rows = imagenet_table();
  REQUIRE(rows.size() == 34);
  std::vector<std::pair<std::string, double>> acc1, cacc1, acc5, cacc5;
  for (const auto& r : rows) {
    acc1.emplace_back(r.model, r.acc1);
    cacc1.emplace_back(r.model, r.cacc1);
    acc5.emplace_back(r.model, r.acc5);
    cacc5.emplace_back(r.model, r.cacc5);
  }
  const auto r1 = rank_models(acc1), c1 = rank_models(cacc1);
  check_ranks_modulo_ties(rows, r1, &TableRow::acc1, &TableRow::rank1);
  check_ranks_modulo_ties(rows, c1, &TableRow::cacc1, &TableRow::crank1);
  check_ranks_modulo_ties(rows, rank_models(acc5), &TableRow::acc5, &TableRow::rank5);
  check_ranks_modulo_ties(rows, rank_models(cacc5), &TableRow::cacc5, &TableRow::crank5);
  CHECK(c1.rank_of("PyTorch 1.0/resnet18") == 1);
  CHECK(r1.rank_of("PyTorch 1.0/resnet18") == 34);
  bool documented_tie = false;
  for (const auto& g : c1.ties) {
    documented_tie = documented_tie || g == std::vector<std::string>{"PyTorch 1.0/densenet169", "PyTorch 1.0/resnet34"};
  }
  CHECK(documented_tie);
}

TEST_CASE("per-example indicators reproduce the appendix accuracy columns") {
  const auto rows = imagenet_table();
  TestPartition part;
  std::vector<LabeledId> ids;
  for (int i = 0; i < kCorrectable; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "val%05d", i);
    part.correctable.push_back({buf, 0, 1});
    ids.push_back({buf, 0});
  }
  std::vector<ModelPredictions> preds;
  for (const auto& r : rows) preds.push_back(predictions_for(r, ids));

  for (std::size_t m = 0; m < rows.size(); ++m) {
    CAPTURE(rows[m].model);
    const auto e1 = evaluate_model(part, preds[m], 1);
    const auto e5 = evaluate_model(part, preds[m], 5);
    CHECK(two_decimals(*e1.correctable_original_accuracy) == doctest::Approx(rows[m].acc1));
    CHECK(two_decimals(*e1.correctable_corrected_accuracy) == doctest::Approx(rows[m].cacc1));
    CHECK(two_decimals(*e5.correctable_original_accuracy) == doctest::Approx(rows[m].acc5));
    CHECK(two_decimals(*e5.correctable_corrected_accuracy) == doctest::Approx(rows[m].cacc5));
    CHECK(two_decimals(topk_accuracy(preds[m], ids, 1)) == doctest::Approx(rows[m].acc1));
    CHECK_FALSE(e1.benign_accuracy.has_value());
  }

  const auto report = build_report(part, preds, ValidationPolicy{5, 3}, 11, 1);
  check_ranks_modulo_ties(rows, report.original_ranking, &TableRow::acc1, &TableRow::rank1);
  check_ranks_modulo_ties(rows, report.corrected_ranking, &TableRow::cacc1, &TableRow::crank1);
  CHECK(report.baseline_prevalence == 1.0);
  CHECK(report.crossovers.empty());
  CHECK(*report.agreement_threshold == 3);
}

TEST_CASE("report on the two-model fixture shows the crossover and the rank flip") {
  // |B| = 40, |C| = 10: c = 0.2. A is right on 32/40 and 6/10 corrected; B on 30/40 and 7/10.
  TestPartition part;
  ModelPredictions a{"A", {}}, b{"B", {}};
  for (int i = 0; i < 40; ++i) {
    const std::string id = "b" + std::to_string(100 + i);
    part.benign.push_back({id, 0});
    a.ranked[id] = i < 32 ? std::vector<ClassId>{0, 1} : std::vector<ClassId>{1, 0};
    b.ranked[id] = i < 30 ? std::vector<ClassId>{0, 1} : std::vector<ClassId>{1, 0};
  }
  for (int i = 0; i < 10; ++i) {
    const std::string id = "c" + std::to_string(100 + i);
    part.correctable.push_back({id, 0, 1});
    a.ranked[id] = i < 6 ? std::vector<ClassId>{1, 0} : std::vector<ClassId>{0, 1};
    b.ranked[id] = i < 7 ? std::vector<ClassId>{1, 0} : std::vector<ClassId>{0, 1};
  }
  part.unknown.push_back({"u1", 0});
  const std::vector<ModelPredictions> preds{b, a};
  const auto r = build_report(part, preds, std::nullopt, 101, 1);
  CHECK(r.benign_size == 40);
  CHECK(r.unknown_size == 1);
  CHECK(r.baseline_prevalence == doctest::Approx(0.2));
  REQUIRE(r.models.size() == 2);
  CHECK(r.models[0].model_id == "A");
  CHECK(*r.models[0].benign_accuracy == 0.8);
  CHECK(*r.models[0].correctable_corrected_accuracy == 0.6);
  // Corrected accuracy over P is the size-weighted mix.
  CHECK(std::abs(r.models[0].corrected_accuracy - (40 * 0.8 + 10 * 0.6) / 50.0) <= 1e-12);

  const CrossoverRecord* corrected = nullptr;
  for (const auto& x : r.crossovers) {
    if (x.kind == "corrected") corrected = &x;
  }
  REQUIRE(corrected != nullptr);
  CHECK(std::abs(corrected->crossover.prevalence - 1.0 / 3.0) <= 1e-12);
  CHECK(corrected->crossover.leader_below == "A");
  CHECK(corrected->crossover.leader_above == "B");

  // N(x) = 1/3 at x = 1/6: the ranks swap between grid points 16 and 17.
  REQUIRE(r.sweep.size() == 101);
  CHECK(r.sweep[16].corrected_rank == std::vector<int>{1, 2});
  CHECK(r.sweep[17].corrected_rank == std::vector<int>{2, 1});
  CHECK(r.sweep.front().prevalence == r.baseline_prevalence);
  CHECK(r.sweep.back().prevalence == 1.0);
  CHECK(r.sweep.back().corrected[0] == doctest::Approx(0.6));
}

TEST_CASE("single perfect model with no correctable examples gives flat curves") {
  TestPartition part;
  ModelPredictions p{"only", {}};
  for (int i = 0; i < 5; ++i) {
    part.benign.push_back({"e" + std::to_string(i), i % 2});
    p.ranked["e" + std::to_string(i)] = {i % 2, 1 - i % 2};
  }
  const std::vector<ModelPredictions> preds{p};
  const auto r = build_report(part, preds, std::nullopt, 5, 1);
  for (const auto& pt : r.sweep) {
    CHECK(pt.original[0] == 1.0);
    CHECK(pt.corrected[0] == 1.0);
  }
  CHECK(r.crossovers.empty());
}

TEST_CASE("partition from verdicts") {
  const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
  const NoisyLabels labels({0, 1, 0, 1, 0, 1}, 2);
  const RankedCandidates cands{{"b", 1, 1, 0, -0.5}, {"c", 2, 0, 1, -0.4}, {"d", 3, 1, 0, -0.3}, {"e", 4, 0, 1, -0.2}};
  const std::vector<Verdict> verdicts{{"b", true, Category::Correctable, 0},
                                      {"c", false, Category::NonError, std::nullopt},
                                      {"d", true, Category::MultiLabel, std::nullopt},
                                      {"e", true, Category::NonAgreement, std::nullopt}};
  const auto p = build_partition(ids, labels, cands, verdicts);
  CHECK(p.benign.size() == 3);  // a, c, f
  REQUIRE(p.correctable.size() == 1);
  CHECK(p.correctable[0].id == "b");
  CHECK(p.correctable[0].label == 1);
  CHECK(p.correctable[0].corrected_label == 0);
  CHECK(p.unknown.size() == 2);
  CHECK(p.total_size() == ids.size());
  CHECK(noise_prevalence(p) == doctest::Approx(0.25));

  const std::vector<Verdict> missing{verdicts[0]};
  CHECK_THROWS_AS(build_partition(ids, labels, cands, missing), Error);
}

TEST_CASE("random partitions keep the set identities") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.below(60);
    std::vector<std::string> ids;
    std::vector<ClassId> y;
    RankedCandidates cands;
    std::vector<Verdict> verdicts;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("id" + std::to_string(i));
      y.push_back(static_cast<ClassId>(rng.below(3)));
      if (rng.uniform() < 0.4) {
        const auto cat = static_cast<Category>(rng.below(5));
        const ClassId pred = (y.back() + 1) % 3;
        cands.push_back({ids.back(), i, y.back(), pred, 0.0});
        verdicts.push_back({ids.back(), cat != Category::NonError, cat,
                            cat == Category::Correctable ? std::optional<ClassId>(pred) : std::nullopt});
      }
    }
    const auto p = build_partition(ids, NoisyLabels(y, 3), cands, verdicts);
    std::set<std::string> all;
    for (const auto& e : p.benign) all.insert(e.id);
    for (const auto& e : p.correctable) all.insert(e.id);
    for (const auto& e : p.unknown) all.insert(e.id);
    CHECK(all.size() == n);
    CHECK(p.total_size() == n);
  }
}

TEST_CASE("accuracy errors") {
  ModelPredictions p{"m", {{"a", {0, 1}}}};
  const std::vector<LabeledId> none;
  CHECK_THROWS_AS(topk_accuracy(p, none, 1), Error);
  const std::vector<LabeledId> a{{"a", 1}};
  CHECK(topk_accuracy(p, a, 1) == 0.0);
  CHECK(topk_accuracy(p, a, 2) == 1.0);
  CHECK_THROWS_AS(topk_accuracy(p, a, 3), Error);
  const std::vector<LabeledId> unknown{{"zz", 0}};
  CHECK_THROWS_AS(topk_accuracy(p, unknown, 1), Error);
  TestPartition empty;
  try {
    evaluate_model(empty, p, 1);
    FAIL("expected EmptyPruned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyPruned);
  }
}
