#pragma once
// Drives the labelerr executable end to end in a scratch directory.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "labelerr/io.hpp"

namespace pipeline {

namespace fs = std::filesystem;

inline int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(LABELERR_CLI) + " " + args + " >>" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Five simulated reviewers per candidate who know the true label: the given
// label is confirmed when it was never flipped, the proposed label is
// endorsed when it matches the truth, anything else is "neither".
inline std::string simulated_judgments(const labelerr::RankedCandidates& candidates,
                                       const labelerr::TruthTable& truth) {
  std::map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < truth.ids.size(); ++i) row[truth.ids[i]] = i;
  std::string out;
  for (const auto& c : candidates) {
    const std::size_t i = row.at(c.id);
    labelerr::Choice choice = labelerr::Choice::Neither;
    if (!truth.flipped[i]) choice = labelerr::Choice::Given;
    else if (c.predicted_label == truth.true_labels[i]) choice = labelerr::Choice::Alternative;
    for (int w = 0; w < 5; ++w) {
      const labelerr::Judgment j{c.id, "sim" + std::to_string(w), choice, "2026-01-01T00:00:00Z"};
      out += labelerr::judgment_to_json(j).dump() + "\n";
    }
  }
  return out;
}

struct Outputs {
  int status = 0;
  std::string failed_step;
};

// synth -> probs -> detect -> (simulated review) -> aggregate -> analyze.
inline Outputs run_all(const fs::path& dir, std::uint64_t seed) {
  fs::create_directories(dir);
  const auto log = dir / "cli.log";
  const auto p = [&](const char* name) { return (dir / name).string(); };
  Outputs out;
  auto step = [&](const std::string& name, const std::string& args) {
    if (out.status != 0) return;
    out.status = run(args, log);
    if (out.status != 0) out.failed_step = name;
  };
  step("synth", "synth --classes 4 --n 2000 --dim 2 --trace 0.8 --separation 4 --seed " + std::to_string(seed) +
                    " --out-dir " + dir.string());
  step("probs", "probs --features " + p("features.csv") + " --labels " + p("labels.csv") + " --out " +
                    p("probs.csv") + " --preds-out " + p("preds.csv") + " --topk 2 --max-iters 200");
  step("detect", "detect --labels " + p("labels.csv") + " --probs " + p("probs.csv") + " --out " + p("candidates.json"));
  if (out.status != 0) return out;
  const auto candidates =
      labelerr::parse_candidates_document(labelerr::Json::parse(labelerr::read_file(p("candidates.json"))));
  const auto truth = labelerr::parse_truth(labelerr::read_file(p("truth.csv")));
  labelerr::write_file(p("judgments.jsonl"), simulated_judgments(candidates, truth));
  step("aggregate", "aggregate --candidates " + p("candidates.json") + " --judgments " + p("judgments.jsonl") +
                        " --labels " + p("labels.csv") + " --out " + p("verdicts.json") + " --partition-out " +
                        p("partition.json") + " --dataset-name synthetic");
  step("analyze", "analyze --partition " + p("partition.json") + " --preds " + p("preds.csv") + " --out " +
                      p("report.json") + " --table " + p("report.txt") + " --threshold 3");
  return out;
}

inline const char* kArtifacts[] = {"features.csv", "labels.csv",   "truth.csv",     "noise.json",
                                   "probs.csv",    "preds.csv",    "candidates.json", "judgments.jsonl",
                                   "verdicts.json", "partition.json", "report.json",  "report.txt"};

}  // namespace pipeline
