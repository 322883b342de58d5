#pragma once

// File formats. Tabular inputs are comma-delimited text with an optional
// header row and '#' comment lines; structured documents are JSON carrying a
// versioned "schema" field plus tool/input provenance; the judgment log is
// one JSON object per line.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "labelerr/core.hpp"
#include "labelerr/probs.hpp"
#include "labelerr/stability.hpp"
#include "labelerr/synth.hpp"
#include "labelerr/validation.hpp"

namespace labelerr {

inline constexpr std::string_view kToolName = "labelerr";
inline constexpr std::string_view kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string sha256_hex(std::string_view bytes);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// name -> "sha256:<hex>" of each input's bytes.
using Provenance = std::map<std::string, std::string>;
void add_input(Provenance& prov, const std::string& name, std::string_view contents);
Json provenance_json(const Provenance& prov);
// "# labelerr <version> inputs: a=sha256:... b=..." (no trailing newline)
std::string provenance_comment(const Provenance& prov);

struct LabelTable {
  std::vector<std::string> ids;
  std::vector<ClassId> labels;

  ClassId max_label() const;
};

LabelTable parse_labels(std::string_view text);
std::string format_labels(const LabelTable& table, const std::string& comment = {});

struct FeatureTable {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> values;
};

FeatureTable parse_features(std::string_view text);
std::string format_features(const FeatureDataset& data, const std::string& comment = {});

// Joins features to labels by id, in label-file order.
FeatureDataset join_features(const FeatureTable& features, const LabelTable& labels,
                             std::size_t num_classes);

// Validated, renormalized probabilities with rows aligned to `ids`.
ProbabilityMatrix ingest_probs(std::string_view text, std::span<const std::string> ids);
std::string format_probs(std::span<const std::string> ids, const ProbabilityMatrix& probs,
                         const std::string& comment = {});

// Rows "model,id,top1,top2,...".
std::vector<ModelPredictions> parse_predictions(std::string_view text);
std::string format_predictions(const std::string& model_id, std::span<const std::string> ids,
                               const ProbabilityMatrix& probs, int k, const std::string& comment = {});

struct TruthTable {
  std::vector<std::string> ids;
  std::vector<ClassId> true_labels;
  std::vector<bool> flipped;
};
std::string format_truth(const SyntheticDataset& data, const std::string& comment = {});
TruthTable parse_truth(std::string_view text);

Json candidates_document(const JointEstimate& est, const RankedCandidates& candidates,
                         std::size_t n, const Provenance& prov);
RankedCandidates parse_candidates_document(const Json& doc);

Json judgment_to_json(const Judgment& j);
Judgment judgment_from_json(const Json& j);
std::vector<Judgment> parse_judgment_log(std::string_view text);

Json summary_to_json(const SessionSummary& s);
SessionSummary summary_from_json(const Json& j);

Json verdicts_document(std::span<const Verdict> verdicts, const SessionSummary& summary,
                       const ValidationPolicy& policy, const Provenance& prov);
std::vector<Verdict> parse_verdicts_document(const Json& doc);

Json partition_document(const TestPartition& partition, const Provenance& prov);
TestPartition parse_partition_document(const Json& doc);

Json report_document(const StabilityReport& report, const Provenance& prov);
StabilityReport parse_report_document(const Json& doc);

Json noise_spec_document(const NoiseSpec& spec, const Provenance& prov);

// Documents are written with two-space indentation and a trailing newline.
std::string dump(const Json& doc);

}  // namespace labelerr
