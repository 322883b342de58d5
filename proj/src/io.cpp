#include "labelerr/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "labelerr/error.hpp"

namespace labelerr {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading '" + path.string() + "'");
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void add_input(Provenance& prov, const std::string& name, std::string_view contents) {
  prov[name] = "sha256:" + sha256_hex(contents);
}

Json provenance_json(const Provenance& prov) {
  Json inputs = Json::object();
  for (const auto& [name, hash] : prov) inputs[name] = hash;
  return Json{{"tool", {{"name", kToolName}, {"version", kToolVersion}}}, {"inputs", inputs}};
}

std::string provenance_comment(const Provenance& prov) {
  std::string out = "# " + std::string(kToolName) + " " + std::string(kToolVersion);
  if (!prov.empty()) {
    out += " inputs:";
    for (const auto& [name, hash] : prov) out += " " + name + "=" + hash;
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Row {
  std::size_t line_no;
  std::vector<std::string_view> fields;
};

// Data rows of a delimited text; drops blanks, comments and a header row
// whose first field equals `header_key`.
std::vector<Row> data_rows(std::string_view text, std::string_view header_key) {
  std::vector<Row> rows;
  std::size_t line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (first && fields.front() == header_key) {
      first = false;
      continue;
    }
    first = false;
    rows.push_back({line_no, std::move(fields)});
  }
  return rows;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

double parse_real(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(line_no, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

ClassId parse_class(std::string_view s, std::size_t line_no) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0) {
    parse_fail(line_no, "not a class index: '" + std::string(s) + "'");
  }
  return v;
}

void require_id(std::string_view id, std::size_t line_no) {
  if (id.empty()) parse_fail(line_no, "empty id");
}

std::string with_comment(const std::string& comment) { return comment.empty() ? "" : comment + "\n"; }

}  // namespace

ClassId LabelTable::max_label() const {
  return labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
}

LabelTable parse_labels(std::string_view text) {
  LabelTable t;
  std::set<std::string_view> seen;
  for (const auto& row : data_rows(text, "id")) {
    if (row.fields.size() != 2) parse_fail(row.line_no, "expected 'id,label'");
    require_id(row.fields[0], row.line_no);
    if (!seen.insert(row.fields[0]).second) parse_fail(row.line_no, "duplicate id '" + std::string(row.fields[0]) + "'");
    t.ids.emplace_back(row.fields[0]);
    t.labels.push_back(parse_class(row.fields[1], row.line_no));
  }
  if (t.ids.empty()) throw Error(ErrorKind::Parse, "label file has no rows");
  return t;
}

std::string format_labels(const LabelTable& table, const std::string& comment) {
  std::string out = with_comment(comment) + "id,label\n";
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out += table.ids[i] + "," + std::to_string(table.labels[i]) + "\n";
  }
  return out;
}

FeatureTable parse_features(std::string_view text) {
  FeatureTable t;
  std::set<std::string_view> seen;
  for (const auto& row : data_rows(text, "id")) {
    if (row.fields.size() < 2) parse_fail(row.line_no, "expected 'id,f0,...'");
    const std::size_t dim = row.fields.size() - 1;
    if (t.dim == 0) t.dim = dim;
    if (dim != t.dim) parse_fail(row.line_no, "inconsistent feature count");
    require_id(row.fields[0], row.line_no);
    if (!seen.insert(row.fields[0]).second) parse_fail(row.line_no, "duplicate id '" + std::string(row.fields[0]) + "'");
    t.ids.emplace_back(row.fields[0]);
    for (std::size_t j = 1; j < row.fields.size(); ++j) {
      const double v = parse_real(row.fields[j], row.line_no);
      if (!std::isfinite(v)) parse_fail(row.line_no, "non-finite feature");
      t.values.push_back(v);
    }
  }
  if (t.ids.empty()) throw Error(ErrorKind::Parse, "feature file has no rows");
  return t;
}

std::string format_features(const FeatureDataset& data, const std::string& comment) {
  std::string out = with_comment(comment) + "id";
  for (std::size_t j = 0; j < data.dim; ++j) out += ",f" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += data.ids[i];
    for (double v : data.row(i)) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

FeatureDataset join_features(const FeatureTable& features, const LabelTable& labels,
                             std::size_t num_classes) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < features.ids.size(); ++i) row_of.emplace(features.ids[i], i);
  if (features.ids.size() != labels.ids.size()) {
    throw Error(ErrorKind::UnknownExampleId, "feature and label files cover different examples");
  }
  FeatureDataset out;
  out.dim = features.dim;
  out.ids = labels.ids;
  out.features.reserve(features.values.size());
  for (const auto& id : labels.ids) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) throw Error(ErrorKind::UnknownExampleId, "no features for '" + id + "'");
    const auto* row = features.values.data() + it->second * features.dim;
    out.features.insert(out.features.end(), row, row + features.dim);
  }
  out.labels = NoisyLabels(labels.labels, num_classes);
  out.validate();
  return out;
}

ProbabilityMatrix ingest_probs(std::string_view text, std::span<const std::string> ids) {
  std::unordered_map<std::string_view, std::size_t> slot;
  for (std::size_t i = 0; i < ids.size(); ++i) slot.emplace(ids[i], i);

  const auto rows = data_rows(text, "id");
  std::size_t m = 0;
  std::vector<double> values;
  std::vector<bool> filled(ids.size(), false);
  for (const auto& row : rows) {
    if (row.fields.size() < 3) parse_fail(row.line_no, "expected 'id,p0,p1,...'");
    const std::size_t cols = row.fields.size() - 1;
    if (m == 0) {
      m = cols;
      values.assign(ids.size() * m, 0.0);
    }
    if (cols != m) parse_fail(row.line_no, "inconsistent class count");
    const auto it = slot.find(row.fields[0]);
    if (it == slot.end()) {
      throw Error(ErrorKind::UnknownExampleId, "line " + std::to_string(row.line_no) + ": id '" +
                                                   std::string(row.fields[0]) + "' not in label file");
    }
    if (filled[it->second]) parse_fail(row.line_no, "duplicate id '" + std::string(row.fields[0]) + "'");
    filled[it->second] = true;
    for (std::size_t j = 0; j < m; ++j) values[it->second * m + j] = parse_real(row.fields[j + 1], row.line_no);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!filled[i]) throw Error(ErrorKind::UnknownExampleId, "no probabilities for '" + ids[i] + "'");
  }
  if (m == 0) throw Error(ErrorKind::Parse, "probability file has no rows");
  return ProbabilityMatrix(ids.size(), m, std::move(values));
}

std::string format_probs(std::span<const std::string> ids, const ProbabilityMatrix& probs,
                         const std::string& comment) {
  std::string out = with_comment(comment) + "id";
  for (std::size_t j = 0; j < probs.cols(); ++j) out += ",p" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    out += ids[i];
    for (double v : probs.row(i)) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::vector<ModelPredictions> parse_predictions(std::string_view text) {
  std::vector<ModelPredictions> models;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : data_rows(text, "model")) {
    if (row.fields.size() < 3) parse_fail(row.line_no, "expected 'model,id,top1,...'");
    require_id(row.fields[0], row.line_no);
    require_id(row.fields[1], row.line_no);
    std::string model(row.fields[0]);
    auto [it, inserted] = index.emplace(model, models.size());
    if (inserted) models.push_back({model, {}});
    std::vector<ClassId> ranked;
    for (std::size_t j = 2; j < row.fields.size(); ++j) ranked.push_back(parse_class(row.fields[j], row.line_no));
    if (!models[it->second].ranked.emplace(std::string(row.fields[1]), std::move(ranked)).second) {
      parse_fail(row.line_no, "duplicate prediction for '" + std::string(row.fields[1]) + "'");
    }
  }
  if (models.empty()) throw Error(ErrorKind::Parse, "prediction file has no rows");
  return models;
}

std::string format_predictions(const std::string& model_id, std::span<const std::string> ids,
                               const ProbabilityMatrix& probs, int k, const std::string& comment) {
  const auto depth = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), probs.cols());
  std::string out = with_comment(comment) + "model,id";
  for (std::size_t r = 0; r < depth; ++r) out += ",top" + std::to_string(r + 1);
  out += "\n";
  std::vector<std::size_t> order(probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto row = probs.row(i);
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    out += model_id + "," + ids[i];
    for (std::size_t r = 0; r < depth; ++r) out += "," + std::to_string(order[r]);
    out += "\n";
  }
  return out;
}

std::string format_truth(const SyntheticDataset& data, const std::string& comment) {
  std::string out = with_comment(comment) + "id,true_label,flipped\n";
  for (std::size_t i = 0; i < data.data.size(); ++i) {
    out += data.data.ids[i] + "," + std::to_string(data.true_labels[i]) + "," +
           (data.flip_mask[i] ? "1" : "0") + "\n";
  }
  return out;
}

TruthTable parse_truth(std::string_view text) {
  TruthTable t;
  for (const auto& row : data_rows(text, "id")) {
    if (row.fields.size() != 3) parse_fail(row.line_no, "expected 'id,true_label,flipped'");
    t.ids.emplace_back(row.fields[0]);
    t.true_labels.push_back(parse_class(row.fields[1], row.line_no));
    if (row.fields[2] != "0" && row.fields[2] != "1") parse_fail(row.line_no, "flipped must be 0 or 1");
    t.flipped.push_back(row.fields[2] == "1");
  }
  return t;
}

namespace {

Json square_matrix(const std::vector<double>& flat, std::size_t m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m; ++i) {
    rows.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i * m),
                                       flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * m)));
  }
  return rows;
}

Json with_header(std::string_view schema, const Provenance& prov) {
  Json doc = Json::object();
  doc["schema"] = schema;
  const auto p = provenance_json(prov);
  doc["tool"] = p["tool"];
  doc["inputs"] = p["inputs"];
  return doc;
}

void expect_schema(const Json& doc, std::string_view schema) {
  if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != schema) {
    throw Error(ErrorKind::Parse, "expected a document with schema '" + std::string(schema) + "'");
  }
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

Json candidates_document(const JointEstimate& est, const RankedCandidates& candidates,
                         std::size_t n, const Provenance& prov) {
  const std::size_t m = est.confident_joint.num_classes;
  Json doc = with_header("labelerr.candidates/1", prov);
  doc["examples"] = n;
  doc["classes"] = m;
  doc["thresholds"] = est.thresholds.t;
  Json counts = Json::array();
  for (std::size_t i = 0; i < m; ++i) {
    counts.push_back(std::vector<std::int64_t>(est.confident_joint.counts.begin() + static_cast<std::ptrdiff_t>(i * m),
                                               est.confident_joint.counts.begin() + static_cast<std::ptrdiff_t>((i + 1) * m)));
  }
  doc["confident_joint"] = {{"counts", counts}, {"uncounted", est.confident_joint.uncounted}};
  doc["calibrated_joint"] = {{"q", square_matrix(est.calibrated.q, m)},
                             {"rho", est.calibrated.rho},
                             {"estimated_error_count", est.calibrated.estimated_error_count}};
  Json list = Json::array();
  for (const auto& c : candidates) {
    list.push_back({{"id", c.id},
                    {"given_label", c.given_label},
                    {"predicted_label", c.predicted_label},
                    {"normalized_margin", c.margin}});
  }
  doc["candidates"] = std::move(list);
  return doc;
}

RankedCandidates parse_candidates_document(const Json& doc) {
  expect_schema(doc, "labelerr.candidates/1");
  RankedCandidates out;
  try {
    for (const auto& c : doc.at("candidates")) {
      Candidate cand;
      cand.id = c.at("id").get<std::string>();
      cand.given_label = c.at("given_label").get<ClassId>();
      cand.predicted_label = c.at("predicted_label").get<ClassId>();
      cand.margin = c.at("normalized_margin").get<double>();
      out.push_back(std::move(cand));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("candidates document: ") + e.what());
  }
  return out;
}

Json judgment_to_json(const Judgment& j) {
  return Json{{"candidate_id", j.candidate_id},
              {"worker_id", j.worker_id},
              {"choice", to_string(j.choice)},
              {"timestamp", j.timestamp}};
}

Judgment judgment_from_json(const Json& j) {
  Judgment out;
  try {
    out.candidate_id = j.at("candidate_id").get<std::string>();
    out.worker_id = j.at("worker_id").get<std::string>();
    out.choice = parse_choice(j.at("choice").get<std::string>());
    if (j.contains("timestamp")) {
      out.timestamp = j["timestamp"].is_string() ? j["timestamp"].get<std::string>() : j["timestamp"].dump();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("judgment: ") + e.what());
  }
  return out;
}

std::vector<Judgment> parse_judgment_log(std::string_view text) {
  std::vector<Judgment> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) parse_fail(line_no, "malformed judgment record");
    out.push_back(judgment_from_json(j));
  }
  return out;
}

Json summary_to_json(const SessionSummary& s) {
  const auto& c = s.categories;
  return Json{{"dataset", s.dataset},
              {"categories",
               {{"non_errors", c.non_errors},
                {"errors", c.errors},
                {"non_agreement", optional_json(c.non_agreement)},
                {"correctable", optional_json(c.correctable)},
                {"multi_label", optional_json(c.multi_label)},
                {"neither", optional_json(c.neither)}}},
              {"guessed", s.guessed},
              {"checked", s.checked},
              {"validated", s.validated},
              {"dataset_size", optional_json(s.dataset_size)},
              {"estimated_total", optional_json(s.estimated_total)},
              {"percent_error", optional_json(s.percent_error)}};
}

SessionSummary summary_from_json(const Json& j) {
  SessionSummary s;
  try {
    s.dataset = j.at("dataset").get<std::string>();
    const auto& c = j.at("categories");
    s.categories.non_errors = c.at("non_errors").get<std::int64_t>();
    s.categories.errors = c.at("errors").get<std::int64_t>();
    s.categories.non_agreement = optional_from<std::int64_t>(c, "non_agreement");
    s.categories.correctable = optional_from<std::int64_t>(c, "correctable");
    s.categories.multi_label = optional_from<std::int64_t>(c, "multi_label");
    s.categories.neither = optional_from<std::int64_t>(c, "neither");
    s.guessed = j.at("guessed").get<std::int64_t>();
    s.checked = j.at("checked").get<std::int64_t>();
    s.validated = j.at("validated").get<std::int64_t>();
    s.dataset_size = optional_from<std::int64_t>(j, "dataset_size");
    s.estimated_total = optional_from<std::int64_t>(j, "estimated_total");
    s.percent_error = optional_from<double>(j, "percent_error");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("summary: ") + e.what());
  }
  return s;
}

Json verdicts_document(std::span<const Verdict> verdicts, const SessionSummary& summary,
                       const ValidationPolicy& policy, const Provenance& prov) {
  Json doc = with_header("labelerr.verdicts/1", prov);
  doc["policy"] = {{"workers_per_candidate", policy.workers_per_candidate},
                   {"agreement_threshold", policy.agreement_threshold},
                   {"majority", policy.majority()}};
  Json list = Json::array();
  for (const auto& v : verdicts) {
    list.push_back({{"candidate_id", v.candidate_id},
                    {"is_error", v.is_error},
                    {"category", to_string(v.category)},
                    {"corrected_label", optional_json(v.corrected_label)}});
  }
  doc["verdicts"] = std::move(list);
  doc["summary"] = summary_to_json(summary);
  return doc;
}

std::vector<Verdict> parse_verdicts_document(const Json& doc) {
  expect_schema(doc, "labelerr.verdicts/1");
  std::vector<Verdict> out;
  try {
    for (const auto& v : doc.at("verdicts")) {
      Verdict verdict;
      verdict.candidate_id = v.at("candidate_id").get<std::string>();
      verdict.category = parse_category(v.at("category").get<std::string>());
      verdict.is_error = verdict.category != Category::NonError;
      verdict.corrected_label = optional_from<ClassId>(v, "corrected_label");
      out.push_back(std::move(verdict));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("verdicts document: ") + e.what());
  }
  return out;
}

Json partition_document(const TestPartition& p, const Provenance& prov) {
  Json doc = with_header("labelerr.partition/1", prov);
  auto labeled = [](const std::vector<LabeledId>& v) {
    Json a = Json::array();
    for (const auto& e : v) a.push_back({{"id", e.id}, {"label", e.label}});
    return a;
  };
  doc["benign"] = labeled(p.benign);
  Json c = Json::array();
  for (const auto& e : p.correctable) {
    c.push_back({{"id", e.id}, {"label", e.label}, {"corrected_label", e.corrected_label}});
  }
  doc["correctable"] = std::move(c);
  doc["unknown"] = labeled(p.unknown);
  return doc;
}

TestPartition parse_partition_document(const Json& doc) {
  expect_schema(doc, "labelerr.partition/1");
  TestPartition p;
  try {
    for (const auto& e : doc.at("benign")) p.benign.push_back({e.at("id").get<std::string>(), e.at("label").get<ClassId>()});
    for (const auto& e : doc.at("correctable")) {
      p.correctable.push_back({e.at("id").get<std::string>(), e.at("label").get<ClassId>(),
                               e.at("corrected_label").get<ClassId>()});
    }
    for (const auto& e : doc.at("unknown")) p.unknown.push_back({e.at("id").get<std::string>(), e.at("label").get<ClassId>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("partition document: ") + e.what());
  }
  p.validate();
  return p;
}

namespace {

Json ranking_json(const Ranking& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"model_id", e.model_id}, {"score", e.score}, {"rank", e.rank}, {"dense_rank", e.dense_rank}});
  }
  return Json{{"entries", entries}, {"ties", r.ties}};
}

}  // namespace

Json report_document(const StabilityReport& r, const Provenance& prov) {
  Json doc = with_header("labelerr.stability/1", prov);
  doc["top_k"] = r.top_k;
  doc["agreement_threshold"] = optional_json(r.agreement_threshold);
  doc["sizes"] = {{"benign", r.benign_size},
                  {"correctable", r.correctable_size},
                  {"unknown", r.unknown_size},
                  {"pruned", r.benign_size + r.correctable_size}};
  doc["baseline_prevalence"] = r.baseline_prevalence;
  Json models = Json::array();
  for (const auto& m : r.models) {
    models.push_back({{"model_id", m.model_id},
                      {"original_accuracy", m.original_accuracy},
                      {"corrected_accuracy", m.corrected_accuracy},
                      {"benign_accuracy", optional_json(m.benign_accuracy)},
                      {"correctable_original_accuracy", optional_json(m.correctable_original_accuracy)},
                      {"correctable_corrected_accuracy", optional_json(m.correctable_corrected_accuracy)}});
  }
  doc["models"] = std::move(models);
  doc["rankings"] = {{"correctable_original", ranking_json(r.original_ranking)},
                     {"correctable_corrected", ranking_json(r.corrected_ranking)},
                     {"pruned_original", ranking_json(r.pruned_original_ranking)},
                     {"pruned_corrected", ranking_json(r.pruned_corrected_ranking)}};
  Json sweep = Json::array();
  for (const auto& pt : r.sweep) {
    sweep.push_back({{"removed_fraction", pt.removed_fraction},
                     {"prevalence", pt.prevalence},
                     {"original", pt.original},
                     {"corrected", pt.corrected},
                     {"original_rank", pt.original_rank},
                     {"corrected_rank", pt.corrected_rank}});
  }
  doc["sweep"] = std::move(sweep);
  Json crossovers = Json::array();
  for (const auto& rec : r.crossovers) {
    crossovers.push_back({{"kind", rec.kind},
                          {"model_a", rec.crossover.model_a},
                          {"model_b", rec.crossover.model_b},
                          {"prevalence", rec.crossover.prevalence},
                          {"leader_below", rec.crossover.leader_below},
                          {"leader_above", rec.crossover.leader_above}});
  }
  doc["crossovers"] = std::move(crossovers);
  return doc;
}

namespace {

Ranking ranking_from(const Json& j) {
  Ranking r;
  for (const auto& e : j.at("entries")) {
    r.entries.push_back({e.at("model_id").get<std::string>(), e.at("score").get<double>(), e.at("rank").get<int>(),
                         e.at("dense_rank").get<int>()});
  }
  r.ties = j.at("ties").get<std::vector<std::vector<std::string>>>();
  return r;
}

}  // namespace

StabilityReport parse_report_document(const Json& doc) {
  expect_schema(doc, "labelerr.stability/1");
  StabilityReport r;
  try {
    r.top_k = doc.at("top_k").get<int>();
    r.agreement_threshold = optional_from<int>(doc, "agreement_threshold");
    const auto& sizes = doc.at("sizes");
    r.benign_size = sizes.at("benign").get<std::size_t>();
    r.correctable_size = sizes.at("correctable").get<std::size_t>();
    r.unknown_size = sizes.at("unknown").get<std::size_t>();
    r.baseline_prevalence = doc.at("baseline_prevalence").get<double>();
    for (const auto& m : doc.at("models")) {
      ModelEval ev;
      ev.model_id = m.at("model_id").get<std::string>();
      ev.original_accuracy = m.at("original_accuracy").get<double>();
      ev.corrected_accuracy = m.at("corrected_accuracy").get<double>();
      ev.benign_accuracy = optional_from<double>(m, "benign_accuracy");
      ev.correctable_original_accuracy = optional_from<double>(m, "correctable_original_accuracy");
      ev.correctable_corrected_accuracy = optional_from<double>(m, "correctable_corrected_accuracy");
      r.models.push_back(std::move(ev));
    }
    const auto& rankings = doc.at("rankings");
    r.original_ranking = ranking_from(rankings.at("correctable_original"));
    r.corrected_ranking = ranking_from(rankings.at("correctable_corrected"));
    r.pruned_original_ranking = ranking_from(rankings.at("pruned_original"));
    r.pruned_corrected_ranking = ranking_from(rankings.at("pruned_corrected"));
    for (const auto& pt : doc.at("sweep")) {
      SweepPoint s;
      s.removed_fraction = pt.at("removed_fraction").get<double>();
      s.prevalence = pt.at("prevalence").get<double>();
      s.original = pt.at("original").get<std::vector<double>>();
      s.corrected = pt.at("corrected").get<std::vector<double>>();
      s.original_rank = pt.at("original_rank").get<std::vector<int>>();
      s.corrected_rank = pt.at("corrected_rank").get<std::vector<int>>();
      r.sweep.push_back(std::move(s));
    }
    for (const auto& x : doc.at("crossovers")) {
      r.crossovers.push_back({x.at("kind").get<std::string>(),
                              Crossover{x.at("model_a").get<std::string>(), x.at("model_b").get<std::string>(),
                                        x.at("prevalence").get<double>(), x.at("leader_below").get<std::string>(),
                                        x.at("leader_above").get<std::string>()}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("stability report: ") + e.what());
  }
  return r;
}

Json noise_spec_document(const NoiseSpec& spec, const Provenance& prov) {
  Json doc = with_header("labelerr.noise/1", prov);
  const std::size_t m = spec.num_classes();
  doc["classes"] = m;
  doc["dim"] = spec.dim;
  doc["n"] = spec.n;
  doc["seed"] = spec.seed;
  doc["sigma"] = spec.sigma;
  doc["prior"] = spec.prior;
  doc["transition"] = square_matrix(spec.transition, m);
  doc["joint"] = square_matrix(joint_from_transition(spec.prior, spec.transition), m);
  Json means = Json::array();
  for (std::size_t i = 0; i < m; ++i) {
    means.push_back(std::vector<double>(spec.class_means.begin() + static_cast<std::ptrdiff_t>(i * spec.dim),
                                        spec.class_means.begin() + static_cast<std::ptrdiff_t>((i + 1) * spec.dim)));
  }
  doc["class_means"] = std::move(means);
  return doc;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace labelerr
