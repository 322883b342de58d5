// labelerr: find, validate and weigh label errors in classification test sets.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "labelerr/core.hpp"
#include "labelerr/error.hpp"
#include "labelerr/io.hpp"
#include "labelerr/probs.hpp"
#include "labelerr/review.hpp"
#include "labelerr/review_http.hpp"
#include "labelerr/stability.hpp"
#include "labelerr/synth.hpp"
#include "labelerr/tables.hpp"
#include "labelerr/validation.hpp"

namespace fs = std::filesystem;
using namespace labelerr;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;
constexpr const char* kDataDirEnv = "LABELERR_DATA_DIR";

std::string default_data_dir() {
  const char* env = std::getenv(kDataDirEnv);
  return env && *env ? env : ".";
}

// Reads an input and records its hash under its file name.
std::string load(const std::string& path, Provenance& prov) {
  auto text = read_file(path);
  add_input(prov, fs::path(path).filename().string(), text);
  return text;
}

void refuse_overwrite(const std::string& out, std::initializer_list<std::string> inputs) {
  std::error_code ec;
  const auto target = fs::weakly_canonical(out, ec);
  for (const auto& in : inputs) {
    if (in.empty()) continue;
    if (fs::weakly_canonical(in, ec) == target) {
      throw Error(ErrorKind::InvalidArgument, "output '" + out + "' would overwrite input '" + in + "'");
    }
  }
}

std::size_t class_count(const LabelTable& labels, std::optional<std::size_t> declared) {
  const auto seen = static_cast<std::size_t>(labels.max_label() + 1);
  if (declared) {
    if (*declared < seen) throw Error(ErrorKind::InvalidArgument, "labels exceed --classes");
    return *declared;
  }
  return std::max<std::size_t>(seen, 2);
}

struct SynthArgs {
  std::size_t classes = 4;
  std::size_t n = 5000;
  std::size_t dim = 2;
  double trace = 0.8;
  double separation = 4.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_synth(const SynthArgs& a) {
  const auto spec = make_uniform_noise_spec(a.classes, a.dim, a.n, a.trace, a.separation, a.sigma, a.seed);
  const auto data = sample_noisy_dataset(spec);
  const fs::path dir = a.out_dir.empty() ? fs::path(default_data_dir()) : fs::path(a.out_dir);
  const Provenance none;
  const auto comment = provenance_comment(none);
  write_file(dir / "features.csv", format_features(data.data, comment));
  write_file(dir / "labels.csv", format_labels(LabelTable{data.data.ids, data.data.labels.labels()}, comment));
  write_file(dir / "truth.csv", format_truth(data, comment));
  write_file(dir / "noise.json", dump(noise_spec_document(spec, none)));
  std::size_t flips = 0;
  for (bool f : data.flip_mask) flips += f ? 1 : 0;
  std::cout << "wrote " << a.n << " examples (" << flips << " flipped labels) to " << dir.string() << "\n";
  return 0;
}

struct ProbsArgs {
  std::string features, labels, out, preds_out, model_id = "logit";
  std::optional<std::size_t> classes;
  int topk = 5;
  CvConfig cv;
};

int run_probs(const ProbsArgs& a) {
  refuse_overwrite(a.out, {a.features, a.labels});
  if (!a.preds_out.empty()) refuse_overwrite(a.preds_out, {a.features, a.labels});
  Provenance prov;
  const auto labels = parse_labels(load(a.labels, prov));
  const auto features = parse_features(load(a.features, prov));
  const auto data = join_features(features, labels, class_count(labels, a.classes));
  const auto probs = out_of_sample_probs(data, a.cv);
  const auto comment = provenance_comment(prov);
  write_file(a.out, format_probs(data.ids, probs, comment));
  if (!a.preds_out.empty()) {
    write_file(a.preds_out, format_predictions(a.model_id, data.ids, probs, a.topk, comment));
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.rows(); ++i) correct += probs.argmax(i) == data.labels[i] ? 1 : 0;
  std::cout << "cross-validated accuracy vs given labels: "
            << static_cast<double>(correct) / static_cast<double>(probs.rows()) << "\n";
  return 0;
}

struct DetectArgs {
  std::string labels, probs, out, truth;
};

int run_detect(const DetectArgs& a) {
  refuse_overwrite(a.out, {a.labels, a.probs, a.truth});
  Provenance prov;
  const auto table = parse_labels(load(a.labels, prov));
  const auto probs = ingest_probs(load(a.probs, prov), table.ids);
  if (static_cast<std::size_t>(table.max_label()) >= probs.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "labels exceed the probability columns");
  }
  const NoisyLabels labels(table.labels, probs.cols());
  const auto est = estimate_joint(probs, labels);
  const auto candidates = flag_candidates(probs, labels, est.calibrated, table.ids);
  write_file(a.out, dump(candidates_document(est, candidates, probs.rows(), prov)));
  std::cout << "estimated noise rate " << est.calibrated.rho << ", flagged " << candidates.size() << " of "
            << probs.rows() << " examples\n";

  if (!a.truth.empty()) {
    Provenance ignored;
    const auto truth = parse_truth(load(a.truth, ignored));
    SyntheticDataset synthetic;
    synthetic.data.ids = truth.ids;
    synthetic.true_labels = truth.true_labels;
    synthetic.flip_mask = truth.flipped;
    const auto score = evaluate_detection(candidates, synthetic);
    std::cout << "precision " << (score.precision ? std::to_string(*score.precision) : "n/a") << ", recall "
              << (score.recall ? std::to_string(*score.recall) : "n/a") << "\n";
  }
  return 0;
}

struct AggregateArgs {
  std::string candidates, judgments, labels, out, partition_out, dataset_name;
  std::optional<std::int64_t> dataset_size, guessed;
  ValidationPolicy policy;
};

int run_aggregate(const AggregateArgs& a) {
  refuse_overwrite(a.out, {a.candidates, a.judgments, a.labels});
  if (!a.partition_out.empty()) refuse_overwrite(a.partition_out, {a.candidates, a.judgments, a.labels});
  a.policy.validate();
  Provenance prov;
  const auto candidates = parse_candidates_document(Json::parse(load(a.candidates, prov)));
  const auto judgments = parse_judgment_log(load(a.judgments, prov));

  std::map<std::string, std::vector<Judgment>> by_candidate;
  for (const auto& j : judgments) by_candidate[j.candidate_id].push_back(j);
  std::vector<Verdict> verdicts;
  verdicts.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto it = by_candidate.find(c.id);
    if (it == by_candidate.end()) {
      throw Error(ErrorKind::WrongJudgmentCount, "no judgments for candidate '" + c.id + "'");
    }
    verdicts.push_back(aggregate_candidate(it->second, a.policy, c.predicted_label));
    by_candidate.erase(it);
  }
  if (!by_candidate.empty()) {
    throw Error(ErrorKind::UnknownCandidate, "judgments for unknown candidate '" + by_candidate.begin()->first + "'");
  }

  std::optional<LabelTable> labels;
  if (!a.labels.empty()) labels = parse_labels(load(a.labels, prov));
  DatasetMeta meta{a.dataset_name, a.dataset_size, a.guessed};
  if (!meta.size && labels) meta.size = static_cast<std::int64_t>(labels->ids.size());
  const auto summary = summarize_session(verdicts, a.policy, meta);
  write_file(a.out, dump(verdicts_document(verdicts, summary, a.policy, prov)));

  if (!a.partition_out.empty()) {
    if (!labels) throw Error(ErrorKind::InvalidArgument, "--partition-out needs --labels");
    std::size_t m = 2;
    for (const auto& c : candidates) m = std::max<std::size_t>(m, static_cast<std::size_t>(std::max(c.given_label, c.predicted_label)) + 1);
    m = std::max(m, static_cast<std::size_t>(labels->max_label() + 1));
    const auto partition = build_partition(labels->ids, NoisyLabels(labels->labels, m), candidates, verdicts);
    write_file(a.partition_out, dump(partition_document(partition, prov)));
  }
  const std::array<SessionSummary, 1> rows{summary};
  std::cout << render_category_table(rows);
  return 0;
}

struct AnalyzeArgs {
  std::string partition, preds, out, table;
  std::size_t grid = 101;
  int topk = 1;
  std::optional<int> threshold;
  int workers = 5;
};

int run_analyze(const AnalyzeArgs& a) {
  refuse_overwrite(a.out, {a.partition, a.preds});
  Provenance prov;
  const auto partition = parse_partition_document(Json::parse(load(a.partition, prov)));
  const auto preds = parse_predictions(load(a.preds, prov));
  std::optional<ValidationPolicy> policy;
  if (a.threshold) policy = ValidationPolicy{a.workers, *a.threshold};
  const auto report = build_report(partition, preds, policy, a.grid, a.topk);
  write_file(a.out, dump(report_document(report, prov)));
  const auto text = render_stability_table(report);
  if (!a.table.empty()) {
    refuse_overwrite(a.table, {a.partition, a.preds});
    write_file(a.table, text);
  }
  std::cout << text;
  return 0;
}

struct ReportArgs {
  std::string input, out;
};

int run_report(const ReportArgs& a) {
  if (!a.out.empty()) refuse_overwrite(a.out, {a.input});
  const auto doc = Json::parse(read_file(a.input), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("schema")) {
    throw Error(ErrorKind::Parse, "'" + a.input + "' is not a labelerr document");
  }
  const auto schema = doc["schema"].get<std::string>();
  std::string text;
  if (schema == "labelerr.stability/1") {
    text = render_stability_table(parse_report_document(doc));
  } else if (schema == "labelerr.verdicts/1") {
    const std::array<SessionSummary, 1> rows{summary_from_json(doc.at("summary"))};
    text = render_error_table(rows) + "\n" + render_category_table(rows);
  } else if (schema == "labelerr.candidates/1") {
    const auto candidates = parse_candidates_document(doc);
    text = "examples " + doc.at("examples").dump() + ", classes " + doc.at("classes").dump() + ", noise rate " +
           doc.at("calibrated_joint").at("rho").dump() + ", flagged " + std::to_string(candidates.size()) + "\n\n";
    text += "rank  id  given  predicted  margin\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      text += std::to_string(i + 1) + "  " + c.id + "  " + std::to_string(c.given_label) + "  " +
              std::to_string(c.predicted_label) + "  " + format_double(c.margin) + "\n";
    }
  } else {
    throw Error(ErrorKind::Parse, "no text rendering for schema '" + schema + "'");
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file(a.out, text);
  }
  return 0;
}

struct ServeArgs {
  std::string data_dir, host = "127.0.0.1", media_dir;
  int port = 8080;
};

httplib::Server* g_server = nullptr;

int run_serve(const ServeArgs& a) {
  ReviewService service(a.data_dir.empty() ? default_data_dir() : a.data_dir);
  httplib::Server server;
  std::optional<fs::path> media;
  if (!a.media_dir.empty()) media = a.media_dir;
  mount_review_routes(server, service, media);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cout << "review service on http://" << a.host << ":" << a.port << "\n" << std::flush;
  if (!server.listen(a.host, a.port)) throw Error(ErrorKind::Io, "cannot listen on " + a.host + ":" + std::to_string(a.port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labelerr: label-error detection, validation and benchmark stability analysis"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a dataset with known class-conditional label noise");
  synth_cmd->add_option("--classes", synth.classes, "Number of classes")->check(CLI::Range(2, 1000));
  synth_cmd->add_option("--n", synth.n, "Number of examples")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--trace", synth.trace, "Probability a label is kept (diagonal of the transition)")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--separation", synth.separation, "Distance between neighbouring class means, in sigmas");
  synth_cmd->add_option("--sigma", synth.sigma, "Feature noise standard deviation")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory (default $LABELERR_DATA_DIR or .)");

  ProbsArgs probs;
  auto* probs_cmd = app.add_subcommand("probs", "Cross-validated out-of-sample predicted probabilities");
  probs_cmd->add_option("--features", probs.features, "Features file (id,f0,...)")->required();
  probs_cmd->add_option("--labels", probs.labels, "Labels file (id,label)")->required();
  probs_cmd->add_option("--out", probs.out, "Probabilities output (id,p0,...)")->required();
  probs_cmd->add_option("--classes", probs.classes, "Number of classes (default: max label + 1)");
  probs_cmd->add_option("--folds", probs.cv.folds, "Cross-validation folds")->check(CLI::Range(2, 1 << 30));
  probs_cmd->add_option("--seed", probs.cv.seed, "Fold shuffle seed");
  probs_cmd->add_option("--l2", probs.cv.l2, "L2 penalty on weights")->check(CLI::NonNegativeNumber);
  probs_cmd->add_option("--lr", probs.cv.learning_rate, "Gradient descent step size")->check(CLI::PositiveNumber);
  probs_cmd->add_option("--max-iters", probs.cv.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  probs_cmd->add_option("--grad-tol", probs.cv.grad_tol, "Gradient-norm stopping tolerance")->check(CLI::PositiveNumber);
  probs_cmd->add_option("--preds-out", probs.preds_out, "Also write ranked predictions (model,id,top1,...)");
  probs_cmd->add_option("--model-id", probs.model_id, "Model id for --preds-out");
  probs_cmd->add_option("--topk", probs.topk, "Ranked predictions per example in --preds-out")->check(CLI::PositiveNumber);

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Estimate the noise joint and rank likely label errors");
  detect_cmd->add_option("--labels", detect.labels, "Labels file (id,label)")->required();
  detect_cmd->add_option("--probs", detect.probs, "Out-of-sample probabilities (id,p0,...)")->required();
  detect_cmd->add_option("--out", detect.out, "Candidates document")->required();
  detect_cmd->add_option("--truth", detect.truth, "Synthetic truth file; prints precision and recall");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the review service");
  serve_cmd->add_option("--data-dir", serve.data_dir, "Session storage (default $LABELERR_DATA_DIR or .)");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--media-dir", serve.media_dir, "Directory served under /media");

  AggregateArgs aggregate;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Turn reviewer judgments into verdicts");
  aggregate_cmd->add_option("--candidates", aggregate.candidates, "Candidates document")->required();
  aggregate_cmd->add_option("--judgments", aggregate.judgments, "Judgment log (one JSON record per line)")->required();
  aggregate_cmd->add_option("--out", aggregate.out, "Verdicts document")->required();
  aggregate_cmd->add_option("--labels", aggregate.labels, "Full test-set labels (needed for --partition-out)");
  aggregate_cmd->add_option("--partition-out", aggregate.partition_out, "Write the benign/correctable/unknown partition");
  aggregate_cmd->add_option("--workers", aggregate.policy.workers_per_candidate, "Judgments per candidate");
  aggregate_cmd->add_option("--threshold", aggregate.policy.agreement_threshold,
                            "Given-label votes needed to call a candidate a non-error");
  aggregate_cmd->add_option("--dataset-name", aggregate.dataset_name, "Dataset name for the summary");
  aggregate_cmd->add_option("--dataset-size", aggregate.dataset_size, "Test-set size (default: label count)");
  aggregate_cmd->add_option("--guessed", aggregate.guessed, "Flagged-candidate total when only a sample was checked");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Original vs corrected accuracy, prevalence sweep, crossovers");
  analyze_cmd->add_option("--partition", analyze.partition, "Partition document")->required();
  analyze_cmd->add_option("--preds", analyze.preds, "Ranked predictions (model,id,top1,...)")->required();
  analyze_cmd->add_option("--out", analyze.out, "Stability report document")->required();
  analyze_cmd->add_option("--grid", analyze.grid, "Sweep grid points")->check(CLI::Range(2, 1000000));
  analyze_cmd->add_option("--topk", analyze.topk, "k for top-k accuracy")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--threshold", analyze.threshold, "Agreement threshold used (recorded in the report)");
  analyze_cmd->add_option("--workers", analyze.workers, "Judgments per candidate used (recorded with --threshold)");
  analyze_cmd->add_option("--table", analyze.table, "Also write the plain-text table here");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render a document as plain-text tables");
  report_cmd->add_option("--input", report.input, "Candidates, verdicts or stability document")->required();
  report_cmd->add_option("--out", report.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*probs_cmd) return run_probs(probs);
    if (*detect_cmd) return run_detect(detect);
    if (*serve_cmd) return run_serve(serve);
    if (*aggregate_cmd) return run_aggregate(aggregate);
    if (*analyze_cmd) return run_analyze(analyze);
    if (*report_cmd) return run_report(report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io ? kExitIo : kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed document: " << e.what() << "\n";
    return kExitValidation;
  }
  std::cerr << app.help();
  return kExitUsage;
}
