#include "labelerr/review.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "labelerr/error.hpp"
#include "labelerr/rng.hpp"

namespace labelerr {

bool presentation_bit(std::uint64_t seed, const std::string& candidate_id) {
  return (hash_string(seed, candidate_id) >> 63) != 0;
}

Choice decode_response(std::string_view response, bool a_is_given) {
  if (response == "a") return a_is_given ? Choice::Given : Choice::Alternative;
  if (response == "b") return a_is_given ? Choice::Alternative : Choice::Given;
  if (response == "both") return Choice::Both;
  if (response == "neither") return Choice::Neither;
  throw Error(ErrorKind::MalformedChoice,
              "response must be one of a, b, both, neither; got '" + std::string(response) + "'");
}

namespace {

Json option_json(const char* key, const PresentedOption& o) {
  return Json{{"key", key}, {"label", o.label}, {"label_name", o.label_name}, {"gallery", o.gallery}};
}

std::vector<std::string> sample_gallery(const std::vector<std::string>& pool, std::uint64_t seed) {
  std::vector<std::string> picked = pool;
  Rng rng(seed);
  const std::size_t take = std::min(kGallerySize, picked.size());
  // Partial Fisher-Yates: the first `take` slots become the sample.
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(picked.size() - i));
    std::swap(picked[i], picked[j]);
  }
  picked.resize(take);
  return picked;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Json presentation_to_json(const CandidatePresentation& p) {
  return Json{{"candidate_id", p.candidate_id},
              {"media_ref", p.media_ref},
              {"options", Json::array({option_json("a", p.option_a), option_json("b", p.option_b)})},
              {"responses", Json::array({"a", "b", "both", "neither"})}};
}

Json status_to_json(const SessionStatus& s) {
  Json verdicts = Json::array();
  for (const auto& v : s.verdicts) {
    verdicts.push_back({{"candidate_id", v.candidate_id},
                        {"is_error", v.is_error},
                        {"category", to_string(v.category)},
                        {"corrected_label", v.corrected_label ? Json(*v.corrected_label) : Json(nullptr)}});
  }
  return Json{{"summary", summary_to_json(s.summary)},
              {"verdicts", verdicts},
              {"completed", s.completed},
              {"total", s.total},
              {"judgments", s.judgments},
              {"required_judgments", s.required_judgments},
              {"progress", s.progress()}};
}

ReviewSession::ReviewSession(std::string id, SessionRequest request)
    : id_(std::move(id)), request_(std::move(request)) {
  if (request_.candidates.empty()) throw Error(ErrorKind::EmptyCandidateList, "no candidates to review");
  request_.policy.validate();
  const std::size_t n = request_.candidates.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(request_.candidates[i].id, i).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate candidate '" + request_.candidates[i].id + "'");
    }
  }
  judged_.resize(n);
  judged_by_.resize(n);
  pending_.assign(n, 0);
}

std::size_t ReviewSession::required_judgments() const noexcept {
  return request_.candidates.size() * static_cast<std::size_t>(request_.policy.workers_per_candidate);
}

CandidatePresentation ReviewSession::present(std::size_t i) const {
  const Candidate& c = request_.candidates[i];
  auto option = [&](ClassId label) {
    PresentedOption o;
    o.label = label;
    if (label >= 0 && static_cast<std::size_t>(label) < request_.class_names.size()) {
      o.label_name = request_.class_names[static_cast<std::size_t>(label)];
    } else {
      o.label_name = std::to_string(label);
    }
    if (const auto it = request_.gallery_pool.find(label); it != request_.gallery_pool.end()) {
      const std::uint64_t key = hash_string(request_.presentation_seed, c.id);
      o.gallery = sample_gallery(it->second, mix_seed(key, static_cast<std::uint64_t>(label)));
    }
    return o;
  };
  CandidatePresentation p;
  p.candidate_id = c.id;
  p.media_ref = "/media/" + c.id;
  p.a_is_given = presentation_bit(request_.presentation_seed, c.id);
  const auto given = option(c.given_label);
  const auto predicted = option(c.predicted_label);
  p.option_a = p.a_is_given ? given : predicted;
  p.option_b = p.a_is_given ? predicted : given;
  return p;
}

void ReviewSession::check_worker(const std::string& worker_id) const {
  if (worker_id.empty()) throw Error(ErrorKind::UnknownWorker, "missing worker id");
  const auto& allowed = request_.workers;
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), worker_id) == allowed.end()) {
    throw Error(ErrorKind::UnknownWorker, "worker '" + worker_id + "' is not registered");
  }
}

std::optional<CandidatePresentation> ReviewSession::next_candidate(const std::string& worker_id) {
  check_worker(worker_id);
  known_workers_.insert(worker_id);
  if (const auto it = assignment_.find(worker_id); it != assignment_.end()) return present(it->second);

  const auto w = static_cast<std::size_t>(request_.policy.workers_per_candidate);
  std::optional<std::size_t> best;
  std::size_t best_load = 0;
  // index_ iterates in id order, so the first minimum wins ties.
  for (const auto& [cid, i] : index_) {
    const std::size_t load = judged_[i].size() + pending_[i];
    if (load >= w || judged_by_[i].contains(worker_id)) continue;
    if (!best || load < best_load) {
      best = i;
      best_load = load;
    }
  }
  if (!best) return std::nullopt;
  ++pending_[*best];
  assignment_[worker_id] = *best;
  return present(*best);
}

std::size_t ReviewSession::index_of(const std::string& candidate_id) const {
  const auto it = index_.find(candidate_id);
  if (it == index_.end()) throw Error(ErrorKind::UnknownCandidate, "no candidate '" + candidate_id + "'");
  return it->second;
}

const Candidate& ReviewSession::candidate(const std::string& candidate_id) const {
  return request_.candidates[index_of(candidate_id)];
}

bool ReviewSession::a_is_given(const std::string& candidate_id) const {
  return presentation_bit(request_.presentation_seed, candidate(candidate_id).id);
}

void ReviewSession::check(const Judgment& j, bool require_assignment) const {
  const std::size_t i = index_of(j.candidate_id);
  check_worker(j.worker_id);
  if (judged_by_[i].contains(j.worker_id)) {
    throw Error(ErrorKind::DuplicateJudgment,
                "worker '" + j.worker_id + "' already judged '" + j.candidate_id + "'");
  }
  if (judged_[i].size() >= static_cast<std::size_t>(request_.policy.workers_per_candidate)) {
    throw Error(ErrorKind::WrongJudgmentCount, "candidate '" + j.candidate_id + "' is already complete");
  }
  if (require_assignment) {
    if (!known_workers_.contains(j.worker_id)) {
      throw Error(ErrorKind::UnknownWorker, "worker '" + j.worker_id + "' has not joined this session");
    }
    const auto assigned = assignment_.find(j.worker_id);
    if (assigned == assignment_.end() || assigned->second != i) {
      throw Error(ErrorKind::NotAssigned, "candidate '" + j.candidate_id + "' is not assigned to '" + j.worker_id + "'");
    }
  }
}

void ReviewSession::commit(const Judgment& j) {
  const std::size_t i = index_of(j.candidate_id);
  known_workers_.insert(j.worker_id);
  if (const auto assigned = assignment_.find(j.worker_id);
      assigned != assignment_.end() && assigned->second == i) {
    --pending_[i];
    assignment_.erase(assigned);
  }
  judged_[i].push_back(j);
  judged_by_[i].insert(j.worker_id);
  log_.push_back(j);
}

void ReviewSession::apply(const Judgment& j, bool require_assignment) {
  check(j, require_assignment);
  commit(j);
}

SessionStatus ReviewSession::status() const {
  SessionStatus s;
  s.total = request_.candidates.size();
  s.required_judgments = required_judgments();
  s.judgments = log_.size();
  const auto w = static_cast<std::size_t>(request_.policy.workers_per_candidate);
  for (std::size_t i = 0; i < s.total; ++i) {
    if (judged_[i].size() != w) continue;
    s.verdicts.push_back(aggregate_candidate(judged_[i], request_.policy, request_.candidates[i].predicted_label));
  }
  s.completed = s.verdicts.size();
  DatasetMeta meta = request_.dataset;
  if (!meta.guessed) meta.guessed = static_cast<std::int64_t>(s.total);
  s.summary = summarize_session(s.verdicts, request_.policy, meta);
  return s;
}

Json session_request_to_json(const SessionRequest& r) {
  Json candidates = Json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back({{"id", c.id},
                          {"given_label", c.given_label},
                          {"predicted_label", c.predicted_label},
                          {"normalized_margin", c.margin}});
  }
  Json gallery = Json::object();
  for (const auto& [label, refs] : r.gallery_pool) gallery[std::to_string(label)] = refs;
  Json dataset = {{"name", r.dataset.name},
                  {"size", r.dataset.size ? Json(*r.dataset.size) : Json(nullptr)},
                  {"guessed", r.dataset.guessed ? Json(*r.dataset.guessed) : Json(nullptr)}};
  return Json{{"schema", "labelerr.session/1"},
              {"candidates", candidates},
              {"policy",
               {{"workers_per_candidate", r.policy.workers_per_candidate},
                {"agreement_threshold", r.policy.agreement_threshold}}},
              {"seed", r.presentation_seed},
              {"dataset", dataset},
              {"gallery", gallery},
              {"class_names", r.class_names},
              {"workers", r.workers}};
}

SessionRequest session_request_from_json(const Json& j) {
  SessionRequest r;
  try {
    if (!j.is_object()) throw Error(ErrorKind::Parse, "session request must be an object");
    for (const auto& c : j.at("candidates")) {
      Candidate cand;
      cand.id = c.at("id").get<std::string>();
      cand.given_label = c.at("given_label").get<ClassId>();
      cand.predicted_label = c.at("predicted_label").get<ClassId>();
      cand.margin = c.value("normalized_margin", 0.0);
      r.candidates.push_back(std::move(cand));
    }
    if (j.contains("policy")) {
      const auto& p = j["policy"];
      r.policy.workers_per_candidate = p.value("workers_per_candidate", 5);
      r.policy.agreement_threshold = p.value("agreement_threshold", 3);
    }
    r.presentation_seed = j.value("seed", std::uint64_t{0});
    if (j.contains("dataset") && j["dataset"].is_object()) {
      const auto& d = j["dataset"];
      r.dataset.name = d.value("name", std::string{});
      if (d.contains("size") && !d["size"].is_null()) r.dataset.size = d["size"].get<std::int64_t>();
      if (d.contains("guessed") && !d["guessed"].is_null()) r.dataset.guessed = d["guessed"].get<std::int64_t>();
    }
    if (j.contains("gallery")) {
      for (const auto& [key, refs] : j["gallery"].items()) {
        r.gallery_pool[std::stoi(key)] = refs.get<std::vector<std::string>>();
      }
    }
    if (j.contains("class_names")) r.class_names = j["class_names"].get<std::vector<std::string>>();
    if (j.contains("workers")) r.workers = j["workers"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("session request: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::Parse, "gallery keys must be class indices");
  }
  return r;
}

ReviewService::ReviewService(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(data_dir_, ec);
  if (!std::filesystem::is_directory(data_dir_)) {
    throw Error(ErrorKind::Io, "cannot use data directory '" + data_dir_.string() + "'");
  }
  for (const auto& entry : std::filesystem::directory_iterator(data_dir_)) {
    const auto snapshot = entry.path() / "session.json";
    if (!entry.is_directory() || !std::filesystem::exists(snapshot)) continue;
    const auto id = entry.path().filename().string();
    auto session = std::make_unique<ReviewSession>(id, session_request_from_json(Json::parse(read_file(snapshot))));
    const auto log_path = entry.path() / "judgments.jsonl";
    if (std::filesystem::exists(log_path)) {
      for (const auto& j : parse_judgment_log(read_file(log_path))) session->apply(j, false);
    }
    sessions_.emplace(id, std::move(session));
  }
}

std::string ReviewService::create_session(SessionRequest request) {
  std::lock_guard lock(mutex_);
  char name[32];
  std::snprintf(name, sizeof name, "session-%04zu", sessions_.size() + 1);
  std::string id = name;
  for (std::size_t k = sessions_.size() + 2; sessions_.contains(id); ++k) {
    std::snprintf(name, sizeof name, "session-%04zu", k);
    id = name;
  }
  auto session = std::make_unique<ReviewSession>(id, std::move(request));
  const auto dir = data_dir_ / id;
  write_file(dir / "session.json", dump(session_request_to_json(session->request())));
  write_file(dir / "judgments.jsonl", "");
  sessions_.emplace(id, std::move(session));
  return id;
}

ReviewSession& ReviewService::get(const std::string& session_id) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::UnknownSession, "no session '" + session_id + "'");
  return *it->second;
}

const ReviewSession& ReviewService::get(const std::string& session_id) const {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::UnknownSession, "no session '" + session_id + "'");
  return *it->second;
}

std::optional<CandidatePresentation> ReviewService::next_candidate(const std::string& session_id,
                                                                   const std::string& worker_id) {
  std::lock_guard lock(mutex_);
  return get(session_id).next_candidate(worker_id);
}

Judgment ReviewService::submit_judgment(const std::string& session_id, const std::string& worker_id,
                                        const std::string& candidate_id, const std::string& response,
                                        std::string timestamp) {
  std::lock_guard lock(mutex_);
  auto& session = get(session_id);
  Judgment j;
  j.candidate_id = candidate_id;
  j.worker_id = worker_id;
  j.choice = decode_response(response, session.a_is_given(candidate_id));
  j.timestamp = timestamp.empty() ? utc_now() : std::move(timestamp);

  session.check(j, true);
  {
    std::ofstream out(data_dir_ / session_id / "judgments.jsonl", std::ios::binary | std::ios::app);
    out << judgment_to_json(j).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "failed to append judgment for session '" + session_id + "'");
  }
  session.commit(j);
  return j;
}

SessionStatus ReviewService::session_summary(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return get(session_id).status();
}

std::string ReviewService::export_log(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (const auto& j : get(session_id).log()) out += judgment_to_json(j).dump() + "\n";
  return out;
}

std::vector<std::string> ReviewService::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

}  // namespace labelerr
