#pragma once

// Review sessions: hands flagged candidates to human reviewers one at a
// time, records their judgments in an append-only log and reports live
// tallies. A session directory holds `session.json` (written once at
// creation) and `judgments.jsonl`; replaying the log rebuilds the state.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "labelerr/core.hpp"
#include "labelerr/io.hpp"
#include "labelerr/validation.hpp"

namespace labelerr {

inline constexpr std::size_t kGallerySize = 8;

struct SessionRequest {
  RankedCandidates candidates;
  ValidationPolicy policy;
  std::uint64_t presentation_seed = 0;
  DatasetMeta dataset;
  // Training-split example refs per class, sampled into galleries.
  std::map<ClassId, std::vector<std::string>> gallery_pool;
  std::vector<std::string> class_names;  // optional display names
  std::vector<std::string> workers;      // empty: anyone may join
};

struct PresentedOption {
  ClassId label = 0;
  std::string label_name;
  std::vector<std::string> gallery;
};

struct CandidatePresentation {
  std::string candidate_id;
  std::string media_ref;
  PresentedOption option_a;
  PresentedOption option_b;
  bool a_is_given = false;  // never sent to reviewers
};

// Wire form; leaves out which option is the given label.
Json presentation_to_json(const CandidatePresentation& p);

// Whether option (a) shows the given label for this candidate.
bool presentation_bit(std::uint64_t seed, const std::string& candidate_id);

// Canonical choice for an on-screen response "a", "b", "both" or "neither".
Choice decode_response(std::string_view response, bool a_is_given);

struct SessionStatus {
  SessionSummary summary;              // completed candidates only
  std::vector<Verdict> verdicts;       // completed candidates, in candidate order
  std::size_t completed = 0;
  std::size_t total = 0;
  std::size_t judgments = 0;
  std::size_t required_judgments = 0;

  double progress() const { return total == 0 ? 0.0 : static_cast<double>(completed) / static_cast<double>(total); }
};

Json status_to_json(const SessionStatus& s);

class ReviewSession {
 public:
  ReviewSession(std::string id, SessionRequest request);

  const std::string& id() const noexcept { return id_; }
  const SessionRequest& request() const noexcept { return request_; }
  std::size_t required_judgments() const noexcept;

  CandidatePresentation present(std::size_t candidate_index) const;

  std::optional<CandidatePresentation> next_candidate(const std::string& worker_id);
  // Throws unless `j` can be recorded. With `require_assignment` the worker
  // must currently hold the candidate (live submissions); log replay skips it.
  void check(const Judgment& j, bool require_assignment) const;
  void commit(const Judgment& j);
  void apply(const Judgment& j, bool require_assignment);
  const Candidate& candidate(const std::string& candidate_id) const;
  bool a_is_given(const std::string& candidate_id) const;

  SessionStatus status() const;
  const std::vector<Judgment>& log() const noexcept { return log_; }

 private:
  std::size_t index_of(const std::string& candidate_id) const;
  void check_worker(const std::string& worker_id) const;

  std::string id_;
  SessionRequest request_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<Judgment>> judged_;          // per candidate
  std::vector<std::set<std::string>> judged_by_;       // per candidate
  std::vector<std::size_t> pending_;                   // outstanding assignments per candidate
  std::map<std::string, std::size_t> assignment_;      // worker -> candidate index
  std::set<std::string> known_workers_;
  std::vector<Judgment> log_;
};

class ReviewService {
 public:
  // Loads any sessions already stored under `data_dir`.
  explicit ReviewService(std::filesystem::path data_dir);

  std::string create_session(SessionRequest request);
  std::optional<CandidatePresentation> next_candidate(const std::string& session_id,
                                                      const std::string& worker_id);
  // `response` is the on-screen option; stored choices are canonical.
  Judgment submit_judgment(const std::string& session_id, const std::string& worker_id,
                           const std::string& candidate_id, const std::string& response,
                           std::string timestamp = {});
  SessionStatus session_summary(const std::string& session_id) const;
  std::string export_log(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

 private:
  ReviewSession& get(const std::string& session_id);
  const ReviewSession& get(const std::string& session_id) const;

  std::filesystem::path data_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<ReviewSession>> sessions_;
};

SessionRequest session_request_from_json(const Json& j);
Json session_request_to_json(const SessionRequest& r);

}  // namespace labelerr
