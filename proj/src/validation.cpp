#include "labelerr/validation.hpp"

#include <array>
#include <set>

#include "labelerr/error.hpp"

namespace labelerr {

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::Given: return "GIVEN";
    case Choice::Alternative: return "ALTERNATIVE";
    case Choice::Both: return "BOTH";
    case Choice::Neither: return "NEITHER";
  }
  return "?";
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::NonError: return "NON_ERROR";
    case Category::Correctable: return "CORRECTABLE";
    case Category::MultiLabel: return "MULTI_LABEL";
    case Category::Neither: return "NEITHER";
    case Category::NonAgreement: return "NON_AGREEMENT";
  }
  return "?";
}

Choice parse_choice(std::string_view text) {
  for (auto c : {Choice::Given, Choice::Alternative, Choice::Both, Choice::Neither}) {
    if (text == to_string(c)) return c;
  }
  throw Error(ErrorKind::MalformedChoice, "unknown choice '" + std::string(text) + "'");
}

Category parse_category(std::string_view text) {
  for (auto c : {Category::NonError, Category::Correctable, Category::MultiLabel, Category::Neither,
                 Category::NonAgreement}) {
    if (text == to_string(c)) return c;
  }
  throw Error(ErrorKind::Parse, "unknown category '" + std::string(text) + "'");
}

void ValidationPolicy::validate() const {
  if (workers_per_candidate < 1) throw Error(ErrorKind::InvalidPolicy, "need at least one worker");
  if (agreement_threshold < 1 || agreement_threshold > workers_per_candidate) {
    throw Error(ErrorKind::InvalidPolicy, "agreement threshold " + std::to_string(agreement_threshold) +
                                              " outside [1, " + std::to_string(workers_per_candidate) + "]");
  }
}

Category categorize(std::span<const Choice> choices, const ValidationPolicy& policy) {
  std::array<int, 4> tally{};
  for (Choice c : choices) ++tally[static_cast<std::size_t>(c)];
  if (tally[static_cast<std::size_t>(Choice::Given)] >= policy.agreement_threshold) {
    return Category::NonError;
  }
  const int majority = policy.majority();
  if (tally[static_cast<std::size_t>(Choice::Alternative)] >= majority) return Category::Correctable;
  if (tally[static_cast<std::size_t>(Choice::Both)] >= majority) return Category::MultiLabel;
  if (tally[static_cast<std::size_t>(Choice::Neither)] >= majority) return Category::Neither;
  return Category::NonAgreement;
}

Verdict aggregate_candidate(std::span<const Judgment> judgments, const ValidationPolicy& policy,
                            ClassId predicted_label) {
  policy.validate();
  if (judgments.size() != static_cast<std::size_t>(policy.workers_per_candidate)) {
    throw Error(ErrorKind::WrongJudgmentCount,
                "expected " + std::to_string(policy.workers_per_candidate) + " judgments, got " +
                    std::to_string(judgments.size()));
  }
  const std::string& id = judgments.front().candidate_id;
  std::set<std::string_view> workers;
  std::vector<Choice> choices;
  choices.reserve(judgments.size());
  for (const auto& j : judgments) {
    if (j.candidate_id != id) {
      throw Error(ErrorKind::InvalidArgument, "judgments span several candidates");
    }
    if (!workers.insert(j.worker_id).second) {
      throw Error(ErrorKind::DuplicateJudgment, "worker '" + j.worker_id + "' judged '" + id + "' twice");
    }
    choices.push_back(j.choice);
  }
  Verdict v;
  v.candidate_id = id;
  v.category = categorize(choices, policy);
  v.is_error = v.category != Category::NonError;
  if (v.category == Category::Correctable) v.corrected_label = predicted_label;
  return v;
}

namespace {

// round(num / den) for num >= 0, den > 0, halves away from zero.
std::int64_t rounded_ratio(__int128 num, __int128 den) {
  return static_cast<std::int64_t>((2 * num + den) / (2 * den));
}

}  // namespace

std::int64_t estimate_total_errors(std::int64_t validated, std::int64_t checked, std::int64_t guessed) {
  if (checked < 1 || validated < 0 || validated > checked || guessed < 0) {
    throw Error(ErrorKind::InvalidArgument, "need checked >= 1 and 0 <= validated <= checked");
  }
  return rounded_ratio(static_cast<__int128>(validated) * guessed, checked);
}

double percent_error(std::int64_t errors, std::int64_t dataset_size) {
  if (dataset_size < 1 || errors < 0) throw Error(ErrorKind::InvalidArgument, "need dataset_size >= 1");
  const std::int64_t hundredths = rounded_ratio(static_cast<__int128>(errors) * 10000, dataset_size);
  return static_cast<double>(hundredths) / 100.0;
}

SessionSummary summarize_session(std::span<const Verdict> verdicts, const ValidationPolicy& policy,
                                 const DatasetMeta& meta) {
  policy.validate();
  SessionSummary s;
  s.dataset = meta.name;
  auto& c = s.categories;
  for (const auto& v : verdicts) {
    switch (v.category) {
      case Category::NonError: ++c.non_errors; break;
      case Category::Correctable: ++*c.correctable; break;
      case Category::MultiLabel: ++*c.multi_label; break;
      case Category::Neither: ++*c.neither; break;
      case Category::NonAgreement: ++*c.non_agreement; break;
    }
  }
  c.errors = static_cast<std::int64_t>(verdicts.size()) - c.non_errors;
  s.checked = static_cast<std::int64_t>(verdicts.size());
  s.validated = c.errors;
  s.guessed = meta.guessed.value_or(s.checked);
  s.dataset_size = meta.size;
  if (s.checked >= 1 && s.checked < s.guessed) {
    s.estimated_total = estimate_total_errors(s.validated, s.checked, s.guessed);
  }
  if (meta.size) s.percent_error = percent_error(s.estimated_total.value_or(s.validated), *meta.size);
  return s;
}

}  // namespace labelerr
