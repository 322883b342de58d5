#pragma once

// Multi-rater validation of flagged candidates: per-candidate verdicts and
// dataset-level roll-ups in the shape of the usual error tables.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "labelerr/core.hpp"

namespace labelerr {

// What a reviewer saw in the example, in canonical terms (never the
// on-screen option letter).
enum class Choice { Given, Alternative, Both, Neither };

enum class Category { NonError, Correctable, MultiLabel, Neither, NonAgreement };

std::string_view to_string(Choice c);
std::string_view to_string(Category c);
Choice parse_choice(std::string_view text);  // throws MalformedChoice
Category parse_category(std::string_view text);

struct Judgment {
  std::string candidate_id;
  std::string worker_id;
  Choice choice = Choice::Given;
  std::string timestamp;
};

struct Verdict {
  std::string candidate_id;
  bool is_error = false;
  Category category = Category::NonError;
  std::optional<ClassId> corrected_label;
};

struct ValidationPolicy {
  int workers_per_candidate = 5;
  int agreement_threshold = 3;

  // ceil((w + 1) / 2)
  int majority() const noexcept { return (workers_per_candidate + 2) / 2; }
  void validate() const;  // throws InvalidPolicy
};

// Category for one complete set of choices. Only explicit Given votes count
// toward the non-error tally.
Category categorize(std::span<const Choice> choices, const ValidationPolicy& policy);

// Requires exactly w judgments from distinct workers on the same candidate.
// `predicted_label` is the candidate's model-predicted class, which becomes
// the corrected label when the verdict is Correctable.
Verdict aggregate_candidate(std::span<const Judgment> judgments, const ValidationPolicy& policy,
                            ClassId predicted_label);

// round(validated / checked * guessed), half away from zero, exact.
std::int64_t estimate_total_errors(std::int64_t validated, std::int64_t checked, std::int64_t guessed);

// 100 * errors / dataset_size rounded to two decimals (half away from zero).
double percent_error(std::int64_t errors, std::int64_t dataset_size);

struct CategoryCounts {
  std::int64_t non_errors = 0;
  std::int64_t errors = 0;
  // Absent when a source does not break errors down by category.
  std::optional<std::int64_t> non_agreement = 0;
  std::optional<std::int64_t> correctable = 0;
  std::optional<std::int64_t> multi_label = 0;
  std::optional<std::int64_t> neither = 0;
};

struct DatasetMeta {
  std::string name;
  std::optional<std::int64_t> size;     // full test-set size
  std::optional<std::int64_t> guessed;  // candidates flagged; defaults to checked
};

struct SessionSummary {
  std::string dataset;
  CategoryCounts categories;
  std::int64_t guessed = 0;
  std::int64_t checked = 0;
  std::int64_t validated = 0;
  std::optional<std::int64_t> dataset_size;
  std::optional<std::int64_t> estimated_total;  // only when checked < guessed
  std::optional<double> percent_error;          // needs dataset_size
};

SessionSummary summarize_session(std::span<const Verdict> verdicts, const ValidationPolicy& policy,
                                 const DatasetMeta& meta);

}  // namespace labelerr
