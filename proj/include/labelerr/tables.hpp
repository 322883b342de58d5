#pragma once

#include <span>
#include <string>

#include "labelerr/stability.hpp"
#include "labelerr/validation.hpp"

namespace labelerr {

// Per-model accuracies and ranks on the correctable set, followed by the
// crossover list.
std::string render_stability_table(const StabilityReport& report);

// Error-rate roll-up (guessed / checked / validated / estimated / % error).
std::string render_error_table(std::span<const SessionSummary> summaries);

// Category breakdown; absent categories print as "-".
std::string render_category_table(std::span<const SessionSummary> summaries);

}  // namespace labelerr
