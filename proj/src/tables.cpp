#include "labelerr/tables.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace labelerr {
namespace {

using Row = std::vector<std::string>;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pct(const std::optional<double>& v) { return v ? fixed(100.0 * *v, 2) : "-"; }

template <typename T>
std::string opt(const std::optional<T>& v) {
  return v ? std::to_string(*v) : "-";
}

// First column left-aligned, the rest right-aligned.
std::string layout(const std::vector<Row>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string pad(width[c] - r[c].size(), ' ');
      if (c > 0) out += "  ";
      out += c == 0 ? r[c] + pad : pad + r[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
    if (k == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

}  // namespace

std::string render_stability_table(const StabilityReport& report) {
  const std::string k = std::to_string(report.top_k);
  std::vector<Row> rows{{"Model", "Acc@" + k, "cAcc@" + k, "Rank@" + k, "cRank@" + k, "Acc(P)", "cAcc(P)"}};
  const bool has_c = report.correctable_size > 0;
  for (const auto& m : report.models) {
    rows.push_back({m.model_id, pct(m.correctable_original_accuracy), pct(m.correctable_corrected_accuracy),
                    has_c ? std::to_string(report.original_ranking.rank_of(m.model_id)) : "-",
                    has_c ? std::to_string(report.corrected_ranking.rank_of(m.model_id)) : "-",
                    pct(m.original_accuracy), pct(m.corrected_accuracy)});
  }
  std::string out = "benign " + std::to_string(report.benign_size) + ", correctable " +
                    std::to_string(report.correctable_size) + ", unknown " + std::to_string(report.unknown_size) +
                    ", noise prevalence " + fixed(100.0 * report.baseline_prevalence, 2) + "%\n\n";
  out += layout(rows);
  if (!report.crossovers.empty()) {
    out += "\ncrossovers\n";
    std::vector<Row> xr{{"kind", "N*", "leader below", "leader above"}};
    for (const auto& rec : report.crossovers) {
      xr.push_back({rec.kind, fixed(100.0 * rec.crossover.prevalence, 2) + "%", rec.crossover.leader_below,
                    rec.crossover.leader_above});
    }
    out += layout(xr);
  }
  return out;
}

std::string render_error_table(std::span<const SessionSummary> summaries) {
  std::vector<Row> rows{{"Dataset", "Size", "CL guessed", "checked", "validated", "estimated", "% error"}};
  for (const auto& s : summaries) {
    rows.push_back({s.dataset.empty() ? "-" : s.dataset, opt(s.dataset_size), std::to_string(s.guessed),
                    std::to_string(s.checked), std::to_string(s.validated), opt(s.estimated_total),
                    s.percent_error ? fixed(*s.percent_error, 2) : "-"});
  }
  return layout(rows);
}

std::string render_category_table(std::span<const SessionSummary> summaries) {
  std::vector<Row> rows{{"Dataset", "non-errors", "errors", "non-agreement", "correctable", "multi-label", "neither"}};
  for (const auto& s : summaries) {
    const auto& c = s.categories;
    rows.push_back({s.dataset.empty() ? "-" : s.dataset, std::to_string(c.non_errors), std::to_string(c.errors),
                    opt(c.non_agreement), opt(c.correctable), opt(c.multi_label), opt(c.neither)});
  }
  return layout(rows);
}

}  // namespace labelerr
