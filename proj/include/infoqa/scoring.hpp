#pragma once

/**
 * Answer normalization, token-level F1 and report aggregation.
 *
 * Normalization follows the usual extractive-QA recipe: lowercase, strip
 * punctuation, drop the articles {a, an, the}, split on whitespace. F1 uses
 * multiset token overlap. Case folding is ASCII-only; answers produced by
 * the bundled generator are plain ASCII.
 */

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace infoqa::scoring {

std::vector<std::string> normalize_answer(std::string_view s);

/// Multiset-overlap token F1; 1 if both sides normalize to empty, 0 if only
/// one side is empty or nothing overlaps.
double token_f1(std::string_view prediction, std::string_view gold);

/// If the output contains a "FINAL ANSWER:" marker (case-insensitive), the
/// remainder of the last such line; otherwise the last non-empty line.
std::string extract_answer(std::string_view raw_output);

struct ScoredRun {
  std::string method;
  int hops = 0;
  long context_len = 0;
  std::string sample_id;
  std::string prediction;
  std::string gold;
  double f1 = 0.0;
};

struct CellKey {
  std::string method;
  int hops = 0;
  long context_len = 0;
  auto operator<=>(const CellKey&) const = default;
};

/// Mean-F1 aggregates in the benchmark's report layout. Aggregates are plain
/// arithmetic means of their constituent cells; cells with no runs are
/// absent, never zero.
struct ReportTable {
  std::map<CellKey, double> per_cell;
  std::map<CellKey, int> per_cell_count;
  std::map<std::pair<std::string, int>, double> hop_averages;            // (method, hops)
  std::map<std::pair<std::string, long>, double> context_averages_2to4;  // (method, L)
  std::map<std::string, double> overall_average_2to4;                    // method
  std::vector<std::string> methods;                                      // first-seen order
};

ReportTable aggregate(const std::vector<ScoredRun>& runs);

nlohmann::ordered_json report_to_json(const ReportTable& table);

/// CSV mirroring the report layout: one row per (hops, context_len) cell
/// block, one column per method, then the average rows.
std::string report_to_csv(const ReportTable& table);

/// Per-cell observations: header "method,hops,context_len,f1".
std::string observations_csv(const ReportTable& table);

}  // namespace infoqa::scoring
