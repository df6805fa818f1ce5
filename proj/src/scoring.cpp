#include "infoqa/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace infoqa::scoring {

namespace {

bool is_article(const std::string& w) { return w == "a" || w == "an" || w == "the"; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Case-insensitive search for `needle` in `hay`; npos when absent.
std::size_t ifind(std::string_view hay, std::string_view needle) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        hit = false;
        break;
      }
    }
    if (hit) return i;
  }
  return std::string_view::npos;
}

std::string fmt_mean(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::vector<std::string> normalize_answer(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> tokens;
  std::string word;
  for (char c : cleaned + " ") {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!word.empty() && !is_article(word)) tokens.push_back(word);
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  return tokens;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto p = normalize_answer(prediction);
  const auto g = normalize_answer(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;

  std::unordered_map<std::string, int> gold_counts;
  for (const auto& t : g) ++gold_counts[t];
  int overlap = 0;
  for (const auto& t : p) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::string extract_answer(std::string_view raw_output) {
  constexpr std::string_view kMarker = "FINAL ANSWER:";
  std::string last_marker_line;
  std::string last_nonempty;
  bool saw_marker = false;

  std::size_t pos = 0;
  while (pos <= raw_output.size()) {
    std::size_t eol = raw_output.find('\n', pos);
    std::string_view line = raw_output.substr(pos, eol == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : eol - pos);
    const std::size_t m = ifind(line, kMarker);
    if (m != std::string_view::npos) {
      saw_marker = true;
      last_marker_line = std::string(trim(line.substr(m + kMarker.size())));
    }
    if (!trim(line).empty()) last_nonempty = std::string(trim(line));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return saw_marker ? last_marker_line : last_nonempty;
}

ReportTable aggregate(const std::vector<ScoredRun>& runs) {
  ReportTable table;
  std::map<CellKey, std::pair<double, int>> sums;
  for (const auto& run : runs) {
    CellKey key{run.method, run.hops, run.context_len};
    auto& [sum, n] = sums[key];
    sum += run.f1;
    ++n;
    if (std::find(table.methods.begin(), table.methods.end(), run.method) ==
        table.methods.end()) {
      table.methods.push_back(run.method);
    }
  }
  for (const auto& [key, sn] : sums) {
    table.per_cell[key] = sn.first / sn.second;
    table.per_cell_count[key] = sn.second;
  }

  // Aggregates are means of cell means.
  std::map<std::pair<std::string, int>, std::pair<double, int>> hop_acc;
  std::map<std::pair<std::string, long>, std::pair<double, int>> ctx_acc;
  std::map<std::string, std::pair<double, int>> overall_acc;
  for (const auto& [key, mean] : table.per_cell) {
    auto& h = hop_acc[{key.method, key.hops}];
    h.first += mean;
    ++h.second;
    if (key.hops >= 2 && key.hops <= 4) {
      auto& c = ctx_acc[{key.method, key.context_len}];
      c.first += mean;
      ++c.second;
      auto& o = overall_acc[key.method];
      o.first += mean;
      ++o.second;
    }
  }
  for (const auto& [k, sn] : hop_acc) table.hop_averages[k] = sn.first / sn.second;
  for (const auto& [k, sn] : ctx_acc) table.context_averages_2to4[k] = sn.first / sn.second;
  for (const auto& [k, sn] : overall_acc) table.overall_average_2to4[k] = sn.first / sn.second;
  return table;
}

nlohmann::ordered_json report_to_json(const ReportTable& table) {
  nlohmann::ordered_json j;
  j["methods"] = table.methods;
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const auto& [key, mean] : table.per_cell) {
    cells.push_back({{"method", key.method},
                     {"hops", key.hops},
                     {"context_len", key.context_len},
                     {"mean_f1", mean},
                     {"n", table.per_cell_count.at(key)}});
  }
  auto& hops = j["hop_averages"] = nlohmann::ordered_json::array();
  for (const auto& [key, mean] : table.hop_averages) {
    hops.push_back({{"method", key.first}, {"hops", key.second}, {"mean_f1", mean}});
  }
  auto& ctx = j["context_averages_2to4"] = nlohmann::ordered_json::array();
  for (const auto& [key, mean] : table.context_averages_2to4) {
    ctx.push_back({{"method", key.first}, {"context_len", key.second}, {"mean_f1", mean}});
  }
  auto& overall = j["overall_average_2to4"] = nlohmann::ordered_json::array();
  for (const auto& [method, mean] : table.overall_average_2to4) {
    overall.push_back({{"method", method}, {"mean_f1", mean}});
  }
  return j;
}

std::string report_to_csv(const ReportTable& table) {
  std::string out = "hops,context_len";
  for (const auto& m : table.methods) out += "," + m;
  out += '\n';

  std::set<int> hops;
  std::set<long> lens;
  for (const auto& [key, _] : table.per_cell) {
    hops.insert(key.hops);
    lens.insert(key.context_len);
  }

  auto cell = [&](const std::string& m, int h, long l) -> std::string {
    auto it = table.per_cell.find({m, h, l});
    return it == table.per_cell.end() ? "" : fmt_mean(it->second);
  };

  for (int h : hops) {
    for (long l : lens) {
      bool any = false;
      for (const auto& m : table.methods)
        if (table.per_cell.count({m, h, l})) any = true;
      if (!any) continue;
      out += std::to_string(h) + "," + std::to_string(l);
      for (const auto& m : table.methods) out += "," + cell(m, h, l);
      out += '\n';
    }
  }
  for (int h : hops) {
    out += "hop_avg_" + std::to_string(h) + ",";
    for (const auto& m : table.methods) {
      auto it = table.hop_averages.find({m, h});
      out += ",";
      if (it != table.hop_averages.end()) out += fmt_mean(it->second);
    }
    out += '\n';
  }
  for (long l : lens) {
    bool any = false;
    for (const auto& m : table.methods)
      if (table.context_averages_2to4.count({m, l})) any = true;
    if (!any) continue;
    out += "ctx_avg_2to4," + std::to_string(l);
    for (const auto& m : table.methods) {
      auto it = table.context_averages_2to4.find({m, l});
      out += ",";
      if (it != table.context_averages_2to4.end()) out += fmt_mean(it->second);
    }
    out += '\n';
  }
  out += "overall_2to4,";
  for (const auto& m : table.methods) {
    auto it = table.overall_average_2to4.find(m);
    out += ",";
    if (it != table.overall_average_2to4.end()) out += fmt_mean(it->second);
  }
  out += '\n';
  return out;
}

std::string observations_csv(const ReportTable& table) {
  std::string out = "method,hops,context_len,f1\n";
  for (const auto& [key, mean] : table.per_cell) {
    out += key.method + "," + std::to_string(key.hops) + "," + std::to_string(key.context_len) +
           "," + fmt_mean(mean) + "\n";
  }
  return out;
}

}  // namespace infoqa::scoring
