#pragma once

/**
 * RunRecord JSONL persistence and the concurrent batch runner. One record
 * per line with full prompts and raw outputs for audit; the batch runner is
 * resumable (existing (method, sample_id) pairs are skipped) and appends
 * through a serialized writer.
 */

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "infoqa/methods.hpp"
#include "infoqa/scoring.hpp"
#include "json.hpp"

namespace infoqa::orch {

nlohmann::ordered_json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Parse a JSONL transcript file; malformed lines are skipped and counted.
std::vector<RunRecord> read_run_records(const std::filesystem::path& file,
                                        int* malformed_lines = nullptr);

/// (method, sample_id) pairs already present in a JSONL file (for resume).
std::set<std::pair<std::string, std::string>> existing_run_keys(
    const std::filesystem::path& file);

struct BatchOptions {
  int concurrency = 4;
  bool resume = true;
  RunOptions run;
};

struct BatchResult {
  int completed = 0;
  int failed = 0;
  int skipped = 0;
};

/// Run every (method, sample) pair, appending one JSONL record per run.
BatchResult run_batch(const std::vector<benchgen::Sample>& samples,
                      const std::vector<std::string>& method_labels, ChatClient& client,
                      const PromptSet& prompts, const std::filesystem::path& out_jsonl,
                      const BatchOptions& options);

/// Score transcript records against their recorded gold answers.
std::vector<scoring::ScoredRun> score_records(const std::vector<RunRecord>& records);

}  // namespace infoqa::orch
