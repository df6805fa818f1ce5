#include "infoqa/runio.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

namespace infoqa::orch {

nlohmann::ordered_json run_record_to_json(const RunRecord& record) {
  nlohmann::ordered_json j;
  j["method"] = record.method;
  j["sample_id"] = record.sample_id;
  j["hops"] = record.hops;
  j["context_len"] = record.context_len;
  j["gold"] = record.gold;
  j["final_answer"] = record.final_answer;
  j["failed"] = record.failed;
  if (record.failed) j["error"] = record.error;
  if (!record.anomalies.empty()) j["anomalies"] = record.anomalies;
  auto& calls = j["calls"] = nlohmann::ordered_json::array();
  for (const auto& call : record.calls) {
    calls.push_back({{"prompt", call.prompt},
                     {"output", call.output},
                     {"latency_ms", call.latency_ms},
                     {"prompt_tokens", call.prompt_tokens},
                     {"completion_tokens", call.completion_tokens},
                     {"temperature", call.temperature},
                     {"retries", call.retries}});
  }
  auto& steps = j["step_outcomes"] = nlohmann::ordered_json::array();
  for (const auto& step : record.step_outcomes) {
    nlohmann::ordered_json sj{{"step", step.step},
                              {"sub_question", step.sub_question},
                              {"finding", step.finding}};
    if (step.correct.has_value()) sj["correct"] = *step.correct;
    steps.push_back(sj);
  }
  return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord record;
  record.method = j.at("method").get<std::string>();
  record.sample_id = j.at("sample_id").get<std::string>();
  record.hops = j.value("hops", 0);
  record.context_len = j.value("context_len", 0L);
  record.gold = j.value("gold", "");
  record.final_answer = j.value("final_answer", "");
  record.failed = j.value("failed", false);
  record.error = j.value("error", "");
  if (j.contains("anomalies")) {
    record.anomalies = j.at("anomalies").get<std::vector<std::string>>();
  }
  if (j.contains("calls")) {
    for (const auto& cj : j.at("calls")) {
      CallRecord call;
      call.prompt = cj.value("prompt", "");
      call.output = cj.value("output", "");
      call.latency_ms = cj.value("latency_ms", 0.0);
      call.prompt_tokens = cj.value("prompt_tokens", -1);
      call.completion_tokens = cj.value("completion_tokens", -1);
      call.temperature = cj.value("temperature", 0.0);
      call.retries = cj.value("retries", 0);
      record.calls.push_back(std::move(call));
    }
  }
  if (j.contains("step_outcomes")) {
    for (const auto& sj : j.at("step_outcomes")) {
      StepOutcome step;
      step.step = sj.value("step", 0);
      step.sub_question = sj.value("sub_question", "");
      step.finding = sj.value("finding", "");
      if (sj.contains("correct")) step.correct = sj.at("correct").get<bool>();
      record.step_outcomes.push_back(std::move(step));
    }
  }
  return record;
}

std::vector<RunRecord> read_run_records(const std::filesystem::path& file, int* malformed_lines) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open transcript file: " + file.string());
  std::vector<RunRecord> records;
  std::string line;
  int malformed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(run_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      ++malformed;
    }
  }
  if (malformed_lines != nullptr) *malformed_lines = malformed;
  return records;
}

std::set<std::pair<std::string, std::string>> existing_run_keys(
    const std::filesystem::path& file) {
  std::set<std::pair<std::string, std::string>> keys;
  if (!std::filesystem::exists(file)) return keys;
  std::ifstream in(file, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      keys.insert({j.at("method").get<std::string>(), j.at("sample_id").get<std::string>()});
    } catch (const std::exception&) {
      // malformed line; it will be reported at scoring time
    }
  }
  return keys;
}

BatchResult run_batch(const std::vector<benchgen::Sample>& samples,
                      const std::vector<std::string>& method_labels, ChatClient& client,
                      const PromptSet& prompts, const std::filesystem::path& out_jsonl,
                      const BatchOptions& options) {
  struct Job {
    const benchgen::Sample* sample;
    const std::string* method;
  };
  std::vector<Job> jobs;
  const auto existing = options.resume ? existing_run_keys(out_jsonl)
                                       : std::set<std::pair<std::string, std::string>>{};
  BatchResult result;
  for (const auto& method : method_labels) {
    for (const auto& sample : samples) {
      if (existing.count({method, sample.id})) {
        ++result.skipped;
        continue;
      }
      jobs.push_back({&sample, &method});
    }
  }

  if (out_jsonl.has_parent_path()) std::filesystem::create_directories(out_jsonl.parent_path());
  std::ofstream out(out_jsonl, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open output file: " + out_jsonl.string());

  std::mutex write_mutex;
  std::atomic<std::size_t> next_job{0};
  std::atomic<int> completed{0};
  std::atomic<int> failed{0};

  const int n_threads = std::max(1, std::min<int>(options.concurrency,
                                                  static_cast<int>(jobs.size())));
  auto worker = [&] {
    while (true) {
      const std::size_t index = next_job.fetch_add(1);
      if (index >= jobs.size()) break;
      const Job& job = jobs[index];
      RunRecord record = run_method(*job.method, *job.sample, client, prompts, options.run);
      if (record.failed) {
        ++failed;
      } else {
        ++completed;
      }
      const std::string line = run_record_to_json(record).dump();
      std::lock_guard<std::mutex> lock(write_mutex);
      out << line << '\n';
      out.flush();
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  result.completed = completed.load();
  result.failed = failed.load();
  return result;
}

std::vector<scoring::ScoredRun> score_records(const std::vector<RunRecord>& records) {
  std::vector<scoring::ScoredRun> scored;
  scored.reserve(records.size());
  for (const auto& record : records) {
    scoring::ScoredRun run;
    run.method = record.method;
    run.hops = record.hops;
    run.context_len = record.context_len;
    run.sample_id = record.sample_id;
    run.prediction = record.final_answer;
    run.gold = record.gold;
    run.f1 = scoring::token_f1(record.final_answer, record.gold);
    scored.push_back(std::move(run));
  }
  return scored;
}

}  // namespace infoqa::orch
