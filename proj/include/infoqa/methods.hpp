#pragma once

/**
 * Evaluation strategies over one benchmark sample.
 *
 * run_infoqa drives the multi-call loop: one decompose call, then per hop an
 * answer call and a fused rewrite call that both contracts the query with
 * the latest finding and names the next sub-question (or declares the query
 * resolved with TERMINAL). The contracted query is the only reasoning state
 * carried between calls; raw traces are never re-sent unless prune is
 * disabled. Call budget: at most 2 * max_steps + 1 calls per run.
 *
 * run_baseline covers the single-pass strategies and the two ablations.
 * Exact call counts per run: Direct/CoT/ReAct/P&S/S-A 1, S-C 5, S-R 2,
 * w/o D. 1, w/o P. same loop as InfoQA.
 */

#include <optional>
#include <string>
#include <vector>

#include "infoqa/benchgen.hpp"
#include "infoqa/endpoint.hpp"
#include "infoqa/prompts.hpp"

namespace infoqa::orch {

enum class Method {
  Direct,
  CoT,
  SelfRefine,
  SelfConsistency,
  ReAct,
  PlanAndSolve,
  SelfAsk,
  InfoQANoDecomp,
  InfoQANoPrune,
};

/// Canonical report label ("Direct", "CoT", "S-R", "S-C", "ReAct", "P&S",
/// "S-A", "w/o D.", "w/o P.").
std::string method_label(Method method);
/// Accepts canonical labels and common aliases, case-insensitive;
/// throws std::invalid_argument for unknown names.
Method method_from_string(const std::string& name);
inline constexpr const char* kInfoQALabel = "InfoQA";

struct CallRecord {
  std::string prompt;
  std::string output;
  double latency_ms = 0.0;
  int prompt_tokens = -1;
  int completion_tokens = -1;
  double temperature = 0.0;
  int retries = 0;
};

struct StepOutcome {
  int step = 0;  // 1-based
  std::string sub_question;
  std::string finding;
  std::optional<bool> correct;  // only when the sample's chain is known
};

struct RunRecord {
  std::string method;
  std::string sample_id;
  int hops = 0;
  long context_len = 0;
  std::string gold;
  std::vector<CallRecord> calls;
  std::string final_answer;
  std::vector<StepOutcome> step_outcomes;
  std::vector<std::string> anomalies;  // e.g. contraction length blow-ups
  bool failed = false;
  std::string error;
};

struct RunOptions {
  int max_steps = 6;
  bool prune = true;
  double digest_tokens = 200.0;  // context digest shown to the decompose call
};

/// The reasoning state carried across InfoQA calls: the contracted query is
/// the only cross-step state; raw traces never travel with it.
struct QueryState {
  std::string query;                                          // current contracted query Q_k
  std::optional<std::string> finding;                         // latest finding
  std::vector<std::pair<std::string, std::string>> history;   // (sub_question, finding) per step
  std::string sub_question;                                   // set by decompose, consumed by contract

  static QueryState initial(std::string question);
  int step() const { return static_cast<int>(history.size()); }
};

/// One single-hop sub-question for the query's innermost unresolved
/// dependency; an already-atomic query decomposes to itself. Stores the
/// sub-question in the state and returns it.
std::string infoqa_decompose(QueryState& state, const std::string& digest, ChatClient& client,
                             const PromptSet& prompts);

/// Short answer to one sub-question over the full context.
std::string infoqa_answer(const std::string& sub_question, const std::string& context,
                          ChatClient& client, const PromptSet& prompts);

struct ContractResult {
  bool terminal = false;
  std::string text;        // rewritten query, or the final answer when terminal
  bool anomalous = false;  // rewrite grew past twice the input query length
};

/// Rewrite the query with the latest finding (dropping the resolved clause),
/// or declare it terminal. Advances the state: appends (sub_question,
/// finding) to the history and installs the rewritten query.
ContractResult infoqa_contract(QueryState& state, const std::string& finding, ChatClient& client,
                               const PromptSet& prompts);

RunRecord run_infoqa(const benchgen::Sample& sample, ChatClient& client, const PromptSet& prompts,
                     const RunOptions& options = {});

RunRecord run_baseline(Method method, const benchgen::Sample& sample, ChatClient& client,
                       const PromptSet& prompts, const RunOptions& options = {});

/// Dispatch by label; "InfoQA" runs the multi-call loop, anything else a baseline.
RunRecord run_method(const std::string& label, const benchgen::Sample& sample, ChatClient& client,
                     const PromptSet& prompts, const RunOptions& options = {});

/// Majority vote over normalized extracted answers; ties break to the
/// candidate whose first occurrence is earliest.
std::string majority_answer(const std::vector<std::string>& extracted);

/// First `token_budget` tokens of the text (word-granular).
std::string context_digest(const std::string& context, double token_budget,
                           double token_factor = 1.3);

}  // namespace infoqa::orch
