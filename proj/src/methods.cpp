#include "infoqa/methods.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "infoqa/scoring.hpp"

namespace infoqa::orch {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

/// Last line carrying the marker, or nullopt.
std::optional<std::string> marker_payload(const std::string& text, std::string_view marker) {
  std::optional<std::string> payload;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string folded = lower(line);
    const auto pos = folded.find(lower(std::string(marker)));
    if (pos == std::string::npos) continue;
    std::string value = line.substr(pos + marker.size());
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\r')) value.pop_back();
    payload = value;
  }
  return payload;
}

CallRecord record_call(ChatClient& client, const std::string& system, const std::string& prompt,
                       std::optional<double> temperature = std::nullopt) {
  ChatReply reply = client.chat(system, prompt, temperature);
  CallRecord record;
  record.prompt = prompt;
  record.output = reply.text;
  record.latency_ms = reply.latency_ms;
  record.prompt_tokens = reply.usage.prompt_tokens;
  record.completion_tokens = reply.usage.completion_tokens;
  record.temperature = reply.temperature;
  record.retries = reply.retries;
  return record;
}

RunRecord base_record(const std::string& method, const benchgen::Sample& sample) {
  RunRecord record;
  record.method = method;
  record.sample_id = sample.id;
  record.hops = sample.hops;
  record.context_len = sample.target_len;
  record.gold = sample.answer;
  return record;
}

std::optional<bool> step_correct(const benchgen::Sample& sample, int step,
                                 const std::string& finding) {
  if (sample.chain_entities.size() != benchgen::kChainEntities || step > sample.hops) {
    return std::nullopt;
  }
  const auto expected = scoring::normalize_answer(sample.chain_entities[static_cast<std::size_t>(step)]);
  return scoring::normalize_answer(finding) == expected;
}

std::string render_transcript(const std::vector<CallRecord>& calls) {
  std::string out;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    out += "--- call " + std::to_string(i + 1) + " output ---\n";
    out += calls[i].output;
    out += '\n';
  }
  return out;
}

RunRecord run_single_prompt(const std::string& label, const std::string& template_name,
                            const benchgen::Sample& sample, ChatClient& client,
                            const PromptSet& prompts) {
  RunRecord record = base_record(label, sample);
  const std::string prompt = prompts.render(
      template_name, {{"question", sample.question}, {"context", sample.context}});
  record.calls.push_back(record_call(client, prompts.raw("system"), prompt));
  record.final_answer = scoring::extract_answer(record.calls.back().output);
  return record;
}

}  // namespace

std::string method_label(Method method) {
  switch (method) {
    case Method::Direct: return "Direct";
    case Method::CoT: return "CoT";
    case Method::SelfRefine: return "S-R";
    case Method::SelfConsistency: return "S-C";
    case Method::ReAct: return "ReAct";
    case Method::PlanAndSolve: return "P&S";
    case Method::SelfAsk: return "S-A";
    case Method::InfoQANoDecomp: return "w/o D.";
    case Method::InfoQANoPrune: return "w/o P.";
  }
  throw std::invalid_argument("method_label: bad enum value");
}

Method method_from_string(const std::string& name) {
  const std::string n = lower(name);
  if (n == "direct") return Method::Direct;
  if (n == "cot" || n == "chain-of-thought") return Method::CoT;
  if (n == "s-r" || n == "sr" || n == "self-refine" || n == "selfrefine") return Method::SelfRefine;
  if (n == "s-c" || n == "sc" || n == "self-consistency" || n == "selfconsistency") {
    return Method::SelfConsistency;
  }
  if (n == "react") return Method::ReAct;
  if (n == "p&s" || n == "ps" || n == "plan-and-solve" || n == "planandsolve") {
    return Method::PlanAndSolve;
  }
  if (n == "s-a" || n == "sa" || n == "self-ask" || n == "selfask") return Method::SelfAsk;
  if (n == "w/o d." || n == "wo-d" || n == "no-decomp" || n == "infoqa-no-decomp") {
    return Method::InfoQANoDecomp;
  }
  if (n == "w/o p." || n == "wo-p" || n == "no-prune" || n == "infoqa-no-prune") {
    return Method::InfoQANoPrune;
  }
  throw std::invalid_argument("unknown method: " + name);
}

std::string context_digest(const std::string& context, double token_budget, double token_factor) {
  const long word_budget = std::lround(token_budget / token_factor);
  long words = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < context.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(context[i])) != 0;
    if (!space && !in_word) {
      if (words == word_budget) return context.substr(0, i);
      ++words;
    }
    in_word = !space;
  }
  return context;
}

std::string majority_answer(const std::vector<std::string>& extracted) {
  if (extracted.empty()) return "";
  std::map<std::string, int> counts;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    const std::string key = join_tokens(scoring::normalize_answer(extracted[i]));
    ++counts[key];
    first_seen.emplace(key, i);
  }
  std::string best_key;
  int best_count = -1;
  std::size_t best_first = extracted.size();
  for (const auto& [key, count] : counts) {
    const std::size_t first = first_seen.at(key);
    if (count > best_count || (count == best_count && first < best_first)) {
      best_key = key;
      best_count = count;
      best_first = first;
    }
  }
  return extracted[best_first];
}

QueryState QueryState::initial(std::string question) {
  QueryState state;
  state.query = std::move(question);
  return state;
}

std::string infoqa_decompose(QueryState& state, const std::string& digest, ChatClient& client,
                             const PromptSet& prompts) {
  const std::string prompt =
      prompts.render("infoqa_decompose", {{"query", state.query}, {"digest", digest}});
  state.sub_question = scoring::extract_answer(client.chat(prompts.raw("system"), prompt).text);
  return state.sub_question;
}

std::string infoqa_answer(const std::string& sub_question, const std::string& context,
                          ChatClient& client, const PromptSet& prompts) {
  const std::string prompt = prompts.render(
      "infoqa_answer", {{"sub_question", sub_question}, {"context", context}});
  return scoring::extract_answer(client.chat(prompts.raw("system"), prompt).text);
}

ContractResult infoqa_contract(QueryState& state, const std::string& finding, ChatClient& client,
                               const PromptSet& prompts) {
  if (finding.empty()) throw std::invalid_argument("infoqa_contract: empty finding");
  const std::string prompt =
      prompts.render("infoqa_contract", {{"query", state.query}, {"finding", finding}});
  const std::string output = client.chat(prompts.raw("system"), prompt).text;
  ContractResult result;
  if (auto terminal = marker_payload(output, "TERMINAL:")) {
    result.terminal = true;
    result.text = terminal->empty() ? finding : *terminal;
  } else {
    const auto rewritten = marker_payload(output, "FINAL ANSWER:");
    if (!rewritten) {
      throw ProtocolError("infoqa_contract: output carries neither TERMINAL nor FINAL ANSWER");
    }
    result.text = *rewritten;
    result.anomalous = result.text.size() > 2 * state.query.size();
  }
  state.finding = finding;
  state.history.emplace_back(state.sub_question, finding);
  state.sub_question.clear();
  if (!result.terminal) state.query = result.text;
  return result;
}

RunRecord run_infoqa(const benchgen::Sample& sample, ChatClient& client, const PromptSet& prompts,
                     const RunOptions& options) {
  if (options.max_steps < 1) throw std::invalid_argument("run_infoqa: max_steps must be >= 1");
  RunRecord record = base_record(kInfoQALabel, sample);
  if (!options.prune) record.method = method_label(Method::InfoQANoPrune);
  const std::string& system = prompts.raw("system");
  const std::string digest = context_digest(sample.context, options.digest_tokens);

  try {
    QueryState state = QueryState::initial(sample.question);

    // one decompose call, then per step: answer + fused contract/decompose
    std::string prompt =
        prompts.render("infoqa_decompose", {{"query", state.query}, {"digest", digest}});
    record.calls.push_back(record_call(client, system, prompt));
    state.sub_question = scoring::extract_answer(record.calls.back().output);

    for (int step = 1; step <= options.max_steps; ++step) {
      std::map<std::string, std::string> fields = {{"sub_question", state.sub_question},
                                                   {"context", sample.context}};
      if (!options.prune) fields["transcript"] = render_transcript(record.calls);
      prompt = prompts.render(options.prune ? "infoqa_answer" : "infoqa_answer_noprune", fields);
      record.calls.push_back(record_call(client, system, prompt));
      const std::string finding = scoring::extract_answer(record.calls.back().output);

      StepOutcome outcome;
      outcome.step = step;
      outcome.sub_question = state.sub_question;
      outcome.finding = finding;
      outcome.correct = step_correct(sample, step, finding);
      record.step_outcomes.push_back(outcome);
      record.final_answer = finding;  // best answer so far

      if (step == options.max_steps) {
        state.finding = finding;
        state.history.emplace_back(state.sub_question, finding);
        break;  // budget reached, keep latest finding
      }

      fields = {{"query", state.query}, {"finding", finding}};
      if (!options.prune) fields["transcript"] = render_transcript(record.calls);
      prompt = prompts.render(options.prune ? "infoqa_transition" : "infoqa_transition_noprune",
                              fields);
      record.calls.push_back(record_call(client, system, prompt));
      const std::string& output = record.calls.back().output;

      state.finding = finding;
      state.history.emplace_back(state.sub_question, finding);
      state.sub_question.clear();

      if (auto terminal = marker_payload(output, "TERMINAL:")) {
        if (!terminal->empty()) record.final_answer = *terminal;
        break;
      }
      const auto contracted = marker_payload(output, "CONTRACTED QUERY:");
      const auto next_sub = marker_payload(output, "FINAL ANSWER:");
      if (!contracted || !next_sub) {
        throw ProtocolError("run_infoqa: rewrite call returned neither TERMINAL nor "
                            "CONTRACTED QUERY + FINAL ANSWER");
      }
      if (contracted->size() > 2 * state.query.size()) {
        record.anomalies.push_back("contraction anomaly at step " + std::to_string(step) +
                                   ": rewritten query grew past twice the input length");
      }
      state.query = *contracted;
      state.sub_question = *next_sub;
    }
  } catch (const std::exception& err) {
    record.failed = true;
    record.error = err.what();
  }
  return record;
}

RunRecord run_baseline(Method method, const benchgen::Sample& sample, ChatClient& client,
                       const PromptSet& prompts, const RunOptions& options) {
  const std::string label = method_label(method);
  try {
    switch (method) {
      case Method::Direct:
        return run_single_prompt(label, "direct", sample, client, prompts);
      case Method::CoT:
        return run_single_prompt(label, "cot", sample, client, prompts);
      case Method::ReAct:
        return run_single_prompt(label, "react", sample, client, prompts);
      case Method::PlanAndSolve:
        return run_single_prompt(label, "plan_and_solve", sample, client, prompts);
      case Method::SelfAsk:
        return run_single_prompt(label, "self_ask", sample, client, prompts);
      case Method::InfoQANoDecomp:
        return run_single_prompt(label, "infoqa_no_decomp", sample, client, prompts);

      case Method::SelfConsistency: {
        RunRecord record = base_record(label, sample);
        const std::string prompt = prompts.render(
            "self_consistency", {{"question", sample.question}, {"context", sample.context}});
        std::vector<std::string> extracted;
        for (double temperature : {0.1, 0.3, 0.5, 0.7, 0.9}) {
          record.calls.push_back(
              record_call(client, prompts.raw("system"), prompt, temperature));
          extracted.push_back(scoring::extract_answer(record.calls.back().output));
        }
        record.final_answer = majority_answer(extracted);
        return record;
      }

      case Method::SelfRefine: {
        RunRecord record = base_record(label, sample);
        std::string prompt = prompts.render(
            "self_refine_init", {{"question", sample.question}, {"context", sample.context}});
        record.calls.push_back(record_call(client, prompts.raw("system"), prompt));
        const std::string draft = scoring::extract_answer(record.calls.back().output);

        prompt = prompts.render("self_refine_refine", {{"question", sample.question},
                                                       {"context", sample.context},
                                                       {"previous_answer", draft}});
        record.calls.push_back(record_call(client, prompts.raw("system"), prompt));
        record.final_answer = scoring::extract_answer(record.calls.back().output);
        return record;
      }

      case Method::InfoQANoPrune: {
        RunOptions no_prune = options;
        no_prune.prune = false;
        return run_infoqa(sample, client, prompts, no_prune);
      }
    }
    throw std::invalid_argument("run_baseline: bad enum value");
  } catch (const std::exception& err) {
    RunRecord record = base_record(label, sample);
    record.failed = true;
    record.error = err.what();
    return record;
  }
}

RunRecord run_method(const std::string& label, const benchgen::Sample& sample, ChatClient& client,
                     const PromptSet& prompts, const RunOptions& options) {
  if (lower(label) == "infoqa") return run_infoqa(sample, client, prompts, options);
  return run_baseline(method_from_string(label), sample, client, prompts, options);
}

}  // namespace infoqa::orch
