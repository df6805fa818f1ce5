#include "infoqa/mock_model.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "infoqa/rng.hpp"

namespace infoqa::orch {

namespace {

constexpr std::uint64_t kStreamMock = 3;
constexpr const char* kSubQuestionPrefix = "Based on the provided context: ";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_quoted(std::string_view s) {
  return s.size() >= 2 && s.front() == '"' && s.back() == '"';
}

/// The value on the same line as `label`, trimmed.
std::optional<std::string> field_value(const std::string& prompt, std::string_view label) {
  const auto pos = prompt.find(label);
  if (pos == std::string::npos) return std::nullopt;
  auto begin = pos + label.size();
  auto end = prompt.find('\n', begin);
  if (end == std::string::npos) end = prompt.size();
  std::string value = prompt.substr(begin, end - begin);
  while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
  while (!value.empty() && (value.back() == ' ' || value.back() == '\r')) value.pop_back();
  return value;
}

std::string trace_tag(std::uint64_t key) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "[trace:%016llx]", static_cast<unsigned long long>(key));
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// SampleStore
// ---------------------------------------------------------------------------

SampleStore::SampleStore(std::vector<benchgen::ChainTemplate> templates,
                         benchgen::EntityDictionary dict)
    : templates_(std::move(templates)), dict_(std::move(dict)) {
  if (templates_.empty()) throw std::invalid_argument("SampleStore: no templates");
}

void SampleStore::add_samples(const std::vector<benchgen::Sample>& samples) {
  for (const auto& sample : samples) {
    if (sample.chain_template_id.empty() ||
        sample.chain_entities.size() != benchgen::kChainEntities) {
      throw std::invalid_argument("SampleStore: sample '" + sample.id +
                                  "' carries no chain provenance");
    }
    std::string key = sample.chain_template_id;
    for (const auto& e : sample.chain_entities) key += "|" + e;
    if (chain_keys_.count(key)) continue;

    const auto tmpl_it =
        std::find_if(templates_.begin(), templates_.end(),
                     [&](const auto& t) { return t.id == sample.chain_template_id; });
    if (tmpl_it == templates_.end()) {
      throw std::invalid_argument("SampleStore: unknown template '" + sample.chain_template_id +
                                  "'");
    }

    ChainRef chain;
    chain.template_index = static_cast<std::size_t>(tmpl_it - templates_.begin());
    std::copy(sample.chain_entities.begin(), sample.chain_entities.end(),
              chain.entities.begin());
    for (int k = 0; k < benchgen::kMaxHops; ++k) {
      chain.sentences[static_cast<std::size_t>(k)] =
          benchgen::instantiate(tmpl_it->chain_texts[static_cast<std::size_t>(k)],
                                chain.entities);
    }
    const std::size_t index = chains_.size();
    chains_.push_back(std::move(chain));
    chain_keys_[key] = index;
    for (int pos = 0; pos < benchgen::kChainEntities; ++pos) {
      by_entity_[chains_[index].entities[static_cast<std::size_t>(pos)]].push_back({index, pos});
    }
  }
}

std::optional<ParsedQuery> SampleStore::parse_query(const std::string& query) const {
  if (!ends_with(query, "?")) return std::nullopt;
  for (std::size_t ti = 0; ti < templates_.size(); ++ti) {
    const auto& tmpl = templates_[ti];
    for (int last = benchgen::kMaxHops - 1; last >= 0; --last) {
      const std::string lead = tmpl.leads[static_cast<std::size_t>(last)] + " ";
      if (!starts_with(query, lead)) continue;
      std::string cur = query.substr(lead.size(), query.size() - lead.size() - 1);
      if (is_quoted(cur)) {
        ParsedQuery parsed;
        parsed.atomic = true;
        parsed.frontier = cur.substr(1, cur.size() - 2);
        return parsed;
      }
      for (int k = last; k >= 0; --k) {
        const auto& clause = tmpl.clauses[static_cast<std::size_t>(k)];
        if (!(starts_with(cur, clause.pre) && ends_with(cur, clause.post) &&
              cur.size() > clause.pre.size() + clause.post.size())) {
          break;
        }
        cur = cur.substr(clause.pre.size(), cur.size() - clause.pre.size() - clause.post.size());
        if (is_quoted(cur)) {
          ParsedQuery parsed;
          parsed.template_index = ti;
          parsed.first_rel = k;
          parsed.last_rel = last;
          parsed.frontier = cur.substr(1, cur.size() - 2);
          return parsed;
        }
      }
    }
  }
  return std::nullopt;
}

const SampleStore::ChainRef* SampleStore::resolve_edge(const std::string& subject, int pos,
                                                       std::size_t template_index,
                                                       const std::string& haystack) const {
  auto it = by_entity_.find(subject);
  if (it == by_entity_.end()) return nullptr;
  for (const auto& [chain_index, entity_pos] : it->second) {
    if (entity_pos != pos) continue;
    const ChainRef& chain = chains_[chain_index];
    if (chain.template_index != template_index) continue;
    if (haystack.find(chain.sentences[static_cast<std::size_t>(pos)]) != std::string::npos) {
      return &chain;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// MockModel
// ---------------------------------------------------------------------------

MockKind mock_kind_from_string(const std::string& name) {
  if (name == "echo") return MockKind::Echo;
  if (name == "gold_oracle" || name == "gold") return MockKind::GoldOracle;
  if (name == "noisy_oracle" || name == "noisy") return MockKind::NoisyOracle;
  if (name == "scripted") return MockKind::Scripted;
  throw std::invalid_argument("unknown mock kind: " + name);
}

MockModel::MockModel(MockKind kind, std::shared_ptr<const SampleStore> store, double eps,
                     std::uint64_t seed)
    : kind_(kind), store_(std::move(store)), eps_(eps), seed_(seed) {
  if (kind_ == MockKind::Scripted) {
    throw std::invalid_argument("MockModel: use ScriptedModel for scripted transcripts");
  }
  if ((kind_ == MockKind::GoldOracle || kind_ == MockKind::NoisyOracle) && !store_) {
    throw std::invalid_argument("MockModel: oracle kinds require a sample store");
  }
  if (!(eps_ >= 0.0 && eps_ <= 1.0)) {
    throw std::invalid_argument("MockModel: eps must be in [0, 1]");
  }
}

ChatReply MockModel::chat(const std::string& /*system*/, const std::string& user,
                          std::optional<double> temperature_override) {
  ChatReply reply;
  reply.temperature = temperature_override.value_or(0.0);
  reply.text = respond(user, reply.temperature);
  reply.usage.prompt_tokens = static_cast<int>(benchgen::count_tokens(user));
  reply.usage.completion_tokens = static_cast<int>(benchgen::count_tokens(reply.text));
  return reply;
}

std::string MockModel::respond(const std::string& user, double temperature) const {
  if (kind_ == MockKind::Echo) return user;

  // Stream key covers prompt content and temperature so repeated sampling
  // (e.g. self-consistency) gets distinct draws.
  char temp_buf[32];
  std::snprintf(temp_buf, sizeof(temp_buf), "|T=%.3f", temperature);
  const std::uint64_t call_key = rng::fnv1a64(user + temp_buf);
  auto call_rng = rng::substream(seed_, {kStreamMock, call_key});
  const std::string trace = trace_tag(call_key);
  const bool noisy = kind_ == MockKind::NoisyOracle;

  const auto wrong_pick = [&](const std::string& category,
                              const std::set<std::string>& exclude) -> std::string {
    const auto& pool = store_->dictionary().pool(category);
    std::vector<std::string> candidates;
    for (const auto& entity : pool) {
      if (exclude.count(entity)) continue;
      if (exclude.empty() && user.find(entity) != std::string::npos) continue;
      candidates.push_back(entity);
    }
    if (candidates.empty()) {
      // pool exhausted; decorate so the pick can never equal a real entity
      return pool[static_cast<std::size_t>(call_rng.below(pool.size()))] + " (unverified)";
    }
    return candidates[static_cast<std::size_t>(call_rng.below(candidates.size()))];
  };

  const auto answer_edge = [&](const ParsedQuery& parsed) -> std::string {
    const auto& tmpl = store_->templates()[parsed.template_index];
    const std::string& object_category =
        tmpl.entity_seq[static_cast<std::size_t>(parsed.first_rel + 1)];
    const SampleStore::ChainRef* chain =
        store_->resolve_edge(parsed.frontier, parsed.first_rel, parsed.template_index, user);
    if (chain == nullptr) {
      if (!noisy) {
        throw OracleError("gold oracle: sub-question about \"" + parsed.frontier +
                          "\" is unresolvable against any stored chain (decomposition bug?)");
      }
      return wrong_pick(object_category, {});
    }
    const std::string& truth = chain->entities[static_cast<std::size_t>(parsed.first_rel + 1)];
    if (noisy && call_rng.next_double() < eps_) {
      return wrong_pick(object_category,
                        std::set<std::string>(chain->entities.begin(), chain->entities.end()));
    }
    return truth;
  };

  // --- answer one sub-question ---
  if (auto sub_q = field_value(user, "SUB-QUESTION:")) {
    std::string question = *sub_q;
    if (starts_with(question, kSubQuestionPrefix)) {
      question = question.substr(std::string_view(kSubQuestionPrefix).size());
    }
    const auto parsed = store_->parse_query(question);
    if (!parsed || parsed->atomic || parsed->first_rel != parsed->last_rel) {
      throw OracleError("oracle: sub-question is not a single-hop canonical query: " + question);
    }
    const std::string answer = answer_edge(*parsed);
    return "Scanning the context for the matching sentence. " + trace + "\nFINAL ANSWER: " +
           answer;
  }

  // --- contract / transition ---
  if (auto finding = field_value(user, "LATEST FINDING:")) {
    const auto query = field_value(user, "CURRENT QUERY:");
    if (!query) throw OracleError("oracle: rewrite prompt lacks CURRENT QUERY");
    const auto parsed = store_->parse_query(*query);
    if (!parsed) throw OracleError("oracle: cannot parse query: " + *query);
    const bool fused_decompose = user.find("CONTRACTED QUERY") != std::string::npos;
    if (parsed->atomic || parsed->first_rel == parsed->last_rel) {
      return "The query is fully resolved. " + trace + "\nTERMINAL: " + *finding;
    }
    const auto& tmpl = store_->templates()[parsed->template_index];
    const std::string contracted =
        benchgen::render_query(tmpl, *finding, parsed->first_rel + 1, parsed->last_rel);
    if (!fused_decompose) {
      return "Substituting the finding into the query. " + trace + "\nFINAL ANSWER: " +
             contracted;
    }
    const std::string next_sub =
        kSubQuestionPrefix +
        benchgen::render_query(tmpl, *finding, parsed->first_rel + 1, parsed->first_rel + 1);
    return "Substituting the finding into the query. " + trace + "\nCONTRACTED QUERY: " +
           contracted + "\nFINAL ANSWER: " + next_sub;
  }

  // --- decompose ---
  if (user.find("CONTEXT DIGEST:") != std::string::npos) {
    const auto query = field_value(user, "CURRENT QUERY:");
    if (!query) throw OracleError("oracle: decompose prompt lacks CURRENT QUERY");
    const auto parsed = store_->parse_query(*query);
    if (!parsed) throw OracleError("oracle: cannot parse query: " + *query);
    if (parsed->atomic) {
      // decomposition fixed point: a single-hop query is its own sub-question
      return "The query is already atomic. " + trace + "\nFINAL ANSWER: " + *query;
    }
    const auto& tmpl = store_->templates()[parsed->template_index];
    const std::string sub =
        kSubQuestionPrefix +
        benchgen::render_query(tmpl, parsed->frontier, parsed->first_rel, parsed->first_rel);
    return "Isolating the innermost dependency. " + trace + "\nFINAL ANSWER: " + sub;
  }

  // --- monolithic single-pass question ---
  if (auto question = field_value(user, "QUESTION:")) {
    const auto parsed = store_->parse_query(*question);
    if (!parsed) throw OracleError("oracle: cannot parse question: " + *question);
    if (parsed->atomic) return trace + "\nFINAL ANSWER: " + parsed->frontier;

    std::string frontier = parsed->frontier;
    bool broken = false;
    const auto& tmpl = store_->templates()[parsed->template_index];
    for (int k = parsed->first_rel; k <= parsed->last_rel; ++k) {
      const std::string& object_category = tmpl.entity_seq[static_cast<std::size_t>(k + 1)];
      if (broken) {
        frontier = wrong_pick(object_category, {});
        continue;
      }
      const SampleStore::ChainRef* chain =
          store_->resolve_edge(frontier, k, parsed->template_index, user);
      if (chain == nullptr) {
        if (!noisy) {
          throw OracleError("gold oracle: question hop about \"" + frontier +
                            "\" is unresolvable against any stored chain");
        }
        broken = true;
        frontier = wrong_pick(object_category, {});
        continue;
      }
      if (noisy && call_rng.next_double() < eps_) {
        broken = true;
        frontier = wrong_pick(object_category, std::set<std::string>(chain->entities.begin(),
                                                                     chain->entities.end()));
        continue;
      }
      frontier = chain->entities[static_cast<std::size_t>(k + 1)];
    }
    return "Walking the chain hop by hop. " + trace + "\nFINAL ANSWER: " + frontier;
  }

  // anything else behaves like an echo model
  return user;
}

// ---------------------------------------------------------------------------
// ScriptedModel
// ---------------------------------------------------------------------------

ScriptedModel::ScriptedModel(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}

ChatReply ScriptedModel::chat(const std::string& /*system*/, const std::string& user,
                              std::optional<double> temperature_override) {
  if (next_ >= outputs_.size()) {
    throw ScriptExhausted("scripted model: script exhausted after " +
                          std::to_string(outputs_.size()) + " calls");
  }
  ChatReply reply;
  reply.temperature = temperature_override.value_or(0.0);
  seen_.push_back({user, reply.temperature});
  reply.text = outputs_[next_++];
  return reply;
}

}  // namespace infoqa::orch
