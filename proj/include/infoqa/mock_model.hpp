#pragma once

/**
 * Hermetic model doubles.
 *
 * The oracle mocks understand the canonical query grammar the generator
 * renders (right-nested clause templates around one quoted entity), so they
 * can decompose, answer and contract exactly like a perfectly instructed
 * model would. The gold oracle always answers chain edges correctly; the
 * noisy oracle answers each edge correctly with probability 1 - eps and
 * otherwise returns a wrong same-category entity that can never collide
 * with the chain, which makes the (1-eps)^(K+1) law hold with equality.
 * All oracle state is immutable after construction; per-call randomness is
 * keyed on (seed, prompt hash, temperature), so mocks are safe for
 * concurrent use and transcripts are reproducible.
 */

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infoqa/benchgen.hpp"
#include "infoqa/endpoint.hpp"

namespace infoqa::orch {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScriptExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A query decomposed against the canonical grammar: pending relations
/// [first_rel, last_rel] of one template, nested around a quoted frontier.
struct ParsedQuery {
  bool atomic = false;
  std::size_t template_index = 0;
  int first_rel = 0;
  int last_rel = 0;
  std::string frontier;
};

class SampleStore {
 public:
  SampleStore(std::vector<benchgen::ChainTemplate> templates, benchgen::EntityDictionary dict);

  /// Register the chains behind a batch of samples (deduplicated).
  void add_samples(const std::vector<benchgen::Sample>& samples);

  std::optional<ParsedQuery> parse_query(const std::string& query) const;

  const std::vector<benchgen::ChainTemplate>& templates() const { return templates_; }
  const benchgen::EntityDictionary& dictionary() const { return dict_; }
  std::size_t chain_count() const { return chains_.size(); }

  struct ChainRef {
    std::size_t template_index = 0;
    std::array<std::string, benchgen::kChainEntities> entities;
    std::array<std::string, benchgen::kMaxHops> sentences;
  };

  /// The unique chain with `subject` at `pos` under template `template_index`
  /// whose evidence sentence for that relation occurs in `haystack`.
  const ChainRef* resolve_edge(const std::string& subject, int pos, std::size_t template_index,
                               const std::string& haystack) const;

 private:
  std::vector<benchgen::ChainTemplate> templates_;
  benchgen::EntityDictionary dict_;
  std::vector<ChainRef> chains_;
  std::map<std::string, std::vector<std::pair<std::size_t, int>>> by_entity_;
  std::map<std::string, std::size_t> chain_keys_;
};

enum class MockKind { Echo, GoldOracle, NoisyOracle, Scripted };

MockKind mock_kind_from_string(const std::string& name);

class MockModel : public ChatClient {
 public:
  MockModel(MockKind kind, std::shared_ptr<const SampleStore> store, double eps = 0.0,
            std::uint64_t seed = 0);

  ChatReply chat(const std::string& system, const std::string& user,
                 std::optional<double> temperature_override = std::nullopt) override;

 private:
  std::string respond(const std::string& user, double temperature) const;

  MockKind kind_;
  std::shared_ptr<const SampleStore> store_;
  double eps_;
  std::uint64_t seed_;
};

/// Replays a fixed transcript; throws ScriptExhausted past the end.
class ScriptedModel : public ChatClient {
 public:
  explicit ScriptedModel(std::vector<std::string> outputs);

  ChatReply chat(const std::string& system, const std::string& user,
                 std::optional<double> temperature_override = std::nullopt) override;

  int calls() const { return static_cast<int>(next_); }
  const std::vector<std::pair<std::string, double>>& seen() const { return seen_; }

 private:
  std::vector<std::string> outputs_;
  std::size_t next_ = 0;
  std::vector<std::pair<std::string, double>> seen_;  // (prompt, temperature)
};

}  // namespace infoqa::orch
