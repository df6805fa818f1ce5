#pragma once

/**
 * Deterministic synthetic multi-hop QA dataset construction.
 *
 * Six phases: entity/template setup, base-chain instantiation, distractor
 * generation, per-(h, L) scaling, context assembly with out-of-order evidence
 * placement at fixed fractional positions, and JSON emission. Everything is
 * driven by keyed substreams of the project PRNG, so identical (config,
 * templates, dictionary, seed) reproduce byte-identical output files.
 *
 * Questions are rendered by right-nesting per-relation clause templates
 * around the quoted start entity; rewriting a query after a hop is then a
 * pure textual contraction of the innermost clause. The oracle mocks reuse
 * the same rendering, which is what makes their transcripts checkable.
 */

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "infoqa/rng.hpp"
#include "json.hpp"

namespace infoqa::benchgen {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxHops = 4;
inline constexpr int kChainEntities = 5;

// Substream purposes (second key word after the seed).
inline constexpr std::uint64_t kStreamChain = 1;
inline constexpr std::uint64_t kStreamSample = 2;

struct EntityDictionary {
  std::map<std::string, std::vector<std::string>> categories;

  /// Full data-quality check for shipped dictionaries: every category has
  /// >= 30 distinct entities and no entity is a substring of another.
  void validate() const;
  const std::vector<std::string>& pool(const std::string& category) const;
};

/// One nesting step of a question: "pre <inner> post".
struct Clause {
  std::string pre;
  std::string post;
};

struct ChainTemplate {
  std::string id;
  std::array<std::string, kChainEntities> entity_seq;           // category names
  std::array<std::string, kMaxHops> chain_texts;                // "{k} ... {k+1} ..."
  std::array<Clause, kMaxHops> clauses;                         // question nesting steps
  std::array<std::string, kMaxHops> leads;                      // "What is" / "Who is"
  std::array<std::string, kMaxHops> questions;                  // derived, slot {0} only

  void validate() const;
};

struct ReasoningChain {
  std::string template_id;
  std::size_t template_index = 0;
  std::array<std::string, kChainEntities> entities;
  std::array<std::string, kMaxHops> chain_texts;  // instantiated sentences
};

struct DistractorSet {
  std::vector<std::string> similar;
  std::vector<std::string> noise;
};

struct Sample {
  std::string id;
  std::string question;
  std::string answer;
  int hops = 0;
  long target_len = 0;
  long token_count = 0;
  long word_count = 0;
  std::vector<std::string> gold_evidence;                  // logical order
  std::vector<std::array<std::size_t, 2>> evidence_spans;  // physical order, [start, end)
  std::string context;
  // chain provenance, consumed by the oracle mocks and step scoring
  std::string chain_template_id;
  std::vector<std::string> chain_entities;
};

struct DatasetConfig {
  int n_per_cell = 300;
  std::vector<long> lengths = {500, 1000, 2000, 4000, 8000, 10000};
  std::vector<int> hops = {1, 2, 3, 4};
  std::uint64_t seed = 20240901;
  double token_factor = 1.3;  // whitespace words -> tokens
  int n_var = 5;              // entity variations per distractor relation
  // similar-distractor and noise supply as affine functions of L
  double dist_intercept = 0.0;
  double dist_slope = 0.02;
  double noise_intercept = 4.0;
  double noise_slope = 0.01;
  // physical evidence order (1-based logical indices) and fractional positions
  std::map<int, std::vector<int>> evidence_order = {
      {1, {1}}, {2, {2, 1}}, {3, {2, 3, 1}}, {4, {2, 4, 3, 1}}};
  std::map<int, std::vector<double>> evidence_positions = {
      {1, {1.0 / 2}},
      {2, {1.0 / 3, 2.0 / 3}},
      {3, {1.0 / 4, 2.0 / 4, 3.0 / 4}},
      {4, {1.0 / 5, 2.0 / 5, 3.0 / 5, 4.0 / 5}}};

  void validate() const;
};

struct CellStats {
  int hops = 0;
  long context_len = 0;
  int count = 0;
  double mean_abs_token_error_pct = 0.0;
  double mean_token_count = 0.0;
};

struct DatasetStats {
  std::vector<CellStats> cells;
  std::map<std::string, int> template_usage;
  long grand_total = 0;
};

// ---------------------------------------------------------------------------
// Token accounting
// ---------------------------------------------------------------------------

long count_words(std::string_view text);
/// Whitespace word count times the words-to-tokens factor, rounded to nearest.
long count_tokens(std::string_view text, double factor = 1.3);

// ---------------------------------------------------------------------------
// Question rendering
// ---------------------------------------------------------------------------

/// Right-nested question over relations [first_rel, last_rel]:
///   leads[last] + clauses[last](... clauses[first]("frontier") ...) + "?"
/// The frontier text is embedded in double quotes.
std::string render_query(const ChainTemplate& tmpl, const std::string& frontier, int first_rel,
                         int last_rel);

/// Instantiate "{k}" slots with the given entity values.
std::string instantiate(std::string text,
                        const std::array<std::string, kChainEntities>& entities);

// ---------------------------------------------------------------------------
// Generation phases
// ---------------------------------------------------------------------------

ReasoningChain generate_chain(const ChainTemplate& tmpl, const EntityDictionary& dict,
                              rng::SplitMix64& rng);

/// floor(n_dist * (1 + 0.6 * (h - 1)))
int scale_distractors(int n_dist, int h);

/// n_dist template-substituted similar sentences over all four relations plus
/// n_noise draws from the generic pool. Substituted entities never collide
/// with any chain entity and never reuse a gold subject for its own relation.
DistractorSet generate_distractors(const ReasoningChain& chain, const ChainTemplate& tmpl,
                                   int n_dist, int n_var, int n_noise,
                                   const EntityDictionary& dict,
                                   const std::vector<std::string>& noise_pool,
                                   rng::SplitMix64& rng);

/// Assemble the context: gold sentences in the configured physical order at
/// the configured fractional positions, interleaved distractor/noise filler,
/// noise padding to the target token count. Returns the context and the gold
/// sentences' [start, end) character spans in physical order.
std::pair<std::string, std::vector<std::array<std::size_t, 2>>> create_context(
    const std::vector<std::string>& gold_logical, const DistractorSet& distractors,
    const DatasetConfig& cfg, int h, long target_len, rng::SplitMix64& rng);

std::vector<ReasoningChain> build_chains(const DatasetConfig& cfg,
                                         const std::vector<ChainTemplate>& templates,
                                         const EntityDictionary& dict);

std::vector<Sample> build_cell(const DatasetConfig& cfg,
                               const std::vector<ChainTemplate>& templates,
                               const EntityDictionary& dict,
                               const std::vector<std::string>& noise_pool,
                               const std::vector<ReasoningChain>& chains, int h, long target_len);

/// Full pipeline: build every (h, L) cell and write `{h}hop/multi_hop_chain_{L}k.json`
/// plus `stats.json` under out_dir.
DatasetStats write_dataset(const DatasetConfig& cfg, const std::vector<ChainTemplate>& templates,
                           const EntityDictionary& dict,
                           const std::vector<std::string>& noise_pool,
                           const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Data file I/O
// ---------------------------------------------------------------------------

EntityDictionary load_entities(const std::filesystem::path& file);
std::vector<ChainTemplate> load_templates(const std::filesystem::path& file);
std::vector<std::string> load_noise_pool(const std::filesystem::path& file);
DatasetConfig config_from_json(const nlohmann::json& j);

nlohmann::ordered_json sample_to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);
std::vector<Sample> load_samples(const std::filesystem::path& file);

/// "0.5" for 500, "1" for 1000, "10" for 10000.
std::string length_label(long target_len);

}  // namespace infoqa::benchgen
