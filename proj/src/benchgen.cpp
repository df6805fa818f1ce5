#include "infoqa/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace infoqa::benchgen {

namespace {

constexpr int kMinEntitiesPerCategory = 30;
constexpr int kShortFillerMaxWords = 6;
constexpr int kPickAttempts = 200;

std::string slot(int k) { return "{" + std::to_string(k) + "}"; }

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string cell_tag(int h, long len, int index) {
  return "(h=" + std::to_string(h) + ", L=" + std::to_string(len) +
         ", index=" + std::to_string(index) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void EntityDictionary::validate() const {
  if (categories.empty()) throw ConfigError("entity dictionary: no categories");
  std::vector<const std::string*> all;
  for (const auto& [name, pool] : categories) {
    if (static_cast<int>(pool.size()) < kMinEntitiesPerCategory) {
      throw ConfigError("entity dictionary: category '" + name + "' has " +
                        std::to_string(pool.size()) + " entities, need >= " +
                        std::to_string(kMinEntitiesPerCategory));
    }
    std::set<std::string> seen;
    for (const auto& e : pool) {
      if (e.empty()) throw ConfigError("entity dictionary: empty entity in '" + name + "'");
      if (!seen.insert(e).second) {
        throw ConfigError("entity dictionary: duplicate entity '" + e + "' in '" + name + "'");
      }
      all.push_back(&e);
    }
  }
  // No entity may be a substring of another; substring collisions would make
  // leakage and uniqueness checks ambiguous.
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i != j && all[j]->size() > all[i]->size() &&
          all[j]->find(*all[i]) != std::string::npos) {
        throw ConfigError("entity dictionary: '" + *all[i] + "' is a substring of '" + *all[j] +
                          "'");
      }
    }
  }
}

const std::vector<std::string>& EntityDictionary::pool(const std::string& category) const {
  auto it = categories.find(category);
  if (it == categories.end()) {
    throw ConfigError("entity dictionary: missing category '" + category + "'");
  }
  return it->second;
}

void ChainTemplate::validate() const {
  if (id.empty()) throw ConfigError("chain template: empty id");
  for (int k = 0; k < kMaxHops; ++k) {
    const auto& text = chain_texts[static_cast<std::size_t>(k)];
    const auto subj = text.find(slot(k));
    const auto obj = text.find(slot(k + 1));
    if (subj == std::string::npos || obj == std::string::npos) {
      throw ConfigError("chain template '" + id + "': sentence " + std::to_string(k) +
                        " must reference slots {" + std::to_string(k) + "} and {" +
                        std::to_string(k + 1) + "}");
    }
    if (subj > obj) {
      throw ConfigError("chain template '" + id + "': sentence " + std::to_string(k) +
                        " must mention the subject slot before the object slot");
    }
    for (int other = 0; other < kChainEntities; ++other) {
      if (other == k || other == k + 1) continue;
      if (text.find(slot(other)) != std::string::npos) {
        throw ConfigError("chain template '" + id + "': sentence " + std::to_string(k) +
                          " references foreign slot {" + std::to_string(other) + "}");
      }
    }
    if (clauses[static_cast<std::size_t>(k)].pre.empty()) {
      throw ConfigError("chain template '" + id + "': clause " + std::to_string(k) +
                        " needs a non-empty prefix");
    }
    if (leads[static_cast<std::size_t>(k)].empty()) {
      throw ConfigError("chain template '" + id + "': missing lead " + std::to_string(k));
    }
    const auto& q = questions[static_cast<std::size_t>(k)];
    if (q.find(slot(0)) == std::string::npos) {
      throw ConfigError("chain template '" + id + "': question " + std::to_string(k) +
                        " must reference slot {0}");
    }
    for (int other = 1; other < kChainEntities; ++other) {
      if (q.find(slot(other)) != std::string::npos) {
        throw ConfigError("chain template '" + id + "': question " + std::to_string(k) +
                          " may only reference slot {0}");
      }
    }
  }
}

void DatasetConfig::validate() const {
  if (n_per_cell < 1) throw ConfigError("dataset config: n_per_cell must be >= 1");
  if (lengths.empty()) throw ConfigError("dataset config: lengths must be non-empty");
  for (long len : lengths) {
    if (len < 1) throw ConfigError("dataset config: lengths must be positive");
  }
  if (hops.empty()) throw ConfigError("dataset config: hops must be non-empty");
  for (int h : hops) {
    if (h < 1 || h > kMaxHops) {
      throw ConfigError("dataset config: hops must be within 1.." + std::to_string(kMaxHops));
    }
    auto order_it = evidence_order.find(h);
    auto pos_it = evidence_positions.find(h);
    if (order_it == evidence_order.end() || pos_it == evidence_positions.end()) {
      throw ConfigError("dataset config: missing evidence order/positions for h=" +
                        std::to_string(h));
    }
    const auto& order = order_it->second;
    const auto& pos = pos_it->second;
    if (static_cast<int>(order.size()) != h || static_cast<int>(pos.size()) != h) {
      throw ConfigError("dataset config: evidence order/positions for h=" + std::to_string(h) +
                        " must have length " + std::to_string(h));
    }
    std::set<int> seen(order.begin(), order.end());
    if (static_cast<int>(seen.size()) != h || *seen.begin() != 1 || *seen.rbegin() != h) {
      throw ConfigError("dataset config: evidence order for h=" + std::to_string(h) +
                        " must be a permutation of 1.." + std::to_string(h));
    }
    double prev = 0.0;
    for (double f : pos) {
      if (!(f > prev && f < 1.0)) {
        throw ConfigError("dataset config: evidence positions for h=" + std::to_string(h) +
                          " must be strictly increasing in (0, 1)");
      }
      prev = f;
    }
  }
  if (!(token_factor > 0.0)) throw ConfigError("dataset config: token_factor must be > 0");
  if (n_var < 1) throw ConfigError("dataset config: n_var must be >= 1");
}

// ---------------------------------------------------------------------------
// Token accounting
// ---------------------------------------------------------------------------

long count_words(std::string_view text) {
  long words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

long count_tokens(std::string_view text, double factor) {
  return std::lround(static_cast<double>(count_words(text)) * factor);
}

// ---------------------------------------------------------------------------
// Question rendering
// ---------------------------------------------------------------------------

std::string render_query(const ChainTemplate& tmpl, const std::string& frontier, int first_rel,
                         int last_rel) {
  if (first_rel < 0 || last_rel >= kMaxHops || first_rel > last_rel) {
    throw std::invalid_argument("render_query: bad relation range");
  }
  std::string nest = "\"" + frontier + "\"";
  for (int k = first_rel; k <= last_rel; ++k) {
    const auto& clause = tmpl.clauses[static_cast<std::size_t>(k)];
    nest = clause.pre + nest + clause.post;
  }
  return tmpl.leads[static_cast<std::size_t>(last_rel)] + " " + nest + "?";
}

std::string instantiate(std::string text,
                        const std::array<std::string, kChainEntities>& entities) {
  for (int k = 0; k < kChainEntities; ++k) {
    replace_all(text, slot(k), entities[static_cast<std::size_t>(k)]);
  }
  return text;
}

// ---------------------------------------------------------------------------
// Phase 2: chains
// ---------------------------------------------------------------------------

ReasoningChain generate_chain(const ChainTemplate& tmpl, const EntityDictionary& dict,
                              rng::SplitMix64& rng) {
  ReasoningChain chain;
  chain.template_id = tmpl.id;
  std::set<std::string> used;
  for (int k = 0; k < kChainEntities; ++k) {
    const auto& pool = dict.pool(tmpl.entity_seq[static_cast<std::size_t>(k)]);
    std::optional<std::string> picked;
    for (int attempt = 0; attempt < kPickAttempts; ++attempt) {
      const std::string& candidate = rng.pick(pool);
      if (used.insert(candidate).second) {
        picked = candidate;
        break;
      }
    }
    if (!picked) {
      throw GenerationError("generate_chain: could not sample 5 distinct entities for template '" +
                            tmpl.id + "'");
    }
    chain.entities[static_cast<std::size_t>(k)] = *picked;
  }
  for (int k = 0; k < kMaxHops; ++k) {
    chain.chain_texts[static_cast<std::size_t>(k)] =
        instantiate(tmpl.chain_texts[static_cast<std::size_t>(k)], chain.entities);
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Phase 3: distractors
// ---------------------------------------------------------------------------

int scale_distractors(int n_dist, int h) {
  if (n_dist < 0) throw std::invalid_argument("scale_distractors: n_dist must be >= 0");
  if (h < 1 || h > kMaxHops) throw std::invalid_argument("scale_distractors: h must be in 1..4");
  return static_cast<int>(std::floor(n_dist * (1.0 + 0.6 * (h - 1))));
}

DistractorSet generate_distractors(const ReasoningChain& chain, const ChainTemplate& tmpl,
                                   int n_dist, int n_var, int n_noise,
                                   const EntityDictionary& dict,
                                   const std::vector<std::string>& noise_pool,
                                   rng::SplitMix64& rng) {
  if (n_dist < 0 || n_noise < 0 || n_var < 1) {
    throw std::invalid_argument("generate_distractors: bad counts");
  }
  DistractorSet out;
  if (n_dist > 0) {
    const std::set<std::string> forbidden(chain.entities.begin(), chain.entities.end());

    // n_var substitute (subject, object) pairs per relation; the subject
    // guard keeps every gold (subject, relation) resolvable to one object.
    std::array<std::vector<std::pair<std::string, std::string>>, kMaxHops> variants;
    for (int k = 0; k < kMaxHops; ++k) {
      const auto& subj_pool = dict.pool(tmpl.entity_seq[static_cast<std::size_t>(k)]);
      const auto& obj_pool = dict.pool(tmpl.entity_seq[static_cast<std::size_t>(k + 1)]);
      std::set<std::pair<std::string, std::string>> seen;
      auto& list = variants[static_cast<std::size_t>(k)];
      int attempts = 0;
      const int budget = kPickAttempts * n_var;
      while (static_cast<int>(list.size()) < n_var && attempts < budget) {
        ++attempts;
        const std::string& subject = rng.pick(subj_pool);
        const std::string& object = rng.pick(obj_pool);
        if (subject == object) continue;
        if (forbidden.count(subject) || forbidden.count(object)) continue;
        if (!seen.insert({subject, object}).second) continue;
        list.push_back({subject, object});
      }
      if (static_cast<int>(list.size()) < n_var) {
        throw GenerationError(
            "generate_distractors: entity pool too small to satisfy the uniqueness guard for "
            "template '" +
            tmpl.id + "', relation " + std::to_string(k));
      }
    }

    out.similar.reserve(static_cast<std::size_t>(n_dist));
    for (int j = 0; j < n_dist; ++j) {
      const int k = j % kMaxHops;
      const auto& [subject, object] =
          variants[static_cast<std::size_t>(k)][static_cast<std::size_t>(rng.below(
              static_cast<std::uint64_t>(n_var)))];
      std::string text = tmpl.chain_texts[static_cast<std::size_t>(k)];
      replace_all(text, slot(k), subject);
      replace_all(text, slot(k + 1), object);
      out.similar.push_back(std::move(text));
    }
  }

  if (n_noise > 0) {
    if (noise_pool.empty()) throw ConfigError("generate_distractors: empty noise pool");
    out.noise.reserve(static_cast<std::size_t>(n_noise));
    // a fixed quota of the pool's shortest sentences keeps word-granular
    // padding material available to the context assembler
    std::vector<std::size_t> by_length(noise_pool.size());
    for (std::size_t i = 0; i < by_length.size(); ++i) by_length[i] = i;
    std::stable_sort(by_length.begin(), by_length.end(), [&](std::size_t a, std::size_t b) {
      return count_words(noise_pool[a]) < count_words(noise_pool[b]);
    });
    const int quota = std::min(n_noise, std::min<int>(4, static_cast<int>(noise_pool.size())));
    for (int j = 0; j < quota; ++j) {
      out.noise.push_back(noise_pool[by_length[static_cast<std::size_t>(j)]]);
    }
    for (int j = quota; j < n_noise; ++j) out.noise.push_back(rng.pick(noise_pool));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase 5: context assembly
// ---------------------------------------------------------------------------

namespace {

/// Alternating similar/noise filler (each side pre-shuffled by the caller);
/// once both lists run dry, draws endlessly from the noise list again.
class FillerStream {
 public:
  FillerStream(std::vector<std::string> similar, std::vector<std::string> noise,
               rng::SplitMix64& rng)
      : similar_(std::move(similar)), noise_(std::move(noise)), rng_(rng) {}

  const std::string& next() {
    for (int side = 0; side < 2; ++side) {
      const bool take_similar = next_similar_;
      next_similar_ = !next_similar_;
      if (take_similar && si_ < similar_.size()) return similar_[si_++];
      if (!take_similar && ni_ < noise_.size()) return noise_[ni_++];
    }
    if (noise_.empty()) {
      throw GenerationError("create_context: not enough filler material to reach target length");
    }
    return rng_.pick(noise_);
  }

 private:
  std::vector<std::string> similar_;
  std::vector<std::string> noise_;
  rng::SplitMix64& rng_;
  std::size_t si_ = 0, ni_ = 0;
  bool next_similar_ = true;
};

}  // namespace

std::pair<std::string, std::vector<std::array<std::size_t, 2>>> create_context(
    const std::vector<std::string>& gold_logical, const DistractorSet& distractors,
    const DatasetConfig& cfg, int h, long target_len, rng::SplitMix64& rng) {
  if (static_cast<int>(gold_logical.size()) != h) {
    throw std::invalid_argument("create_context: |gold| must equal h");
  }
  const auto& order = cfg.evidence_order.at(h);
  const auto& fracs = cfg.evidence_positions.at(h);
  const long target_words = std::lround(static_cast<double>(target_len) / cfg.token_factor);

  std::vector<std::string> gold_physical;
  gold_physical.reserve(static_cast<std::size_t>(h));
  long gold_words = 0;
  for (int idx : order) {
    gold_physical.push_back(gold_logical[static_cast<std::size_t>(idx - 1)]);
    gold_words += count_words(gold_physical.back());
  }
  if (gold_words > target_words) {
    throw GenerationError("create_context: target_len " + std::to_string(target_len) +
                          " too small to hold " + std::to_string(h) + " gold sentences");
  }

  // Short generic sentences give word-level control over placement error.
  std::vector<std::pair<const std::string*, long>> short_fillers;
  for (const auto& sentence : distractors.noise) {
    const long words = count_words(sentence);
    if (words > 0 && words <= kShortFillerMaxWords) short_fillers.push_back({&sentence, words});
  }

  std::vector<std::string> similar_shuffled = distractors.similar;
  std::vector<std::string> noise_shuffled = distractors.noise;
  rng.shuffle(similar_shuffled);
  rng.shuffle(noise_shuffled);
  FillerStream stream{std::move(similar_shuffled), std::move(noise_shuffled), rng};

  std::vector<std::string> parts;
  parts.reserve(distractors.similar.size() + distractors.noise.size() +
                static_cast<std::size_t>(h) + 16);
  std::vector<std::size_t> gold_part_index;
  long cur = 0;
  std::optional<std::string> pending;
  long pending_words = 0;

  auto fill_until = [&](long desired) {
    while (cur < desired) {
      if (!pending) {
        pending = stream.next();
        pending_words = count_words(*pending);
      }
      if (cur + pending_words <= desired) {
        parts.push_back(std::move(*pending));
        cur += pending_words;
        pending.reset();
        continue;
      }
      break;  // residual gap is below one stream sentence; close with shorts
    }
    while (cur < desired) {
      const long gap = desired - cur;
      const std::string* best = nullptr;
      long best_words = 0;
      for (const auto& [text, words] : short_fillers) {
        if (words <= gap && words > best_words) {
          best = text;
          best_words = words;
        }
      }
      if (!best) break;
      parts.push_back(*best);
      cur += best_words;
    }
  };

  const long tolerance = std::max<long>(1, std::lround(0.02 * target_words));
  for (int i = 0; i < h; ++i) {
    const long desired = std::lround(fracs[static_cast<std::size_t>(i)] * target_words);
    if (cur > desired + tolerance) {
      throw GenerationError("create_context: target_len " + std::to_string(target_len) +
                            " too small to place evidence at the configured positions");
    }
    fill_until(desired);
    gold_part_index.push_back(parts.size());
    parts.push_back(gold_physical[static_cast<std::size_t>(i)]);
    cur += count_words(gold_physical[static_cast<std::size_t>(i)]);
  }
  fill_until(target_words);

  std::string context;
  context.reserve(static_cast<std::size_t>(target_words) * 8);
  std::vector<std::array<std::size_t, 2>> spans(gold_part_index.size());
  std::size_t next_gold = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (p > 0) context += ' ';
    const std::size_t start = context.size();
    context += parts[p];
    if (next_gold < gold_part_index.size() && gold_part_index[next_gold] == p) {
      spans[next_gold] = {start, context.size()};
      ++next_gold;
    }
  }
  return {std::move(context), std::move(spans)};
}

// ---------------------------------------------------------------------------
// Phases 4 & 6: cells and files
// ---------------------------------------------------------------------------

std::vector<ReasoningChain> build_chains(const DatasetConfig& cfg,
                                         const std::vector<ChainTemplate>& templates,
                                         const EntityDictionary& dict) {
  if (templates.empty()) throw ConfigError("build_chains: no templates");
  std::vector<ReasoningChain> chains;
  chains.reserve(static_cast<std::size_t>(cfg.n_per_cell));
  for (int i = 0; i < cfg.n_per_cell; ++i) {
    const std::size_t t = static_cast<std::size_t>(i) % templates.size();
    auto rng = rng::substream(cfg.seed, {kStreamChain, 0, 0, static_cast<std::uint64_t>(i)});
    ReasoningChain chain = generate_chain(templates[t], dict, rng);
    chain.template_index = t;
    chains.push_back(std::move(chain));
  }
  return chains;
}

std::vector<Sample> build_cell(const DatasetConfig& cfg,
                               const std::vector<ChainTemplate>& templates,
                               const EntityDictionary& dict,
                               const std::vector<std::string>& noise_pool,
                               const std::vector<ReasoningChain>& chains, int h, long target_len) {
  std::vector<Sample> samples;
  samples.reserve(chains.size());
  const int n_dist_base =
      std::max<int>(0, static_cast<int>(std::lround(cfg.dist_intercept +
                                                    cfg.dist_slope * static_cast<double>(
                                                                         target_len))));
  const int n_noise =
      std::max<int>(0, static_cast<int>(std::lround(cfg.noise_intercept +
                                                    cfg.noise_slope * static_cast<double>(
                                                                          target_len))));
  const int n_dist = scale_distractors(n_dist_base, h);

  for (std::size_t i = 0; i < chains.size(); ++i) {
    const ReasoningChain& chain = chains[i];
    const ChainTemplate& tmpl = templates[chain.template_index];
    try {
      auto rng = rng::substream(cfg.seed, {kStreamSample, static_cast<std::uint64_t>(h),
                                           static_cast<std::uint64_t>(target_len),
                                           static_cast<std::uint64_t>(i)});
      DistractorSet distractors =
          generate_distractors(chain, tmpl, n_dist, cfg.n_var, n_noise, dict, noise_pool, rng);

      std::vector<std::string> gold(chain.chain_texts.begin(), chain.chain_texts.begin() + h);
      auto [context, spans] = create_context(gold, distractors, cfg, h, target_len, rng);

      Sample sample;
      char id_buf[64];
      std::snprintf(id_buf, sizeof(id_buf), "h%d_L%ld_%04zu", h, target_len, i);
      sample.id = id_buf;
      sample.question = instantiate(tmpl.questions[static_cast<std::size_t>(h - 1)],
                                    chain.entities);
      sample.answer = chain.entities[static_cast<std::size_t>(h)];
      sample.hops = h;
      sample.target_len = target_len;
      sample.token_count = count_tokens(context, cfg.token_factor);
      sample.word_count = count_words(context);
      sample.gold_evidence = std::move(gold);
      sample.evidence_spans = std::move(spans);
      sample.context = std::move(context);
      sample.chain_template_id = chain.template_id;
      sample.chain_entities.assign(chain.entities.begin(), chain.entities.end());
      samples.push_back(std::move(sample));
    } catch (const GenerationError& err) {
      throw GenerationError(std::string(err.what()) + " at cell " +
                            cell_tag(h, target_len, static_cast<int>(i)));
    }
  }
  return samples;
}

std::string length_label(long target_len) {
  if (target_len % 1000 == 0) return std::to_string(target_len / 1000);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", static_cast<double>(target_len) / 1000.0);
  return buf;
}

DatasetStats write_dataset(const DatasetConfig& cfg, const std::vector<ChainTemplate>& templates,
                           const EntityDictionary& dict,
                           const std::vector<std::string>& noise_pool,
                           const std::filesystem::path& out_dir) {
  cfg.validate();
  dict.validate();
  for (const auto& t : templates) t.validate();
  if (noise_pool.empty()) throw ConfigError("write_dataset: empty noise pool");

  const std::vector<ReasoningChain> chains = build_chains(cfg, templates, dict);

  DatasetStats stats;
  for (const auto& chain : chains) ++stats.template_usage[chain.template_id];

  for (int h : cfg.hops) {
    const std::filesystem::path hop_dir = out_dir / (std::to_string(h) + "hop");
    std::filesystem::create_directories(hop_dir);
    for (long len : cfg.lengths) {
      std::vector<Sample> samples = build_cell(cfg, templates, dict, noise_pool, chains, h, len);

      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      CellStats cell{h, len, static_cast<int>(samples.size()), 0.0, 0.0};
      for (const auto& s : samples) {
        arr.push_back(sample_to_json(s));
        cell.mean_abs_token_error_pct +=
            100.0 * std::abs(static_cast<double>(s.token_count - s.target_len)) /
            static_cast<double>(s.target_len);
        cell.mean_token_count += static_cast<double>(s.token_count);
      }
      if (!samples.empty()) {
        cell.mean_abs_token_error_pct /= static_cast<double>(samples.size());
        cell.mean_token_count /= static_cast<double>(samples.size());
      }
      stats.cells.push_back(cell);
      stats.grand_total += static_cast<long>(samples.size());

      const std::filesystem::path file =
          hop_dir / ("multi_hop_chain_" + length_label(len) + "k.json");
      std::ofstream out(file, std::ios::binary);
      if (!out) throw GenerationError("write_dataset: cannot open " + file.string());
      out << arr.dump(2) << '\n';
    }
  }

  nlohmann::ordered_json sj;
  sj["seed"] = cfg.seed;
  sj["token_factor"] = cfg.token_factor;
  sj["n_per_cell"] = cfg.n_per_cell;
  sj["grand_total"] = stats.grand_total;
  sj["rng_scheme_version"] = rng::kSchemeVersion;
  auto& cells = sj["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : stats.cells) {
    cells.push_back({{"hops", c.hops},
                     {"context_len", c.context_len},
                     {"count", c.count},
                     {"mean_abs_token_error_pct", c.mean_abs_token_error_pct},
                     {"mean_token_count", c.mean_token_count}});
  }
  sj["template_usage"] = stats.template_usage;
  std::ofstream out(out_dir / "stats.json", std::ios::binary);
  if (!out) throw GenerationError("write_dataset: cannot open stats.json");
  out << sj.dump(2) << '\n';
  return stats;
}

// ---------------------------------------------------------------------------
// Data file I/O
// ---------------------------------------------------------------------------

namespace {

nlohmann::json parse_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError("cannot parse " + file.string() + ": " + err.what());
  }
}

}  // namespace

EntityDictionary load_entities(const std::filesystem::path& file) {
  const auto j = parse_file(file);
  EntityDictionary dict;
  for (const auto& [category, pool] : j.items()) {
    dict.categories[category] = pool.get<std::vector<std::string>>();
  }
  dict.validate();
  return dict;
}

std::vector<ChainTemplate> load_templates(const std::filesystem::path& file) {
  const auto j = parse_file(file);
  std::vector<ChainTemplate> templates;
  for (const auto& tj : j) {
    ChainTemplate t;
    t.id = tj.at("id").get<std::string>();
    const auto seq = tj.at("entity_seq").get<std::vector<std::string>>();
    const auto texts = tj.at("chain_texts").get<std::vector<std::string>>();
    const auto leads = tj.at("leads").get<std::vector<std::string>>();
    if (seq.size() != kChainEntities || texts.size() != kMaxHops || leads.size() != kMaxHops ||
        tj.at("clauses").size() != kMaxHops) {
      throw ConfigError("chain template '" + t.id + "': wrong field lengths");
    }
    std::copy(seq.begin(), seq.end(), t.entity_seq.begin());
    std::copy(texts.begin(), texts.end(), t.chain_texts.begin());
    std::copy(leads.begin(), leads.end(), t.leads.begin());
    for (int k = 0; k < kMaxHops; ++k) {
      const auto& cj = tj.at("clauses").at(static_cast<std::size_t>(k));
      t.clauses[static_cast<std::size_t>(k)] = {cj.at("pre").get<std::string>(),
                                                cj.value("post", "")};
    }
    // questions[h-1] is the h-hop question with the start entity as slot {0}
    for (int h = 1; h <= kMaxHops; ++h) {
      t.questions[static_cast<std::size_t>(h - 1)] = render_query(t, "{0}", 0, h - 1);
    }
    t.validate();
    templates.push_back(std::move(t));
  }
  if (templates.empty()) throw ConfigError("no chain templates in " + file.string());
  return templates;
}

std::vector<std::string> load_noise_pool(const std::filesystem::path& file) {
  const auto j = parse_file(file);
  auto pool = j.at("sentences").get<std::vector<std::string>>();
  if (pool.empty()) throw ConfigError("empty noise pool in " + file.string());
  return pool;
}

DatasetConfig config_from_json(const nlohmann::json& j) {
  DatasetConfig cfg;
  cfg.n_per_cell = j.value("n_per_cell", cfg.n_per_cell);
  if (j.contains("lengths")) cfg.lengths = j.at("lengths").get<std::vector<long>>();
  if (j.contains("hops")) cfg.hops = j.at("hops").get<std::vector<int>>();
  cfg.seed = j.value("seed", cfg.seed);
  cfg.token_factor = j.value("token_factor", cfg.token_factor);
  cfg.n_var = j.value("n_var", cfg.n_var);
  cfg.dist_intercept = j.value("dist_intercept", cfg.dist_intercept);
  cfg.dist_slope = j.value("dist_slope", cfg.dist_slope);
  cfg.noise_intercept = j.value("noise_intercept", cfg.noise_intercept);
  cfg.noise_slope = j.value("noise_slope", cfg.noise_slope);
  if (j.contains("evidence_order")) {
    cfg.evidence_order.clear();
    for (const auto& [key, value] : j.at("evidence_order").items()) {
      cfg.evidence_order[std::stoi(key)] = value.get<std::vector<int>>();
    }
  }
  if (j.contains("evidence_positions")) {
    cfg.evidence_positions.clear();
    for (const auto& [key, value] : j.at("evidence_positions").items()) {
      cfg.evidence_positions[std::stoi(key)] = value.get<std::vector<double>>();
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json sample_to_json(const Sample& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["answer"] = s.answer;
  j["hops"] = s.hops;
  j["target_len"] = s.target_len;
  j["token_count"] = s.token_count;
  j["word_count"] = s.word_count;
  j["gold_evidence"] = s.gold_evidence;
  auto& spans = j["evidence_spans"] = nlohmann::ordered_json::array();
  for (const auto& span : s.evidence_spans) spans.push_back({span[0], span[1]});
  j["context"] = s.context;
  j["chain"] = {{"template_id", s.chain_template_id}, {"entities", s.chain_entities}};
  return j;
}

Sample sample_from_json(const nlohmann::json& j) {
  Sample s;
  s.id = j.at("id").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.hops = j.at("hops").get<int>();
  s.target_len = j.at("target_len").get<long>();
  s.token_count = j.at("token_count").get<long>();
  s.word_count = j.at("word_count").get<long>();
  s.gold_evidence = j.at("gold_evidence").get<std::vector<std::string>>();
  for (const auto& span : j.at("evidence_spans")) {
    s.evidence_spans.push_back({span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()});
  }
  s.context = j.at("context").get<std::string>();
  if (j.contains("chain")) {
    s.chain_template_id = j.at("chain").at("template_id").get<std::string>();
    s.chain_entities = j.at("chain").at("entities").get<std::vector<std::string>>();
  }
  return s;
}

std::vector<Sample> load_samples(const std::filesystem::path& file) {
  const auto j = parse_file(file);
  std::vector<Sample> samples;
  samples.reserve(j.size());
  for (const auto& sj : j) samples.push_back(sample_from_json(sj));
  return samples;
}

}  // namespace infoqa::benchgen
