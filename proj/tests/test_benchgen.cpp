#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "infoqa/benchgen.hpp"
#include "infoqa/rng.hpp"

using namespace infoqa;
namespace bg = infoqa::benchgen;
namespace fs = std::filesystem;

namespace {

const fs::path kDataDir = INFOQA_DATA_DIR;

struct Fixture {
  bg::EntityDictionary dict = bg::load_entities(kDataDir / "entities.json");
  std::vector<bg::ChainTemplate> templates = bg::load_templates(kDataDir / "templates.json");
  std::vector<std::string> noise = bg::load_noise_pool(kDataDir / "noise.json");
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

long count_occurrences(const std::string& haystack, const std::string& needle) {
  long n = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += 1;
  }
  return n;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Split a chain sentence template "pre {k} mid {k+1} post" and extract the
/// (subject, object) of a sentence instantiated from it, if it matches.
bool match_relation(const std::string& sentence, const std::string& tmpl, int k,
                    std::string* subject, std::string* object) {
  const std::string s_slot = "{" + std::to_string(k) + "}";
  const std::string o_slot = "{" + std::to_string(k + 1) + "}";
  const auto s_pos = tmpl.find(s_slot);
  const auto o_pos = tmpl.find(o_slot);
  const std::string pre = tmpl.substr(0, s_pos);
  const std::string mid = tmpl.substr(s_pos + s_slot.size(), o_pos - s_pos - s_slot.size());
  const std::string post = tmpl.substr(o_pos + o_slot.size());
  if (sentence.size() < pre.size() + mid.size() + post.size()) return false;
  if (sentence.compare(0, pre.size(), pre) != 0) return false;
  if (sentence.compare(sentence.size() - post.size(), post.size(), post) != 0) return false;
  const std::string middle =
      sentence.substr(pre.size(), sentence.size() - pre.size() - post.size());
  const auto mid_pos = middle.find(mid);
  if (mid_pos == std::string::npos) return false;
  *subject = middle.substr(0, mid_pos);
  *object = middle.substr(mid_pos + mid.size());
  return true;
}

}  // namespace

TEST_CASE("count_tokens: worked examples") {
  CHECK(bg::count_tokens("") == 0);
  CHECK(bg::count_tokens("a b c d e f g h i j", 1.3) == 13);
  CHECK(bg::count_tokens("one two", 1.0) == 2);
  CHECK(bg::count_words("  spaced   out\ttokens\n") == 3);
}

TEST_CASE("scale_distractors: worked examples") {
  CHECK(bg::scale_distractors(10, 1) == 10);
  CHECK(bg::scale_distractors(10, 3) == 22);
  CHECK(bg::scale_distractors(7, 4) == 19);
  CHECK(bg::scale_distractors(0, 4) == 0);
  CHECK_THROWS_AS(bg::scale_distractors(-1, 2), std::invalid_argument);
  CHECK_THROWS_AS(bg::scale_distractors(5, 5), std::invalid_argument);
}

TEST_CASE("shipped data files validate") {
  const auto& f = fixture();
  CHECK(f.dict.categories.size() >= 6);
  CHECK(f.templates.size() >= 8);
  CHECK(f.noise.size() >= 30);
  // no entity appears inside any noise sentence
  for (const auto& sentence : f.noise) {
    for (const auto& [category, pool] : f.dict.categories) {
      for (const auto& entity : pool) {
        CHECK(sentence.find(entity) == std::string::npos);
      }
    }
  }
}

TEST_CASE("entity dictionary validation catches bad data") {
  bg::EntityDictionary dict;
  dict.categories["person"] = {"A"};
  CHECK_THROWS_AS(dict.validate(), bg::ConfigError);

  dict.categories.clear();
  std::vector<std::string> pool;
  for (int i = 0; i < 30; ++i) {
    pool.push_back("Entity " + std::string(1, static_cast<char>('A' + i / 10)) +
                   std::to_string(i % 10));
  }
  dict.categories["person"] = pool;
  CHECK_NOTHROW(dict.validate());

  auto duplicated = pool;
  duplicated[5] = duplicated[6];
  dict.categories["person"] = duplicated;
  CHECK_THROWS_AS(dict.validate(), bg::ConfigError);

  auto substrings = pool;
  substrings[5] = pool[6] + " Extended";  // contains another entity
  dict.categories["person"] = substrings;
  CHECK_THROWS_AS(dict.validate(), bg::ConfigError);
}

TEST_CASE("render_query: nesting and question templates") {
  const auto& f = fixture();
  const auto& tmpl = f.templates.front();  // novel_adaptation
  CHECK(bg::render_query(tmpl, "Arlo Tregarren", 0, 0) ==
        "What is the novel written by \"Arlo Tregarren\"?");
  CHECK(bg::render_query(tmpl, "Arlo Tregarren", 0, 1) ==
        "What is the film adapted from the novel written by \"Arlo Tregarren\"?");
  // question templates reference only slot {0}
  for (const auto& t : f.templates) {
    for (int h = 1; h <= bg::kMaxHops; ++h) {
      const auto& q = t.questions[static_cast<std::size_t>(h - 1)];
      CHECK(q.find("{0}") != std::string::npos);
      CHECK(q == bg::render_query(t, "{0}", 0, h - 1));
    }
  }
}

TEST_CASE("generate_chain: determinism, containment, distinctness") {
  const auto& f = fixture();
  const auto& tmpl = f.templates.front();

  auto rng1 = rng::substream(42, {bg::kStreamChain, 0, 0, 0});
  auto rng2 = rng::substream(42, {bg::kStreamChain, 0, 0, 0});
  const auto a = bg::generate_chain(tmpl, f.dict, rng1);
  const auto b = bg::generate_chain(tmpl, f.dict, rng2);
  CHECK(a.entities == b.entities);
  CHECK(a.chain_texts == b.chain_texts);

  // chain_texts[k] mentions entity k and entity k+1 verbatim
  for (int k = 0; k < bg::kMaxHops; ++k) {
    CHECK(a.chain_texts[k].find(a.entities[k]) != std::string::npos);
    CHECK(a.chain_texts[k].find(a.entities[k + 1]) != std::string::npos);
  }
  const std::set<std::string> unique(a.entities.begin(), a.entities.end());
  CHECK(unique.size() == bg::kChainEntities);

  // missing category is a configuration error
  bg::EntityDictionary missing = f.dict;
  missing.categories.erase("film");
  auto rng3 = rng::substream(42, {bg::kStreamChain, 0, 0, 0});
  CHECK_THROWS_AS(bg::generate_chain(tmpl, missing, rng3), bg::ConfigError);
}

TEST_CASE("generate_distractors: counts, guard, determinism") {
  const auto& f = fixture();
  const auto& tmpl = f.templates.front();
  auto chain_rng = rng::substream(7, {bg::kStreamChain, 0, 0, 3});
  const auto chain = bg::generate_chain(tmpl, f.dict, chain_rng);

  auto rng0 = rng::substream(7, {bg::kStreamSample, 2, 500, 3});
  const auto empty = bg::generate_distractors(chain, tmpl, 0, 5, 0, f.dict, f.noise, rng0);
  CHECK(empty.similar.empty());
  CHECK(empty.noise.empty());

  auto rng1 = rng::substream(7, {bg::kStreamSample, 2, 500, 3});
  const auto d1 = bg::generate_distractors(chain, tmpl, 40, 5, 10, f.dict, f.noise, rng1);
  auto rng2 = rng::substream(7, {bg::kStreamSample, 2, 500, 3});
  const auto d2 = bg::generate_distractors(chain, tmpl, 40, 5, 10, f.dict, f.noise, rng2);
  CHECK(d1.similar == d2.similar);  // byte-identical under the same stream
  CHECK(d1.noise == d2.noise);
  CHECK(d1.similar.size() == 40);
  CHECK(d1.noise.size() == 10);

  for (const auto& sentence : d1.similar) {
    // never equal to a gold sentence
    for (const auto& gold : chain.chain_texts) CHECK(sentence != gold);
    // no chain entity may appear at all (uniqueness guard + leakage)
    for (const auto& entity : chain.entities) {
      CHECK(sentence.find(entity) == std::string::npos);
    }
    // structural guard: no gold (subject, relation) pair with a different object
    for (int k = 0; k < bg::kMaxHops; ++k) {
      std::string subject, object;
      if (match_relation(sentence, tmpl.chain_texts[k], k, &subject, &object)) {
        CHECK(subject != chain.entities[k]);
      }
    }
  }
}

TEST_CASE("generate_distractors: pool too small for the uniqueness guard") {
  const auto& f = fixture();
  const auto& tmpl = f.templates.front();
  auto chain_rng = rng::substream(9, {bg::kStreamChain, 0, 0, 0});
  const auto chain = bg::generate_chain(tmpl, f.dict, chain_rng);

  bg::EntityDictionary tiny;
  for (const auto& cat : tmpl.entity_seq) {
    tiny.categories[cat] = {f.dict.pool(cat)[0], f.dict.pool(cat)[1]};
  }
  auto rng = rng::substream(9, {bg::kStreamSample, 1, 500, 0});
  try {
    bg::generate_distractors(chain, tmpl, 10, 50, 0, tiny, f.noise, rng);
    FAIL("expected GenerationError");
  } catch (const bg::GenerationError& err) {
    CHECK(std::string(err.what()).find(tmpl.id) != std::string::npos);  // names the template
  }
}

TEST_CASE("create_context: placement, token budget, spans") {
  const auto& f = fixture();
  const bg::DatasetConfig cfg;
  const auto& tmpl = f.templates[1];
  auto chain_rng = rng::substream(21, {bg::kStreamChain, 0, 0, 1});
  const auto chain = bg::generate_chain(tmpl, f.dict, chain_rng);

  for (const int h : {1, 2, 3, 4}) {
    for (const long target : {500L, 2000L}) {
      auto rng = rng::substream(21, {bg::kStreamSample, static_cast<std::uint64_t>(h),
                                     static_cast<std::uint64_t>(target), 1});
      const int n_dist = bg::scale_distractors(static_cast<int>(target / 50), h);
      const auto d = bg::generate_distractors(chain, tmpl, n_dist, cfg.n_var,
                                              static_cast<int>(target / 100) + 4, f.dict,
                                              f.noise, rng);
      std::vector<std::string> gold(chain.chain_texts.begin(), chain.chain_texts.begin() + h);
      const auto [context, spans] = bg::create_context(gold, d, cfg, h, target, rng);

      // token budget within +/-5%
      const long tokens = bg::count_tokens(context, cfg.token_factor);
      CHECK(std::abs(tokens - target) <= 0.05 * static_cast<double>(target));

      // spans point at the gold sentences, in physical order
      REQUIRE(spans.size() == static_cast<std::size_t>(h));
      const auto& order = cfg.evidence_order.at(h);
      for (int i = 0; i < h; ++i) {
        const auto [begin, end] = std::pair(spans[i][0], spans[i][1]);
        CHECK(context.substr(begin, end - begin) == gold[order[i] - 1]);
      }

      // fractional placement error <= 2% (in tokens)
      const auto& fracs = cfg.evidence_positions.at(h);
      for (int i = 0; i < h; ++i) {
        const long offset = bg::count_tokens(context.substr(0, spans[i][0]), cfg.token_factor);
        const double expected = fracs[i] * static_cast<double>(tokens);
        CHECK(std::abs(offset - expected) <= 0.02 * static_cast<double>(tokens));
      }
    }
  }
}

TEST_CASE("create_context: target too small to hold the evidence") {
  const auto& f = fixture();
  const bg::DatasetConfig cfg;
  const auto& tmpl = f.templates.front();
  auto chain_rng = rng::substream(22, {bg::kStreamChain, 0, 0, 2});
  const auto chain = bg::generate_chain(tmpl, f.dict, chain_rng);
  auto rng = rng::substream(22, {bg::kStreamSample, 4, 30, 2});
  const auto d = bg::generate_distractors(chain, tmpl, 4, 5, 4, f.dict, f.noise, rng);
  std::vector<std::string> gold(chain.chain_texts.begin(), chain.chain_texts.end());
  CHECK_THROWS_AS(bg::create_context(gold, d, cfg, 4, 30, rng), bg::GenerationError);
}

TEST_CASE("build_cell: sample invariants") {
  const auto& f = fixture();
  bg::DatasetConfig cfg;
  cfg.n_per_cell = 16;
  cfg.seed = 77;
  const auto chains = bg::build_chains(cfg, f.templates, f.dict);
  REQUIRE(chains.size() == 16);
  // round-robin template assignment
  for (std::size_t i = 0; i < chains.size(); ++i) {
    CHECK(chains[i].template_id == f.templates[i % f.templates.size()].id);
  }

  for (const int h : {1, 3}) {
    const auto samples = bg::build_cell(cfg, f.templates, f.dict, f.noise, chains, h, 1000);
    REQUIRE(samples.size() == 16);
    for (const auto& s : samples) {
      CHECK(s.hops == h);
      CHECK(s.target_len == 1000);
      CHECK(s.gold_evidence.size() == static_cast<std::size_t>(h));
      // answer appears verbatim, and only inside its gold sentence
      CHECK(count_occurrences(s.context, s.answer) == 1);
      // every gold sentence appears exactly once
      for (const auto& gold : s.gold_evidence) {
        CHECK(count_occurrences(s.context, gold) == 1);
      }
      // bridge entities appear exactly twice (their two gold sentences)
      for (int k = 1; k < h; ++k) {
        CHECK(count_occurrences(s.context, s.chain_entities[k]) == 2);
      }
      // question mentions the start entity, not the answer
      CHECK(s.question.find(s.chain_entities[0]) != std::string::npos);
      CHECK(s.question.find(s.answer) == std::string::npos);
      CHECK(s.token_count == bg::count_tokens(s.context, cfg.token_factor));
    }
  }
}

TEST_CASE("write_dataset: files, stats, byte-identical regeneration") {
  const auto& f = fixture();
  bg::DatasetConfig cfg;
  cfg.n_per_cell = 2;
  cfg.lengths = {500};
  cfg.hops = {1, 2};
  cfg.seed = 5;

  const fs::path dir_a = fs::temp_directory_path() / "infoqa_test_ds_a";
  const fs::path dir_b = fs::temp_directory_path() / "infoqa_test_ds_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  const auto stats = bg::write_dataset(cfg, f.templates, f.dict, f.noise, dir_a);
  CHECK(stats.grand_total == 4);  // 2 cells x 2
  CHECK(stats.cells.size() == 2);
  CHECK(fs::exists(dir_a / "1hop" / "multi_hop_chain_0.5k.json"));
  CHECK(fs::exists(dir_a / "2hop" / "multi_hop_chain_0.5k.json"));
  CHECK(fs::exists(dir_a / "stats.json"));

  bg::write_dataset(cfg, f.templates, f.dict, f.noise, dir_b);
  for (const auto* rel : {"1hop/multi_hop_chain_0.5k.json", "2hop/multi_hop_chain_0.5k.json",
                          "stats.json"}) {
    CHECK(read_file(dir_a / rel) == read_file(dir_b / rel));
  }

  // parse round trip
  const auto samples = bg::load_samples(dir_a / "2hop" / "multi_hop_chain_0.5k.json");
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].hops == 2);
  CHECK(samples[0].chain_entities.size() == bg::kChainEntities);
  CHECK(samples[0].context.find(samples[0].answer) != std::string::npos);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("length_label") {
  CHECK(bg::length_label(500) == "0.5");
  CHECK(bg::length_label(1000) == "1");
  CHECK(bg::length_label(2000) == "2");
  CHECK(bg::length_label(10000) == "10");
}

TEST_CASE("config_from_json: defaults, overrides, validation") {
  const auto defaults = bg::config_from_json(nlohmann::json::object());
  CHECK(defaults.n_per_cell == 300);
  CHECK(defaults.lengths == std::vector<long>{500, 1000, 2000, 4000, 8000, 10000});
  CHECK(defaults.hops == std::vector<int>{1, 2, 3, 4});
  CHECK(defaults.evidence_order.at(4) == std::vector<int>{2, 4, 3, 1});
  CHECK(defaults.evidence_positions.at(3) ==
        std::vector<double>{1.0 / 4, 2.0 / 4, 3.0 / 4});

  nlohmann::json overrides = {{"n_per_cell", 7}, {"lengths", {500, 1000}}, {"hops", {2}}};
  const auto cfg = bg::config_from_json(overrides);
  CHECK(cfg.n_per_cell == 7);
  CHECK(cfg.lengths.size() == 2);

  nlohmann::json bad_order = {{"evidence_order", {{"2", {1, 1}}}}};
  CHECK_THROWS_AS(bg::config_from_json(bad_order), bg::ConfigError);
  nlohmann::json bad_hops = {{"hops", {0}}};
  CHECK_THROWS_AS(bg::config_from_json(bad_hops), bg::ConfigError);
  nlohmann::json bad_cell = {{"n_per_cell", 0}};
  CHECK_THROWS_AS(bg::config_from_json(bad_cell), bg::ConfigError);
}
