// Command-line entry point: dataset generation, evaluation runs, scoring
// reports, capacity-bound curves and grid fitting.
//
// Exit codes: 0 success, 1 partial/run failure, 2 usage or config error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "infoqa/benchgen.hpp"
#include "infoqa/fitting.hpp"
#include "infoqa/methods.hpp"
#include "infoqa/mock_model.hpp"
#include "infoqa/runio.hpp"
#include "infoqa/scoring.hpp"
#include "infoqa/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef INFOQA_DEFAULT_DATA_DIR
#define INFOQA_DEFAULT_DATA_DIR "data"
#endif

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

json load_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument("cannot parse " + path.string() + ": " + err.what());
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string sanitize_filename(std::string name) {
  for (char& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return name;
}

std::vector<double> parse_grid_spec(const std::string& spec, bool log_scale) {
  // "lo,hi,n"
  std::istringstream in(spec);
  std::string lo_s, hi_s, n_s;
  if (!std::getline(in, lo_s, ',') || !std::getline(in, hi_s, ',') || !std::getline(in, n_s)) {
    throw std::invalid_argument("grid spec must be lo,hi,n: " + spec);
  }
  const double lo = std::stod(lo_s);
  const double hi = std::stod(hi_s);
  const int n = std::stoi(n_s);
  return log_scale ? infoqa::fitting::logspace(lo, hi, n) : infoqa::fitting::linspace(lo, hi, n);
}

struct DataBundle {
  infoqa::benchgen::EntityDictionary dict;
  std::vector<infoqa::benchgen::ChainTemplate> templates;
  std::vector<std::string> noise;
};

DataBundle load_data_bundle(const fs::path& data_dir) {
  DataBundle bundle;
  bundle.dict = infoqa::benchgen::load_entities(data_dir / "entities.json");
  bundle.templates = infoqa::benchgen::load_templates(data_dir / "templates.json");
  bundle.noise = infoqa::benchgen::load_noise_pool(data_dir / "noise.json");
  return bundle;
}

std::vector<infoqa::benchgen::Sample> load_dataset(const fs::path& dataset_dir,
                                                   const std::vector<int>& hops_filter,
                                                   const std::vector<long>& lengths_filter,
                                                   int limit_per_cell) {
  std::vector<infoqa::benchgen::Sample> samples;
  if (!fs::is_directory(dataset_dir)) {
    throw std::invalid_argument("dataset directory not found: " + dataset_dir.string());
  }
  for (const auto& hop_dir : fs::directory_iterator(dataset_dir)) {
    if (!hop_dir.is_directory()) continue;
    const std::string name = hop_dir.path().filename().string();
    if (name.size() < 4 || name.substr(name.size() - 3) != "hop") continue;
    const int h = std::stoi(name.substr(0, name.size() - 3));
    if (!hops_filter.empty() &&
        std::find(hops_filter.begin(), hops_filter.end(), h) == hops_filter.end()) {
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& file : fs::directory_iterator(hop_dir.path())) {
      if (file.path().extension() == ".json") files.push_back(file.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto cell = infoqa::benchgen::load_samples(file);
      if (!lengths_filter.empty() && !cell.empty() &&
          std::find(lengths_filter.begin(), lengths_filter.end(), cell.front().target_len) ==
              lengths_filter.end()) {
        continue;
      }
      if (limit_per_cell > 0 && static_cast<int>(cell.size()) > limit_per_cell) {
        cell.resize(static_cast<std::size_t>(limit_per_cell));
      }
      samples.insert(samples.end(), cell.begin(), cell.end());
    }
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  return samples;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

int cmd_gen(const fs::path& data_dir, const std::string& config_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_override) {
  infoqa::benchgen::DatasetConfig cfg;
  if (!config_path.empty()) cfg = infoqa::benchgen::config_from_json(load_json_file(config_path));
  if (seed_override) cfg.seed = *seed_override;
  cfg.validate();

  const DataBundle bundle = load_data_bundle(data_dir);
  const auto start = std::chrono::steady_clock::now();
  const auto stats =
      infoqa::benchgen::write_dataset(cfg, bundle.templates, bundle.dict, bundle.noise, out_dir);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::cout << "dataset written to " << out_dir.string() << "\n";
  for (const auto& cell : stats.cells) {
    std::cout << "  h=" << cell.hops << " L=" << cell.context_len << ": " << cell.count
              << " samples, mean |token error| " << cell.mean_abs_token_error_pct << "%\n";
  }
  std::cout << "total " << stats.grand_total << " samples in " << secs << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const fs::path& data_dir, const std::string& config_path,
            const std::string& mock_override, double eps_override, int concurrency_override,
            const std::string& out_override, std::optional<std::uint64_t> seed_override,
            const std::string& methods_override) {
  json cfg = config_path.empty() ? json::object() : load_json_file(config_path);
  if (!cfg.contains("dataset_dir")) throw std::invalid_argument("run config: dataset_dir missing");

  std::vector<std::string> methods;
  if (!methods_override.empty()) {
    std::istringstream in(methods_override);
    std::string m;
    while (std::getline(in, m, ',')) methods.push_back(m);
  } else if (cfg.contains("methods")) {
    methods = cfg.at("methods").get<std::vector<std::string>>();
  }
  if (methods.empty()) throw std::invalid_argument("run config: no methods given");
  for (const auto& m : methods) {
    if (m != "InfoQA" && m != "infoqa") infoqa::orch::method_from_string(m);  // validate early
  }

  const auto samples = load_dataset(
      cfg.at("dataset_dir").get<std::string>(),
      cfg.contains("hops") ? cfg.at("hops").get<std::vector<int>>() : std::vector<int>{},
      cfg.contains("lengths") ? cfg.at("lengths").get<std::vector<long>>() : std::vector<long>{},
      cfg.value("limit_per_cell", 0));
  if (samples.empty()) throw std::invalid_argument("run: dataset matched no samples");

  const auto prompts = infoqa::orch::PromptSet::load_dir(data_dir / "prompts");

  infoqa::orch::BatchOptions options;
  options.concurrency = concurrency_override > 0 ? concurrency_override
                                                 : cfg.value("concurrency", 4);
  options.run.max_steps = cfg.value("max_steps", 6);
  const std::uint64_t seed = seed_override.value_or(cfg.value("seed", 1ULL));

  std::unique_ptr<infoqa::orch::ChatClient> client;
  std::string mock_kind = mock_override;
  if (mock_kind.empty() && cfg.contains("mock")) {
    mock_kind = cfg.at("mock").value("kind", "gold_oracle");
  }
  if (!mock_kind.empty()) {
    const double eps =
        eps_override >= 0 ? eps_override
                          : (cfg.contains("mock") ? cfg.at("mock").value("eps", 0.0) : 0.0);
    const DataBundle bundle = load_data_bundle(data_dir);
    auto store = std::make_shared<infoqa::orch::SampleStore>(bundle.templates, bundle.dict);
    store->add_samples(samples);
    client = std::make_unique<infoqa::orch::MockModel>(
        infoqa::orch::mock_kind_from_string(mock_kind), store, eps, seed);
  } else if (cfg.contains("endpoint")) {
    const auto& ej = cfg.at("endpoint");
    infoqa::orch::ModelEndpoint endpoint;
    endpoint.base_url = ej.at("base_url").get<std::string>();
    endpoint.model_name = ej.value("model", "");
    endpoint.api_key_env = ej.value("api_key_env", "");
    endpoint.temperature = ej.value("temperature", 0.2);
    endpoint.max_tokens = ej.value("max_tokens", 4096);
    endpoint.timeout_s = ej.value("timeout_s", 60.0);
    endpoint.max_retries = ej.value("max_retries", 3);
    endpoint.validate();
    client = std::make_unique<infoqa::orch::HttpChatClient>(endpoint);
  } else {
    throw std::invalid_argument("run config: need either an endpoint or a mock");
  }

  const fs::path out_dir = out_override.empty() ? cfg.value("output_dir", "runs") : out_override;
  const fs::path out_file = out_dir / "runs.jsonl";
  const auto result =
      infoqa::orch::run_batch(samples, methods, *client, prompts, out_file, options);

  const int attempted = result.completed + result.failed;
  std::cout << "runs: " << result.completed << " completed, " << result.failed << " failed, "
            << result.skipped << " skipped (resume) -> " << out_file.string() << "\n";
  if (attempted == 0) return kExitOk;
  const double completion = static_cast<double>(result.completed) / attempted;
  return completion >= 0.99 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const std::vector<std::string>& jsonl_paths, const fs::path& out_dir) {
  std::vector<infoqa::orch::RunRecord> records;
  int malformed_total = 0;
  for (const auto& path : jsonl_paths) {
    int malformed = 0;
    auto part = infoqa::orch::read_run_records(path, &malformed);
    malformed_total += malformed;
    records.insert(records.end(), part.begin(), part.end());
  }
  if (malformed_total > 0) {
    std::cerr << "warning: skipped " << malformed_total << " malformed JSONL lines\n";
  }
  if (records.empty()) {
    std::cerr << "warning: no run records found; writing empty report\n";
  }

  const auto table = infoqa::scoring::aggregate(infoqa::orch::score_records(records));
  write_text_file(out_dir / "report.json", infoqa::scoring::report_to_json(table).dump(2) + "\n");
  write_text_file(out_dir / "report.csv", infoqa::scoring::report_to_csv(table));
  write_text_file(out_dir / "observations.csv", infoqa::scoring::observations_csv(table));
  std::cout << "report written to " << (out_dir / "report.json").string() << ", "
            << (out_dir / "report.csv").string() << ", "
            << (out_dir / "observations.csv").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int cmd_fit(const std::string& input_path, const fs::path& out_dir, int workers, int bootstrap,
            std::uint64_t seed, const std::string& alphas_spec, const std::string& gammas_spec,
            const std::string& beta0s_spec, const std::string& capacities_spec,
            const std::string& methods_filter) {
  infoqa::fitting::FitGrid grid = infoqa::fitting::FitGrid::defaults();
  if (!alphas_spec.empty()) grid.alphas = parse_grid_spec(alphas_spec, true);
  if (!gammas_spec.empty()) grid.gammas = parse_grid_spec(gammas_spec, false);
  if (!beta0s_spec.empty()) grid.beta0s = parse_grid_spec(beta0s_spec, false);
  if (!capacities_spec.empty()) grid.capacities = parse_grid_spec(capacities_spec, false);
  grid.validate();

  const std::string content = read_text_file(input_path);
  infoqa::fitting::MethodObservations observations =
      fs::path(input_path).extension() == ".json"
          ? infoqa::fitting::observations_from_report_json(content)
          : infoqa::fitting::parse_observations_csv(content);

  if (!methods_filter.empty()) {
    std::set<std::string> keep;
    std::istringstream in(methods_filter);
    std::string m;
    while (std::getline(in, m, ',')) keep.insert(m);
    std::erase_if(observations, [&](const auto& kv) { return !keep.count(kv.first); });
  }
  if (observations.empty()) throw std::invalid_argument("fit: no observations to fit");

  std::vector<std::pair<std::string, infoqa::fitting::FitResult>> results;
  std::vector<std::pair<std::string, std::vector<infoqa::fitting::FitResult>>> bootstraps;
  for (const auto& [method, obs] : observations) {
    const auto start = std::chrono::steady_clock::now();
    auto fit_result = infoqa::fitting::fit(obs, grid, workers);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << method << ": alpha=" << fit_result.params.alpha
              << " gamma=" << fit_result.params.gamma << " beta0=" << fit_result.params.beta0
              << " capacity=" << fit_result.params.capacity << " mae=" << fit_result.mae << " ("
              << obs.size() << " obs, " << secs << " s)\n";
    write_text_file(out_dir / ("curve_" + sanitize_filename(method) + ".csv"),
                    infoqa::fitting::fit_curve_csv(fit_result, obs));
    if (bootstrap > 0) {
      auto rng = infoqa::rng::substream(seed, {4, infoqa::rng::fnv1a64(method)});
      bootstraps.emplace_back(method,
                              infoqa::fitting::bootstrap_fit(obs, grid, bootstrap, rng, workers));
    }
    results.emplace_back(method, fit_result);
  }
  write_text_file(out_dir / "fit_results.csv",
                  infoqa::fitting::fit_results_csv(results, bootstrap > 0 ? &bootstraps : nullptr));
  std::cout << "fit results written to " << (out_dir / "fit_results.csv").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

int cmd_bounds(double capacity, double beta_min, double beta_max, int points,
               const std::string& decay_eps, int decay_kmax, const fs::path& out_dir) {
  const infoqa::theory::BoundParams params(0.0, 1e-3, 1.0, capacity);
  const auto curve = infoqa::theory::emit_bound_curve(params, beta_min, beta_max, points);
  write_text_file(out_dir / "bound_curve.csv", infoqa::theory::curve_to_csv(curve));
  std::cout << "bound curve (" << curve.size() << " points) -> "
            << (out_dir / "bound_curve.csv").string() << "\n";

  if (!decay_eps.empty()) {
    std::string csv = "eps,k,exact,linear\n";
    std::istringstream in(decay_eps);
    std::string eps_s;
    while (std::getline(in, eps_s, ',')) {
      const double eps = std::stod(eps_s);
      for (int k = 0; k <= decay_kmax; ++k) {
        const auto success = infoqa::theory::chain_success_lower({eps, k});
        char row[128];
        std::snprintf(row, sizeof(row), "%.10g,%d,%.10g,%.10g\n", eps, k, success.exact,
                      success.linear);
        csv += row;
      }
    }
    write_text_file(out_dir / "chain_decay.csv", csv);
    std::cout << "chain decay table -> " << (out_dir / "chain_decay.csv").string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop QA capacity toolkit: benchmark generation, evaluation, scoring, "
               "accuracy-bound curves and grid fitting"};
  app.require_subcommand(1);

  std::string data_dir = INFOQA_DEFAULT_DATA_DIR;
  app.add_option("--data", data_dir, "data directory (entities, templates, prompts, reference)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a benchmark dataset");
  std::string gen_config;
  std::string gen_out = "dataset";
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "dataset config JSON");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--seed", gen_seed, "seed override");

  // run
  auto* run = app.add_subcommand("run", "evaluate methods over a dataset");
  std::string run_config, run_mock, run_out, run_methods;
  double run_eps = -1.0;
  int run_concurrency = 0;
  std::optional<std::uint64_t> run_seed;
  run->add_option("--config", run_config, "run config JSON")->required();
  run->add_option("--mock", run_mock, "mock model kind (echo|gold_oracle|noisy_oracle)");
  run->add_option("--eps", run_eps, "noisy mock per-step error rate");
  run->add_option("--concurrency", run_concurrency, "parallel runs");
  run->add_option("--out", run_out, "output directory override");
  run->add_option("--seed", run_seed, "seed override");
  run->add_option("--methods", run_methods, "comma-separated method list override");

  // report
  auto* report = app.add_subcommand("report", "score transcripts into report tables");
  std::vector<std::string> report_inputs;
  std::string report_out = ".";
  report->add_option("inputs", report_inputs, "JSONL transcript files")->required();
  report->add_option("--out", report_out, "output directory");

  // fit
  auto* fit = app.add_subcommand("fit", "grid-fit the capacity bound to an F1 grid");
  std::string fit_input, fit_out = ".", fit_alphas, fit_gammas, fit_beta0s, fit_caps,
              fit_methods;
  int fit_workers = 1, fit_bootstrap = 0;
  std::uint64_t fit_seed = 7;
  fit->add_option("--input", fit_input, "observations CSV or report JSON")->required();
  fit->add_option("--out", fit_out, "output directory");
  fit->add_option("--workers", fit_workers, "worker threads");
  fit->add_option("--bootstrap", fit_bootstrap, "bootstrap resamples per method");
  fit->add_option("--seed", fit_seed, "bootstrap seed");
  fit->add_option("--alphas", fit_alphas, "alpha grid lo,hi,n (log spaced)");
  fit->add_option("--gammas", fit_gammas, "gamma grid lo,hi,n");
  fit->add_option("--beta0s", fit_beta0s, "beta0 grid lo,hi,n");
  fit->add_option("--capacities", fit_caps, "capacity grid lo,hi,n");
  fit->add_option("--methods", fit_methods, "comma-separated method filter");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "emit accuracy-bound and chain-decay curves");
  double b_capacity = 200.0, b_min = 0.0, b_max = 0.0;
  int b_points = 200, b_kmax = 10;
  std::string b_decay, b_out = ".";
  bounds->add_option("--capacity", b_capacity, "output capacity C");
  bounds->add_option("--beta-min", b_min, "curve range start")->required();
  bounds->add_option("--beta-max", b_max, "curve range end")->required();
  bounds->add_option("--points", b_points, "number of curve samples");
  bounds->add_option("--decay-eps", b_decay, "comma-separated per-step error rates");
  bounds->add_option("--decay-kmax", b_kmax, "max bridge count for the decay table");
  bounds->add_option("--out", b_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(data_dir, gen_config, gen_out, gen_seed);
    if (run->parsed()) {
      return cmd_run(data_dir, run_config, run_mock, run_eps, run_concurrency, run_out, run_seed,
                     run_methods);
    }
    if (report->parsed()) return cmd_report(report_inputs, report_out);
    if (fit->parsed()) {
      return cmd_fit(fit_input, fit_out, fit_workers, fit_bootstrap, fit_seed, fit_alphas,
                     fit_gammas, fit_beta0s, fit_caps, fit_methods);
    }
    if (bounds->parsed()) {
      return cmd_bounds(b_capacity, b_min, b_max, b_points, b_decay, b_kmax, b_out);
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const infoqa::benchgen::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitPartial;
  }
  return kExitUsage;
}
