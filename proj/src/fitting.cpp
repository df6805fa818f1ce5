#include "infoqa/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace infoqa::fitting {

namespace {

constexpr double kBetaFloor = 1e-9;

std::string fmt_g(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct LocalBest {
  double loss = std::numeric_limits<double>::infinity();
  std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
};

/// Scan the (alpha, gamma) pairs in [pair_begin, pair_end); strict-improvement
/// update keeps the first (lowest canonical index) minimum within the range.
LocalBest scan_range(std::span<const Observation> obs, const FitGrid& grid,
                     std::uint64_t pair_begin, std::uint64_t pair_end) {
  const std::size_t n = obs.size();
  const std::uint64_t ng = grid.gammas.size();
  const std::uint64_t nb = grid.beta0s.size();
  const std::uint64_t nc = grid.capacities.size();

  double weight_sum = 0.0;
  for (const auto& o : obs) weight_sum += o.weight;

  std::vector<double> base(n), beta(n);
  LocalBest best;
  for (std::uint64_t pair = pair_begin; pair < pair_end; ++pair) {
    const std::uint64_t ia = pair / ng;
    const std::uint64_t ig = pair % ng;
    const double alpha = grid.alphas[ia];
    const double gamma = grid.gammas[ig];
    for (std::size_t i = 0; i < n; ++i) {
      base[i] = alpha * obs[i].point.context_len * theory::ipow(gamma, obs[i].point.hops - 1);
    }
    for (std::uint64_t ib = 0; ib < nb; ++ib) {
      const double beta0 = grid.beta0s[ib];
      for (std::size_t i = 0; i < n; ++i) beta[i] = std::max(base[i] + beta0, kBetaFloor);
      for (std::uint64_t ic = 0; ic < nc; ++ic) {
        const double cap1 = grid.capacities[ic] + 1.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double pred = std::min(1.0, cap1 / beta[i]);
          acc += obs[i].weight * std::abs(pred - obs[i].f1);
        }
        const double loss = acc / weight_sum;
        if (loss < best.loss) {
          best.loss = loss;
          best.index = ((ia * ng + ig) * nb + ib) * nc + ic;
        }
      }
    }
  }
  return best;
}

theory::BoundParams params_at(const FitGrid& grid, std::uint64_t index) {
  const std::uint64_t ng = grid.gammas.size();
  const std::uint64_t nb = grid.beta0s.size();
  const std::uint64_t nc = grid.capacities.size();
  const std::uint64_t ic = index % nc;
  const std::uint64_t ib = (index / nc) % nb;
  const std::uint64_t ig = (index / (nc * nb)) % ng;
  const std::uint64_t ia = index / (nc * nb * ng);
  return theory::BoundParams(grid.beta0s[ib], grid.alphas[ia], grid.gammas[ig],
                             grid.capacities[ic]);
}

void require_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(std::string("FitGrid: empty ") + name);
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1]))
      throw std::invalid_argument(std::string("FitGrid: ") + name + " not strictly increasing");
  }
}

}  // namespace

Observation::Observation(theory::TaskPoint p, double f1_, double weight_)
    : point(p), f1(f1_), weight(weight_) {
  if (!(f1 >= 0.0 && f1 <= 1.0)) throw std::invalid_argument("Observation: f1 must be in [0, 1]");
  if (!(weight > 0.0)) throw std::invalid_argument("Observation: weight must be > 0");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("linspace: n must be >= 2");
  if (!(lo < hi)) throw std::invalid_argument("linspace: lo must be < hi");
  std::vector<double> v(static_cast<std::size_t>(n));
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
  v.back() = hi;
  return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("logspace: need 0 < lo < hi");
  std::vector<double> v = linspace(std::log10(lo), std::log10(hi), n);
  for (double& x : v) x = std::pow(10.0, x);
  v.front() = lo;
  v.back() = hi;
  return v;
}

FitGrid FitGrid::defaults() {
  FitGrid grid;
  grid.alphas = logspace(1e-4, 1e-2, 15);
  grid.gammas = linspace(1.05, 3.00, 20);
  grid.beta0s = linspace(0.0, 200.0, 21);
  grid.capacities = linspace(20.0, 400.0, 25);
  return grid;
}

void FitGrid::validate() const {
  require_increasing(alphas, "alphas");
  require_increasing(gammas, "gammas");
  require_increasing(beta0s, "beta0s");
  require_increasing(capacities, "capacities");
  if (!(alphas.front() > 0.0)) throw std::invalid_argument("FitGrid: alphas must be > 0");
  if (!(gammas.front() >= 1.0)) throw std::invalid_argument("FitGrid: gammas must be >= 1");
}

std::uint64_t FitGrid::size() const {
  return static_cast<std::uint64_t>(alphas.size()) * gammas.size() * beta0s.size() *
         capacities.size();
}

double predict(const theory::BoundParams& params, const theory::TaskPoint& point) {
  const double beta = std::max(theory::demand(params, point), kBetaFloor);
  return std::min(1.0, (params.capacity + 1.0) / beta);
}

double mae(const theory::BoundParams& params, std::span<const Observation> obs) {
  if (obs.empty()) throw std::domain_error("mae: no observations");
  double acc = 0.0, weight_sum = 0.0;
  for (const auto& o : obs) {
    acc += o.weight * std::abs(predict(params, o.point) - o.f1);
    weight_sum += o.weight;
  }
  return acc / weight_sum;
}

FitResult fit(std::span<const Observation> obs, const FitGrid& grid, int n_workers) {
  if (obs.empty()) throw std::domain_error("fit: no observations");
  grid.validate();
  if (n_workers < 1) n_workers = 1;

  const std::uint64_t n_pairs =
      static_cast<std::uint64_t>(grid.alphas.size()) * grid.gammas.size();
  n_workers = static_cast<int>(std::min<std::uint64_t>(n_workers, n_pairs));

  LocalBest best;
  if (n_workers == 1) {
    best = scan_range(obs, grid, 0, n_pairs);
  } else {
    std::vector<LocalBest> bests(static_cast<std::size_t>(n_workers));
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (n_pairs + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const std::uint64_t b = std::min<std::uint64_t>(w * chunk, n_pairs);
      const std::uint64_t e = std::min<std::uint64_t>(b + chunk, n_pairs);
      threads.emplace_back(
          [&, w, b, e] { bests[static_cast<std::size_t>(w)] = scan_range(obs, grid, b, e); });
    }
    for (auto& t : threads) t.join();
    // Lexicographic (loss, index) minimum reproduces the sequential result.
    best = bests[0];
    for (const auto& candidate : bests) {
      if (candidate.loss < best.loss ||
          (candidate.loss == best.loss && candidate.index < best.index)) {
        best = candidate;
      }
    }
  }

  FitResult result{params_at(grid, best.index), best.loss, static_cast<int>(obs.size()),
                   best.index};
  return result;
}

std::vector<FitResult> bootstrap_fit(std::span<const Observation> obs, const FitGrid& grid,
                                     int n_resamples, rng::SplitMix64& rng, int n_workers) {
  if (n_resamples < 1) throw std::domain_error("bootstrap_fit: n_resamples must be >= 1");
  if (obs.empty()) throw std::domain_error("bootstrap_fit: no observations");

  std::vector<FitResult> results;
  results.reserve(static_cast<std::size_t>(n_resamples));
  for (int r = 0; r < n_resamples; ++r) {
    std::vector<Observation> resample;
    resample.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      resample.push_back(obs[static_cast<std::size_t>(rng.below(obs.size()))]);
    }
    results.push_back(fit(resample, grid, n_workers));
  }
  return results;
}

MethodObservations parse_observations_csv(std::string_view csv) {
  MethodObservations out;
  std::istringstream in{std::string(csv)};
  std::string line;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find("method") == std::string::npos)
        throw std::invalid_argument("observations CSV: missing header row");
      continue;
    }
    std::istringstream row(line);
    std::string method, hops_s, len_s, f1_s;
    if (!std::getline(row, method, ',') || !std::getline(row, hops_s, ',') ||
        !std::getline(row, len_s, ',') || !std::getline(row, f1_s, ',')) {
      throw std::invalid_argument("observations CSV: malformed line " + std::to_string(line_no));
    }
    Observation obs{theory::TaskPoint(std::stoi(hops_s), std::stod(len_s)), std::stod(f1_s)};
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& kv) { return kv.first == method; });
    if (it == out.end()) {
      out.emplace_back(method, std::vector<Observation>{});
      it = std::prev(out.end());
    }
    it->second.push_back(obs);
  }
  return out;
}

MethodObservations observations_from_report_json(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  MethodObservations out;
  for (const auto& cell : doc.at("cells")) {
    const std::string method = cell.at("method").get<std::string>();
    Observation obs{theory::TaskPoint(cell.at("hops").get<int>(),
                                      cell.at("context_len").get<double>()),
                    cell.at("mean_f1").get<double>()};
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& kv) { return kv.first == method; });
    if (it == out.end()) {
      out.emplace_back(method, std::vector<Observation>{});
      it = std::prev(out.end());
    }
    it->second.push_back(obs);
  }
  return out;
}

std::string fit_results_csv(
    const std::vector<std::pair<std::string, FitResult>>& results,
    const std::vector<std::pair<std::string, std::vector<FitResult>>>* bootstraps) {
  std::string out = "method,alpha,gamma,beta0,capacity,mae,n_obs";
  const bool with_boot = bootstraps != nullptr && !bootstraps->empty();
  if (with_boot) {
    out += ",alpha_p5,alpha_p95,gamma_p5,gamma_p95,beta0_p5,beta0_p95,capacity_p5,capacity_p95";
  }
  out += '\n';

  auto percentile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
  };

  for (const auto& [method, r] : results) {
    out += method + "," + fmt_g(r.params.alpha) + "," + fmt_g(r.params.gamma) + "," +
           fmt_g(r.params.beta0) + "," + fmt_g(r.params.capacity) + "," + fmt_g(r.mae) + "," +
           std::to_string(r.n_obs);
    if (with_boot) {
      auto it = std::find_if(bootstraps->begin(), bootstraps->end(),
                             [&](const auto& kv) { return kv.first == method; });
      if (it != bootstraps->end() && !it->second.empty()) {
        std::vector<double> a, g, b, c;
        for (const auto& br : it->second) {
          a.push_back(br.params.alpha);
          g.push_back(br.params.gamma);
          b.push_back(br.params.beta0);
          c.push_back(br.params.capacity);
        }
        for (auto* v : {&a, &g, &b, &c}) {
          out += "," + fmt_g(percentile(*v, 0.05)) + "," + fmt_g(percentile(*v, 0.95));
        }
      } else {
        out += ",,,,,,,,";
      }
    }
    out += '\n';
  }
  return out;
}

std::string fit_curve_csv(const FitResult& result, std::span<const Observation> obs) {
  struct Row {
    double beta, emp, bound;
  };
  std::vector<Row> rows;
  rows.reserve(obs.size());
  for (const auto& o : obs) {
    rows.push_back({theory::demand(result.params, o.point), o.f1, predict(result.params, o.point)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.beta < b.beta; });
  std::string out = "beta,f1_emp,f1_bound\n";
  for (const auto& r : rows) {
    out += fmt_g(r.beta) + "," + fmt_g(r.emp) + "," + fmt_g(r.bound) + "\n";
  }
  return out;
}

}  // namespace infoqa::fitting
