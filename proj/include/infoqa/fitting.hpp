#pragma once

/**
 * Exhaustive grid-search fitting of the capacity-bound model
 * F1^(h, L) = min(1, (C + 1) / max(beta0 + alpha * L * gamma^(h-1), 1e-9))
 * to an empirical F1 grid by (optionally weighted) MAE minimization.
 *
 * The scan order is canonical — alpha outermost, then gamma, beta0,
 * capacity — with a strict-improvement update, so the first quadruple
 * attaining the minimum wins. Multi-worker fits partition the (alpha, gamma)
 * plane and reduce local minima by (loss, canonical index), which is
 * bit-identical to the sequential scan.
 */

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infoqa/rng.hpp"
#include "infoqa/theory.hpp"

namespace infoqa::fitting {

struct Observation {
  theory::TaskPoint point;
  double f1;
  double weight = 1.0;

  Observation(theory::TaskPoint p, double f1_, double weight_ = 1.0);
};

struct FitGrid {
  std::vector<double> alphas;      // > 0, strictly increasing
  std::vector<double> gammas;      // >= 1, strictly increasing
  std::vector<double> beta0s;      // strictly increasing
  std::vector<double> capacities;  // strictly increasing

  /// logspace(1e-4, 1e-2, 15) x linspace(1.05, 3.00, 20)
  /// x linspace(0, 200, 21) x linspace(20, 400, 25).
  static FitGrid defaults();
  void validate() const;
  std::uint64_t size() const;
};

/// Both endpoints included; n >= 2.
std::vector<double> linspace(double lo, double hi, int n);
/// Geometric spacing, both endpoints included; lo, hi > 0, n >= 2.
std::vector<double> logspace(double lo, double hi, int n);

struct FitResult {
  theory::BoundParams params;
  double mae = 0.0;
  int n_obs = 0;
  std::uint64_t canonical_index = 0;  // position of params in the scan order
};

/// Model prediction with the small-beta stability clamp.
double predict(const theory::BoundParams& params, const theory::TaskPoint& point);

/// Weighted mean absolute error, summed in input order. Uniform weights give
/// (1/N) * sum |predict - f1|. Throws std::domain_error on empty input.
double mae(const theory::BoundParams& params, std::span<const Observation> obs);

FitResult fit(std::span<const Observation> obs, const FitGrid& grid, int n_workers = 1);

/// n_resamples with-replacement resamples of obs (equal size), one fit each.
std::vector<FitResult> bootstrap_fit(std::span<const Observation> obs, const FitGrid& grid,
                                     int n_resamples, rng::SplitMix64& rng, int n_workers = 1);

// ---------------------------------------------------------------------------
// Observation and result I/O
// ---------------------------------------------------------------------------

/// Observations grouped per method, in first-appearance order.
using MethodObservations = std::vector<std::pair<std::string, std::vector<Observation>>>;

/// Parse "method,hops,context_len,f1" CSV content.
MethodObservations parse_observations_csv(std::string_view csv);

/// Extract per-cell observations from a scoring report JSON document.
MethodObservations observations_from_report_json(std::string_view json_text);

/// "method,alpha,gamma,beta0,capacity,mae,n_obs" with optional bootstrap
/// percentile columns (5th/95th per parameter) when resamples are given.
std::string fit_results_csv(
    const std::vector<std::pair<std::string, FitResult>>& results,
    const std::vector<std::pair<std::string, std::vector<FitResult>>>* bootstraps = nullptr);

/// Overlay curve for one method: "beta,f1_emp,f1_bound", sorted by beta.
std::string fit_curve_csv(const FitResult& result, std::span<const Observation> obs);

}  // namespace infoqa::fitting
