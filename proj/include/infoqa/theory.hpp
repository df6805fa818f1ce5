#pragma once

/**
 * Information-theoretic accuracy bounds for single-pass answering.
 *
 * All logarithms are base 2; every quantity is measured in bits. The three
 * bounds exposed here form a relaxation chain: the exact implicit bound
 * (solved numerically), its linear relaxation, and the uniform-case
 * capacity ratio whose cliff at beta = capacity + 1 drives everything else
 * in this toolkit. All functions are pure and thread-safe.
 */

#include <cstdint>
#include <string>
#include <vector>

namespace infoqa::theory {

/// Parameters of the parametric demand model beta(h, L) = beta0 + alpha * L * gamma^(h-1),
/// together with the effective single-pass capacity they are fitted against.
struct BoundParams {
  double beta0;     // baseline complexity, bits, >= 0
  double alpha;     // context burden per token, bits/token, > 0
  double gamma;     // hop amplification, dimensionless, >= 1
  double capacity;  // effective single-pass capacity, bits, >= 0

  BoundParams(double beta0_, double alpha_, double gamma_, double capacity_);
};

/// A task cell: hop count and effective context length in tokens.
struct TaskPoint {
  int hops;            // >= 1
  double context_len;  // tokens, >= 0

  TaskPoint(int hops_, double context_len_);
};

/// Discrete answer space; Fano's log2(|A|-1) term needs |A| >= 2.
struct AnswerSpace {
  std::int64_t size;

  explicit AnswerSpace(std::int64_t size_);
};

/// Per-step error rate and bridge-entity count of a reasoning chain.
struct ChainSpec {
  double eps;  // in [0, 1]
  int k;       // bridge entities, >= 0

  ChainSpec(double eps_, int k_);
};

/// Binary entropy h(p) in bits; h(0) = h(1) = 0 by continuity.
/// Throws std::domain_error outside [0, 1].
double binary_entropy(double p);

/// Largest Acc in [0, 1] with h(Acc) + (1-Acc)*log2(|A|-1) >= beta - capacity.
/// Returns 1 when the slack is non-positive and 0 when the feasibility set is
/// empty (slack above the log2|A| maximum of the left-hand side). Solved by
/// bisection on the decreasing branch [1/|A|, 1] to 1e-9 absolute.
double max_accuracy_exact(double beta, const AnswerSpace& space, double capacity);

/// Linear relaxation: min{1, 1 - (beta - capacity - 1) / log2|A|}, clamped to [0, 1].
double linear_accuracy_bound(double beta, const AnswerSpace& space, double capacity);

/// Uniform-case bound min{1, (capacity + 1) / beta}; requires beta > 0.
double uniform_accuracy_bound(double beta, double capacity);

/// Demand model beta(h, L) = beta0 + alpha * L * gamma^(h-1).
double demand(const BoundParams& params, const TaskPoint& point);

/// min{1, (capacity + 1) / beta(h, L)}; demand must be positive.
double plugin_accuracy_bound(const BoundParams& params, const TaskPoint& point);

/// Exact chain-success lower bound (1-eps)^(K+1) and its linear
/// approximation 1 - (K+1)*eps clamped to [0, 1].
struct ChainSuccess {
  double exact;
  double linear;
};
ChainSuccess chain_success_lower(const ChainSpec& spec);

/// Output-entropy budget of a fixed-length m-token sequence: m * log2|V|.
double capacity_fixed_length(std::int64_t m, std::int64_t vocab);

/// Output-entropy budget of an at-most-m-token sequence:
/// log2((|V|^(m+1) - 1) / (|V| - 1)), evaluated entirely in log space.
double capacity_variable_length(std::int64_t m, std::int64_t vocab);

/// One sample of the capacity cliff curve.
struct CurvePoint {
  double beta;
  double acc_cap;
};

/// Evenly spaced beta samples of uniform_accuracy_bound over [beta_min, beta_max].
/// Requires 0 < beta_min < beta_max and n_points >= 2.
std::vector<CurvePoint> emit_bound_curve(const BoundParams& params, double beta_min,
                                         double beta_max, int n_points);

/// CSV serialization: header "beta,acc_cap", one row per point, '.' decimals,
/// newline-terminated.
std::string curve_to_csv(const std::vector<CurvePoint>& curve);

/// Integer power by repeated multiplication; bit-reproducible across libm
/// implementations (used by demand and the grid fitter).
inline double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace infoqa::theory
