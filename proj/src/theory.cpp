#include "infoqa/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace infoqa::theory {

namespace {

constexpr double kBisectTol = 1e-9;
constexpr int kBisectMaxIter = 200;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

BoundParams::BoundParams(double beta0_, double alpha_, double gamma_, double capacity_)
    : beta0(beta0_), alpha(alpha_), gamma(gamma_), capacity(capacity_) {
  require(beta0 >= 0.0, "BoundParams: beta0 must be >= 0");
  require(alpha > 0.0, "BoundParams: alpha must be > 0");
  require(gamma >= 1.0, "BoundParams: gamma must be >= 1");
  require(capacity >= 0.0, "BoundParams: capacity must be >= 0");
}

TaskPoint::TaskPoint(int hops_, double context_len_) : hops(hops_), context_len(context_len_) {
  require(hops >= 1, "TaskPoint: hops must be >= 1");
  require(context_len >= 0.0, "TaskPoint: context_len must be >= 0");
}

AnswerSpace::AnswerSpace(std::int64_t size_) : size(size_) {
  require(size >= 2, "AnswerSpace: size must be >= 2");
}

ChainSpec::ChainSpec(double eps_, int k_) : eps(eps_), k(k_) {
  require(eps >= 0.0 && eps <= 1.0, "ChainSpec: eps must be in [0, 1]");
  require(k >= 0, "ChainSpec: k must be >= 0");
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p must be in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double max_accuracy_exact(double beta, const AnswerSpace& space, double capacity) {
  if (beta < 0.0) throw std::domain_error("max_accuracy_exact: beta must be >= 0");
  if (capacity < 0.0) throw std::domain_error("max_accuracy_exact: capacity must be >= 0");

  const double slack = beta - capacity;
  if (slack <= 0.0) return 1.0;

  const double log_a1 = std::log2(static_cast<double>(space.size - 1));
  const auto lhs = [&](double acc) { return binary_entropy(acc) + (1.0 - acc) * log_a1; };

  // The LHS peaks at acc = 1/|A| with value log2|A| and decreases to 0 at
  // acc = 1; above the peak the feasibility set is empty.
  const double peak_acc = 1.0 / static_cast<double>(space.size);
  if (slack > lhs(peak_acc)) return 0.0;

  double lo = peak_acc;  // feasible
  double hi = 1.0;       // infeasible (lhs(1) = 0 < slack)
  for (int i = 0; i < kBisectMaxIter && hi - lo > kBisectTol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) >= slack) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double linear_accuracy_bound(double beta, const AnswerSpace& space, double capacity) {
  if (beta < 0.0) throw std::domain_error("linear_accuracy_bound: beta must be >= 0");
  if (capacity < 0.0) throw std::domain_error("linear_accuracy_bound: capacity must be >= 0");
  const double log_a = std::log2(static_cast<double>(space.size));
  const double v = 1.0 - (beta - capacity - 1.0) / log_a;
  return std::clamp(v, 0.0, 1.0);
}

double uniform_accuracy_bound(double beta, double capacity) {
  if (!(beta > 0.0)) throw std::domain_error("uniform_accuracy_bound: beta must be > 0");
  if (capacity < 0.0) throw std::domain_error("uniform_accuracy_bound: capacity must be >= 0");
  return std::min(1.0, (capacity + 1.0) / beta);
}

double demand(const BoundParams& params, const TaskPoint& point) {
  return params.beta0 + params.alpha * point.context_len * ipow(params.gamma, point.hops - 1);
}

double plugin_accuracy_bound(const BoundParams& params, const TaskPoint& point) {
  return uniform_accuracy_bound(demand(params, point), params.capacity);
}

ChainSuccess chain_success_lower(const ChainSpec& spec) {
  const double exact = ipow(1.0 - spec.eps, spec.k + 1);
  const double linear = std::clamp(1.0 - (spec.k + 1) * spec.eps, 0.0, 1.0);
  return {exact, linear};
}

double capacity_fixed_length(std::int64_t m, std::int64_t vocab) {
  if (m < 0) throw std::domain_error("capacity_fixed_length: m must be >= 0");
  if (vocab < 2) throw std::domain_error("capacity_fixed_length: vocab must be >= 2");
  return static_cast<double>(m) * std::log2(static_cast<double>(vocab));
}

double capacity_variable_length(std::int64_t m, std::int64_t vocab) {
  if (m < 0) throw std::domain_error("capacity_variable_length: m must be >= 0");
  if (vocab < 2) throw std::domain_error("capacity_variable_length: vocab must be >= 2");
  if (m == 0) return 0.0;  // only the empty sequence

  // log2((V^(m+1) - 1) / (V - 1))
  //   = (m+1) log2 V + log2(1 - V^-(m+1)) - log2(V - 1)
  // with the middle term via log1p so V^4097 never materializes.
  const double v = static_cast<double>(vocab);
  const double n = static_cast<double>(m) + 1.0;
  const double ln2 = std::log(2.0);
  const double correction = std::log1p(-std::exp(-n * std::log(v))) / ln2;
  return n * std::log2(v) + correction - std::log2(v - 1.0);
}

std::vector<CurvePoint> emit_bound_curve(const BoundParams& params, double beta_min,
                                         double beta_max, int n_points) {
  if (!(beta_min > 0.0) || !(beta_min < beta_max))
    throw std::domain_error("emit_bound_curve: need 0 < beta_min < beta_max");
  if (n_points < 2) throw std::domain_error("emit_bound_curve: n_points must be >= 2");

  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(n_points));
  const double step = (beta_max - beta_min) / static_cast<double>(n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    const double beta = (i == n_points - 1) ? beta_max : beta_min + step * i;
    curve.push_back({beta, uniform_accuracy_bound(beta, params.capacity)});
  }
  return curve;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "beta,acc_cap\n";
  for (const auto& pt : curve) {
    out += fmt_double(pt.beta);
    out += ',';
    out += fmt_double(pt.acc_cap);
    out += '\n';
  }
  return out;
}

}  // namespace infoqa::theory
