#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "infoqa/rng.hpp"
#include "infoqa/theory.hpp"

using namespace infoqa;
using theory::AnswerSpace;
using theory::BoundParams;
using theory::ChainSpec;
using theory::TaskPoint;

namespace {

// Independent oracle: scan Acc downward on a uniform grid and return the
// largest feasible point of h(Acc) + (1-Acc) log2(|A|-1) >= beta - capacity.
double brute_force_max_accuracy(double beta, std::int64_t space, double capacity,
                                double step = 1e-6) {
  const double slack = beta - capacity;
  if (slack <= 0.0) return 1.0;
  const double log_a1 = std::log2(static_cast<double>(space - 1));
  const long n = std::lround(1.0 / step);
  for (long i = n; i >= 0; --i) {
    const double acc = static_cast<double>(i) * step;
    const double h = (acc <= 0.0 || acc >= 1.0)
                         ? 0.0
                         : -acc * std::log2(acc) - (1.0 - acc) * std::log2(1.0 - acc);
    if (h + (1.0 - acc) * log_a1 >= slack) return acc;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("binary_entropy: worked values and domain") {
  CHECK(theory::binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(theory::binary_entropy(0.0) == 0.0);
  CHECK(theory::binary_entropy(1.0) == 0.0);
  CHECK(theory::binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
  CHECK_THROWS_AS(theory::binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(theory::binary_entropy(1.1), std::domain_error);
}

TEST_CASE("binary_entropy: symmetry and maximum") {
  auto rng = rng::substream(11, {1});
  for (int i = 0; i < 500; ++i) {
    const double p = rng.next_double();
    CHECK(theory::binary_entropy(p) ==
          doctest::Approx(theory::binary_entropy(1.0 - p)).epsilon(1e-12));
    CHECK(theory::binary_entropy(p) <= 1.0 + 1e-12);
  }
}

TEST_CASE("max_accuracy_exact: worked examples") {
  // non-positive slack caps at 1
  CHECK(theory::max_accuracy_exact(5.0, AnswerSpace(17), 5.0) == 1.0);
  CHECK(theory::max_accuracy_exact(1.0, AnswerSpace(2), 4.0) == 1.0);
  // |A| = 2: log2(|A|-1) = 0, so solve h(Acc) = 1 -> 0.5
  CHECK(theory::max_accuracy_exact(1.0, AnswerSpace(2), 0.0) ==
        doctest::Approx(0.5).epsilon(1e-8));
  // |A| = 4, slack = 1: frozen via the brute-force oracle
  const double expected = brute_force_max_accuracy(1.0, 4, 0.0);
  CHECK(expected == doctest::Approx(0.8107103).epsilon(1e-5));
  CHECK(theory::max_accuracy_exact(1.0, AnswerSpace(4), 0.0) ==
        doctest::Approx(expected).epsilon(1e-5));
  // slack above the log2|A| peak: empty feasibility set
  CHECK(theory::max_accuracy_exact(10.0, AnswerSpace(4), 0.0) == 0.0);
}

TEST_CASE("max_accuracy_exact agrees with the brute-force scan") {
  auto rng = rng::substream(12, {2});
  for (int i = 0; i < 200; ++i) {
    const double beta = rng.next_double() * 20.0;
    const double capacity = rng.next_double() * 15.0;
    const std::int64_t space = 2 + static_cast<std::int64_t>(rng.below(500));
    const double exact = theory::max_accuracy_exact(beta, AnswerSpace(space), capacity);
    const double brute = brute_force_max_accuracy(beta, space, capacity);
    CHECK(std::abs(exact - brute) <= 1e-5);
  }
}

TEST_CASE("linear_accuracy_bound: worked examples and clamps") {
  CHECK(theory::linear_accuracy_bound(5.0, AnswerSpace(32), 4.0) == 1.0);  // numerator zero
  CHECK(theory::linear_accuracy_bound(206.0, AnswerSpace(1024), 200.0) ==
        doctest::Approx(0.5).epsilon(1e-12));  // 1 - 5/10
  CHECK(theory::linear_accuracy_bound(3.0, AnswerSpace(2), 0.0) == 0.0);  // lower clamp
}

TEST_CASE("uniform_accuracy_bound: cliff values") {
  CHECK(theory::uniform_accuracy_bound(100.0, 200.0) == 1.0);
  CHECK(theory::uniform_accuracy_bound(402.0, 200.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(theory::uniform_accuracy_bound(201.0, 200.0) == 1.0);  // cliff edge exactly
  CHECK(theory::uniform_accuracy_bound(201.0 + 1e-9, 200.0) < 1.0);
  CHECK_THROWS_AS(theory::uniform_accuracy_bound(0.0, 200.0), std::domain_error);
  CHECK_THROWS_AS(theory::uniform_accuracy_bound(-1.0, 200.0), std::domain_error);
}

TEST_CASE("relaxation ordering: exact <= linear <= 1; exact <= uniform when beta >= log2|A|") {
  auto rng = rng::substream(13, {3});
  for (int i = 0; i < 1000; ++i) {
    const double beta = rng.next_double() * 30.0;
    const double capacity = rng.next_double() * 20.0;
    const std::int64_t space = 2 + static_cast<std::int64_t>(rng.below(1000));
    const AnswerSpace a(space);
    const double exact = theory::max_accuracy_exact(beta, a, capacity);
    const double linear = theory::linear_accuracy_bound(beta, a, capacity);
    CHECK(exact <= linear + 1e-9);
    CHECK(linear <= 1.0);
    if (beta >= std::log2(static_cast<double>(space)) && beta > 0.0) {
      CHECK(exact <= theory::uniform_accuracy_bound(beta, capacity) + 1e-9);
    }
  }
}

TEST_CASE("uniform bound monotone in beta and capacity; equals 1 iff beta <= C+1") {
  auto rng = rng::substream(14, {4});
  for (int i = 0; i < 500; ++i) {
    const double beta = 1e-3 + rng.next_double() * 500.0;
    const double capacity = rng.next_double() * 300.0;
    const double v = theory::uniform_accuracy_bound(beta, capacity);
    CHECK(theory::uniform_accuracy_bound(beta + 1.0, capacity) <= v);
    CHECK(theory::uniform_accuracy_bound(beta, capacity + 1.0) >= v);
    CHECK((v == 1.0) == (beta <= capacity + 1.0));
  }
}

TEST_CASE("demand: worked examples") {
  CHECK(theory::demand(BoundParams(40.0, 0.01, 3.0, 0.0), TaskPoint(1, 0.0)) == 40.0);
  CHECK(theory::demand(BoundParams(40.0, 0.01, 3.0, 0.0), TaskPoint(2, 1000.0)) ==
        doctest::Approx(70.0).epsilon(1e-12));
  // hand evaluation: 0.01 * 8000 * 2.076^3
  CHECK(theory::demand(BoundParams(0.0, 0.01, 2.076, 0.0), TaskPoint(4, 8000.0)) ==
        doctest::Approx(80.0 * 2.076 * 2.076 * 2.076).epsilon(1e-12));
}

TEST_CASE("demand: monotonicity") {
  auto rng = rng::substream(15, {5});
  for (int i = 0; i < 300; ++i) {
    const double beta0 = rng.next_double() * 100;
    const double alpha = 1e-4 + rng.next_double() * 0.01;
    const double gamma = 1.0 + rng.next_double() * 2.0;
    const BoundParams p(beta0, alpha, gamma, 0.0);
    const double len = 1.0 + rng.next_double() * 10000.0;
    const int h = 1 + static_cast<int>(rng.below(4));
    // strictly increasing in L
    CHECK(theory::demand(p, TaskPoint(h, len + 1.0)) > theory::demand(p, TaskPoint(h, len)));
    // increasing in h iff gamma > 1 and L > 0
    const double d1 = theory::demand(p, TaskPoint(h, len));
    const double d2 = theory::demand(p, TaskPoint(h + 1, len));
    if (gamma > 1.0) {
      CHECK(d2 > d1);
    } else {
      CHECK(d2 == d1);
    }
    CHECK(theory::demand(p, TaskPoint(h + 1, 0.0)) == theory::demand(p, TaskPoint(h, 0.0)));
  }
  // affine in L at h = 1
  const BoundParams p(7.0, 0.003, 2.5, 0.0);
  const double f0 = theory::demand(p, TaskPoint(1, 0.0));
  const double f1 = theory::demand(p, TaskPoint(1, 1.0));
  const double f10 = theory::demand(p, TaskPoint(1, 10.0));
  CHECK(f10 == doctest::Approx(f0 + 10.0 * (f1 - f0)).epsilon(1e-12));
}

TEST_CASE("plugin_accuracy_bound: worked examples") {
  const BoundParams direct(40.0, 0.01, 3.0, 67.5);
  CHECK(theory::plugin_accuracy_bound(direct, TaskPoint(1, 0.0)) == 1.0);  // 68.5/40 capped
  CHECK(theory::plugin_accuracy_bound(direct, TaskPoint(2, 1000.0)) ==
        doctest::Approx(68.5 / 70.0).epsilon(1e-12));
  CHECK(theory::plugin_accuracy_bound(direct, TaskPoint(4, 10000.0)) ==
        doctest::Approx(68.5 / 2740.0).epsilon(1e-12));
  // demand must be positive
  CHECK_THROWS_AS(
      theory::plugin_accuracy_bound(BoundParams(0.0, 0.01, 3.0, 10.0), TaskPoint(1, 0.0)),
      std::domain_error);
}

TEST_CASE("chain_success_lower: worked examples and Bernoulli ordering") {
  auto s = theory::chain_success_lower(ChainSpec(0.0, 5));
  CHECK(s.exact == 1.0);
  CHECK(s.linear == 1.0);
  s = theory::chain_success_lower(ChainSpec(0.1, 3));
  CHECK(s.exact == doctest::Approx(0.6561).epsilon(1e-12));
  CHECK(s.linear == doctest::Approx(0.6).epsilon(1e-12));
  s = theory::chain_success_lower(ChainSpec(1.0, 0));
  CHECK(s.exact == 0.0);
  CHECK(s.linear == 0.0);

  auto rng = rng::substream(16, {6});
  for (int i = 0; i < 500; ++i) {
    const double eps = rng.next_double();
    const int k = static_cast<int>(rng.below(20));
    const auto v = theory::chain_success_lower(ChainSpec(eps, k));
    CHECK(v.exact >= v.linear - 1e-12);  // Bernoulli inequality
    CHECK(v.exact >= 0.0);
    CHECK(v.exact <= 1.0);
  }
}

TEST_CASE("capacity budgets: worked examples") {
  CHECK(theory::capacity_fixed_length(1, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(theory::capacity_fixed_length(0, 99) == 0.0);
  CHECK(theory::capacity_fixed_length(4096, 151936) ==
        doctest::Approx(70504.87488365325).epsilon(1e-10));

  CHECK(theory::capacity_variable_length(0, 7) == 0.0);
  CHECK(theory::capacity_variable_length(1, 2) ==
        doctest::Approx(std::log2(3.0)).epsilon(1e-10));
  CHECK(theory::capacity_variable_length(2, 3) ==
        doctest::Approx(std::log2(13.0)).epsilon(1e-10));
  CHECK_THROWS_AS(theory::capacity_fixed_length(-1, 2), std::domain_error);
  CHECK_THROWS_AS(theory::capacity_variable_length(3, 1), std::domain_error);
}

TEST_CASE("capacity budgets: bracketing for m >= 1, robust to huge m") {
  auto rng = rng::substream(17, {7});
  for (int i = 0; i < 200; ++i) {
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(5000));
    const std::int64_t vocab = 2 + static_cast<std::int64_t>(rng.below(200000));
    const double fixed = theory::capacity_fixed_length(m, vocab);
    const double variable = theory::capacity_variable_length(m, vocab);
    const double upper = theory::capacity_fixed_length(m + 1, vocab);
    CHECK(variable > fixed);       // the at-most-m set strictly contains V^m
    CHECK(variable < upper + 1e-9);
    CHECK(std::isfinite(variable));
  }
}

TEST_CASE("emit_bound_curve: shape, monotonicity and CSV") {
  const BoundParams params(0.0, 1e-3, 1.0, 200.0);
  // capacity-sufficient range stays pinned at 1
  auto curve = theory::emit_bound_curve(params, 50.0, 201.0, 77);
  for (const auto& pt : curve) CHECK(pt.acc_cap == 1.0);

  // endpoints only
  curve = theory::emit_bound_curve(params, 201.0, 402.0, 2);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].beta == 201.0);
  CHECK(curve[0].acc_cap == 1.0);
  CHECK(curve[1].beta == 402.0);
  CHECK(curve[1].acc_cap == doctest::Approx(0.5).epsilon(1e-12));

  // monotone non-increasing
  curve = theory::emit_bound_curve(params, 10.0, 1000.0, 500);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].acc_cap <= curve[i - 1].acc_cap + 1e-15);
  }

  const std::string csv = theory::curve_to_csv(theory::emit_bound_curve(params, 201.0, 402.0, 2));
  CHECK(csv == "beta,acc_cap\n201,1\n402,0.5\n");

  CHECK_THROWS_AS(theory::emit_bound_curve(params, 0.0, 100.0, 5), std::domain_error);
  CHECK_THROWS_AS(theory::emit_bound_curve(params, 10.0, 5.0, 5), std::domain_error);
  CHECK_THROWS_AS(theory::emit_bound_curve(params, 10.0, 20.0, 1), std::domain_error);
}

TEST_CASE("type invariants") {
  CHECK_THROWS_AS(BoundParams(-1.0, 0.01, 2.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(BoundParams(0.0, 0.0, 2.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(BoundParams(0.0, 0.01, 0.9, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(BoundParams(0.0, 0.01, 2.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(TaskPoint(0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(TaskPoint(1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(AnswerSpace(1), std::invalid_argument);
  CHECK_THROWS_AS(ChainSpec(1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(ChainSpec(0.5, -1), std::invalid_argument);
}
