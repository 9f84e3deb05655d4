#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "steer/quantifiers.hpp"

using namespace steer;
using steer::test::diag;

namespace {

Assemblage lhs_instance(std::uint64_t seed, std::size_t nx = 2, std::size_t na = 2) {
  Rng rng(seed);
  return lhs_assemblage(random_lhs_model(nx, na, 2, rng));
}

// |X| = 1 assemblage: every element is a piece of rho_B.
Assemblage single_input(std::uint64_t seed) {
  Rng rng(seed);
  return random_assemblage(1, 3, 2, rng);
}

}  // namespace

TEST_CASE("restricted_res on unsteerable assemblages") {
  const auto lhs = restricted_res(lhs_instance(20));
  CHECK(lhs.lo <= lhs.hi);
  CHECK(lhs.hi <= 1e-3);
  CHECK(lhs.lo <= 1e-9);
  CHECK(restricted_res(single_input(21)).hi <= 1e-3);
}

TEST_CASE("restricted_res on the singlet agrees with a p_X grid") {
  const auto singlet = werner_assemblage(1.0);
  const auto r = restricted_res(singlet);
  CHECK(r.lo > 0.05);
  CHECK(r.hi <= 1.0);
  // Every grid value is a lower bound on the sup, and the grid maximum can
  // miss it by at most a resolution effect.
  InnerSolveOptions inner;
  inner.tolerance = 1e-6;
  double grid_best = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double p = k / 100.0;
    const auto res = inner_inf_relative_entropy(singlet, ProbabilityVector({p, 1.0 - p}), inner);
    CHECK(res.value - res.gap <= r.hi + 1e-9);
    grid_best = std::max(grid_best, res.value);
  }
  CHECK(grid_best >= r.lo - 1e-3);
  CHECK(grid_best <= r.hi + 1e-5);
}

TEST_CASE("restricted_res rejects invalid options") {
  RresOptions opts;
  opts.outer_iterations = 0;
  CHECK_THROWS_AS(restricted_res(werner_assemblage(1.0), opts), DomainError);
  opts = {};
  opts.inner_tol = -1.0;
  CHECK_THROWS_AS(restricted_res(werner_assemblage(1.0), opts), DomainError);
}

TEST_CASE("restricted_res_exchanged") {
  CHECK(restricted_res_exchanged(lhs_instance(22)).hi <= 1e-3);
  const auto one = restricted_res_exchanged(single_input(23));
  CHECK(one.hi <= 1e-3);
  Rng rng(24);
  for (int t = 0; t < 3; ++t) {
    const auto a = random_assemblage(2, 2, 2, rng);
    const auto first = restricted_res(a);
    const auto second = restricted_res_exchanged(a);
    CHECK(std::max(first.lo, second.lo) <= std::min(first.hi, second.hi) + 2e-3);
  }
}

TEST_CASE("res_lower_bound_full") {
  const auto singlet = werner_assemblage(1.0);
  const auto r = restricted_res(singlet);
  const ProbabilityVector best(r.diagnostics.best_p);
  InnerSolveOptions inner;
  const double trivial = res_lower_bound_full(singlet, {MeasurementStrategy::trivial(best, 2)}, inner);
  CHECK(std::abs(trivial - r.lo) <= 2.0 * inner.tolerance);

  const MeasurementStrategy measure(StochasticMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                                    Instrument::basis_measurement(2));
  CHECK(res_lower_bound_full(singlet, {measure}) <= 1e-5);

  Rng rng(25);
  for (int t = 0; t < 5; ++t) {
    const MeasurementStrategy strat(random_stochastic(2, 2, rng), random_instrument(2, 2, 2, rng));
    const double lb = res_lower_bound_full(singlet, {strat});
    CHECK(lb >= -1e-9);
    CHECK(lb <= upper_bound_full(singlet, {strat}).value() + 1e-6);
  }
}

TEST_CASE("upper bounds") {
  const auto singlet = werner_assemblage(1.0);
  const auto rb = restricted_upper_bound(singlet);
  CHECK(rb.conditional_information == doctest::Approx(1.0));
  CHECK(rb.sup_outcome_entropy == doctest::Approx(1.0));
  CHECK(rb.entropy_b == doctest::Approx(1.0));
  CHECK(rb.log_dims == doctest::Approx(1.0));
  CHECK(sup_outcome_entropy(singlet) == doctest::Approx(1.0));
  const auto full = upper_bound_full(singlet, {});
  CHECK(full.log_outcomes == doctest::Approx(1.0));
  CHECK(full.value() <= 1.0 + 1e-12);

  // Deterministic p(a|x) = delta_{a, x}: uniform p_X gives H(A) = 1.
  const auto det = test::product_assemblage({{1.0, 0.0}, {0.0, 1.0}}, diag({0.5, 0.5}));
  CHECK(sup_outcome_entropy(det) == doctest::Approx(1.0).epsilon(1e-6));

  const auto trivial = test::product_assemblage({{0.3, 0.7}, {0.9, 0.1}}, diag({0.4, 0.6}));
  CHECK(restricted_upper_bound(trivial).conditional_information == doctest::Approx(0.0).scale(1.0));

  Rng rng(26);
  const auto four = random_assemblage(2, 4, 2, rng);
  CHECK(restricted_upper_bound(four).log_dims == doctest::Approx(1.0));
}

TEST_CASE("restricted_trace_distance") {
  const auto base = test::product_assemblage({{0.5, 0.5}, {0.5, 0.5}}, diag({0.5, 0.5}));
  CHECK(restricted_trace_distance(base, base) == 0.0);

  // Differs only at x = 0, with sum_a ||.||_1 = 0.3.
  const Assemblage moved(2, 2, 2, {diag({0.325, 0.175}), diag({0.175, 0.325}), diag({0.25, 0.25}), diag({0.25, 0.25})});
  double grid = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double p = k / 100.0;
    double sum = 0.0;
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t a = 0; a < 2; ++a)
        sum += (x == 0 ? p : 1.0 - p) * trace_norm(moved.element(x, a) - base.element(x, a));
    grid = std::max(grid, 0.5 * sum);
  }
  CHECK(grid == doctest::Approx(0.15));
  CHECK(restricted_trace_distance(base, moved) == doctest::Approx(grid));
  CHECK(restricted_trace_distance(moved, base) == restricted_trace_distance(base, moved));

  const Assemblage up(1, 2, 2, {diag({0.5, 0.0}), diag({0.0, 0.5})});
  const Assemblage down(1, 2, 2, {diag({0.0, 0.5}), diag({0.5, 0.0})});
  CHECK(restricted_trace_distance(up, down) == doctest::Approx(1.0));
}

TEST_CASE("trace_distance_lower_bound") {
  Rng rng(27);
  const auto a1 = random_assemblage(2, 2, 2, rng);
  const auto a2 = random_assemblage(2, 2, 2, rng);
  CHECK(trace_distance_lower_bound(a1, a1, {}) == doctest::Approx(0.0).scale(1.0));

  const auto uniform = ProbabilityVector::uniform(2);
  const double direct = 0.5 * trace_distance_norm(embed_cq(a1, uniform), embed_cq(a2, uniform));
  CHECK(trace_distance_lower_bound(a1, a2, {}) == doctest::Approx(direct));

  std::vector<MeasurementStrategy> strategies;
  double last = trace_distance_lower_bound(a1, a2, {});
  for (int t = 0; t < 5; ++t) {
    strategies.emplace_back(random_stochastic(2, 2, rng), random_instrument(2, 2, 2, rng));
    const double now = trace_distance_lower_bound(a1, a2, strategies);
    CHECK(now >= direct - 1e-12);
    CHECK(now >= last - 1e-15);
    last = now;
  }

  SeesawOptions opts;
  opts.starts = 3;
  opts.seed = 5;
  const auto s1 = seesaw_trace_distance(a1, a2, opts);
  const auto s2 = seesaw_trace_distance(a1, a2, opts);
  CHECK(s1.value == s2.value);
  CHECK(s1.value >= direct - 1e-12);
  CHECK(s1.value <= 1.0 + 1e-12);
}

TEST_CASE("g_eps") {
  CHECK(g_eps(0.0) == 0.0);
  CHECK(g_eps(1.0) == doctest::Approx(2.0));
  const long double e = 0.5L;
  const long double expected = (e + 1) * std::log2(e + 1) - e * std::log2(e);
  CHECK(g_eps(0.5) == doctest::Approx(static_cast<double>(expected)).epsilon(1e-14));
  CHECK(g_eps(0.5) == doctest::Approx(1.37744).epsilon(1e-5));
  CHECK_THROWS_AS(g_eps(-0.1), DomainError);
}

TEST_CASE("continuity_bound_check") {
  const auto singlet = werner_assemblage(1.0);
  const auto same = continuity_bound_check(singlet, singlet);
  CHECK(same.epsilon == 0.0);
  CHECK(same.pass);

  const auto lhs = continuity_bound_check(lhs_instance(28), lhs_instance(29));
  CHECK(lhs.pass);

  const auto depolarized = werner_assemblage(0.95);
  const auto rep = continuity_bound_check(singlet, depolarized);
  CHECK(rep.epsilon > 0.0);
  CHECK(rep.pass);
  CHECK(rep.margin >= 0.0);
}

TEST_CASE("pinsker_slack and faithfulness_check") {
  Rng rng(30);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_assemblage(2, 2, 2, rng);
    const auto m = random_lhs_model(2, 2, 2, rng);
    CHECK(pinsker_slack(a, m, ProbabilityVector(random_simplex(2, rng))) >= -1e-8);
  }

  CHECK(faithfulness_check(lhs_instance(31)).pass);
  const auto one = faithfulness_check(single_input(32));
  CHECK(one.pass);
  CHECK(one.feasibility.feasible);
  CHECK(one.rres.hi <= 1e-3);

  const auto singlet = faithfulness_check(werner_assemblage(1.0));
  CHECK(singlet.pass);
  CHECK(singlet.rres.lo > 0.0);
  CHECK_FALSE(singlet.feasibility.feasible);
}
