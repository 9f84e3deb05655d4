#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace steer;
using steer::test::diag;
using steer::test::max_abs_diff;

namespace {

// inf over LHS of D(rho_XAB || sigma_XAB) for the singlet with Z/X at uniform
// p_X, from 30-start BFGS over a Cholesky parametrization of the four
// sigma_lambda (scipy, independent of this library).
constexpr double kSingletInner = 0.22844669683639168;
constexpr double kWerner09Inner = 0.06920507003679527;

// Explicit model for the Werner assemblage with Z/X measurements:
// sigma_(a0,a1) = (rho^{a0,Z} + rho^{a1,X}) / 2 - I/8, PSD iff eta <= 1/sqrt 2.
LhsModel werner_model(const Assemblage& a) {
  std::vector<HermitianOperator> sig;
  for (std::size_t a0 = 0; a0 < 2; ++a0)
    for (std::size_t a1 = 0; a1 < 2; ++a1)
      sig.push_back(0.5 * (a.element(0, a0) + a.element(1, a1)) - 0.125 * HermitianOperator::identity(2));
  return LhsModel(2, 2, 2, std::move(sig));
}

}  // namespace

TEST_CASE("enumerate_strategies counts and order") {
  CHECK(enumerate_strategies(1, 2).size() == 2);
  CHECK(enumerate_strategies(2, 2).size() == 4);
  CHECK(enumerate_strategies(3, 3).size() == 27);
  const auto s = enumerate_strategies(2, 3);
  CHECK(s[0].response == std::vector<std::size_t>{0, 0});
  CHECK(s[1].response == std::vector<std::size_t>{0, 1});
  CHECK(s[3].response == std::vector<std::size_t>{1, 0});
  for (std::size_t l = 0; l < s.size(); ++l)
    for (std::size_t x = 0; x < 2; ++x) CHECK(strategy_response(l, x, 2, 3) == s[l].response[x]);
  CHECK_THROWS_AS(enumerate_strategies(13, 2), DomainError);
}

TEST_CASE("lhs_assemblage of simple models") {
  const auto rho = diag({0.3, 0.7});
  // One strategy carries all the weight: lambda = (1, 0).
  std::vector<HermitianOperator> sig(4, HermitianOperator::zeros(2));
  sig[2] = rho;
  const auto single = lhs_assemblage(LhsModel(2, 2, 2, sig));
  CHECK(max_abs_diff(single.element(0, 1), rho) < 1e-15);
  CHECK(max_abs_diff(single.element(1, 0), rho) < 1e-15);
  CHECK(single.element(0, 0).matrix().max_abs() == 0.0);

  const auto a = test::product_assemblage({{0.5, 0.5, 0.0}, {0.1, 0.2, 0.7}}, rho);
  const auto uniform = lhs_assemblage(LhsModel::uniform(a));
  for (const auto& el : uniform.elements()) CHECK(max_abs_diff(el, rho * (1.0 / 3.0)) < 1e-15);
  const auto product = lhs_assemblage(LhsModel::product(a));
  for (std::size_t i = 0; i < a.elements().size(); ++i) CHECK(max_abs_diff(product.elements()[i], a.elements()[i]) < 1e-15);
}

TEST_CASE("LhsModel rejects invalid operators") {
  std::vector<HermitianOperator> sig(4, diag({0.125, 0.125}));
  sig[0] = diag({0.3, -0.05});
  CHECK_THROWS_AS(LhsModel(2, 2, 2, sig), InvariantError);
  CHECK_THROWS_AS(LhsModel(2, 2, 2, std::vector<HermitianOperator>(3, diag({0.25, 0.0}))), Error);
}

TEST_CASE("lhs_feasibility accepts LHS assemblages") {
  Rng rng(14);
  for (int t = 0; t < 40; ++t) {
    const std::size_t nx = 2 + rng.index(2), na = 2 + rng.index(2), d = 2 + rng.index(2);
    const auto a = lhs_assemblage(random_lhs_model(nx, na, d, rng));
    const auto rep = lhs_feasibility(a);
    CHECK(rep.status == FeasibilityStatus::kFeasible);
    CHECK(rep.residual <= 1e-7);
    REQUIRE(rep.model.has_value());
    const auto back = lhs_assemblage(*rep.model);
    double res = 0.0;
    for (std::size_t i = 0; i < a.elements().size(); ++i) res += trace_norm(back.elements()[i] - a.elements()[i]);
    CHECK(res <= 1e-7);
  }
  const auto zero_info = test::product_assemblage({{0.5, 0.5}, {0.5, 0.5}}, diag({0.5, 0.5}));
  CHECK(lhs_feasibility(zero_info).feasible);
}

TEST_CASE("Werner assemblages: explicit model below the threshold, witness above") {
  const auto w5 = werner_assemblage(0.5);
  const auto model = werner_model(w5);
  const auto back = lhs_assemblage(model);
  for (std::size_t i = 0; i < 4; ++i) CHECK(max_abs_diff(back.elements()[i], w5.elements()[i]) < 1e-15);
  CHECK(lhs_feasibility(w5).status == FeasibilityStatus::kFeasible);

  // G^{a,x} = (-1)^a P_x with P = Z, X. Quantum value 2 eta; every LHS
  // assemblage stays below max |s Z + t X| = sqrt 2.
  const auto w9 = werner_assemblage(0.9);
  const std::vector<HermitianOperator> g{test::pauli_z(), -1.0 * test::pauli_z(), test::pauli_x(),
                                         -1.0 * test::pauli_x()};
  double quantum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) quantum += trace_product(g[i], w9.elements()[i]);
  CHECK(std::abs(quantum) == doctest::Approx(1.8));
  CHECK(lhs_support_function(2, 2, g) == doctest::Approx(std::sqrt(2.0)));
  const auto rep = lhs_feasibility(w9);
  CHECK(rep.status == FeasibilityStatus::kInfeasible);
  CHECK_FALSE(rep.feasible);
  CHECK(rep.witness_value > 0.0);
}

TEST_CASE("inner_inf_relative_entropy") {
  Rng rng(15);
  const auto lhs = lhs_assemblage(random_lhs_model(2, 2, 2, rng));
  CHECK(inner_inf_relative_entropy(lhs, ProbabilityVector::uniform(2)).value <= 1e-5);

  const auto r = random_assemblage(3, 2, 2, rng);
  CHECK(inner_inf_relative_entropy(r, ProbabilityVector::point_mass(3, 1)).value <= 1e-5);

  const auto singlet = inner_inf_relative_entropy(werner_assemblage(1.0), ProbabilityVector::uniform(2));
  CHECK(singlet.value >= kSingletInner - 1e-7);
  CHECK(singlet.value - singlet.gap <= kSingletInner + 1e-7);
  CHECK(singlet.value <= kSingletInner + 1e-5);

  const auto w9 = inner_inf_relative_entropy(werner_assemblage(0.9), ProbabilityVector::uniform(2));
  CHECK(w9.value >= kWerner09Inner - 1e-7);
  CHECK(w9.value - w9.gap <= kWerner09Inner + 1e-7);
}

TEST_CASE("minimize_divergence never increases the objective and its gap is sound") {
  Rng rng(16);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_assemblage(2, 2, 2, rng);
    const auto program = DivergenceProgram::restricted(a);
    const auto scal = Scalarization::linear({0.5, 0.5});
    double last = INFINITY;
    bool monotone = true;
    FrankWolfeOptions opts;
    opts.observer = [&](const FrankWolfeIterate& it) {
      if (it.objective > last + 1e-12) monotone = false;
      last = it.objective;
    };
    const auto res = minimize_divergence(program, scal, LhsModel::uniform(a).sigmas(), opts);
    CHECK(monotone);
    // Any other LHS model is at least value - gap.
    const auto other = random_lhs_model(2, 2, 2, rng);
    const auto vals = program.group_values(other.sigmas());
    if (vals[0].is_finite() && vals[1].is_finite()) {
      CHECK(scal.value({vals[0].value(), vals[1].value()}) >= res.objective - res.gap - 1e-9);
    }
  }
}

TEST_CASE("Scalarization values and gradients") {
  const auto lin = Scalarization::linear({0.25, 0.75});
  CHECK(lin.value({1.0, 2.0}) == doctest::Approx(1.75));
  const auto lse = Scalarization::log_sum_exp(1000.0);
  CHECK(lse.value({1.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-6));
  const auto g = lse.gradient({1.0, 1.0});
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[0] + g[1] == doctest::Approx(1.0));
}
