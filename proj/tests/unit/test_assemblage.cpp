#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace steer;
using steer::test::diag;
using steer::test::max_abs_diff;

namespace {

const double s = 1.0 / std::sqrt(2.0);

HermitianOperator ket_proj(complex a, complex b) {
  const std::vector<complex> v{a, b};
  return HermitianOperator::projector(v);
}

Povm z_basis() { return Povm({diag({1.0, 0.0}), diag({0.0, 1.0})}); }
Povm x_basis() { return Povm({ket_proj(s, s), ket_proj(s, -s)}); }

}  // namespace

TEST_CASE("assemblage_from_state on a product state factorizes") {
  Rng rng(1);
  const auto ra = random_density(2, 2, rng).op();
  const auto rb = random_density(2, 2, rng).op();
  const DensityOperator ab(HermitianOperator(kron(ra.matrix(), rb.matrix())));
  const std::vector<Povm> povms{random_povm(2, 3, rng), random_povm(2, 3, rng)};
  const auto a = assemblage_from_state(ab, 2, 2, povms);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t o = 0; o < 3; ++o) {
      const double p = trace_product(povms[x][o], ra);
      CHECK(max_abs_diff(a.element(x, o), p * rb) < 1e-14);
    }
}

TEST_CASE("maximally entangled state with Z and X gives half-weight eigenstates") {
  // |Phi+> = (|00> + |11>)/sqrt 2: outcome a on Alice leaves Bob in the same eigenstate.
  const std::vector<complex> phi{s, 0.0, 0.0, s};
  const DensityOperator rho(HermitianOperator::projector(phi));
  const auto a = assemblage_from_state(rho, 2, 2, {z_basis(), x_basis()});
  CHECK(max_abs_diff(a.element(0, 0), diag({0.5, 0.0})) < 1e-15);
  CHECK(max_abs_diff(a.element(0, 1), diag({0.0, 0.5})) < 1e-15);
  CHECK(max_abs_diff(a.element(1, 0), 0.5 * ket_proj(s, s)) < 1e-15);
  CHECK(max_abs_diff(a.element(1, 1), 0.5 * ket_proj(s, -s)) < 1e-15);
  CHECK(max_abs_diff(reduced_state(a).op(), diag({0.5, 0.5})) < 1e-15);
}

TEST_CASE("trivial POVM gives rho_B for every input") {
  Rng rng(2);
  const auto rho = random_density(4, 4, rng);
  const Povm trivial({HermitianOperator::identity(2)});
  const auto a = assemblage_from_state(rho, 2, 2, {trivial, trivial});
  const std::size_t dims[] = {2, 2};
  const std::size_t keep[] = {1};
  const auto rb = partial_trace(rho.op(), dims, keep);
  CHECK(max_abs_diff(a.element(0, 0), rb) < 1e-14);
  CHECK(max_abs_diff(a.element(1, 0), rb) < 1e-14);
}

TEST_CASE("werner_assemblage at full visibility is the singlet assemblage") {
  // (|01> - |10>)/sqrt 2: Bob is left in the opposite eigenstate.
  const auto a = werner_assemblage(1.0);
  CHECK(max_abs_diff(a.element(0, 0), diag({0.0, 0.5})) < 1e-15);
  CHECK(max_abs_diff(a.element(0, 1), diag({0.5, 0.0})) < 1e-15);
  CHECK(max_abs_diff(a.element(1, 0), 0.5 * ket_proj(s, -s)) < 1e-15);
  CHECK(max_abs_diff(a.element(1, 1), 0.5 * ket_proj(s, s)) < 1e-15);
  const auto p = conditional_probs(a);
  for (double v : p.entries()) CHECK(v == doctest::Approx(0.5));
  CHECK(max_abs_diff(reduced_state(a).op(), diag({0.5, 0.5})) < 1e-15);

  const auto w0 = werner_assemblage(0.0);
  for (const auto& el : w0.elements()) CHECK(max_abs_diff(el, diag({0.25, 0.25})) < 1e-15);
}

TEST_CASE("reduced_state of a product assemblage") {
  const auto rho = diag({0.3, 0.7});
  const auto a = test::product_assemblage({{0.2, 0.8}, {0.6, 0.4}}, rho);
  CHECK(max_abs_diff(reduced_state(a).op(), rho) < 1e-15);
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto r = random_assemblage(3, 2, 2, rng);
    HermitianOperator sum1 = HermitianOperator::zeros(2);
    for (std::size_t o = 0; o < 2; ++o) sum1 += r.element(2, o);
    CHECK(max_abs_diff(reduced_state(r).op(), sum1) < 1e-9);
  }
}

TEST_CASE("Assemblage rejects invalid element sets") {
  const auto half = diag({0.25, 0.25});
  // Signaling: the x = 1 marginal differs.
  CHECK_THROWS_AS(Assemblage(2, 2, 2, {half, half, diag({0.5, 0.0}), diag({0.5, 0.0})}), InvariantError);
  // Not positive.
  CHECK_THROWS_AS(Assemblage(1, 2, 2, {diag({0.75, -0.1}), diag({0.25, 0.1})}), InvariantError);
  // Wrong total trace.
  CHECK_THROWS_AS(Assemblage(1, 2, 2, {half, diag({0.1, 0.1})}), InvariantError);
  CHECK_THROWS_AS(Assemblage(1, 2, 2, {half}), Error);
}

TEST_CASE("embed_cq") {
  const auto rho = diag({0.3, 0.7});
  const auto a = test::product_assemblage({{0.2, 0.8}, {0.6, 0.4}}, rho);
  const auto cq = embed_cq(a, ProbabilityVector::uniform(2));
  CHECK(cq.register_names() == std::vector<std::string>{"X", "A"});
  CHECK(max_abs_diff(cq.block({1, 0}), 0.5 * 0.6 * rho) < 1e-15);
  CHECK(cq.trace() == doctest::Approx(1.0));

  const auto point = embed_cq(a, ProbabilityVector::point_mass(2, 1));
  CHECK(point.block({0, 0}).matrix().max_abs() == 0.0);
  CHECK(point.block({0, 1}).matrix().max_abs() == 0.0);
  CHECK(max_abs_diff(point.block({1, 1}), 0.4 * rho) < 1e-15);

  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto r = random_assemblage(2, 3, 2, rng);
    const ProbabilityVector p(random_simplex(2, rng));
    CHECK(max_abs_diff(embed_cq(r, p).quantum_marginal(), reduced_state(r).op()) < 1e-10);
  }
}

TEST_CASE("apply_measurement_strategy") {
  Rng rng(10);
  const auto a = random_assemblage(2, 2, 2, rng);
  const ProbabilityVector p(random_simplex(2, rng));

  const auto trivial = apply_measurement_strategy(a, MeasurementStrategy::trivial(p, 2));
  const auto direct = embed_cq(a, p);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t o = 0; o < 2; ++o) CHECK(max_abs_diff(trivial.block({x, o, 0}), direct.block({x, o})) < 1e-15);

  // Measuring and discarding B leaves a classical XAY state.
  const MeasurementStrategy measure(StochasticMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                                    Instrument::basis_measurement(2));
  const auto classical = apply_measurement_strategy(a, measure);
  CHECK(classical.quantum_dim() == 1);
  CHECK(classical.trace() == doctest::Approx(1.0));

  for (int t = 0; t < 50; ++t) {
    const MeasurementStrategy strat(random_stochastic(2, 2, rng), random_instrument(2, 2, 2, rng));
    const auto cq = apply_measurement_strategy(a, strat);
    CHECK(cq.trace() == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& b : cq.blocks()) CHECK(eig_hermitian(b).eigenvalues.front() >= -1e-12);
  }
}

TEST_CASE("apply_restricted_1wlocc") {
  Rng rng(12);
  const auto a = random_assemblage(2, 2, 2, rng);
  const auto same = apply_restricted_1wlocc(a, RestrictedOneWayLocc::identity(2, 2, 2), 2, 2);
  for (std::size_t i = 0; i < a.elements().size(); ++i) CHECK(max_abs_diff(same.elements()[i], a.elements()[i]) < 1e-15);

  // Constant a_f: each input collapses to K(rho_B).
  const auto inst = random_instrument(2, 2, 1, rng);
  const RestrictedOneWayLocc discard(StochasticMatrix::identity(2), 2, 1, std::vector<double>(2 * 2 * 2 * 1 * 1, 1.0),
                                     inst);
  const auto collapsed = apply_restricted_1wlocc(a, discard, 2, 1);
  for (std::size_t x = 0; x < 2; ++x) {
    const auto expected = inst.apply(0, a.element(x, 0) + a.element(x, 1));
    CHECK(max_abs_diff(collapsed.element(x, 0), expected) < 1e-14);
  }

  for (int t = 0; t < 100; ++t) {
    RestrictedOpShape shape;
    shape.n_final_inputs = 1 + rng.index(3);
    shape.n_final_outcomes = 1 + rng.index(3);
    shape.output_dim = 1 + rng.index(3);
    const auto op = random_restricted_op(shape, rng);
    const auto out = apply_restricted_1wlocc(a, op, shape.n_final_inputs, shape.n_final_outcomes);
    CHECK(out.no_signaling_residual() <= 1e-9);
  }
}

TEST_CASE("compose matches sequential application") {
  Rng rng(13);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_assemblage(2, 2, 2, rng);
    RestrictedOpShape s1;
    s1.n_final_inputs = 2;
    s1.n_final_outcomes = 3;
    RestrictedOpShape s2;
    s2.n_inputs = 2;
    s2.n_outcomes = 3;
    s2.n_final_inputs = 2;
    s2.n_final_outcomes = 2;
    const auto op1 = random_restricted_op(s1, rng);
    const auto op2 = random_restricted_op(s2, rng);
    const auto twice = apply_restricted_1wlocc(apply_restricted_1wlocc(a, op1, 2, 3), op2, 2, 2);
    const auto once = apply_restricted_1wlocc(a, compose(op1, op2), 2, 2);
    for (std::size_t i = 0; i < once.elements().size(); ++i) CHECK(max_abs_diff(once.elements()[i], twice.elements()[i]) < 1e-10);
  }
}

TEST_CASE("CqState relative entropy and mutual information") {
  const CqState rho({"X"}, {2}, 1, {diag({0.5}), diag({0.5})});
  const CqState sigma({"X"}, {2}, 1, {diag({1.0}), diag({0.0})});
  CHECK(relative_entropy(rho, rho).value() == doctest::Approx(0.0));
  CHECK(relative_entropy(rho, sigma).is_infinite());
  CHECK(relative_entropy(sigma, rho).value() == doctest::Approx(1.0));
  CHECK(trace_distance_norm(rho, sigma) == doctest::Approx(1.0));

  // Perfectly correlated bits: I(X; Y) = 1.
  const CqState corr({"X", "Y"}, {2, 2}, 1, {diag({0.5}), diag({0.0}), diag({0.0}), diag({0.5})});
  CHECK(mutual_information(corr, {"X"}, false, {"Y"}) == doctest::Approx(1.0));
}
