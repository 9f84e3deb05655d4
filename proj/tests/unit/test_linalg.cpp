#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

using namespace steer;
using steer::test::diag;
using steer::test::max_abs_diff;

TEST_CASE("eig_hermitian on small known spectra") {
  auto e = eig_hermitian(HermitianOperator::identity(2));
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0));

  e = eig_hermitian(diag({2.0, -1.0}));
  CHECK(e.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(std::abs(e.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.eigenvectors(0, 1)) == doctest::Approx(1.0));

  e = eig_hermitian(test::pauli_x());
  CHECK(e.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian reconstructs random matrices with a unitary basis") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.index(6);
    const auto m = test::random_hermitian(n, rng);
    const auto e = eig_hermitian(m);
    for (std::size_t i = 1; i < n; ++i) CHECK(e.eigenvalues[i - 1] <= e.eigenvalues[i]);
    const auto vv = e.eigenvectors.adjoint() * e.eigenvectors;
    CHECK((vv - ComplexMatrix::identity(n)).max_abs() < 1e-12);
    CHECK(max_abs_diff(reconstruct(e), m) < 1e-11 * std::max(1.0, m.matrix().max_abs()));
  }
}

TEST_CASE("matrix_function with log2") {
  CHECK(max_abs_diff(log2_on_support(HermitianOperator::identity(2)), HermitianOperator::zeros(2)) < 1e-15);
  CHECK(max_abs_diff(matrix_function(diag({4.0, 2.0}), [](double v) { return std::log2(v); }), diag({2.0, 1.0})) <
        1e-14);
  const auto r = matrix_function(diag({1.0, 0.0}), [](double v) { return std::log2(v); }, SupportMode::kSupportRestricted);
  CHECK(max_abs_diff(r, HermitianOperator::zeros(2)) < 1e-15);
}

TEST_CASE("trace_norm") {
  CHECK(trace_norm(diag({1.0, -1.0})) == doctest::Approx(2.0));
  CHECK(trace_norm(HermitianOperator::zeros(2)) == 0.0);
  CHECK(trace_norm(diag({0.5, -0.5})) == doctest::Approx(1.0));
  CHECK(trace_norm(test::pauli_x()) == doctest::Approx(2.0));
}

TEST_CASE("relative_entropy") {
  const DensityOperator zero(diag({1.0, 0.0}));
  const DensityOperator one(diag({0.0, 1.0}));
  const DensityOperator mixed(diag({0.5, 0.5}));
  CHECK(relative_entropy(zero, zero).value() == doctest::Approx(0.0));
  CHECK(relative_entropy(mixed, mixed).value() == doctest::Approx(0.0));
  CHECK(relative_entropy(zero, mixed).value() == doctest::Approx(1.0));
  CHECK(relative_entropy(zero, one).is_infinite());
  CHECK_THROWS_AS(ExtendedReal::infinity().value(), DomainError);
}

TEST_CASE("relative_entropy agrees with an explicit commuting formula") {
  // Commuting pair: D = sum p_i log2(p_i / q_i).
  const DensityOperator rho(diag({0.7, 0.2, 0.1}));
  const DensityOperator sigma(diag({0.2, 0.3, 0.5}));
  const double expected = 0.7 * std::log2(0.7 / 0.2) + 0.2 * std::log2(0.2 / 0.3) + 0.1 * std::log2(0.1 / 0.5);
  CHECK(relative_entropy(rho, sigma).value() == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("von_neumann_entropy") {
  CHECK(von_neumann_entropy(DensityOperator(diag({0.5, 0.5}))) == doctest::Approx(1.0));
  CHECK(von_neumann_entropy(DensityOperator(diag({1.0, 0.0}))) == doctest::Approx(0.0));
  CHECK(von_neumann_entropy(DensityOperator(diag({0.25, 0.25, 0.25, 0.25}))) == doctest::Approx(2.0));
}

TEST_CASE("partial_trace") {
  Rng rng(5);
  const auto ra = random_density(2, 2, rng).op();
  const auto rb = random_density(3, 2, rng).op();
  const HermitianOperator ab(kron(ra.matrix(), rb.matrix()));
  const std::size_t dims[] = {2, 3};
  const std::size_t keep_b[] = {1};
  CHECK(max_abs_diff(partial_trace(ab, dims, keep_b), rb) < 1e-14);

  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<complex> phi{s, 0.0, 0.0, s};
  const std::size_t qubits[] = {2, 2};
  const std::size_t keep_a[] = {0};
  CHECK(max_abs_diff(partial_trace(HermitianOperator::projector(phi), qubits, keep_a), diag({0.5, 0.5})) < 1e-15);

  const auto all = partial_trace(ab, dims, {});
  CHECK(all.dim() == 1);
  CHECK(all(0, 0).real() == doctest::Approx(ab.trace()));
}

TEST_CASE("partial_trace matches index loops on random tripartite operators") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const std::vector<std::size_t> dims{1 + rng.index(3), 1 + rng.index(3), 1 + rng.index(3)};
    const auto m = test::random_hermitian(dims[0] * dims[1] * dims[2], rng);
    for (unsigned mask = 0; mask < 8; ++mask) {
      std::vector<std::size_t> keep;
      std::vector<bool> keep_flags(3);
      for (std::size_t i = 0; i < 3; ++i) {
        keep_flags[i] = (mask >> i) & 1U;
        if (keep_flags[i]) keep.push_back(i);
      }
      CHECK(max_abs_diff(partial_trace(m, dims, keep), test::naive_partial_trace(m, dims, keep_flags)) < 1e-12);
    }
  }
}

TEST_CASE("conditional_mutual_information") {
  Rng rng(3);
  const auto a = random_density(2, 2, rng).op();
  const auto b = random_density(2, 2, rng).op();
  const auto c = random_density(3, 3, rng).op();
  const DensityOperator product(HermitianOperator(kron(kron(a.matrix(), b.matrix()), c.matrix())));
  CHECK(std::abs(conditional_mutual_information(product, {2, 2, 3})) < 1e-10);

  // Classical copy of a fair bit.
  const DensityOperator copy(diag({0.5, 0.0, 0.0, 0.5}));
  CHECK(conditional_mutual_information(copy, {2, 2, 1}) == doctest::Approx(1.0));
}

TEST_CASE("conditional_mutual_information matches entropies of explicit marginals") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 1 + rng.index(3), l = 1 + rng.index(3), m = 1 + rng.index(2);
    const std::size_t n = k * l * m;
    const auto rho = random_density(n, 1 + rng.index(n), rng);
    const std::vector<std::size_t> dims{k, l, m};
    const auto& op = rho.op();
    const double h_km = test::entropy_bits(test::naive_partial_trace(op, dims, {true, false, true}));
    const double h_lm = test::entropy_bits(test::naive_partial_trace(op, dims, {false, true, true}));
    const double h_m = test::entropy_bits(test::naive_partial_trace(op, dims, {false, false, true}));
    const double h_klm = test::entropy_bits(op);
    const double expected = h_km + h_lm - h_m - h_klm;
    CHECK(conditional_mutual_information(rho, {k, l, m}) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("log_frechet_apply closed forms") {
  Rng rng(4);
  const auto h = test::random_hermitian(3, rng);
  const double ln2 = std::numbers::ln2;
  CHECK(max_abs_diff(log_frechet_apply(HermitianOperator::identity(3), h), (1.0 / ln2) * h) < 1e-14);
  CHECK(max_abs_diff(log_frechet_apply(diag({2.0, 2.0}), diag({1.0, 0.0})), diag({1.0 / (2.0 * ln2), 0.0})) < 1e-15);
}

TEST_CASE("log_frechet_apply matches central differences") {
  Rng rng(6);
  const double eps = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const auto sigma = random_density(3, 3, rng).op() + 0.2 * HermitianOperator::identity(3);
    const auto h = test::random_hermitian(3, rng);
    const auto fd = (1.0 / (2.0 * eps)) * (log2_on_support(sigma + eps * h) - log2_on_support(sigma - eps * h));
    CHECK(max_abs_diff(log_frechet_apply(sigma, h), fd) <= 1e-6 * h.matrix().frobenius_norm());
  }
}

TEST_CASE("log_divided_difference") {
  // Natural log: (ln a - ln b) / (a - b), and 1/a on the diagonal.
  CHECK(log_divided_difference(2.0, 2.0) == doctest::Approx(0.5));
  CHECK(log_divided_difference(4.0, 2.0) == doctest::Approx(std::numbers::ln2 / 2.0));
}

TEST_CASE("invalid shapes are rejected") {
  CHECK_THROWS_AS(HermitianOperator(ComplexMatrix(2, 3)), Error);
  CHECK_THROWS_AS(DensityOperator(diag({0.5, 0.4})), InvariantError);
  CHECK_THROWS_AS(DensityOperator(diag({1.5, -0.5})), InvariantError);
}
