#include "steer/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace steer {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::vector<double> one_hot(std::size_t n, std::size_t at) {
  std::vector<double> v(n, 0.0);
  v[at] = 1.0;
  return v;
}

}  // namespace

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  spare_ = r * std::sin(2.0 * std::numbers::pi * v);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * v);
}

complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

Rng Rng::split(std::uint64_t label) const { return Rng(mix64(seed_ ^ mix64(label + kGolden))); }

Rng Rng::split(std::uint64_t label_a, std::uint64_t label_b) const { return split(label_a).split(label_b); }

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (auto& z : g.entries()) z = rng.complex_normal();
  return g;
}

DensityOperator random_density(std::size_t dim, std::size_t rank, Rng& rng) {
  if (rank < 1 || rank > dim) throw DomainError("random_density: rank must be in [1, dim]");
  const ComplexMatrix g = ginibre(dim, rank, rng);
  HermitianOperator h = HermitianOperator::symmetrized(g * g.adjoint());
  h *= 1.0 / h.trace();
  return DensityOperator(std::move(h));
}

std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& v : w) {
    double u = 0.0;
    while (u <= 0.0) u = rng.uniform();
    v = -std::log(u);
    s += v;
  }
  for (auto& v : w) v /= s;
  return w;
}

StochasticMatrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> e;
  e.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = random_simplex(cols, rng);
    e.insert(e.end(), row.begin(), row.end());
  }
  return StochasticMatrix(rows, cols, std::move(e));
}

Povm random_povm(std::size_t dim, std::size_t n_outcomes, Rng& rng, std::size_t rank) {
  if (rank == 0) rank = dim;
  // S must be invertible: at least dim columns overall.
  rank = std::max(rank, (dim + n_outcomes - 1) / n_outcomes);
  std::vector<HermitianOperator> raw;
  HermitianOperator s = HermitianOperator::zeros(dim);
  for (std::size_t a = 0; a < n_outcomes; ++a) {
    const ComplexMatrix g = ginibre(dim, rank, rng);
    raw.push_back(HermitianOperator::symmetrized(g * g.adjoint()));
    s += raw.back();
  }
  const HermitianOperator s_inv_half =
      matrix_function(s, [](double l) { return 1.0 / std::sqrt(l); }, SupportMode::kFull);
  std::vector<HermitianOperator> out;
  for (const auto& r : raw) out.push_back(congruence(s_inv_half.matrix(), r));
  return Povm(std::move(out));
}

ComplexMatrix orthonormalize_columns(const ComplexMatrix& v) {
  const HermitianOperator gram = HermitianOperator::symmetrized(v.adjoint() * v);
  const HermitianOperator inv_half =
      matrix_function(gram, [](double l) { return 1.0 / std::sqrt(l); }, SupportMode::kFull);
  return v * inv_half.matrix();
}

ComplexMatrix random_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows < cols) throw DimensionError("random_isometry: rows < cols");
  return orthonormalize_columns(ginibre(rows, cols, rng));
}

Instrument instrument_from_isometry(const ComplexMatrix& v, std::size_t input_dim, std::size_t output_dim,
                                    std::size_t n_branches, std::size_t kraus_per_branch) {
  if (v.cols() != input_dim || v.rows() != n_branches * kraus_per_branch * output_dim) {
    throw DimensionError("instrument_from_isometry: isometry shape does not match the Kraus layout");
  }
  std::vector<std::vector<ComplexMatrix>> branches(n_branches);
  for (std::size_t z = 0; z < n_branches; ++z) {
    for (std::size_t t = 0; t < kraus_per_branch; ++t) {
      ComplexMatrix k(output_dim, input_dim);
      const std::size_t row0 = (z * kraus_per_branch + t) * output_dim;
      for (std::size_t r = 0; r < output_dim; ++r) {
        for (std::size_t c = 0; c < input_dim; ++c) k(r, c) = v(row0 + r, c);
      }
      branches[z].push_back(std::move(k));
    }
  }
  return Instrument(input_dim, output_dim, std::move(branches));
}

Instrument random_instrument(std::size_t input_dim, std::size_t output_dim, std::size_t n_branches, Rng& rng,
                             std::size_t kraus_per_branch) {
  const std::size_t rows = n_branches * kraus_per_branch * output_dim;
  if (rows < input_dim) throw DimensionError("random_instrument: too few output dimensions for an isometry");
  return instrument_from_isometry(random_isometry(rows, input_dim, rng), input_dim, output_dim, n_branches,
                                  kraus_per_branch);
}

Assemblage random_assemblage(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b, Rng& rng) {
  const std::size_t d = dim_b * dim_b;
  const std::size_t rank = rng.uniform() < 0.5 ? 1 : 1 + rng.index(d);
  const DensityOperator rho = random_density(d, rank, rng);
  std::vector<Povm> povms;
  for (std::size_t x = 0; x < n_inputs; ++x) {
    const std::size_t povm_rank = rng.uniform() < 0.75 ? 1 : 1 + rng.index(dim_b);
    povms.push_back(random_povm(dim_b, n_outcomes, rng, povm_rank));
  }
  return assemblage_from_state(rho, dim_b, dim_b, povms);
}

LhsModel random_lhs_model(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b, Rng& rng) {
  const std::size_t n = strategy_count(n_inputs, n_outcomes);
  const auto w = random_simplex(n, rng);
  std::vector<HermitianOperator> s;
  for (std::size_t l = 0; l < n; ++l) s.push_back(random_density(dim_b, 1 + rng.index(dim_b), rng).op() * w[l]);
  return LhsModel(n_inputs, n_outcomes, dim_b, std::move(s));
}

RestrictedOneWayLocc random_restricted_op(const RestrictedOpShape& shape, Rng& rng) {
  // Half of the draws use deterministic classical processing, which is where
  // monotonicity is tightest.
  const bool sharp = rng.uniform() < 0.5;
  std::vector<double> xx;
  for (std::size_t xf = 0; xf < shape.n_final_inputs; ++xf) {
    const auto row = sharp ? one_hot(shape.n_inputs, rng.index(shape.n_inputs)) : random_simplex(shape.n_inputs, rng);
    xx.insert(xx.end(), row.begin(), row.end());
  }
  std::vector<double> af;
  const std::size_t conditions = shape.n_outcomes * shape.n_inputs * shape.n_final_inputs * shape.n_branches;
  for (std::size_t c = 0; c < conditions; ++c) {
    const auto row = sharp ? one_hot(shape.n_final_outcomes, rng.index(shape.n_final_outcomes))
                           : random_simplex(shape.n_final_outcomes, rng);
    af.insert(af.end(), row.begin(), row.end());
  }
  return RestrictedOneWayLocc(StochasticMatrix(shape.n_final_inputs, shape.n_inputs, std::move(xx)), shape.n_outcomes,
                              shape.n_final_outcomes, std::move(af),
                              random_instrument(shape.dim_b, shape.output_dim, shape.n_branches, rng));
}

Assemblage werner_assemblage(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("werner_assemblage: visibility must lie in [0, 1]");
  const double s = std::numbers::sqrt2 / 2.0;
  const std::vector<complex> phi_minus = {0.0, s, -s, 0.0};
  const HermitianOperator rho =
      HermitianOperator::projector(phi_minus) * eta + HermitianOperator::identity(4) * ((1.0 - eta) / 4.0);
  const std::vector<complex> z0 = {1.0, 0.0}, z1 = {0.0, 1.0}, x0 = {s, s}, x1 = {s, -s};
  const Povm z({HermitianOperator::projector(z0), HermitianOperator::projector(z1)});
  const Povm x({HermitianOperator::projector(x0), HermitianOperator::projector(x1)});
  return assemblage_from_state(DensityOperator(rho), 2, 2, {z, x});
}

}  // namespace steer
