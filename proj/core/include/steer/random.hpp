#pragma once

// Seeded random instances: states, measurements, instruments, assemblages
// and restricted one-way LOCC operations. Every generator draws from an
// explicit Rng, so a fixed seed reproduces the same objects on every
// platform (no std:: distributions are involved).

#include <cstdint>
#include <vector>

#include "steer/assemblage.hpp"
#include "steer/lhs.hpp"
#include "steer/linalg.hpp"

namespace steer {

// SplitMix64 stream. split() derives an independent child stream from the
// current seed and a label without advancing the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  // Standard normal (Box-Muller).
  double normal();
  // Real and imaginary parts independent N(0, 1/2).
  complex complex_normal();

  Rng split(std::uint64_t label) const;
  Rng split(std::uint64_t label_a, std::uint64_t label_b) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// rows x cols matrix of complex_normal entries.
ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);

// rho = G G^dagger / Tr, G of shape dim x rank.
DensityOperator random_density(std::size_t dim, std::size_t rank, Rng& rng);

// Point on the simplex, uniform (Dirichlet(1)).
std::vector<double> random_simplex(std::size_t n, Rng& rng);
StochasticMatrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng);

// Lambda_a = S^{-1/2} G_a G_a^dagger S^{-1/2}, S = sum_a G_a G_a^dagger,
// with G_a of shape dim x rank (rank 0 means dim).
Povm random_povm(std::size_t dim, std::size_t n_outcomes, Rng& rng, std::size_t rank = 0);

// V (rows x cols, rows >= cols) with V^dagger V = I.
ComplexMatrix random_isometry(std::size_t rows, std::size_t cols, Rng& rng);
// V^dagger V = I enforced by V (V^dagger V)^{-1/2}.
ComplexMatrix orthonormalize_columns(const ComplexMatrix& v);

// Splits a (n_branches * kraus_per_branch * output_dim) x input_dim
// isometry into Kraus blocks, branch-major.
Instrument instrument_from_isometry(const ComplexMatrix& v, std::size_t input_dim, std::size_t output_dim,
                                    std::size_t n_branches, std::size_t kraus_per_branch = 1);
Instrument random_instrument(std::size_t input_dim, std::size_t output_dim, std::size_t n_branches, Rng& rng,
                             std::size_t kraus_per_branch = 1);

// rho_AB (d_A = d_B) measured with random POVMs. States are pure half of
// the time and POVM elements mostly rank one, so steerable draws are common.
Assemblage random_assemblage(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b, Rng& rng);

// sigma_lambda = w_lambda rho_lambda with Dirichlet weights and random states.
LhsModel random_lhs_model(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b, Rng& rng);

struct RestrictedOpShape {
  std::size_t n_inputs = 2;
  std::size_t n_outcomes = 2;
  std::size_t dim_b = 2;
  std::size_t n_final_inputs = 2;
  std::size_t n_final_outcomes = 2;
  std::size_t n_branches = 2;
  std::size_t output_dim = 2;
};

RestrictedOneWayLocc random_restricted_op(const RestrictedOpShape& shape, Rng& rng);

// eta |Phi-><Phi-| + (1 - eta) I/4 measured with Z and X on Alice's qubit.
Assemblage werner_assemblage(double eta);

}  // namespace steer
