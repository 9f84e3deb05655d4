#pragma once

#include <cmath>
#include <vector>

#include "steer/assemblage.hpp"
#include "steer/lhs.hpp"
#include "steer/linalg.hpp"
#include "steer/random.hpp"

namespace steer::test {

inline HermitianOperator diag(std::vector<double> d) { return HermitianOperator::diagonal(d); }

inline double max_abs_diff(const HermitianOperator& a, const HermitianOperator& b) {
  return (a - b).matrix().max_abs();
}

inline HermitianOperator pauli_x() {
  ComplexMatrix m(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return HermitianOperator(m);
}

inline HermitianOperator pauli_z() { return diag({1.0, -1.0}); }

// p(a|x) rho_B, an assemblage with an obvious LHS model.
inline Assemblage product_assemblage(const std::vector<std::vector<double>>& p, const HermitianOperator& rho) {
  std::vector<HermitianOperator> el;
  for (const auto& row : p)
    for (double v : row) el.push_back(v * rho);
  return Assemblage(p.size(), p.front().size(), rho.dim(), std::move(el));
}

// Random n-qudit Hermitian matrix with entries of order one.
inline HermitianOperator random_hermitian(std::size_t n, Rng& rng) {
  return HermitianOperator::symmetrized(ginibre(n, n, rng));
}

// Tr over every factor not in `keep` with plain index loops.
inline HermitianOperator naive_partial_trace(const HermitianOperator& m, const std::vector<std::size_t>& dims,
                                             const std::vector<bool>& keep) {
  const std::size_t k = dims.size();
  std::size_t kept_dim = 1, total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    total *= dims[i];
    if (keep[i]) kept_dim *= dims[i];
  }
  ComplexMatrix out(kept_dim, kept_dim);
  std::vector<std::size_t> ri(k), ci(k);
  auto digits = [&](std::size_t flat, std::vector<std::size_t>& d) {
    for (std::size_t i = k; i-- > 0;) {
      d[i] = flat % dims[i];
      flat /= dims[i];
    }
  };
  auto kept_index = [&](const std::vector<std::size_t>& d) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (keep[i]) idx = idx * dims[i] + d[i];
    return idx;
  };
  for (std::size_t r = 0; r < total; ++r) {
    digits(r, ri);
    for (std::size_t c = 0; c < total; ++c) {
      digits(c, ci);
      bool traced_equal = true;
      for (std::size_t i = 0; i < k; ++i)
        if (!keep[i] && ri[i] != ci[i]) traced_equal = false;
      if (traced_equal) out(kept_index(ri), kept_index(ci)) += m(r, c);
    }
  }
  return HermitianOperator::symmetrized(out);
}

// Entropy in bits straight from the spectrum.
inline double entropy_bits(const HermitianOperator& rho) {
  double h = 0.0;
  for (double v : eig_hermitian(rho).eigenvalues)
    if (v > 1e-15) h -= v * std::log2(v);
  return h;
}

}  // namespace steer::test
