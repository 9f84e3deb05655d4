#pragma once

// Dense complex linear algebra for the small Hermitian operators that make up
// states and assemblage elements, plus the entropic functionals built on top
// of the eigendecomposition. All logarithms are base 2.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "steer/errors.hpp"

namespace steer {

using complex = std::complex<double>;

// Relative eigenvalue threshold that defines the numerical support of an
// operator: eigenvalues <= kSupportCut * max|eigenvalue| are off-support.
inline constexpr double kSupportCut = 1e-10;

// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const double> diag);
  // |v><w| for column vectors v, w.
  static ComplexMatrix outer(std::span<const complex> v, std::span<const complex> w);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const complex> entries() const noexcept { return data_; }
  std::span<complex> entries() noexcept { return data_; }

  ComplexMatrix adjoint() const;
  complex trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  std::vector<complex> column(std::size_t c) const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(complex s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, complex s) { return a *= s; }
  friend ComplexMatrix operator*(complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complex> data_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Square matrix with Hermitian symmetry. The stored matrix is always exactly
// Hermitian: admission symmetrizes (M + M^dagger)/2.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  // Checked admission: rejects inputs with ||M - M^dagger||_max above 1e-12
  // (scaled by max(1, ||M||_max)).
  explicit HermitianOperator(const ComplexMatrix& m);

  // Unchecked admission for matrices that are Hermitian up to rounding by
  // construction (products like V D V^dagger).
  static HermitianOperator symmetrized(const ComplexMatrix& m);
  static HermitianOperator zeros(std::size_t dim);
  static HermitianOperator identity(std::size_t dim);
  static HermitianOperator diagonal(std::span<const double> diag);
  // |psi><psi|
  static HermitianOperator projector(std::span<const complex> psi);

  std::size_t dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  const complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  double trace() const;

  HermitianOperator& operator+=(const HermitianOperator& o);
  HermitianOperator& operator-=(const HermitianOperator& o);
  HermitianOperator& operator*=(double s);
  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend bool operator==(const HermitianOperator&, const HermitianOperator&) = default;

 private:
  ComplexMatrix m_;
};

// Re Tr(A B) for Hermitian A, B.
double trace_product(const HermitianOperator& a, const HermitianOperator& b);

// A B A^dagger for arbitrary (possibly rectangular) A.
HermitianOperator congruence(const ComplexMatrix& a, const HermitianOperator& b);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // unitary, eigenvectors as columns
};

// Cyclic complex Jacobi; throws ConvergenceError after 64 sweeps.
EigenDecomposition eig_hermitian(const HermitianOperator& m);

HermitianOperator reconstruct(const EigenDecomposition& e);

// Eigenvalues <= threshold are off-support.
double support_threshold(std::span<const double> eigenvalues);

enum class SupportMode { kFull, kSupportRestricted };

// V f(diag) V^dagger. In support-restricted mode, off-support eigenvalues map
// to 0 and f is not evaluated there. Throws DomainError when f is not finite
// at a retained eigenvalue.
HermitianOperator matrix_function(const HermitianOperator& m,
                                  const std::function<double(double)>& f,
                                  SupportMode mode = SupportMode::kFull);

// log2 on the support of m (the convention used by relative entropy).
HermitianOperator log2_on_support(const HermitianOperator& m);

// Value that may be +infinity as a tagged state rather than a float inf.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : value_(v) {}
  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }
  constexpr bool is_finite() const noexcept { return !infinite_; }
  constexpr bool is_infinite() const noexcept { return infinite_; }
  // Throws DomainError on +infinity.
  double value() const;

  friend constexpr bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

// Quantum state: PSD within -1e-10 and unit trace within 1e-10.
class DensityOperator {
 public:
  explicit DensityOperator(HermitianOperator op);
  const HermitianOperator& op() const noexcept { return op_; }
  std::size_t dim() const noexcept { return op_.dim(); }

 private:
  HermitianOperator op_;
};

double trace_norm(const HermitianOperator& m);

// D(rho||sigma) in bits, +infinity if supp(rho) is not contained in
// supp(sigma). Small negative values from rounding are clamped to 0.
ExtendedReal relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

// Tr rho (log2 rho - log2 sigma) for arbitrary PSD operators (no trace
// normalization and no clamping). Used for subnormalized assemblage blocks.
ExtendedReal relative_entropy_term(const HermitianOperator& rho, const HermitianOperator& sigma);
ExtendedReal relative_entropy_term(const HermitianOperator& rho, const EigenDecomposition& sigma);

// Tr rho log2 rho over the support of rho.
double trace_x_log2_x(const HermitianOperator& rho);
double trace_x_log2_x(const EigenDecomposition& rho);

double von_neumann_entropy(const DensityOperator& rho);

// Classical Shannon entropy in bits; zero entries are skipped.
double shannon_entropy(std::span<const double> p);

// Partial trace keeping the registers listed in `keep` (in the order given
// by `dims`). `dims` must multiply to m.dim().
HermitianOperator partial_trace(const HermitianOperator& m, std::span<const std::size_t> dims,
                                std::span<const std::size_t> keep);

struct TripartiteDims {
  std::size_t k = 1;
  std::size_t l = 1;
  std::size_t m = 1;
};

// I(K;L|M) = H(KM) + H(LM) - H(M) - H(KLM) for rho on K (x) L (x) M.
double conditional_mutual_information(const DensityOperator& rho, TripartiteDims dims);

// Directional derivative of log2 at sigma in direction h (Daleckii-Krein):
// in sigma's eigenbasis, h_ij * phi(l_i, l_j) / ln 2 with
// phi(a, b) = (ln a - ln b)/(a - b), phi(a, a) = 1/a. Entries touching the
// kernel of sigma are zero; throws DomainError if h has weight there.
HermitianOperator log_frechet_apply(const HermitianOperator& sigma, const HermitianOperator& h);
HermitianOperator log_frechet_apply(const EigenDecomposition& sigma, const HermitianOperator& h);

// Tr(rho * Dlog2[sigma](h)) without forming the full derivative.
double log_frechet_pairing(const EigenDecomposition& sigma, const HermitianOperator& rho,
                           const HermitianOperator& h);

// Divided difference of the natural logarithm.
double log_divided_difference(double a, double b);

}  // namespace steer
