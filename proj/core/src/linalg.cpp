#include "steer/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace steer {

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458;
constexpr int kJacobiSweepCap = 64;

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw DimensionError(os.str());
  }
}

// V^dagger A V for square V.
ComplexMatrix to_basis(const ComplexMatrix& v, const ComplexMatrix& a) {
  return v.adjoint() * a * v;
}

}  // namespace

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("ComplexMatrix: rows*cols does not equal the entry count");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const complex> v, std::span<const complex> w) {
  ComplexMatrix m(v.size(), w.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = v[i] * std::conj(w[j]);
  }
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
  }
  return t;
}

complex ComplexMatrix::trace() const {
  complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

std::vector<complex> ComplexMatrix::column(std::size_t c) const {
  std::vector<complex> v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const complex aik = a(i, k);
      if (aik == complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const complex aij = a(i, j);
      for (std::size_t r = 0; r < b.rows(); ++r) {
        for (std::size_t c = 0; c < b.cols(); ++c) {
          k(i * b.rows() + r, j * b.cols() + c) = aij * b(r, c);
        }
      }
    }
  }
  return k;
}

// ---------------------------------------------------------------------------
// HermitianOperator

HermitianOperator::HermitianOperator(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionError("HermitianOperator: matrix is not square");
  const double scale = std::max(1.0, m.max_abs());
  double asym = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  if (asym > 1e-12 * scale) {
    std::ostringstream os;
    os << "Hermitian symmetry violated: ||M - M^dagger||_max = " << asym;
    throw InvariantError(os.str());
  }
  *this = symmetrized(m);
}

HermitianOperator HermitianOperator::symmetrized(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionError("HermitianOperator: matrix is not square");
  HermitianOperator h;
  h.m_ = ComplexMatrix(m.rows(), m.cols());
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    h.m_(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const complex z = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h.m_(i, j) = z;
      h.m_(j, i) = std::conj(z);
    }
  }
  return h;
}

HermitianOperator HermitianOperator::zeros(std::size_t dim) {
  return symmetrized(ComplexMatrix(dim, dim));
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
  return symmetrized(ComplexMatrix::identity(dim));
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> diag) {
  return symmetrized(ComplexMatrix::diagonal(diag));
}

HermitianOperator HermitianOperator::projector(std::span<const complex> psi) {
  return symmetrized(ComplexMatrix::outer(psi, psi));
}

double HermitianOperator::trace() const { return m_.trace().real(); }

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  m_ += o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  m_ -= o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionError("trace_product: dimension mismatch");
  // Tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij)
  const auto ea = a.matrix().entries();
  const auto eb = b.matrix().entries();
  double s = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    s += ea[i].real() * eb[i].real() + ea[i].imag() * eb[i].imag();
  }
  return s;
}

HermitianOperator congruence(const ComplexMatrix& a, const HermitianOperator& b) {
  return HermitianOperator::symmetrized(a * b.matrix() * a.adjoint());
}

// ---------------------------------------------------------------------------
// Eigendecomposition

EigenDecomposition eig_hermitian(const HermitianOperator& m) {
  const std::size_t n = m.dim();
  ComplexMatrix a = m.matrix();
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
    }
    return std::sqrt(2.0 * s);
  };

  const double scale = a.frobenius_norm();
  const double target = 1e-15 * scale;
  bool converged = n <= 1 || off_norm() <= target;
  for (int sweep = 0; sweep < kJacobiSweepCap && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Skip rotations that cannot change the diagonal at working precision.
        if (sweep > 3 && std::abs(app) + 100.0 * mag == std::abs(app) &&
            std::abs(aqq) + 100.0 * mag == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const complex phase = apq / mag;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * mag);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on rows/cols (p, q).
        const complex upp = c;
        const complex upq = s;
        const complex uqp = -s * std::conj(phase);
        const complex uqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const complex akp = a(k, p);
          const complex akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const complex apk = a(p, k);
          const complex aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const complex vkp = v(k, p);
          const complex vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
    converged = off_norm() <= target;
  }
  if (!converged) {
    const double residual = off_norm();
    std::ostringstream os;
    os << "eig_hermitian: no convergence after " << kJacobiSweepCap
       << " sweeps, off-diagonal norm " << residual;
    throw ConvergenceError(os.str(), residual);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenDecomposition e;
  e.eigenvalues.resize(n);
  e.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    e.eigenvalues[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) e.eigenvectors(r, c) = v(r, order[c]);
  }
  return e;
}

HermitianOperator reconstruct(const EigenDecomposition& e) {
  const auto& v = e.eigenvectors;
  const std::size_t n = v.rows();
  ComplexMatrix m(n, n);
  for (std::size_t k = 0; k < e.eigenvalues.size(); ++k) {
    const double l = e.eigenvalues[k];
    if (l == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const complex vi = v(i, k) * l;
      for (std::size_t j = 0; j < n; ++j) m(i, j) += vi * std::conj(v(j, k));
    }
  }
  return HermitianOperator::symmetrized(m);
}

double support_threshold(std::span<const double> eigenvalues) {
  double m = 0.0;
  for (double l : eigenvalues) m = std::max(m, std::abs(l));
  return kSupportCut * m;
}

namespace {

HermitianOperator apply_spectral(const EigenDecomposition& e, const std::vector<double>& fvals) {
  EigenDecomposition f{fvals, e.eigenvectors};
  return reconstruct(f);
}

}  // namespace

HermitianOperator matrix_function(const HermitianOperator& m,
                                  const std::function<double(double)>& f, SupportMode mode) {
  const auto e = eig_hermitian(m);
  const double cut = support_threshold(e.eigenvalues);
  std::vector<double> fv(e.eigenvalues.size());
  for (std::size_t i = 0; i < fv.size(); ++i) {
    const double l = e.eigenvalues[i];
    if (mode == SupportMode::kSupportRestricted && l <= cut) {
      fv[i] = 0.0;
      continue;
    }
    fv[i] = f(l);
    if (!std::isfinite(fv[i])) {
      std::ostringstream os;
      os << "matrix_function: f is not finite at retained eigenvalue " << l;
      throw DomainError(os.str());
    }
  }
  return apply_spectral(e, fv);
}

HermitianOperator log2_on_support(const HermitianOperator& m) {
  return matrix_function(m, [](double x) { return std::log2(x); },
                         SupportMode::kSupportRestricted);
}

double ExtendedReal::value() const {
  if (infinite_) throw DomainError("ExtendedReal: value requested from +infinity");
  return value_;
}

DensityOperator::DensityOperator(HermitianOperator op) : op_(std::move(op)) {
  const auto e = eig_hermitian(op_);
  if (!e.eigenvalues.empty() && e.eigenvalues.front() < -1e-10) {
    std::ostringstream os;
    os << "DensityOperator: minimal eigenvalue " << e.eigenvalues.front() << " < -1e-10";
    throw InvariantError(os.str());
  }
  if (std::abs(op_.trace() - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "DensityOperator: |Tr - 1| = " << std::abs(op_.trace() - 1.0) << " > 1e-10";
    throw InvariantError(os.str());
  }
}

double trace_norm(const HermitianOperator& m) {
  if (m.dim() == 0) return 0.0;
  const auto e = eig_hermitian(m);
  double s = 0.0;
  for (double l : e.eigenvalues) s += std::abs(l);
  return s;
}

double trace_x_log2_x(const EigenDecomposition& rho) {
  const double cut = support_threshold(rho.eigenvalues);
  double s = 0.0;
  for (double l : rho.eigenvalues) {
    if (l > cut) s += l * std::log2(l);
  }
  return s;
}

double trace_x_log2_x(const HermitianOperator& rho) { return trace_x_log2_x(eig_hermitian(rho)); }

ExtendedReal relative_entropy_term(const HermitianOperator& rho, const EigenDecomposition& sigma) {
  const std::size_t n = rho.dim();
  if (sigma.eigenvectors.rows() != n) {
    throw DimensionError("relative_entropy: dimension mismatch");
  }
  const double cut = support_threshold(sigma.eigenvalues);
  // Weight of rho on each eigenvector of sigma.
  const ComplexMatrix rv = rho.matrix() * sigma.eigenvectors;
  double rho_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) rho_scale = std::max(rho_scale, std::abs(rho(i, i)));
  double cross = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) w += (std::conj(sigma.eigenvectors(i, k)) * rv(i, k)).real();
    const double l = sigma.eigenvalues[k];
    if (l <= cut) {
      if (w > kSupportCut * std::max(rho_scale, 1e-300)) return ExtendedReal::infinity();
      continue;
    }
    cross += w * std::log2(l);
  }
  return ExtendedReal(trace_x_log2_x(rho) - cross);
}

ExtendedReal relative_entropy_term(const HermitianOperator& rho, const HermitianOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("relative_entropy: dimension mismatch");
  return relative_entropy_term(rho, eig_hermitian(sigma));
}

ExtendedReal relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("relative_entropy: dimension mismatch");
  const auto d = relative_entropy_term(rho.op(), sigma.op());
  if (d.is_infinite()) return d;
  return ExtendedReal(std::max(0.0, d.value()));
}

double von_neumann_entropy(const DensityOperator& rho) {
  return std::max(0.0, -trace_x_log2_x(rho.op()));
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return std::max(0.0, h);
}

HermitianOperator partial_trace(const HermitianOperator& m, std::span<const std::size_t> dims,
                                std::span<const std::size_t> keep) {
  const std::size_t n_reg = dims.size();
  std::size_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw DimensionError("partial_trace: zero register dimension");
    total *= d;
  }
  if (total != m.dim()) throw DimensionError("partial_trace: register dimensions do not multiply to dim(m)");
  std::vector<bool> kept(n_reg, false);
  for (auto k : keep) {
    if (k >= n_reg) throw DimensionError("partial_trace: kept register index out of range");
    if (kept[k]) throw DimensionError("partial_trace: duplicate kept register");
    kept[k] = true;
  }
  // Strides of each register in the full index (row-major, first register most significant).
  std::vector<std::size_t> stride(n_reg, 1);
  for (std::size_t r = n_reg; r-- > 1;) stride[r - 1] = stride[r] * dims[r];

  std::vector<std::size_t> kept_regs, traced_regs;
  for (std::size_t r = 0; r < n_reg; ++r) (kept[r] ? kept_regs : traced_regs).push_back(r);
  std::size_t out_dim = 1, traced_dim = 1;
  for (auto r : kept_regs) out_dim *= dims[r];
  for (auto r : traced_regs) traced_dim *= dims[r];

  auto offset = [&](std::size_t idx, const std::vector<std::size_t>& regs) {
    std::size_t off = 0;
    for (std::size_t k = regs.size(); k-- > 0;) {
      const std::size_t r = regs[k];
      off += (idx % dims[r]) * stride[r];
      idx /= dims[r];
    }
    return off;
  };
  std::vector<std::size_t> kept_off(out_dim), traced_off(traced_dim);
  for (std::size_t i = 0; i < out_dim; ++i) kept_off[i] = offset(i, kept_regs);
  for (std::size_t t = 0; t < traced_dim; ++t) traced_off[t] = offset(t, traced_regs);

  ComplexMatrix out(out_dim, out_dim);
  for (std::size_t i = 0; i < out_dim; ++i) {
    for (std::size_t j = 0; j < out_dim; ++j) {
      complex s = 0.0;
      for (std::size_t t = 0; t < traced_dim; ++t) s += m(kept_off[i] + traced_off[t], kept_off[j] + traced_off[t]);
      out(i, j) = s;
    }
  }
  return HermitianOperator::symmetrized(out);
}

double conditional_mutual_information(const DensityOperator& rho, TripartiteDims dims) {
  const std::size_t d[3] = {dims.k, dims.l, dims.m};
  if (dims.k * dims.l * dims.m != rho.dim()) {
    throw DimensionError("conditional_mutual_information: dim(rho) != |K||L||M|");
  }
  auto h = [&](std::initializer_list<std::size_t> keep) {
    std::vector<std::size_t> k(keep);
    return -trace_x_log2_x(partial_trace(rho.op(), d, k));
  };
  const double v = h({0, 2}) + h({1, 2}) - h({2}) + trace_x_log2_x(rho.op());
  return std::max(0.0, v);
}

double log_divided_difference(double a, double b) {
  if (a == b) return 1.0 / a;
  const double r = (a - b) / b;
  if (std::abs(r) < 1e-5) {
    // log1p(r)/r expanded around 0
    return (1.0 - r / 2.0 + r * r / 3.0) / b;
  }
  return (std::log(a) - std::log(b)) / (a - b);
}

HermitianOperator log_frechet_apply(const EigenDecomposition& sigma, const HermitianOperator& h) {
  const std::size_t n = h.dim();
  if (sigma.eigenvectors.rows() != n) throw DimensionError("log_frechet_apply: dimension mismatch");
  const double cut = support_threshold(sigma.eigenvalues);
  ComplexMatrix hb = to_basis(sigma.eigenvectors, h.matrix());
  // Matches the support test of relative_entropy_term: kernel weight up to
  // kSupportCut on the diagonal allows off-diagonal coupling of its square root.
  // n max|h_ij| bounds every eigenvalue of h.
  const double tol = 2.0 * std::sqrt(kSupportCut) * static_cast<double>(n) * std::max(1e-300, h.matrix().max_abs());
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_i = sigma.eigenvalues[i] > cut;
    for (std::size_t j = 0; j < n; ++j) {
      const bool in_j = sigma.eigenvalues[j] > cut;
      if (in_i && in_j) {
        hb(i, j) *= log_divided_difference(sigma.eigenvalues[i], sigma.eigenvalues[j]) / kLn2;
      } else {
        if (std::abs(hb(i, j)) > tol) {
          std::ostringstream os;
          os << "log_frechet_apply: direction has weight " << std::abs(hb(i, j)) << " outside the support of sigma";
          throw DomainError(os.str());
        }
        hb(i, j) = 0.0;
      }
    }
  }
  return HermitianOperator::symmetrized(sigma.eigenvectors * hb * sigma.eigenvectors.adjoint());
}

HermitianOperator log_frechet_apply(const HermitianOperator& sigma, const HermitianOperator& h) {
  if (sigma.dim() != h.dim()) throw DimensionError("log_frechet_apply: dimension mismatch");
  return log_frechet_apply(eig_hermitian(sigma), h);
}

double log_frechet_pairing(const EigenDecomposition& sigma, const HermitianOperator& rho,
                           const HermitianOperator& h) {
  const std::size_t n = h.dim();
  const double cut = support_threshold(sigma.eigenvalues);
  const ComplexMatrix rb = to_basis(sigma.eigenvectors, rho.matrix());
  const ComplexMatrix hb = to_basis(sigma.eigenvectors, h.matrix());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma.eigenvalues[i] <= cut) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (sigma.eigenvalues[j] <= cut) continue;
      // Tr(R D) = sum_ij R_ji D_ij
      s += (rb(j, i) * hb(i, j)).real() *
           log_divided_difference(sigma.eigenvalues[i], sigma.eigenvalues[j]);
    }
  }
  return s / kLn2;
}

}  // namespace steer
