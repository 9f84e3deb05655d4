#include "steer/assemblage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace steer {

namespace {

double min_eigenvalue(const HermitianOperator& h) {
  if (h.dim() == 0) return 0.0;
  return eig_hermitian(h).eigenvalues.front();
}

void check_normalized(std::span<const double> row, double tol, const char* what) {
  double s = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << what << ": negative or non-finite entry " << v;
      throw InvariantError(os.str());
    }
    s += v;
  }
  if (std::abs(s - 1.0) > tol) {
    std::ostringstream os;
    os << what << ": entries sum to " << s << ", not 1";
    throw InvariantError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw DimensionError("ProbabilityVector: empty");
  check_normalized(p_, 1e-12, "ProbabilityVector");
}

ProbabilityVector ProbabilityVector::uniform(std::size_t n) {
  return ProbabilityVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::point_mass(std::size_t n, std::size_t at) {
  std::vector<double> p(n, 0.0);
  p.at(at) = 1.0;
  return ProbabilityVector(std::move(p));
}

StochasticMatrix::StochasticMatrix(std::size_t n_conditions, std::size_t n_outcomes,
                                   std::vector<double> entries)
    : rows_(n_conditions), cols_(n_outcomes), p_(std::move(entries)) {
  if (p_.size() != rows_ * cols_ || rows_ == 0 || cols_ == 0) {
    throw DimensionError("StochasticMatrix: entry count does not match shape");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    check_normalized(std::span<const double>(p_).subspan(r * cols_, cols_), 1e-12,
                     "StochasticMatrix row");
  }
}

StochasticMatrix StochasticMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionError("StochasticMatrix: no rows");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw DimensionError("StochasticMatrix: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return StochasticMatrix(rows.size(), rows.front().size(), std::move(flat));
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[i * n + i] = 1.0;
  return StochasticMatrix(n, n, std::move(p));
}

// ---------------------------------------------------------------------------

Assemblage::Assemblage(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b,
                       std::vector<HermitianOperator> elements)
    : n_inputs_(n_inputs), n_outcomes_(n_outcomes), dim_b_(dim_b), elements_(std::move(elements)) {
  if (n_inputs_ == 0 || n_outcomes_ == 0 || dim_b_ == 0) {
    throw DimensionError("Assemblage: empty input, outcome or Bob alphabet");
  }
  if (elements_.size() != n_inputs_ * n_outcomes_) {
    throw DimensionError("Assemblage: element count != n_inputs * n_outcomes");
  }
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i].dim() != dim_b_) throw DimensionError("Assemblage: element dimension != dim_b");
    const double lmin = min_eigenvalue(elements_[i]);
    if (lmin < -1e-10) {
      std::ostringstream os;
      os << "Assemblage: element (x=" << i / n_outcomes_ << ", a=" << i % n_outcomes_
         << ") not PSD, minimal eigenvalue " << lmin;
      throw InvariantError(os.str());
    }
  }
  double tr = 0.0;
  for (std::size_t a = 0; a < n_outcomes_; ++a) tr += element(0, a).trace();
  if (std::abs(tr - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "Assemblage: Tr(sum_a rho^{a,x}) = " << tr << ", not 1";
    throw InvariantError(os.str());
  }
  const double ns = no_signaling_residual();
  if (ns > 1e-9) {
    std::ostringstream os;
    os << "Assemblage: no-signaling violated, residual " << ns;
    throw InvariantError(os.str());
  }
}

double Assemblage::no_signaling_residual() const {
  auto marginal = [&](std::size_t x) {
    HermitianOperator s = HermitianOperator::zeros(dim_b_);
    for (std::size_t a = 0; a < n_outcomes_; ++a) s += element(x, a);
    return s;
  };
  const HermitianOperator base = marginal(0);
  double worst = 0.0;
  for (std::size_t x = 1; x < n_inputs_; ++x) worst = std::max(worst, trace_norm(marginal(x) - base));
  return worst;
}

DensityOperator reduced_state(const Assemblage& assemblage) {
  HermitianOperator s = HermitianOperator::zeros(assemblage.dim_b());
  for (std::size_t a = 0; a < assemblage.n_outcomes(); ++a) s += assemblage.element(0, a);
  return DensityOperator(std::move(s));
}

StochasticMatrix conditional_probs(const Assemblage& assemblage) {
  const std::size_t nx = assemblage.n_inputs(), na = assemblage.n_outcomes();
  std::vector<double> p(nx * na);
  for (std::size_t x = 0; x < nx; ++x) {
    double s = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      p[x * na + a] = std::max(0.0, assemblage.element(x, a).trace());
      s += p[x * na + a];
    }
    for (std::size_t a = 0; a < na; ++a) p[x * na + a] /= s;
  }
  return StochasticMatrix(nx, na, std::move(p));
}

// ---------------------------------------------------------------------------

Povm::Povm(std::vector<HermitianOperator> outcomes) : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw DimensionError("Povm: no outcomes");
  const std::size_t d = outcomes_.front().dim();
  ComplexMatrix sum(d, d);
  for (const auto& e : outcomes_) {
    if (e.dim() != d) throw DimensionError("Povm: outcome dimensions differ");
    if (min_eigenvalue(e) < -1e-10) throw InvariantError("Povm: element not PSD");
    sum += e.matrix();
  }
  if ((sum - ComplexMatrix::identity(d)).max_abs() > 1e-10) {
    throw InvariantError("Povm: elements do not sum to the identity");
  }
}

Instrument::Instrument(std::size_t input_dim, std::size_t output_dim,
                       std::vector<std::vector<ComplexMatrix>> branches)
    : input_dim_(input_dim), output_dim_(output_dim), branches_(std::move(branches)) {
  if (branches_.empty()) throw DimensionError("Instrument: no branches");
  ComplexMatrix sum(input_dim_, input_dim_);
  for (const auto& branch : branches_) {
    if (branch.empty()) throw DimensionError("Instrument: branch without Kraus operators");
    for (const auto& k : branch) {
      if (k.rows() != output_dim_ || k.cols() != input_dim_) {
        throw DimensionError("Instrument: Kraus operator shape != output_dim x input_dim");
      }
      sum += k.adjoint() * k;
    }
  }
  const double dev = (sum - ComplexMatrix::identity(input_dim_)).max_abs();
  if (dev > 1e-9) {
    std::ostringstream os;
    os << "Instrument: sum of K^dagger K deviates from identity by " << dev;
    throw InvariantError(os.str());
  }
}

Instrument Instrument::identity(std::size_t dim) {
  Instrument i(dim, dim, {{ComplexMatrix::identity(dim)}});
  i.identity_ = true;
  return i;
}

Instrument Instrument::basis_measurement(std::size_t dim) {
  std::vector<std::vector<ComplexMatrix>> branches;
  for (std::size_t y = 0; y < dim; ++y) {
    ComplexMatrix row(1, dim);
    row(0, y) = 1.0;
    branches.push_back({row});
  }
  return Instrument(dim, 1, std::move(branches));
}

HermitianOperator Instrument::apply(std::size_t z, const HermitianOperator& rho) const {
  if (rho.dim() != input_dim_) throw DimensionError("Instrument::apply: input dimension mismatch");
  if (identity_) return rho;
  ComplexMatrix out(output_dim_, output_dim_);
  for (const auto& k : branches_.at(z)) out += k * rho.matrix() * k.adjoint();
  return HermitianOperator::symmetrized(out);
}

HermitianOperator Instrument::apply_adjoint(std::size_t z, const HermitianOperator& h) const {
  if (h.dim() != output_dim_) throw DimensionError("Instrument::apply_adjoint: dimension mismatch");
  if (identity_) return h;
  ComplexMatrix out(input_dim_, input_dim_);
  for (const auto& k : branches_.at(z)) out += k.adjoint() * h.matrix() * k;
  return HermitianOperator::symmetrized(out);
}

Instrument Instrument::then(const Instrument& next) const {
  if (next.input_dim() != output_dim_) throw DimensionError("Instrument::then: dimension mismatch");
  std::vector<std::vector<ComplexMatrix>> branches;
  for (const auto& b1 : branches_) {
    for (const auto& b2 : next.branches_) {
      std::vector<ComplexMatrix> ks;
      for (const auto& k1 : b1) {
        for (const auto& k2 : b2) ks.push_back(k2 * k1);
      }
      branches.push_back(std::move(ks));
    }
  }
  Instrument out(input_dim_, next.output_dim(), std::move(branches));
  out.identity_ = identity_ && next.identity_;
  return out;
}

// ---------------------------------------------------------------------------

CqState::CqState(std::vector<std::string> register_names, std::vector<std::size_t> register_sizes,
                 std::size_t quantum_dim, std::vector<HermitianOperator> blocks)
    : names_(std::move(register_names)),
      sizes_(std::move(register_sizes)),
      quantum_dim_(quantum_dim),
      blocks_(std::move(blocks)) {
  if (names_.size() != sizes_.size()) throw DimensionError("CqState: register names/sizes mismatch");
  std::size_t n = 1;
  for (auto s : sizes_) n *= s;
  if (blocks_.size() != n) throw DimensionError("CqState: block count != product of register sizes");
  double tr = 0.0;
  for (const auto& b : blocks_) {
    if (b.dim() != quantum_dim_) throw DimensionError("CqState: block dimension mismatch");
    if (min_eigenvalue(b) < -1e-10) throw InvariantError("CqState: block not PSD");
    tr += b.trace();
  }
  if (std::abs(tr - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "CqState: total trace " << tr << ", not 1";
    throw InvariantError(os.str());
  }
}

std::size_t CqState::flat_index(const std::vector<std::size_t>& tuple) const {
  if (tuple.size() != sizes_.size()) throw DimensionError("CqState: tuple arity mismatch");
  std::size_t idx = 0;
  for (std::size_t r = 0; r < sizes_.size(); ++r) {
    if (tuple[r] >= sizes_[r]) throw DimensionError("CqState: classical index out of range");
    idx = idx * sizes_[r] + tuple[r];
  }
  return idx;
}

const HermitianOperator& CqState::block(const std::vector<std::size_t>& tuple) const {
  return blocks_[flat_index(tuple)];
}

double CqState::trace() const {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.trace();
  return t;
}

HermitianOperator CqState::quantum_marginal() const {
  HermitianOperator s = HermitianOperator::zeros(quantum_dim_);
  for (const auto& b : blocks_) s += b;
  return s;
}

CqState CqState::marginal(const std::vector<std::string>& keep, bool keep_quantum) const {
  std::vector<std::size_t> keep_idx;
  for (const auto& name : keep) {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw DimensionError("CqState::marginal: unknown register " + name);
    keep_idx.push_back(static_cast<std::size_t>(it - names_.begin()));
  }
  std::vector<std::size_t> new_sizes;
  for (auto r : keep_idx) new_sizes.push_back(sizes_[r]);
  std::size_t n_new = 1;
  for (auto s : new_sizes) n_new *= s;
  const std::size_t qdim = keep_quantum ? quantum_dim_ : 1;
  std::vector<HermitianOperator> blocks(n_new, HermitianOperator::zeros(qdim));
  std::vector<std::size_t> tuple(sizes_.size());
  for (std::size_t flat = 0; flat < blocks_.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t r = sizes_.size(); r-- > 0;) {
      tuple[r] = rem % sizes_[r];
      rem /= sizes_[r];
    }
    std::size_t target = 0;
    for (std::size_t k = 0; k < keep_idx.size(); ++k) target = target * new_sizes[k] + tuple[keep_idx[k]];
    if (keep_quantum) {
      blocks[target] += blocks_[flat];
    } else {
      const double t = blocks_[flat].trace();
      blocks[target] += HermitianOperator::diagonal(std::vector<double>{t});
    }
  }
  return CqState(keep, std::move(new_sizes), qdim, std::move(blocks));
}

double CqState::entropy() const {
  double s = 0.0;
  for (const auto& b : blocks_) s -= trace_x_log2_x(b);
  return std::max(0.0, s);
}

HermitianOperator CqState::to_dense() const {
  const std::size_t n = blocks_.size() * quantum_dim_;
  ComplexMatrix m(n, n);
  for (std::size_t c = 0; c < blocks_.size(); ++c) {
    for (std::size_t i = 0; i < quantum_dim_; ++i) {
      for (std::size_t j = 0; j < quantum_dim_; ++j) m(c * quantum_dim_ + i, c * quantum_dim_ + j) = blocks_[c](i, j);
    }
  }
  return HermitianOperator::symmetrized(m);
}

namespace {

void require_same_layout(const CqState& a, const CqState& b) {
  if (a.register_sizes() != b.register_sizes() || a.quantum_dim() != b.quantum_dim()) {
    throw DimensionError("cq states have different register layouts");
  }
}

}  // namespace

ExtendedReal relative_entropy(const CqState& rho, const CqState& sigma) {
  require_same_layout(rho, sigma);
  double total = 0.0;
  for (std::size_t c = 0; c < rho.n_blocks(); ++c) {
    const auto& r = rho.block(c);
    if (r.trace() <= 0.0 && r.matrix().max_abs() == 0.0) continue;
    const auto d = relative_entropy_term(r, sigma.block(c));
    if (d.is_infinite()) return d;
    total += d.value();
  }
  return ExtendedReal(std::max(0.0, total));
}

double trace_distance_norm(const CqState& rho, const CqState& sigma) {
  require_same_layout(rho, sigma);
  double s = 0.0;
  for (std::size_t c = 0; c < rho.n_blocks(); ++c) s += trace_norm(rho.block(c) - sigma.block(c));
  return s;
}

double mutual_information(const CqState& state, const std::vector<std::string>& left,
                          bool left_has_quantum, const std::vector<std::string>& right) {
  std::vector<std::string> both = left;
  both.insert(both.end(), right.begin(), right.end());
  const double h_left = state.marginal(left, left_has_quantum).entropy();
  const double h_right = state.marginal(right, false).entropy();
  const double h_both = state.marginal(both, left_has_quantum).entropy();
  return std::max(0.0, h_left + h_right - h_both);
}

// ---------------------------------------------------------------------------

MeasurementStrategy::MeasurementStrategy(StochasticMatrix x_given_y_, Instrument instrument_)
    : x_given_y(std::move(x_given_y_)), instrument(std::move(instrument_)) {
  if (x_given_y.n_conditions() != instrument.n_branches()) {
    throw DimensionError("MeasurementStrategy: p(x|y) rows != instrument branches");
  }
}

MeasurementStrategy MeasurementStrategy::trivial(const ProbabilityVector& p_x, std::size_t dim_b) {
  return MeasurementStrategy(StochasticMatrix(1, p_x.size(), p_x.values()), Instrument::identity(dim_b));
}

RestrictedOneWayLocc::RestrictedOneWayLocc(StochasticMatrix x_given_xf, std::size_t n_outcomes,
                                           std::size_t n_final_outcomes, std::vector<double> af_given,
                                           Instrument instrument)
    : x_given_xf_(std::move(x_given_xf)),
      n_outcomes_(n_outcomes),
      n_final_outcomes_(n_final_outcomes),
      af_given_(std::move(af_given)),
      instrument_(std::move(instrument)) {
  const std::size_t rows = n_outcomes_ * n_inputs() * n_final_inputs() * instrument_.n_branches();
  if (af_given_.size() != rows * n_final_outcomes_) {
    throw DimensionError("RestrictedOneWayLocc: p(a_f|a,x,x_f,z) table has the wrong size");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    check_normalized(std::span<const double>(af_given_).subspan(r * n_final_outcomes_, n_final_outcomes_),
                     1e-12, "RestrictedOneWayLocc p(a_f|a,x,x_f,z)");
  }
}

RestrictedOneWayLocc RestrictedOneWayLocc::identity(std::size_t n_inputs, std::size_t n_outcomes,
                                                    std::size_t dim_b) {
  std::vector<double> af(n_outcomes * n_inputs * n_inputs * n_outcomes, 0.0);
  for (std::size_t a = 0; a < n_outcomes; ++a) {
    for (std::size_t x = 0; x < n_inputs; ++x) {
      for (std::size_t xf = 0; xf < n_inputs; ++xf) {
        af[((a * n_inputs + x) * n_inputs + xf) * n_outcomes + a] = 1.0;
      }
    }
  }
  return RestrictedOneWayLocc(StochasticMatrix::identity(n_inputs), n_outcomes, n_outcomes, std::move(af),
                              Instrument::identity(dim_b));
}

double RestrictedOneWayLocc::af_given(std::size_t af, std::size_t a, std::size_t x, std::size_t xf,
                                      std::size_t z) const {
  const std::size_t row = ((a * n_inputs() + x) * n_final_inputs() + xf) * instrument_.n_branches() + z;
  return af_given_[row * n_final_outcomes_ + af];
}

// ---------------------------------------------------------------------------

Assemblage assemblage_from_state(const DensityOperator& rho_ab, std::size_t dim_a, std::size_t dim_b,
                                 const std::vector<Povm>& povms) {
  if (dim_a * dim_b != rho_ab.dim()) throw DimensionError("assemblage_from_state: dim(rho) != d_A d_B");
  if (povms.empty()) throw DimensionError("assemblage_from_state: no measurements");
  const std::size_t na = povms.front().n_outcomes();
  const ComplexMatrix id_b = ComplexMatrix::identity(dim_b);
  const std::size_t dims[2] = {dim_a, dim_b};
  const std::size_t keep_b[1] = {1};
  std::vector<HermitianOperator> elements;
  for (const auto& povm : povms) {
    if (povm.dim() != dim_a) throw DimensionError("assemblage_from_state: POVM does not act on d_A");
    if (povm.n_outcomes() != na) throw DimensionError("assemblage_from_state: outcome counts differ");
    for (std::size_t a = 0; a < na; ++a) {
      const ComplexMatrix m = kron(povm[a].matrix(), id_b) * rho_ab.op().matrix();
      elements.push_back(partial_trace(HermitianOperator::symmetrized(m), dims, keep_b));
    }
  }
  return Assemblage(povms.size(), na, dim_b, std::move(elements));
}

CqState embed_cq(const Assemblage& assemblage, const ProbabilityVector& p_x) {
  if (p_x.size() != assemblage.n_inputs()) throw DimensionError("embed_cq: |p_X| != |X|");
  std::vector<HermitianOperator> blocks;
  for (std::size_t x = 0; x < assemblage.n_inputs(); ++x) {
    for (std::size_t a = 0; a < assemblage.n_outcomes(); ++a) blocks.push_back(p_x[x] * assemblage.element(x, a));
  }
  return CqState({"X", "A"}, {assemblage.n_inputs(), assemblage.n_outcomes()}, assemblage.dim_b(),
                 std::move(blocks));
}

CqState apply_measurement_strategy(const Assemblage& assemblage, const MeasurementStrategy& strat) {
  const auto& inst = strat.instrument;
  if (inst.input_dim() != assemblage.dim_b()) {
    throw DimensionError("apply_measurement_strategy: instrument input dim != dim_B");
  }
  if (strat.x_given_y.n_outcomes() != assemblage.n_inputs()) {
    throw DimensionError("apply_measurement_strategy: p(x|y) alphabet != |X|");
  }
  const std::size_t nx = assemblage.n_inputs(), na = assemblage.n_outcomes(), ny = inst.n_branches();
  std::vector<HermitianOperator> blocks;
  blocks.reserve(nx * na * ny);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t y = 0; y < ny; ++y) {
        blocks.push_back(strat.x_given_y(y, x) * inst.apply(y, assemblage.element(x, a)));
      }
    }
  }
  return CqState({"X", "A", "Y"}, {nx, na, ny}, inst.output_dim(), std::move(blocks));
}

Assemblage apply_restricted_1wlocc(const Assemblage& assemblage, const RestrictedOneWayLocc& op,
                                   std::size_t n_final_inputs, std::size_t n_final_outcomes) {
  if (op.n_inputs() != assemblage.n_inputs() || op.n_outcomes() != assemblage.n_outcomes()) {
    throw DimensionError("apply_restricted_1wlocc: operation alphabets do not match the assemblage");
  }
  if (op.n_final_inputs() != n_final_inputs || op.n_final_outcomes() != n_final_outcomes) {
    throw DimensionError("apply_restricted_1wlocc: final alphabet sizes do not match the operation");
  }
  const auto& inst = op.instrument();
  if (inst.input_dim() != assemblage.dim_b()) throw DimensionError("apply_restricted_1wlocc: instrument input dim");
  const std::size_t nx = assemblage.n_inputs(), na = assemblage.n_outcomes(), nz = inst.n_branches();
  const std::size_t dout = inst.output_dim();

  // K_z(rho^{a,x}) computed once.
  std::vector<HermitianOperator> mapped;
  mapped.reserve(nx * na * nz);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t z = 0; z < nz; ++z) mapped.push_back(inst.apply(z, assemblage.element(x, a)));
    }
  }
  std::vector<HermitianOperator> out;
  for (std::size_t xf = 0; xf < n_final_inputs; ++xf) {
    for (std::size_t af = 0; af < n_final_outcomes; ++af) {
      ComplexMatrix acc(dout, dout);
      for (std::size_t x = 0; x < nx; ++x) {
        const double px = op.x_given_xf()(xf, x);
        if (px == 0.0) continue;
        for (std::size_t a = 0; a < na; ++a) {
          for (std::size_t z = 0; z < nz; ++z) {
            const double w = px * op.af_given(af, a, x, xf, z);
            if (w == 0.0) continue;
            acc += mapped[(x * na + a) * nz + z].matrix() * complex(w);
          }
        }
      }
      out.push_back(HermitianOperator::symmetrized(acc));
    }
  }
  return Assemblage(n_final_inputs, n_final_outcomes, dout, std::move(out));
}

RestrictedOneWayLocc compose(const RestrictedOneWayLocc& first, const RestrictedOneWayLocc& second) {
  if (second.n_inputs() != first.n_final_inputs() || second.n_outcomes() != first.n_final_outcomes()) {
    throw DimensionError("compose: alphabets of the two operations do not chain");
  }
  const std::size_t nx = first.n_inputs(), na = first.n_outcomes();
  const std::size_t nxm = first.n_final_inputs(), nam = first.n_final_outcomes();
  const std::size_t nxf = second.n_final_inputs(), naf = second.n_final_outcomes();
  const std::size_t nz1 = first.instrument().n_branches(), nz2 = second.instrument().n_branches();

  std::vector<double> x_given_xf(nxf * nx, 0.0);
  for (std::size_t xf = 0; xf < nxf; ++xf) {
    for (std::size_t x = 0; x < nx; ++x) {
      double s = 0.0;
      for (std::size_t xm = 0; xm < nxm; ++xm) s += second.x_given_xf()(xf, xm) * first.x_given_xf()(xm, x);
      x_given_xf[xf * nx + x] = s;
    }
  }
  // Renormalize rows against rounding.
  for (std::size_t xf = 0; xf < nxf; ++xf) {
    double s = 0.0;
    for (std::size_t x = 0; x < nx; ++x) s += x_given_xf[xf * nx + x];
    for (std::size_t x = 0; x < nx; ++x) x_given_xf[xf * nx + x] /= s;
  }

  const std::size_t nz = nz1 * nz2;
  std::vector<double> af_table(na * nx * nxf * nz * naf, 0.0);
  std::vector<double> posterior(nxm);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t xf = 0; xf < nxf; ++xf) {
        // p(x_m | x, x_f) by Bayes; uniform when (x, x_f) has zero weight.
        double norm = 0.0;
        for (std::size_t xm = 0; xm < nxm; ++xm) {
          posterior[xm] = second.x_given_xf()(xf, xm) * first.x_given_xf()(xm, x);
          norm += posterior[xm];
        }
        for (std::size_t xm = 0; xm < nxm; ++xm) {
          posterior[xm] = norm > 0.0 ? posterior[xm] / norm : 1.0 / static_cast<double>(nxm);
        }
        for (std::size_t z1 = 0; z1 < nz1; ++z1) {
          for (std::size_t z2 = 0; z2 < nz2; ++z2) {
            const std::size_t z = z1 * nz2 + z2;
            double* row = &af_table[(((a * nx + x) * nxf + xf) * nz + z) * naf];
            for (std::size_t xm = 0; xm < nxm; ++xm) {
              if (posterior[xm] == 0.0) continue;
              for (std::size_t am = 0; am < nam; ++am) {
                const double w = posterior[xm] * first.af_given(am, a, x, xm, z1);
                if (w == 0.0) continue;
                for (std::size_t af = 0; af < naf; ++af) row[af] += w * second.af_given(af, am, xm, xf, z2);
              }
            }
            double s = 0.0;
            for (std::size_t af = 0; af < naf; ++af) s += row[af];
            for (std::size_t af = 0; af < naf; ++af) row[af] /= s;
          }
        }
      }
    }
  }
  return RestrictedOneWayLocc(StochasticMatrix(nxf, nx, std::move(x_given_xf)), na, naf, std::move(af_table),
                              first.instrument().then(second.instrument()));
}

}  // namespace steer
