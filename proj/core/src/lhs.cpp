#include "steer/lhs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace steer {

namespace {

double min_eigenvalue(const HermitianOperator& h) { return eig_hermitian(h).eigenvalues.front(); }

// resp[lambda * n_inputs + x] = lambda(x)
std::vector<std::size_t> response_table(std::size_t n_inputs, std::size_t n_outcomes, std::size_t n_strategies) {
  std::vector<std::size_t> table(n_strategies * n_inputs);
  for (std::size_t l = 0; l < n_strategies; ++l) {
    std::size_t rem = l;
    for (std::size_t x = n_inputs; x-- > 0;) {
      table[l * n_inputs + x] = rem % n_outcomes;
      rem /= n_outcomes;
    }
  }
  return table;
}

HermitianOperator project_psd(const HermitianOperator& h) {
  auto e = eig_hermitian(h);
  bool clipped = false;
  for (auto& l : e.eigenvalues) {
    if (l < 0.0) {
      l = 0.0;
      clipped = true;
    }
  }
  return clipped ? reconstruct(e) : h;
}

// Euclidean projection onto {sigma_lambda >= 0, sum_lambda Tr sigma_lambda = 1}:
// diagonalize every slot and project the pooled spectrum onto the simplex.
std::vector<HermitianOperator> project_normalized_psd(const std::vector<HermitianOperator>& y) {
  std::vector<EigenDecomposition> eigs;
  eigs.reserve(y.size());
  std::vector<double> pooled;
  for (const auto& h : y) {
    eigs.push_back(eig_hermitian(h));
    pooled.insert(pooled.end(), eigs.back().eigenvalues.begin(), eigs.back().eigenvalues.end());
  }
  std::sort(pooled.begin(), pooled.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    cum += pooled[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (pooled[i] - t > 0.0) theta = t;
  }
  std::vector<HermitianOperator> out;
  out.reserve(y.size());
  for (auto& e : eigs) {
    for (auto& l : e.eigenvalues) l = std::max(0.0, l - theta);
    out.push_back(reconstruct(e));
  }
  return out;
}

double frobenius_inner(const std::vector<HermitianOperator>& a, const std::vector<HermitianOperator>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += trace_product(a[i], b[i]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Strategies and models

std::size_t strategy_count(std::size_t n_inputs, std::size_t n_outcomes, std::size_t cap) {
  std::size_t n = 1;
  for (std::size_t x = 0; x < n_inputs; ++x) {
    n *= n_outcomes;
    if (n > cap) {
      std::ostringstream os;
      os << "strategy count " << n_outcomes << "^" << n_inputs << " exceeds the cap " << cap;
      throw DomainError(os.str());
    }
  }
  return n;
}

std::size_t strategy_response(std::size_t lambda, std::size_t x, std::size_t n_inputs, std::size_t n_outcomes) {
  for (std::size_t k = n_inputs - 1; k > x; --k) lambda /= n_outcomes;
  return lambda % n_outcomes;
}

std::vector<DeterministicStrategy> enumerate_strategies(std::size_t n_inputs, std::size_t n_outcomes,
                                                        std::size_t cap) {
  const std::size_t n = strategy_count(n_inputs, n_outcomes, cap);
  const auto table = response_table(n_inputs, n_outcomes, n);
  std::vector<DeterministicStrategy> out(n);
  for (std::size_t l = 0; l < n; ++l) {
    out[l].response.assign(table.begin() + static_cast<std::ptrdiff_t>(l * n_inputs),
                           table.begin() + static_cast<std::ptrdiff_t>((l + 1) * n_inputs));
  }
  return out;
}

LhsModel::LhsModel(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b,
                   std::vector<HermitianOperator> sigma_lams)
    : n_inputs_(n_inputs), n_outcomes_(n_outcomes), dim_b_(dim_b), sigma_lams_(std::move(sigma_lams)) {
  if (sigma_lams_.size() != strategy_count(n_inputs_, n_outcomes_, std::numeric_limits<std::size_t>::max())) {
    throw DimensionError("LhsModel: one operator per deterministic strategy required");
  }
  double tr = 0.0;
  for (const auto& s : sigma_lams_) {
    if (s.dim() != dim_b_) throw DimensionError("LhsModel: operator dimension != dim_b");
    const double lmin = min_eigenvalue(s);
    if (lmin < -1e-10) {
      std::ostringstream os;
      os << "LhsModel: sigma_lambda not PSD, minimal eigenvalue " << lmin;
      throw InvariantError(os.str());
    }
    tr += s.trace();
  }
  if (std::abs(tr - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "LhsModel: total trace " << tr << ", not 1";
    throw InvariantError(os.str());
  }
}

LhsModel LhsModel::uniform(const Assemblage& assemblage) {
  const std::size_t n = strategy_count(assemblage.n_inputs(), assemblage.n_outcomes());
  const HermitianOperator rho_b = reduced_state(assemblage).op();
  return LhsModel(assemblage.n_inputs(), assemblage.n_outcomes(), assemblage.dim_b(),
                  std::vector<HermitianOperator>(n, rho_b * (1.0 / static_cast<double>(n))));
}

LhsModel LhsModel::product(const Assemblage& assemblage) {
  const std::size_t nx = assemblage.n_inputs(), na = assemblage.n_outcomes();
  const std::size_t n = strategy_count(nx, na);
  const auto table = response_table(nx, na, n);
  const auto p = conditional_probs(assemblage);
  const HermitianOperator rho_b = reduced_state(assemblage).op();
  std::vector<HermitianOperator> s;
  s.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    double w = 1.0;
    for (std::size_t x = 0; x < nx; ++x) w *= p(x, table[l * nx + x]);
    s.push_back(rho_b * w);
  }
  return LhsModel(nx, na, assemblage.dim_b(), std::move(s));
}

std::vector<HermitianOperator> induced_elements(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b,
                                                const std::vector<HermitianOperator>& sigma_lams) {
  std::vector<HermitianOperator> el(n_inputs * n_outcomes, HermitianOperator::zeros(dim_b));
  for (std::size_t l = 0; l < sigma_lams.size(); ++l) {
    std::size_t rem = l;
    for (std::size_t x = n_inputs; x-- > 0;) {
      el[x * n_outcomes + rem % n_outcomes] += sigma_lams[l];
      rem /= n_outcomes;
    }
  }
  return el;
}

Assemblage lhs_assemblage(const LhsModel& model) {
  return Assemblage(model.n_inputs(), model.n_outcomes(), model.dim_b(),
                    induced_elements(model.n_inputs(), model.n_outcomes(), model.dim_b(), model.sigmas()));
}

CqState embed_model(const LhsModel& model, const ProbabilityVector& p_x) {
  const auto el = induced_elements(model.n_inputs(), model.n_outcomes(), model.dim_b(), model.sigmas());
  if (p_x.size() != model.n_inputs()) throw DimensionError("embed_model: |p_X| != |X|");
  std::vector<HermitianOperator> blocks;
  for (std::size_t x = 0; x < model.n_inputs(); ++x) {
    for (std::size_t a = 0; a < model.n_outcomes(); ++a) blocks.push_back(p_x[x] * el[x * model.n_outcomes() + a]);
  }
  return CqState({"X", "A"}, {model.n_inputs(), model.n_outcomes()}, model.dim_b(), std::move(blocks));
}

// ---------------------------------------------------------------------------
// Feasibility

double lhs_support_function(std::size_t n_inputs, std::size_t n_outcomes, const std::vector<HermitianOperator>& g) {
  const std::size_t n = strategy_count(n_inputs, n_outcomes, std::numeric_limits<std::size_t>::max());
  const auto table = response_table(n_inputs, n_outcomes, n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < n; ++l) {
    HermitianOperator s = g[table[l * n_inputs]];
    for (std::size_t x = 1; x < n_inputs; ++x) s += g[x * n_outcomes + table[l * n_inputs + x]];
    best = std::max(best, eig_hermitian(s).eigenvalues.back());
  }
  return best;
}

FeasibilityReport lhs_feasibility(const Assemblage& assemblage, const FeasibilityOptions& options) {
  const std::size_t nx = assemblage.n_inputs(), na = assemblage.n_outcomes(), d = assemblage.dim_b();
  const std::size_t n = strategy_count(nx, na, options.strategy_cap);
  const auto table = response_table(nx, na, n);
  const auto& rho = assemblage.elements();
  // Lipschitz constant of the gradient: largest eigenvalue of A^T A.
  const double lipschitz = static_cast<double>(nx) * std::pow(static_cast<double>(na), static_cast<double>(nx - 1));

  auto residual_elements = [&](const std::vector<HermitianOperator>& s) {
    auto el = induced_elements(nx, na, d, s);
    for (std::size_t i = 0; i < el.size(); ++i) el[i] -= rho[i];
    return el;
  };
  auto trace_residual = [&](const std::vector<HermitianOperator>& r) {
    double t = 0.0;
    for (const auto& e : r) t += trace_norm(e);
    return t;
  };
  auto witness = [&](const std::vector<HermitianOperator>& r) {
    std::vector<HermitianOperator> g(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) g[i] = r[i] * -1.0;
    return frobenius_inner(g, rho) - lhs_support_function(nx, na, g);
  };

  std::vector<HermitianOperator> x_cur = LhsModel::product(assemblage).sigmas();
  std::vector<HermitianOperator> y = x_cur, x_prev = x_cur;
  double t = 1.0;
  FeasibilityReport report;
  std::vector<HermitianOperator> r = residual_elements(x_cur);
  double res = trace_residual(r);
  std::size_t it = 0;
  bool certified_infeasible = false;
  double wit = 0.0;
  while (res > options.target_residual && it < options.max_iterations) {
    ++it;
    const auto ry = residual_elements(y);
    x_prev = x_cur;
    for (std::size_t l = 0; l < n; ++l) {
      HermitianOperator grad = ry[table[l * nx]];
      for (std::size_t x = 1; x < nx; ++x) grad += ry[x * na + table[l * nx + x]];
      x_cur[l] = project_psd(y[l] - grad * (1.0 / lipschitz));
    }
    // Adaptive restart when the momentum step points uphill.
    double uphill = 0.0;
    for (std::size_t l = 0; l < n; ++l) uphill += trace_product(y[l] - x_cur[l], x_cur[l] - x_prev[l]);
    if (uphill > 0.0) {
      t = 1.0;
      y = x_cur;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      for (std::size_t l = 0; l < n; ++l) y[l] = x_cur[l] + (x_cur[l] - x_prev[l]) * beta;
      t = t_next;
    }
    if (it % 25 == 0 || it == options.max_iterations) {
      r = residual_elements(x_cur);
      res = trace_residual(r);
      if (res > options.feas_tol && it % 100 == 0) {
        wit = witness(r);
        if (wit > 1e-12) {
          certified_infeasible = true;
          break;
        }
      }
    }
  }
  r = residual_elements(x_cur);
  report.residual = trace_residual(r);
  report.witness_value = witness(r);
  report.iterations = it;
  if (report.residual <= options.feas_tol) {
    report.status = FeasibilityStatus::kFeasible;
    report.feasible = true;
    // Renormalize against the small trace drift the residual allows.
    double tr = 0.0;
    for (const auto& s : x_cur) tr += s.trace();
    for (auto& s : x_cur) s *= 1.0 / tr;
    report.model.emplace(nx, na, d, std::move(x_cur));
  } else if (certified_infeasible || report.witness_value > 1e-12) {
    report.status = FeasibilityStatus::kInfeasible;
  } else {
    report.status = FeasibilityStatus::kInconclusive;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Divergence programs

DivergenceProgram::DivergenceProgram(const Assemblage& assemblage, std::size_t cap)
    : assemblage_(assemblage),
      n_inputs_(assemblage.n_inputs()),
      n_outcomes_(assemblage.n_outcomes()),
      dim_b_(assemblage.dim_b()),
      n_strategies_(strategy_count(assemblage.n_inputs(), assemblage.n_outcomes(), cap)) {}

DivergenceProgram DivergenceProgram::restricted(const Assemblage& assemblage, std::size_t strategy_cap) {
  DivergenceProgram p(assemblage, strategy_cap);
  p.n_groups_ = assemblage.n_inputs();
  for (std::size_t x = 0; x < p.n_inputs_; ++x) {
    for (std::size_t a = 0; a < p.n_outcomes_; ++a) {
      const auto& el = assemblage.element(x, a);
      if (el.matrix().max_abs() == 0.0) continue;  // zero blocks contribute nothing
      p.blocks_.push_back({x, x, a, 0, 1.0, el, trace_x_log2_x(el)});
    }
  }
  return p;
}

DivergenceProgram DivergenceProgram::for_strategy(const Assemblage& assemblage, const MeasurementStrategy& strategy,
                                                  std::size_t strategy_cap) {
  DivergenceProgram p(assemblage, strategy_cap);
  const auto& inst = strategy.instrument;
  if (inst.input_dim() != assemblage.dim_b()) throw DimensionError("for_strategy: instrument input dim != dim_B");
  if (strategy.x_given_y.n_outcomes() != assemblage.n_inputs()) {
    throw DimensionError("for_strategy: p(x|y) alphabet != |X|");
  }
  p.n_groups_ = 1;
  p.instrument_ = inst;
  for (std::size_t x = 0; x < p.n_inputs_; ++x) {
    for (std::size_t a = 0; a < p.n_outcomes_; ++a) {
      for (std::size_t y = 0; y < inst.n_branches(); ++y) {
        const double w = strategy.x_given_y(y, x);
        if (w == 0.0) continue;
        HermitianOperator mapped = inst.apply(y, assemblage.element(x, a));
        if (mapped.matrix().max_abs() == 0.0) continue;
        const double rlr = trace_x_log2_x(mapped);
        p.blocks_.push_back({0, x, a, y, w, std::move(mapped), rlr});
      }
    }
  }
  return p;
}

HermitianOperator DivergenceProgram::map_block(const DivergenceBlock& block, const HermitianOperator& element) const {
  if (!instrument_ || instrument_->is_identity()) return element;
  return instrument_->apply(block.branch, element);
}

HermitianOperator DivergenceProgram::map_block_adjoint(const DivergenceBlock& block, const HermitianOperator& h) const {
  if (!instrument_ || instrument_->is_identity()) return h;
  return instrument_->apply_adjoint(block.branch, h);
}

std::vector<ExtendedReal> DivergenceProgram::group_values(const std::vector<HermitianOperator>& sigma_lams) const {
  const auto el = induced_elements(n_inputs_, n_outcomes_, dim_b_, sigma_lams);
  std::vector<ExtendedReal> out(n_groups_, ExtendedReal(0.0));
  std::vector<double> acc(n_groups_, 0.0);
  for (const auto& b : blocks_) {
    if (out[b.group].is_infinite()) continue;
    const auto term = relative_entropy_term(b.rho, map_block(b, el[b.x * n_outcomes_ + b.a]));
    if (term.is_infinite()) {
      out[b.group] = ExtendedReal::infinity();
      continue;
    }
    acc[b.group] += b.weight * term.value();
  }
  for (std::size_t g = 0; g < n_groups_; ++g) {
    if (out[g].is_finite()) out[g] = ExtendedReal(acc[g]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalarization

double Scalarization::value(const std::vector<double>& d) const {
  if (kind == Kind::kLinear) {
    double s = 0.0;
    for (std::size_t g = 0; g < d.size(); ++g) s += weights[g] * d[g];
    return s;
  }
  const double m = *std::max_element(d.begin(), d.end());
  double s = 0.0;
  for (double v : d) s += std::exp(beta * (v - m));
  return m + std::log(s) / beta;
}

std::vector<double> Scalarization::gradient(const std::vector<double>& d) const {
  if (kind == Kind::kLinear) return weights;
  const double m = *std::max_element(d.begin(), d.end());
  std::vector<double> w(d.size());
  double s = 0.0;
  for (std::size_t g = 0; g < d.size(); ++g) s += (w[g] = std::exp(beta * (d[g] - m)));
  for (auto& v : w) v /= s;
  return w;
}

// ---------------------------------------------------------------------------
// Frank-Wolfe

namespace {

struct BlockState {
  HermitianOperator arg;  // K(sigma^{a,x}) at the current iterate
  EigenDecomposition eig;
};

// Values of all groups and their derivatives along `dir` at the point
// `arg_k(gamma) = (1 - gamma) A_k + gamma B_k`.
struct LineProbe {
  bool finite = true;
  std::vector<double> values;
  std::vector<double> derivs;
};

}  // namespace

FrankWolfeResult minimize_divergence(const DivergenceProgram& program, const Scalarization& scalarization,
                                     const std::vector<HermitianOperator>& initial,
                                     const FrankWolfeOptions& options) {
  const std::size_t nx = program.n_inputs(), na = program.n_outcomes(), d = program.dim_b();
  const std::size_t n = program.n_strategies(), ng = program.n_groups();
  const auto& blocks = program.blocks();
  if (initial.size() != n) throw DimensionError("minimize_divergence: initial model has the wrong strategy count");
  if (scalarization.kind == Scalarization::Kind::kLinear && scalarization.weights.size() != ng) {
    throw DimensionError("minimize_divergence: scalarization weight count != group count");
  }
  const auto table = response_table(nx, na, n);

  std::vector<HermitianOperator> sig = initial;
  std::vector<BlockState> state(blocks.size());
  FrankWolfeResult result;

  auto evaluate_blocks = [&](const std::vector<HermitianOperator>& el, std::vector<double>& values) {
    values.assign(ng, 0.0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      state[k].arg = program.map_block(b, el[b.x * na + b.a]);
      state[k].eig = eig_hermitian(state[k].arg);
      const auto term = relative_entropy_term(b.rho, state[k].eig);
      if (term.is_infinite()) return false;
      values[b.group] += b.weight * term.value();
    }
    return true;
  };

  auto objective_at = [&](const std::vector<HermitianOperator>& s) -> std::optional<double> {
    const auto el = induced_elements(nx, na, d, s);
    std::vector<double> v(ng, 0.0);
    for (const auto& b : blocks) {
      const auto term = relative_entropy_term(b.rho, program.map_block(b, el[b.x * na + b.a]));
      if (term.is_infinite()) return std::nullopt;
      v[b.group] += b.weight * term.value();
    }
    return scalarization.value(v);
  };

  double step = 1.0, mult_eps = 1.0;
  std::vector<HermitianOperator> prev;  // previous iterate, for momentum
  std::size_t run = 0;                  // consecutive momentum steps
  std::vector<double> values;
  for (std::size_t it = 0;; ++it) {
    const auto el = induced_elements(nx, na, d, sig);
    if (!evaluate_blocks(el, values)) {
      throw Error("minimize_divergence: objective is infinite at the iterate (support violation)");
    }
    const double objective = scalarization.value(values);
    const auto c = scalarization.gradient(values);

    // Element-level gradient E^{a,x}; the gradient in slot lambda is
    // G_lambda = sum_x E^{lambda(x),x}.
    std::vector<HermitianOperator> e(nx * na, HermitianOperator::zeros(d));
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      const double coef = -c[b.group] * b.weight;
      if (coef == 0.0) continue;
      e[b.x * na + b.a] += program.map_block_adjoint(b, log_frechet_apply(state[k].eig, b.rho)) * coef;
    }
    double inner = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) inner += trace_product(e[i], el[i]);

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_lambda = 0;
    std::vector<complex> best_vec;
    std::vector<HermitianOperator> grad(n);
    for (std::size_t l = 0; l < n; ++l) {
      HermitianOperator& g = grad[l];
      g = e[table[l * nx]];
      for (std::size_t x = 1; x < nx; ++x) g += e[x * na + table[l * nx + x]];
      const auto ge = eig_hermitian(g);
      if (ge.eigenvalues.front() < best_val) {
        best_val = ge.eigenvalues.front();
        best_lambda = l;
        best_vec = ge.eigenvectors.column(0);
      }
    }
    const double gap = std::max(0.0, inner - best_val);

    result.objective = objective;
    result.gap = gap;
    result.group_values = values;
    result.group_weights = c;
    result.iterations = it;
    if (options.observer) options.observer(FrankWolfeIterate{it, objective, gap, sig});
    if (gap <= options.tolerance) {
      result.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;

    // Two candidate steps, the better of which is taken: a multiplicative step
    // sigma <- M sigma M with M = I - eps (G - mu I), which scales small
    // eigenvalues instead of clipping them, and a projected gradient step.
    // The Frank-Wolfe step below runs only when neither decreases enough.
    std::optional<std::vector<HermitianOperator>> next;
    double next_value = objective;
    if (options.multiplicative_steps) {
      double mu = 0.0, tr = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        mu += trace_product(grad[l], sig[l]);
        tr += sig[l].trace();
      }
      mu /= tr;
      bool accepted = false;
      for (int tries = 0; tries < 40 && mult_eps > 1e-14; ++tries) {
        std::vector<HermitianOperator> cand(n);
        double ctr = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          const HermitianOperator shifted = grad[l] - HermitianOperator::identity(d) * mu;
          cand[l] = congruence(ComplexMatrix::identity(d) - shifted.matrix() * complex(mult_eps, 0.0), sig[l]);
          ctr += cand[l].trace();
        }
        for (auto& c : cand) c *= 1.0 / ctr;
        double lin = 0.0;
        for (std::size_t l = 0; l < n; ++l) lin += trace_product(grad[l], cand[l] - sig[l]);
        const auto fc = objective_at(cand);
        if (fc && *fc <= objective + 0.5 * lin) {
          next = std::move(cand);
          next_value = *fc;
          mult_eps *= 2.0;
          accepted = true;
          break;
        }
        mult_eps *= 0.5;
      }
      if (!accepted) mult_eps = 1.0;
    }

    if (options.projected_steps) {
      bool accepted = false;
      const double beta = options.momentum && !prev.empty() ? static_cast<double>(run) / (run + 3.0) : 0.0;
      for (int tries = 0; tries < 40 && step > 1e-14; ++tries) {
        const bool extrapolate = beta > 0.0 && tries == 0;
        std::vector<HermitianOperator> cand(n);
        for (std::size_t l = 0; l < n; ++l) {
          cand[l] = sig[l] - grad[l] * step;
          if (extrapolate) cand[l] += (sig[l] - prev[l]) * beta;
        }
        cand = project_normalized_psd(cand);
        double lin = 0.0, sq = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          const HermitianOperator diff = cand[l] - sig[l];
          lin += trace_product(grad[l], diff);
          sq += trace_product(diff, diff);
        }
        const auto fc = objective_at(cand);
        if (fc && *fc <= objective + (extrapolate ? 0.0 : lin + sq / (2.0 * step))) {
          accepted = true;
          if (extrapolate) {
            ++run;
          } else {
            step *= 2.0;
            run = 1;
          }
          if (!next || *fc <= next_value) {
            prev = sig;
            next = std::move(cand);
            next_value = *fc;
          } else {
            prev.clear();
            run = 0;
          }
          break;
        }
        if (extrapolate) {
          run = 0;  // restart without shrinking the step
          continue;
        }
        step *= 0.5;
      }
      if (!accepted) {
        prev.clear();
        run = 0;
        step = 1.0;
      }
    }
    if (next) {
      sig = std::move(*next);
      continue;
    }

    // Line search along s - sigma with s = |psi><psi| in slot best_lambda.
    const HermitianOperator atom = HermitianOperator::projector(best_vec);
    std::vector<HermitianOperator> a_arg(blocks.size()), dir(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      a_arg[k] = state[k].arg;
      const bool hit = table[best_lambda * nx + b.x] == b.a;
      HermitianOperator b_arg = hit ? program.map_block(b, atom) : HermitianOperator::zeros(a_arg[k].dim());
      dir[k] = b_arg - a_arg[k];
    }
    auto probe = [&](double gamma) {
      LineProbe p;
      p.values.assign(ng, 0.0);
      p.derivs.assign(ng, 0.0);
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        const HermitianOperator pt = a_arg[k] + dir[k] * gamma;
        const auto pe = eig_hermitian(pt);
        const auto term = relative_entropy_term(b.rho, pe);
        if (term.is_infinite()) {
          p.finite = false;
          return p;
        }
        p.values[b.group] += b.weight * term.value();
        p.derivs[b.group] -= b.weight * log_frechet_pairing(pe, b.rho, dir[k]);
      }
      return p;
    };
    auto slope = [&](const LineProbe& p) {
      const auto cw = scalarization.gradient(p.values);
      double s = 0.0;
      for (std::size_t g = 0; g < ng; ++g) s += cw[g] * p.derivs[g];
      return s;
    };

    double lo = 0.0, hi = options.max_step;
    const auto at_max = probe(hi);
    double gamma;
    if (at_max.finite && slope(at_max) <= 0.0) {
      gamma = hi;
    } else {
      for (std::size_t ls = 0; ls < options.line_search_iterations && hi - lo > 1e-15; ++ls) {
        const double mid = 0.5 * (lo + hi);
        const auto pm = probe(mid);
        if (!pm.finite || slope(pm) > 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      gamma = lo;
    }
    // The update below rounds differently from the probe, which matters when
    // an eigenvalue sits at the support cut.
    bool moved = false;
    for (; gamma > 1e-15; gamma *= 0.5) {
      std::vector<HermitianOperator> cand = sig;
      for (std::size_t l = 0; l < n; ++l) cand[l] *= (1.0 - gamma);
      cand[best_lambda] += atom * gamma;
      const auto fc = objective_at(cand);
      if (fc && *fc <= objective) {
        sig = std::move(cand);
        moved = true;
        break;
      }
    }
    if (!moved) break;  // no representable descent step
  }
  result.sigma_lams = std::move(sig);
  return result;
}

InnerSolveResult inner_inf_relative_entropy(const Assemblage& assemblage, const ProbabilityVector& p_x,
                                            const InnerSolveOptions& options) {
  if (p_x.size() != assemblage.n_inputs()) throw DimensionError("inner_inf_relative_entropy: |p_X| != |X|");
  const auto program = DivergenceProgram::restricted(assemblage, options.strategy_cap);
  const LhsModel init = options.initial ? *options.initial : LhsModel::uniform(assemblage);
  FrankWolfeOptions fw;
  fw.tolerance = options.tolerance;
  fw.max_iterations = options.max_iterations;
  fw.observer = options.observer;
  auto r = minimize_divergence(program, Scalarization::linear(p_x.values()), init.sigmas(), fw);
  // Total trace is preserved by convex combinations; renormalize rounding.
  double tr = 0.0;
  for (const auto& s : r.sigma_lams) tr += s.trace();
  for (auto& s : r.sigma_lams) s *= 1.0 / tr;
  return InnerSolveResult{r.objective, r.gap,
                          LhsModel(assemblage.n_inputs(), assemblage.n_outcomes(), assemblage.dim_b(),
                                   std::move(r.sigma_lams)),
                          r.iterations, r.group_values};
}

}  // namespace steer
