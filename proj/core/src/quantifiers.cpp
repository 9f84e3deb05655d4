#include "steer/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "steer/random.hpp"

namespace steer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const RresOptions& o) {
  if (o.outer_iterations == 0) throw DomainError("restricted_res: outer_iterations must be positive");
  if (!(o.inner_tol > 0.0)) throw DomainError("restricted_res: inner_tol must be positive");
  if (o.betas.empty()) throw DomainError("restricted_res: empty temperature schedule");
  for (double b : o.betas) {
    if (!(b > 0.0)) throw DomainError("restricted_res: temperatures must be positive");
  }
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

std::vector<double> project_simplex(std::vector<double> y) {
  std::vector<double> s = y;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  for (auto& v : y) v = std::max(0.0, v - theta);
  return y;
}

std::vector<double> normalized(std::vector<double> p) {
  double s = 0.0;
  for (double v : p) s += v;
  for (auto& v : p) v /= s;
  return p;
}

struct Bracket {
  double lo = -kInf;
  double hi = kInf;
  IntervalDiagnostics diag;

  void offer_lo(double value, const std::vector<double>& p, double gap) {
    if (value > lo) {
      lo = value;
      diag.best_p = p;
      diag.lo_gap = gap;
    }
  }
  void offer_hi(const std::vector<double>& group_values) { hi = std::min(hi, max_of(group_values)); }
  void count(const FrankWolfeResult& r) {
    diag.inner_iterations += r.iterations;
    ++diag.solves;
  }

  Interval finish(const char* who) {
    lo = std::max(lo, 0.0);
    if (lo > hi + 1e-9) {
      std::ostringstream os;
      os << who << ": inverted bracket lo=" << lo << " > hi=" << hi << " after " << diag.solves << " solves";
      throw SolverFailure(os.str());
    }
    lo = std::min(lo, hi);
    return Interval{lo, hi, std::move(diag)};
  }
};

FrankWolfeOptions fw_options(double tol, std::size_t max_iterations) {
  FrankWolfeOptions fw;
  fw.tolerance = tol;
  fw.max_iterations = max_iterations;
  return fw;
}

std::vector<double> finite_values(const std::vector<ExtendedReal>& v, bool& ok) {
  std::vector<double> out;
  ok = true;
  for (const auto& e : v) {
    if (e.is_infinite()) {
      ok = false;
      return {};
    }
    out.push_back(e.value());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Restricted relative entropy of steering

Interval restricted_res(const Assemblage& assemblage, const RresOptions& options) {
  validate(options);
  const auto program = DivergenceProgram::restricted(assemblage, options.strategy_cap);
  const std::size_t nx = assemblage.n_inputs();
  Bracket br;

  // The product model sigma_lambda = rho_B prod_x p(lambda(x)|x) has
  // d_x = I(A;B)_x, which keeps hi below the conditional-information layer.
  bool ok = false;
  const auto product_values = finite_values(program.group_values(LhsModel::product(assemblage).sigmas()), ok);
  if (ok) br.offer_hi(product_values);

  std::vector<double> p(nx, 1.0 / static_cast<double>(nx));
  std::vector<double> p_sum(nx, 0.0);
  auto sigma = LhsModel::uniform(assemblage).sigmas();
  const auto probe_fw = fw_options(options.inner_tol, options.probe_iterations);
  for (std::size_t t = 1; t <= options.outer_iterations; ++t) {
    auto r = minimize_divergence(program, Scalarization::linear(p), sigma, probe_fw);
    br.count(r);
    br.offer_lo(r.objective - r.gap, p, r.gap);
    br.offer_hi(r.group_values);
    for (std::size_t x = 0; x < nx; ++x) p_sum[x] += p[x];
    // Multiplicative weights on the per-input divergences (a supergradient of
    // the concave map p -> inf_sigma sum_x p(x) d_x(sigma)).
    const double eta = 0.1 / std::sqrt(static_cast<double>(t));
    const double shift = max_of(r.group_values);
    for (std::size_t x = 0; x < nx; ++x) p[x] *= std::exp(eta * (r.group_values[x] - shift));
    p = normalized(std::move(p));
    sigma = std::move(r.sigma_lams);
    ++br.diag.outer_iterations;
  }

  const auto tight_fw = fw_options(options.inner_tol, options.inner_max_iterations);
  auto tight_probe = [&](const std::vector<double>& q, const std::vector<HermitianOperator>& start) {
    auto r = minimize_divergence(program, Scalarization::linear(q), start, tight_fw);
    br.count(r);
    br.offer_lo(r.objective - r.gap, q, r.gap);
    br.offer_hi(r.group_values);
    return r;
  };
  tight_probe(normalized(p_sum), sigma);
  tight_probe(p, sigma);

  // Annealed log-sum-exp smoothing of max_x d_x for the upper side; its
  // softmax weights are the natural final probe for the lower side.
  auto smooth = sigma;
  std::vector<double> weights = p;
  for (double beta : options.betas) {
    auto r = minimize_divergence(program, Scalarization::log_sum_exp(beta), smooth, tight_fw);
    br.count(r);
    br.offer_hi(r.group_values);
    br.diag.stage_hi.push_back(br.hi);
    weights = r.group_weights;
    smooth = std::move(r.sigma_lams);
  }
  tight_probe(weights, smooth);
  return br.finish("restricted_res");
}

Interval restricted_res_exchanged(const Assemblage& assemblage, const RresOptions& options) {
  validate(options);
  const auto program = DivergenceProgram::restricted(assemblage, options.strategy_cap);
  const double log_inputs = std::log(static_cast<double>(assemblage.n_inputs()));
  Bracket br;
  auto smooth = LhsModel::uniform(assemblage).sigmas();
  const auto fw = fw_options(options.inner_tol, options.inner_max_iterations);
  std::vector<double> weights;
  for (double beta : options.betas) {
    auto r = minimize_divergence(program, Scalarization::log_sum_exp(beta), smooth, fw);
    br.count(r);
    br.offer_hi(r.group_values);
    br.diag.stage_hi.push_back(br.hi);
    // max_x d_x >= F_beta - ln|X| / beta pointwise, and F_beta >= objective - gap.
    br.offer_lo(r.objective - r.gap - log_inputs / beta, r.group_weights, r.gap);
    weights = r.group_weights;
    smooth = std::move(r.sigma_lams);
  }
  // Weak duality at the final softmax weights: evaluate the linear
  // certificate at the smoothed minimizer without moving it.
  auto r = minimize_divergence(program, Scalarization::linear(weights), smooth, fw_options(options.inner_tol, 0));
  br.count(r);
  br.offer_lo(r.objective - r.gap, weights, r.gap);
  return br.finish("restricted_res_exchanged");
}

double res_lower_bound_full(const Assemblage& assemblage, const std::vector<MeasurementStrategy>& strategies,
                            const InnerSolveOptions& options) {
  double best = 0.0;
  const auto init = options.initial ? options.initial->sigmas() : LhsModel::uniform(assemblage).sigmas();
  FrankWolfeOptions fw = fw_options(options.tolerance, options.max_iterations);
  fw.observer = options.observer;
  for (const auto& s : strategies) {
    const auto program = DivergenceProgram::for_strategy(assemblage, s, options.strategy_cap);
    if (program.blocks().empty()) continue;
    const auto r = minimize_divergence(program, Scalarization::linear({1.0}), init, fw);
    best = std::max(best, r.objective - r.gap);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Upper bounds

double FullUpperBound::value() const noexcept {
  return std::min({strategy_information, sup_outcome_entropy, log_outcomes});
}

double input_information(const Assemblage& assemblage, std::size_t x) {
  const auto probs = conditional_probs(assemblage);
  std::vector<double> p_a(assemblage.n_outcomes());
  double h_ab = 0.0;
  for (std::size_t a = 0; a < assemblage.n_outcomes(); ++a) {
    p_a[a] = probs(x, a);
    h_ab -= trace_x_log2_x(assemblage.element(x, a));
  }
  const double h_b = von_neumann_entropy(reduced_state(assemblage));
  return std::max(0.0, shannon_entropy(p_a) + h_b - h_ab);
}

double sup_outcome_entropy(const Assemblage& assemblage) {
  const std::size_t nx = assemblage.n_inputs(), na = assemblage.n_outcomes();
  const auto q = conditional_probs(assemblage);
  auto entropy_at = [&](const std::vector<double>& p) {
    std::vector<double> m(na, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t a = 0; a < na; ++a) m[a] += p[x] * q(x, a);
    }
    return shannon_entropy(m);
  };
  double best = 0.0;
  for (std::size_t x = 0; x < nx; ++x) best = std::max(best, entropy_at(ProbabilityVector::point_mass(nx, x).values()));

  std::vector<double> p(nx, 1.0 / static_cast<double>(nx));
  double h = entropy_at(p);
  double step = 1.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> m(na, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t a = 0; a < na; ++a) m[a] += p[x] * q(x, a);
    }
    std::vector<double> grad(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t a = 0; a < na; ++a) {
        if (q(x, a) > 0.0) grad[x] -= q(x, a) * (std::log2(std::max(m[a], 1e-300)) + 1.0 / std::numbers::ln2);
      }
    }
    bool moved = false;
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<double> cand(nx);
      for (std::size_t x = 0; x < nx; ++x) cand[x] = p[x] + step * grad[x];
      cand = project_simplex(std::move(cand));
      const double hc = entropy_at(cand);
      if (hc > h) {
        p = std::move(cand);
        h = hc;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return std::max(best, h);
}

FullUpperBound upper_bound_full(const Assemblage& assemblage, const std::vector<MeasurementStrategy>& strategies) {
  FullUpperBound out;
  out.log_outcomes = std::log2(static_cast<double>(assemblage.n_outcomes()));
  out.sup_outcome_entropy = sup_outcome_entropy(assemblage);
  std::vector<MeasurementStrategy> used = strategies;
  if (used.empty()) {
    used.push_back(MeasurementStrategy::trivial(ProbabilityVector::uniform(assemblage.n_inputs()), assemblage.dim_b()));
  }
  for (const auto& s : used) {
    const auto state = apply_measurement_strategy(assemblage, s);
    out.strategy_information =
        std::max(out.strategy_information, mutual_information(state, {"X", "Y"}, true, {"A"}));
  }
  return out;
}

RestrictedUpperBound restricted_upper_bound(const Assemblage& assemblage) {
  RestrictedUpperBound out;
  for (std::size_t x = 0; x < assemblage.n_inputs(); ++x) {
    out.conditional_information = std::max(out.conditional_information, input_information(assemblage, x));
  }
  out.sup_outcome_entropy = sup_outcome_entropy(assemblage);
  out.entropy_b = von_neumann_entropy(reduced_state(assemblage));
  out.log_dims = std::log2(static_cast<double>(std::min(assemblage.n_outcomes(), assemblage.dim_b())));
  const double middle = std::min(out.sup_outcome_entropy, out.entropy_b);
  if (out.conditional_information > middle + 1e-9 || middle > out.log_dims + 1e-9) {
    std::ostringstream os;
    os << "restricted_upper_bound: chain out of order: I(A;B|X)=" << out.conditional_information
       << ", min{H(A),H(B)}=" << middle << ", log2 min{|A|,|B|}=" << out.log_dims;
    throw InvariantError(os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace distances

namespace {

void check_same_shape(const Assemblage& a1, const Assemblage& a2) {
  if (a1.n_inputs() != a2.n_inputs() || a1.n_outcomes() != a2.n_outcomes() || a1.dim_b() != a2.dim_b()) {
    throw DimensionError("assemblages have different shapes");
  }
}

// Sum_a ||K_y(rho^{a,x} - theta^{a,x})||_1 for every (y, x), row-major in y.
// h1 - h2 or h2 - h1, whichever comes first in a fixed order of the operands,
// so that swapping the arguments reproduces the distance bit for bit.
HermitianOperator canonical_difference(const HermitianOperator& h1, const HermitianOperator& h2) {
  const auto e1 = h1.matrix().entries(), e2 = h2.matrix().entries();
  for (std::size_t i = 0; i < e1.size(); ++i) {
    if (e1[i].real() != e2[i].real()) return e1[i].real() < e2[i].real() ? h2 - h1 : h1 - h2;
    if (e1[i].imag() != e2[i].imag()) return e1[i].imag() < e2[i].imag() ? h2 - h1 : h1 - h2;
  }
  return h1 - h2;
}

std::vector<double> branch_distances(const Assemblage& a1, const Assemblage& a2, const Instrument& inst) {
  const std::size_t nx = a1.n_inputs(), na = a1.n_outcomes();
  std::vector<double> out(inst.n_branches() * nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t a = 0; a < na; ++a) {
      const HermitianOperator diff = canonical_difference(a1.element(x, a), a2.element(x, a));
      for (std::size_t y = 0; y < inst.n_branches(); ++y) {
        out[y * nx + x] += trace_norm(inst.is_identity() ? diff : inst.apply(y, diff));
      }
    }
  }
  return out;
}

}  // namespace

double restricted_trace_distance(const Assemblage& a1, const Assemblage& a2) {
  check_same_shape(a1, a2);
  const auto d = branch_distances(a1, a2, Instrument::identity(a1.dim_b()));
  return 0.5 * max_of(d);
}

double strategy_trace_distance(const Assemblage& a1, const Assemblage& a2, const MeasurementStrategy& strategy) {
  check_same_shape(a1, a2);
  const auto d = branch_distances(a1, a2, strategy.instrument);
  const std::size_t nx = a1.n_inputs();
  double s = 0.0;
  for (std::size_t y = 0; y < strategy.instrument.n_branches(); ++y) {
    for (std::size_t x = 0; x < nx; ++x) s += strategy.x_given_y(y, x) * d[y * nx + x];
  }
  return 0.5 * s;
}

double trace_distance_lower_bound(const Assemblage& a1, const Assemblage& a2,
                                  const std::vector<MeasurementStrategy>& strategies) {
  double best = strategy_trace_distance(
      a1, a2, MeasurementStrategy::trivial(ProbabilityVector::uniform(a1.n_inputs()), a1.dim_b()));
  for (const auto& s : strategies) best = std::max(best, strategy_trace_distance(a1, a2, s));
  return best;
}

SeesawResult seesaw_trace_distance(const Assemblage& a1, const Assemblage& a2, const SeesawOptions& options) {
  check_same_shape(a1, a2);
  const std::size_t nx = a1.n_inputs(), d = a1.dim_b(), nb = options.n_branches;
  if (nb == 0) throw DomainError("seesaw_trace_distance: need at least one branch");
  // Best p(x|y) for fixed instrument: a point mass on the x with the largest
  // branch distance.
  auto best_response = [&](const Instrument& inst) {
    const auto dist = branch_distances(a1, a2, inst);
    std::vector<double> p(nb * nx, 0.0);
    double v = 0.0;
    for (std::size_t y = 0; y < nb; ++y) {
      std::size_t arg = 0;
      for (std::size_t x = 1; x < nx; ++x) {
        if (dist[y * nx + x] > dist[y * nx + arg]) arg = x;
      }
      p[y * nx + arg] = 1.0;
      v += dist[y * nx + arg];
    }
    return std::pair{0.5 * v, StochasticMatrix(nb, nx, std::move(p))};
  };
  SeesawResult out;
  const Rng root(options.seed);
  for (std::size_t s = 0; s < options.starts; ++s) {
    Rng rng = root.split(s);
    ComplexMatrix v = random_isometry(nb * d, d, rng);
    auto inst = instrument_from_isometry(v, d, d, nb);
    auto [value, choice] = best_response(inst);
    double step = 0.3;
    for (std::size_t round = 0; round < options.rounds; ++round) {
      ComplexMatrix g = ginibre(nb * d, d, rng);
      g *= complex(step, 0.0);
      const ComplexMatrix v_new = orthonormalize_columns(v + g);
      auto inst_new = instrument_from_isometry(v_new, d, d, nb);
      auto [value_new, choice_new] = best_response(inst_new);
      if (value_new > value) {
        v = v_new;
        inst = std::move(inst_new);
        value = value_new;
        choice = std::move(choice_new);
      } else {
        step *= 0.8;
      }
    }
    out.strategies.emplace_back(std::move(choice), std::move(inst));
  }
  out.value = trace_distance_lower_bound(a1, a2, out.strategies);
  return out;
}

// ---------------------------------------------------------------------------
// Continuity and faithfulness

double g_eps(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    std::ostringstream os;
    os << "g_eps: epsilon " << eps << " outside [0, 1]";
    throw DomainError(os.str());
  }
  if (eps == 0.0) return 0.0;
  const double g = (eps + 1.0) * std::log2(eps + 1.0) - eps * std::log2(eps);
#ifdef STEERLIB_INJECT_GEPS_SIGN_FLIP
  return -g;
#else
  return g;
#endif
}

ContinuityReport continuity_bound_check(const Assemblage& a1, const Assemblage& a2, const RresOptions& options) {
  ContinuityReport out;
  out.epsilon = std::min(1.0, restricted_trace_distance(a1, a2));
  const double dims = static_cast<double>(std::min(a1.n_outcomes(), a1.dim_b()));
  out.bound = out.epsilon * std::log2(dims) + g_eps(out.epsilon);
  out.first = restricted_res(a1, options);
  out.second = restricted_res(a2, options);
  out.difference_lower = std::max({0.0, out.first.lo - out.second.hi, out.second.lo - out.first.hi});
  out.margin = out.bound - out.difference_lower;
  out.pass = out.margin >= -1e-9;
  return out;
}

double pinsker_slack(const Assemblage& assemblage, const LhsModel& model, const ProbabilityVector& p_x) {
  const CqState rho = embed_cq(assemblage, p_x);
  const CqState sigma = embed_model(model, p_x);
  const ExtendedReal d = relative_entropy(rho, sigma);
  if (d.is_infinite()) return kInf;
  const double t = trace_distance_norm(rho, sigma);
  return d.value() - t * t / (2.0 * std::numbers::ln2);
}

FaithfulnessReport faithfulness_check(const Assemblage& assemblage, const RresOptions& options) {
  FaithfulnessReport out;
  const auto p = ProbabilityVector::uniform(assemblage.n_inputs());
  InnerSolveOptions inner;
  inner.tolerance = options.inner_tol;
  inner.max_iterations = options.inner_max_iterations;
  inner.strategy_cap = options.strategy_cap;
  const auto solve = inner_inf_relative_entropy(assemblage, p, inner);
  const CqState rho = embed_cq(assemblage, p);
  const CqState sigma = embed_model(solve.model, p);
  const ExtendedReal d = relative_entropy(rho, sigma);
  out.pinsker_divergence = d.is_finite() ? d.value() : kInf;
  out.pinsker_distance = trace_distance_norm(rho, sigma);
  out.pinsker_slack =
      out.pinsker_divergence - out.pinsker_distance * out.pinsker_distance / (2.0 * std::numbers::ln2);
  out.rres = restricted_res(assemblage, options);
  out.feasibility = lhs_feasibility(assemblage, FeasibilityOptions{.strategy_cap = options.strategy_cap});
  out.small_implies_feasible = !(out.rres.hi <= 1e-4) || out.feasibility.feasible;
  out.feasible_implies_small = !out.feasibility.feasible || out.rres.hi <= 1e-3;
  out.pass = out.pinsker_slack >= -1e-8 && out.small_implies_feasible && out.feasible_implies_small;
  return out;
}

}  // namespace steer
