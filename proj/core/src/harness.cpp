#include "steer/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "steer/io.hpp"

namespace steer {

void TrialOutcome::require(double slack, const std::string& what) {
  ++checks;
  if (std::isnan(slack)) slack = -1.0;
  margin = std::min(margin, slack);
  if (slack < 0.0 && failure.empty()) {
    std::ostringstream os;
    os << what << " (slack " << slack << ")";
    failure = os.str();
  }
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("STEERLIB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

PropertyResult run_property(const std::string& name, std::size_t trials, const Rng& rng, const TrialFunction& fn,
                            std::size_t threads, std::vector<double>* chain_margins) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(trials);
  const Rng base = rng.split(fnv1a(name));
  auto run_one = [&](std::size_t t) {
    Rng r = base.split(t);
    try {
      outcomes[t] = fn(t, r);
    } catch (const std::exception& e) {
      outcomes[t] = TrialOutcome{};
      outcomes[t].require(-1.0, std::string("exception: ") + e.what());
    }
  };
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, trials);
  if (threads <= 1) {
    for (std::size_t t = 0; t < trials; ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < trials; t = next++) run_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  PropertyResult res;
  res.name = name;
  res.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& o = outcomes[t];
    res.checks += o.checks;
    if (!res.worst_margin || o.margin < *res.worst_margin) res.worst_margin = o.margin;
    if (!o.failure.empty() || o.margin < 0.0) {
      ++res.failures;
      if (res.first_failure.empty()) res.first_failure = "trial " + std::to_string(t) + ": " + o.failure;
    }
    if (chain_margins) chain_margins->insert(chain_margins->end(), o.chain_margins.begin(), o.chain_margins.end());
  }
  if (res.worst_margin && std::isinf(*res.worst_margin)) res.worst_margin.reset();
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

double bound_chain_margin(const Assemblage& assemblage, const Interval& rres) {
  try {
    const auto chain = restricted_upper_bound(assemblage);
    const double middle = std::min(chain.sup_outcome_entropy, chain.entropy_b);
    return std::min({chain.conditional_information + 1e-6 - rres.hi, middle + 1e-9 - chain.conditional_information,
                     chain.log_dims + 1e-9 - middle});
  } catch (const InvariantError&) {
    return -1.0;
  }
}

// ---------------------------------------------------------------------------
// Instance helpers

namespace {

struct Shape {
  std::size_t nx;
  std::size_t na;
  std::size_t d;
};

Shape desk_shape(Rng& rng) {
  Shape s;
  s.nx = 2 + rng.index(2);
  s.na = 2 + rng.index(2);
  s.d = rng.uniform() < 0.8 ? 2 : 3;
  return s;
}

Assemblage random_desk_assemblage(Rng& rng) {
  const Shape s = desk_shape(rng);
  return random_assemblage(s.nx, s.na, s.d, rng);
}

// w a + (1 - w) b
Assemblage mix(const Assemblage& a, const Assemblage& b, double w) {
  std::vector<HermitianOperator> el;
  for (std::size_t i = 0; i < a.elements().size(); ++i) el.push_back(a.elements()[i] * w + b.elements()[i] * (1.0 - w));
  return Assemblage(a.n_inputs(), a.n_outcomes(), a.dim_b(), std::move(el));
}

HermitianOperator random_hermitian(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  return HermitianOperator::symmetrized((g + g.adjoint()) * complex(0.5, 0.0));
}

HermitianOperator log2_full(const HermitianOperator& h) {
  return matrix_function(h, [](double l) { return std::log2(l); }, SupportMode::kFull);
}

double max_abs_diff(const HermitianOperator& a, const HermitianOperator& b) { return (a - b).matrix().max_abs(); }

Interval solve_rres(const Assemblage& a, const PropertyConfig& cfg, TrialOutcome& out) {
  Interval r = restricted_res(a, cfg.rres);
  out.chain_margins.push_back(bound_chain_margin(a, r));
  return r;
}

InnerSolveOptions inner_options(const PropertyConfig& cfg) {
  InnerSolveOptions o;
  o.tolerance = cfg.inner_tol;
  return o;
}

// Objective of the linear program at model sigma (+inf on support violation).
double program_value(const DivergenceProgram& program, const std::vector<double>& weights,
                     const std::vector<HermitianOperator>& sigma) {
  const auto v = program.group_values(sigma);
  double s = 0.0;
  for (std::size_t g = 0; g < v.size(); ++g) {
    if (v[g].is_infinite()) return weights[g] > 0.0 ? kInf : s;
    s += weights[g] * v[g].value();
  }
  return s;
}

MeasurementStrategy random_strategy(const Assemblage& a, Rng& rng) {
  const std::size_t ny = 1 + rng.index(3);
  const std::size_t out_dim = std::max<std::size_t>(1 + rng.index(a.dim_b()), (a.dim_b() + ny - 1) / ny);
  return MeasurementStrategy(random_stochastic(ny, a.n_inputs(), rng), random_instrument(a.dim_b(), out_dim, ny, rng));
}

// ---------------------------------------------------------------------------
// linalg

TrialOutcome eig_reconstruction(std::size_t, Rng& rng) {
  TrialOutcome out;
  const std::size_t dim = 1 + rng.index(8);
  HermitianOperator m = random_hermitian(dim, rng) * std::exp(4.0 * (rng.uniform() - 0.5));
  const auto e = eig_hermitian(m);
  const ComplexMatrix& v = e.eigenvectors;
  const ComplexMatrix rec = reconstruct(e).matrix();
  const double resid = (rec - m.matrix()).frobenius_norm();
  const double unit = (v.adjoint() * v - ComplexMatrix::identity(dim)).frobenius_norm();
  out.require(1e-9 * m.matrix().frobenius_norm() - resid, "reconstruction residual");
  out.require(1e-10 - unit, "eigenvector unitarity");
  for (std::size_t i = 1; i < dim; ++i) out.require(e.eigenvalues[i] - e.eigenvalues[i - 1], "ascending order");
  return out;
}

TrialOutcome klein_inequality(std::size_t, Rng& rng) {
  TrialOutcome out;
  const std::size_t dim = 2 + rng.index(3);
  const auto rho = random_density(dim, 1 + rng.index(dim), rng);
  const auto sigma = random_density(dim, rng.uniform() < 0.8 ? dim : 1 + rng.index(dim), rng);
  const auto raw = relative_entropy_term(rho.op(), sigma.op());
  const auto self = relative_entropy(rho, rho);
  out.require(1e-9 - self.value(), "D(rho||rho) = 0");
  if (raw.is_finite()) {
    const double tn = trace_norm(rho.op() - sigma.op());
    out.require(raw.value() + 1e-9, "D(rho||sigma) >= 0");
    // Quantitative form of equality only at rho = sigma.
    out.require(raw.value() - tn * tn / (2.0 * std::numbers::ln2) + 1e-9, "Pinsker separation");
  }
  return out;
}

TrialOutcome data_processing(std::size_t, Rng& rng) {
  TrialOutcome out;
  const std::size_t da = 2 + rng.index(2), db = 2 + rng.index(2);
  const auto rho = random_density(da * db, 1 + rng.index(da * db), rng);
  const auto sigma = random_density(da * db, da * db, rng);
  const std::size_t dims[2] = {da, db};
  const std::size_t keep[1] = {1};
  const DensityOperator rho_b(partial_trace(rho.op(), dims, keep));
  const DensityOperator sigma_b(partial_trace(sigma.op(), dims, keep));
  out.require(relative_entropy(rho, sigma).value() - relative_entropy(rho_b, sigma_b).value() + 1e-8,
              "D(AB) >= D(B)");
  return out;
}

TrialOutcome block_property(std::size_t, Rng& rng) {
  TrialOutcome out;
  const std::size_t n = 2 + rng.index(3), dim = 2 + rng.index(2);
  const auto r = random_simplex(n, rng), s = random_simplex(n, rng);
  std::vector<HermitianOperator> rb, sb;
  double expected = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const auto lam = random_density(dim, 1 + rng.index(dim), rng);
    const auto mu = random_density(dim, dim, rng);
    expected += r[x] * relative_entropy(lam, mu).value() + r[x] * std::log2(r[x] / s[x]);
    rb.push_back(lam.op() * r[x]);
    sb.push_back(mu.op() * s[x]);
  }
  const CqState rho({"X"}, {n}, dim, rb), sigma({"X"}, {n}, dim, sb);
  const double dense = relative_entropy(DensityOperator(rho.to_dense()), DensityOperator(sigma.to_dense())).value();
  const double blockwise = relative_entropy(rho, sigma).value();
  out.require(1e-8 - std::abs(dense - expected), "dense D vs sum_x r D + D(r||s)");
  out.require(1e-8 - std::abs(blockwise - expected), "blockwise D vs sum_x r D + D(r||s)");
  return out;
}

TrialOutcome log_frechet_fd(std::size_t, Rng& rng) {
  TrialOutcome out;
  const std::size_t dim = 2 + rng.index(3);
  // Keep the spectrum away from zero so the central difference stays inside
  // the cone.
  const HermitianOperator sigma =
      random_density(dim, dim, rng).op() * 0.8 + HermitianOperator::identity(dim) * (0.2 / static_cast<double>(dim));
  const HermitianOperator h = random_hermitian(dim, rng) * (1.0 / static_cast<double>(dim));
  const double eps = 1e-5;
  const HermitianOperator fd =
      (log2_full(sigma + h * eps) - log2_full(sigma - h * eps)) * (1.0 / (2.0 * eps));
  const HermitianOperator exact = log_frechet_apply(sigma, h);
  const double rel = (fd - exact).matrix().frobenius_norm() / exact.matrix().frobenius_norm();
  out.require(1e-4 - rel, "log Frechet derivative vs central difference");
  return out;
}

// ---------------------------------------------------------------------------
// assemblage

RestrictedOpShape op_shape(const Assemblage& a, Rng& rng) {
  RestrictedOpShape s;
  s.n_inputs = a.n_inputs();
  s.n_outcomes = a.n_outcomes();
  s.dim_b = a.dim_b();
  s.n_final_inputs = 2 + rng.index(2);
  s.n_final_outcomes = 2 + rng.index(2);
  s.n_branches = 1 + rng.index(3);
  s.output_dim = std::max<std::size_t>(1 + rng.index(a.dim_b()), (a.dim_b() + s.n_branches - 1) / s.n_branches);
  return s;
}

TrialOutcome restricted_op_validity(std::size_t, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const auto shape = op_shape(a, rng);
  const auto op = random_restricted_op(shape, rng);
  const auto w = apply_restricted_1wlocc(a, op, shape.n_final_inputs, shape.n_final_outcomes);
  out.require(1e-9 - w.no_signaling_residual(), "output no-signaling");
  return out;
}

TrialOutcome identity_strategy_embedding(std::size_t, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const ProbabilityVector p(random_simplex(a.n_inputs(), rng));
  const auto direct = embed_cq(a, p);
  const auto via = apply_measurement_strategy(a, MeasurementStrategy::trivial(p, a.dim_b()));
  double diff = 0.0;
  for (std::size_t i = 0; i < direct.n_blocks(); ++i) diff = std::max(diff, max_abs_diff(direct.block(i), via.block(i)));
  out.require(-diff, "identity strategy reproduces embed_cq");
  return out;
}

TrialOutcome state_no_signaling(std::size_t, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  out.require(1e-12 - a.no_signaling_residual(), "no-signaling residual of assemblage_from_state");
  return out;
}

TrialOutcome composition(std::size_t, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const auto s1 = op_shape(a, rng);
  const auto op1 = random_restricted_op(s1, rng);
  RestrictedOpShape s2;
  s2.n_inputs = s1.n_final_inputs;
  s2.n_outcomes = s1.n_final_outcomes;
  s2.dim_b = s1.output_dim;
  s2.n_final_inputs = 2 + rng.index(2);
  s2.n_final_outcomes = 2 + rng.index(2);
  s2.n_branches = 1 + rng.index(2);
  s2.output_dim = std::max<std::size_t>(1 + rng.index(2), (s2.dim_b + s2.n_branches - 1) / s2.n_branches);
  const auto op2 = random_restricted_op(s2, rng);
  const auto step = apply_restricted_1wlocc(apply_restricted_1wlocc(a, op1, s1.n_final_inputs, s1.n_final_outcomes),
                                            op2, s2.n_final_inputs, s2.n_final_outcomes);
  const auto direct = apply_restricted_1wlocc(a, compose(op1, op2), s2.n_final_inputs, s2.n_final_outcomes);
  double diff = 0.0;
  for (std::size_t i = 0; i < step.elements().size(); ++i) {
    diff = std::max(diff, max_abs_diff(step.elements()[i], direct.elements()[i]));
  }
  out.require(1e-10 - diff, "sequential vs composed operation");
  return out;
}

// ---------------------------------------------------------------------------
// lhs

TrialOutcome lhs_soundness(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const Shape s = desk_shape(rng);
  const auto a = lhs_assemblage(random_lhs_model(s.nx, s.na, s.d, rng));
  const auto f = lhs_feasibility(a);
  out.require(f.feasible ? 1e-7 - f.residual : -1.0, "constructed LHS assemblage reported feasible");
  const auto inner = inner_inf_relative_entropy(a, ProbabilityVector::uniform(s.nx), inner_options(cfg));
  out.require(1e-5 - inner.value, "inner value zero on LHS");
  const auto r = solve_rres(a, cfg, out);
  out.require(1e-3 - r.hi, "restricted_res hi on LHS");
  return out;
}

TrialOutcome fw_monotone_descent(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const ProbabilityVector p(random_simplex(a.n_inputs(), rng));
  double prev = kInf;
  auto opts = inner_options(cfg);
  opts.observer = [&](const FrankWolfeIterate& it) {
    out.require(prev - it.objective + 1e-12, "objective non-increasing");
    out.require(it.gap, "gap nonnegative");
    prev = it.objective;
  };
  inner_inf_relative_entropy(a, p, opts);
  return out;
}

TrialOutcome certificate_soundness(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const ProbabilityVector p(random_simplex(a.n_inputs(), rng));
  const auto r = inner_inf_relative_entropy(a, p, inner_options(cfg));
  const auto program = DivergenceProgram::restricted(a);
  for (int k = 0; k < 20; ++k) {
    // Half the samples are perturbations of the solver's own model.
    LhsModel m = random_lhs_model(a.n_inputs(), a.n_outcomes(), a.dim_b(), rng);
    if (k % 2 == 1) {
      const double w = 0.05 * rng.uniform();
      std::vector<HermitianOperator> s;
      for (std::size_t l = 0; l < m.n_strategies(); ++l) s.push_back(r.model.sigma(l) * (1.0 - w) + m.sigma(l) * w);
      m = LhsModel(a.n_inputs(), a.n_outcomes(), a.dim_b(), std::move(s));
    }
    const double f = program_value(program, p.values(), m.sigmas());
    if (std::isinf(f)) continue;
    out.require(f - (r.value - r.gap) + 1e-12, "value - gap <= f(m')");
  }
  out.require(r.gap, "gap nonnegative");
  return out;
}

TrialOutcome pinsker_iterates(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  for (int run = 0; run < 2; ++run) {
    const ProbabilityVector p =
        run == 0 ? ProbabilityVector::uniform(a.n_inputs()) : ProbabilityVector(random_simplex(a.n_inputs(), rng));
    auto opts = inner_options(cfg);
    opts.observer = [&](const FrankWolfeIterate& it) {
      if (it.iteration > 40 && it.iteration % 25 != 0) return;
      const LhsModel m(a.n_inputs(), a.n_outcomes(), a.dim_b(), it.sigma_lams);
      out.require(pinsker_slack(a, m, p) + 1e-8, "pointwise Pinsker at iterate");
    };
    inner_inf_relative_entropy(a, p, opts);
  }
  return out;
}

TrialOutcome outcome_relabel_symmetry(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  std::vector<std::size_t> perm(a.n_outcomes());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
  std::vector<HermitianOperator> el;
  for (std::size_t x = 0; x < a.n_inputs(); ++x) {
    for (std::size_t b = 0; b < a.n_outcomes(); ++b) el.push_back(a.element(x, perm[b]));
  }
  const Assemblage permuted(a.n_inputs(), a.n_outcomes(), a.dim_b(), std::move(el));
  const auto p = ProbabilityVector::uniform(a.n_inputs());
  const double v1 = inner_inf_relative_entropy(a, p, inner_options(cfg)).value;
  const double v2 = inner_inf_relative_entropy(permuted, p, inner_options(cfg)).value;
  out.require(2.0 * cfg.inner_tol - std::abs(v1 - v2), "inner value invariant under outcome relabeling");
  return out;
}

// ---------------------------------------------------------------------------
// quantifiers

TrialOutcome minimax_overlap(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const auto r = solve_rres(a, cfg, out);
  const auto e = restricted_res_exchanged(a, cfg.rres);
  out.chain_margins.push_back(bound_chain_margin(a, e));
  out.require(e.hi + 2e-3 - r.lo, "sup-inf lo <= inf-sup hi + 2e-3");
  out.require(r.hi + 2e-3 - e.lo, "inf-sup lo <= sup-inf hi + 2e-3");
  return out;
}

TrialOutcome restricted_monotonicity(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const auto shape = op_shape(a, rng);
  const auto op = random_restricted_op(shape, rng);
  const auto w = apply_restricted_1wlocc(a, op, shape.n_final_inputs, shape.n_final_outcomes);
  const auto before = solve_rres(a, cfg, out);
  const auto after = solve_rres(w, cfg, out);
  out.require(before.hi + 1e-3 - after.lo, "lo(after) <= hi(before) + 1e-3");
  return out;
}

TrialOutcome convexity_restricted(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const Shape s = desk_shape(rng);
  const auto a1 = random_assemblage(s.nx, s.na, s.d, rng);
  const auto a2 = random_assemblage(s.nx, s.na, s.d, rng);
  const auto r1 = solve_rres(a1, cfg, out);
  const auto r2 = solve_rres(a2, cfg, out);
  for (double lam : {0.25, 0.5, 0.75}) {
    const auto rm = solve_rres(mix(a1, a2, lam), cfg, out);
    out.require(lam * r1.hi + (1.0 - lam) * r2.hi + 1e-3 - rm.lo, "lo(mix) <= lam hi1 + (1 - lam) hi2 + 1e-3");
  }
  return out;
}

TrialOutcome convexity_fixed_strategy(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const Shape s = desk_shape(rng);
  const auto a1 = random_assemblage(s.nx, s.na, s.d, rng);
  const auto a2 = random_assemblage(s.nx, s.na, s.d, rng);
  const auto strat = random_strategy(a1, rng);
  FrankWolfeOptions fw;
  fw.tolerance = cfg.inner_tol;
  auto solve = [&](const Assemblage& a) {
    const auto program = DivergenceProgram::for_strategy(a, strat);
    return minimize_divergence(program, Scalarization::linear({1.0}), LhsModel::uniform(a).sigmas(), fw);
  };
  const auto f1 = solve(a1), f2 = solve(a2);
  for (double lam : {0.25, 0.5, 0.75}) {
    const auto fm = solve(mix(a1, a2, lam));
    out.require(lam * f1.objective + (1.0 - lam) * f2.objective + 1e-9 - (fm.objective - fm.gap),
                "fixed-strategy divergence convex in the assemblage");
  }
  return out;
}

TrialOutcome continuity(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const Shape s = desk_shape(rng);
  const auto a1 = random_assemblage(s.nx, s.na, s.d, rng);
  const auto a3 = random_assemblage(s.nx, s.na, s.d, rng);
  const double w = 0.01 + 0.09 * rng.uniform();
  const auto a2 = mix(a3, a1, w);
  const auto rep = continuity_bound_check(a1, a2, cfg.rres);
  out.chain_margins.push_back(bound_chain_margin(a1, rep.first));
  out.chain_margins.push_back(bound_chain_margin(a2, rep.second));
  out.require(rep.margin + 1e-9, "|R(a1) - R(a2)| <= eps log2 min(|A|,|B|) + g(eps)");
  return out;
}

TrialOutcome faithfulness(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const Shape s = desk_shape(rng);
  Assemblage a = random_assemblage(s.nx, s.na, s.d, rng);
  const std::size_t kind = rng.index(3);
  if (kind == 1) a = lhs_assemblage(random_lhs_model(s.nx, s.na, s.d, rng));
  if (kind == 2) a = random_assemblage(1, s.na, s.d, rng);
  const auto rep = faithfulness_check(a, cfg.rres);
  out.chain_margins.push_back(bound_chain_margin(a, rep.rres));
  out.require(rep.pinsker_slack + 1e-8, "Pinsker at the inner solution");
  out.require(rep.small_implies_feasible ? 0.0 : -1.0, "hi <= 1e-4 implies LHS feasible");
  out.require(rep.feasible_implies_small ? 0.0 : -1.0, "LHS feasible implies hi <= 1e-3");
  return out;
}

TrialOutcome trace_distance_metric(std::size_t, Rng& rng) {
  TrialOutcome out;
  const Shape s = desk_shape(rng);
  const auto a = random_assemblage(s.nx, s.na, s.d, rng);
  const auto b = random_assemblage(s.nx, s.na, s.d, rng);
  // The third point sometimes sits close to the first.
  const auto c = rng.uniform() < 0.5 ? random_assemblage(s.nx, s.na, s.d, rng) : mix(b, a, 0.1 * rng.uniform());
  const double ab = restricted_trace_distance(a, b), ba = restricted_trace_distance(b, a);
  const double ac = restricted_trace_distance(a, c), cb = restricted_trace_distance(c, b);
  out.require(ab, "nonnegative");
  out.require(ab <= 1.0 + 1e-12 ? 0.0 : -1.0, "at most one");
  out.require(1e-9 - restricted_trace_distance(a, a), "zero on identical inputs");
  out.require(a == b ? 0.0 : ab - 1e-9, "positive on distinct inputs");
  out.require(ab == ba ? 0.0 : -1.0, "symmetric");
  out.require(ac + cb + 1e-9 - ab, "triangle inequality");
  const std::vector<MeasurementStrategy> strategies = {random_strategy(a, rng), random_strategy(a, rng)};
  const double lab = trace_distance_lower_bound(a, b, strategies), lba = trace_distance_lower_bound(b, a, strategies);
  out.require(lab == lba ? 0.0 : -1.0, "strategy functional symmetric");
  for (const auto& st : strategies) {
    out.require(strategy_trace_distance(a, c, st) + strategy_trace_distance(c, b, st) + 1e-9 -
                    strategy_trace_distance(a, b, st),
                "strategy functional triangle inequality");
  }
  return out;
}

TrialOutcome g_eps_monotone(std::size_t, Rng&) {
  TrialOutcome out;
  out.require(1e-15 - std::abs(g_eps(0.0)), "g(0) = 0");
  out.require(1e-12 - std::abs(g_eps(1.0) - 2.0), "g(1) = 2");
  double prev = g_eps(0.0);
  for (int k = 1; k <= 100; ++k) {
    const double g = g_eps(k / 100.0);
    out.require(g - prev, "g non-decreasing");
    prev = g;
  }
  return out;
}

TrialOutcome full_bounds_consistency(const PropertyConfig& cfg, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const auto inner = inner_options(cfg);
  for (int k = 0; k < 2; ++k) {
    const auto st = random_strategy(a, rng);
    const double lo = res_lower_bound_full(a, {st}, inner);
    const double info = upper_bound_full(a, {st}).strategy_information;
    out.require(info + 1e-6 - lo, "strategy lower bound <= I(XB'Y; A)");
  }
  const auto r = solve_rres(a, cfg, out);
  const ProbabilityVector best(r.diagnostics.best_p);
  const double trivial = res_lower_bound_full(a, {MeasurementStrategy::trivial(best, a.dim_b())}, inner);
  out.require(trivial - (r.lo - 2.0 * cfg.inner_tol), "trivial strategy reproduces restricted lo");
  out.require(r.hi + 1e-6 - trivial, "trivial strategy below restricted hi");
  const MeasurementStrategy discard(StochasticMatrix(a.dim_b(), a.n_inputs(),
                                                     std::vector<double>(a.dim_b() * a.n_inputs(),
                                                                         1.0 / static_cast<double>(a.n_inputs()))),
                                    Instrument::basis_measurement(a.dim_b()));
  out.require(1e-6 - res_lower_bound_full(a, {discard}, inner), "classical data alone has an LHS explanation");
  const auto ub = upper_bound_full(a, {});
  out.require(ub.log_outcomes + 1e-12 - ub.value(), "full bound at most log2 |A|");
  return out;
}

// ---------------------------------------------------------------------------
// harness and cli

TrialOutcome generator_invariants(std::size_t, Rng& rng) {
  TrialOutcome out;
  const std::size_t dim = 1 + rng.index(4);
  const auto pure = random_density(dim, 1, rng);
  out.require(1e-9 - von_neumann_entropy(pure), "rank-one state is pure");
  const auto povm = random_povm(dim, 2 + rng.index(3), rng, rng.index(dim + 1));
  HermitianOperator sum = HermitianOperator::zeros(dim);
  for (const auto& e : povm.outcomes()) sum += e;
  out.require(1e-10 - max_abs_diff(sum, HermitianOperator::identity(dim)), "POVM completeness");
  const std::size_t nb = 1 + rng.index(3);
  const auto inst = random_instrument(dim, std::max<std::size_t>(dim, 1 + rng.index(3)), nb, rng);
  ComplexMatrix tp(dim, dim);
  for (const auto& br : inst.branches()) {
    for (const auto& k : br) tp += k.adjoint() * k;
  }
  out.require(1e-9 - (tp - ComplexMatrix::identity(dim)).max_abs(), "instrument trace preservation");
  const auto a = random_desk_assemblage(rng);
  out.require(1e-9 - a.no_signaling_residual(), "random assemblage valid");
  const auto op = random_restricted_op(op_shape(a, rng), rng);
  out.require(op.n_inputs() == a.n_inputs() ? 0.0 : -1.0, "restricted op shape");
  return out;
}

TrialOutcome seed_reproducibility(std::size_t, Rng& rng) {
  TrialOutcome out;
  Rng r1 = rng.split(1), r2 = rng.split(1);
  const auto a = random_desk_assemblage(r1);
  const auto b = random_desk_assemblage(r2);
  out.require(a == b ? 0.0 : -1.0, "identical seed gives identical assemblage");
  return out;
}

TrialOutcome json_roundtrip(std::size_t, Rng& rng) {
  TrialOutcome out;
  const auto a = random_desk_assemblage(rng);
  const std::string text = assemblage_to_json(a);
  const Assemblage back = assemblage_from_json(text);
  out.require(back == a ? 0.0 : -1.0, "deserialized assemblage bit-identical");
  out.require(assemblage_to_json(back) == text ? 0.0 : -1.0, "serialization stable");
  return out;
}

using SimpleTrial = TrialOutcome (*)(std::size_t, Rng&);
using ConfiguredTrial = TrialOutcome (*)(const PropertyConfig&, Rng&);

PropertyCheck simple(std::string name, std::string area, SimpleTrial fn) {
  return {name, std::move(area),
          [name, fn](const PropertyConfig& cfg, const Rng& rng, std::size_t threads, std::vector<double>* chain) {
            return run_property(name, cfg.trials, rng, fn, threads, chain);
          }};
}

PropertyCheck configured(std::string name, std::string area, ConfiguredTrial fn) {
  return {name, std::move(area),
          [name, fn](const PropertyConfig& cfg, const Rng& rng, std::size_t threads, std::vector<double>* chain) {
            return run_property(
                name, cfg.trials, rng, [&cfg, fn](std::size_t, Rng& r) { return fn(cfg, r); }, threads, chain);
          }};
}

}  // namespace

const std::vector<PropertyCheck>& property_checks() {
  static const std::vector<PropertyCheck> checks = {
      simple("eig_reconstruction", "linalg", eig_reconstruction),
      simple("klein_inequality", "linalg", klein_inequality),
      simple("data_processing_partial_trace", "linalg", data_processing),
      simple("block_property", "linalg", block_property),
      simple("log_frechet_finite_difference", "linalg", log_frechet_fd),
      simple("restricted_op_validity", "assemblage", restricted_op_validity),
      simple("identity_strategy_embedding", "assemblage", identity_strategy_embedding),
      simple("state_no_signaling", "assemblage", state_no_signaling),
      simple("composition", "assemblage", composition),
      configured("lhs_soundness", "lhs", lhs_soundness),
      configured("fw_monotone_descent", "lhs", fw_monotone_descent),
      configured("certificate_soundness", "lhs", certificate_soundness),
      configured("pinsker_iterates", "lhs", pinsker_iterates),
      configured("outcome_relabel_symmetry", "lhs", outcome_relabel_symmetry),
      configured("minimax_overlap", "quantifiers", minimax_overlap),
      configured("restricted_monotonicity", "quantifiers", restricted_monotonicity),
      configured("convexity_restricted", "quantifiers", convexity_restricted),
      configured("convexity_fixed_strategy", "quantifiers", convexity_fixed_strategy),
      configured("continuity", "quantifiers", continuity),
      configured("faithfulness", "quantifiers", faithfulness),
      simple("trace_distance_metric", "quantifiers", trace_distance_metric),
      simple("g_eps_monotone", "quantifiers", g_eps_monotone),
      configured("full_bounds_consistency", "quantifiers", full_bounds_consistency),
      simple("generator_invariants", "harness", generator_invariants),
      simple("seed_reproducibility", "harness", seed_reproducibility),
      simple("json_roundtrip", "cli", json_roundtrip),
  };
  return checks;
}

const PropertyCheck& find_property(const std::string& name) {
  for (const auto& c : property_checks()) {
    if (c.name == name) return c;
  }
  throw DomainError("unknown property: " + name);
}

bool SuiteReport::passed() const noexcept {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed(); });
}

SuiteReport run_suite(const SuiteConfig& config) {
  SuiteReport report;
  report.seed = config.seed;
  report.trials = config.trials;
  if (config.trials == 0) return report;
  for (const auto& name : config.only) find_property(name);
  const Rng root(config.seed);
  PropertyConfig pc;
  pc.trials = config.trials;
  pc.rres = config.rres;
  pc.inner_tol = config.rres.inner_tol;
  std::vector<double> chain;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& check : property_checks()) {
    if (!config.only.empty() && std::find(config.only.begin(), config.only.end(), check.name) == config.only.end()) {
      continue;
    }
    report.properties.push_back(check.run(pc, root, config.threads, &chain));
  }
  // Every restricted_res solve above contributed one bound-chain check.
  PropertyResult agg;
  agg.name = "bound_chain";
  agg.trials = chain.size();
  agg.checks = chain.size();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!agg.worst_margin || chain[i] < *agg.worst_margin) agg.worst_margin = chain[i];
    if (chain[i] < 0.0) {
      ++agg.failures;
      if (agg.first_failure.empty()) agg.first_failure = "solve " + std::to_string(i) + ": chain out of order";
    }
  }
  agg.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (agg.trials > 0) report.properties.push_back(std::move(agg));
  return report;
}

std::string suite_report_to_json(const SuiteReport& report, bool include_timing, int indent) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["seed"] = report.seed;
  doc["trials"] = report.trials;
  doc["passed"] = report.passed();
  ordered_json props = ordered_json::array();
  for (const auto& p : report.properties) {
    ordered_json j;
    j["name"] = p.name;
    j["trials"] = p.trials;
    j["failures"] = p.failures;
    j["checks"] = p.checks;
    j["worst_margin"] = p.worst_margin ? ordered_json(*p.worst_margin) : ordered_json(nullptr);
    if (include_timing) j["runtime_seconds"] = p.seconds;
    if (!p.first_failure.empty()) j["first_failure"] = p.first_failure;
    props.push_back(std::move(j));
  }
  doc["properties"] = std::move(props);
  return doc.dump(indent);
}

}  // namespace steer
