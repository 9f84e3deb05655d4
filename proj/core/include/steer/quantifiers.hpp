#pragma once

// Steering quantifiers built on the LHS solvers. Every optimized quantity is
// reported as a certified bracket [lo, hi]; nothing here claims an exact
// optimum.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "steer/assemblage.hpp"
#include "steer/lhs.hpp"

namespace steer {

struct IntervalDiagnostics {
  std::size_t outer_iterations = 0;   // multiplicative-weights steps
  std::size_t inner_iterations = 0;   // total Frank-Wolfe iterations over all solves
  std::size_t solves = 0;
  double lo_gap = 0.0;                // certificate gap of the solve that produced lo
  std::vector<double> best_p;         // input distribution that produced lo
  std::vector<double> stage_hi;       // hi after each smoothing stage
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  IntervalDiagnostics diagnostics;

  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
};

struct RresOptions {
  double inner_tol = 1e-5;
  std::size_t outer_iterations = 200;
  // Iteration budget of each warm-started probe during the ascent.
  std::size_t probe_iterations = 15;
  std::size_t inner_max_iterations = 5000;
  std::vector<double> betas{10.0, 30.0, 100.0, 300.0, 1000.0};
  std::size_t strategy_cap = kDefaultStrategyCap;
};

// sup_{p_X} inf_{LHS} D(rho_{XAB} || sigma_{XAB}) in bits.
// lo: best certified inner lower bound over the probed p_X (multiplicative
// weights ascent plus final tight solves); hi: smallest max_x d_x(sigma) over
// candidate models (valid because the two optimization orders agree).
// Throws DomainError on invalid options, SolverFailure on an inverted bracket.
Interval restricted_res(const Assemblage& assemblage, const RresOptions& options = {});

// inf_{LHS} max_x d_x(sigma) computed in that order only, through an
// annealed log-sum-exp smoothing. lo comes from the smoothed certificate
// and from weak duality at the softmax weights.
Interval restricted_res_exchanged(const Assemblage& assemblage, const RresOptions& options = {});

// max over the given strategies of the certified lower bound on
// inf_{LHS} D(rho_{XAB'Y} || sigma_{XAB'Y}).
double res_lower_bound_full(const Assemblage& assemblage, const std::vector<MeasurementStrategy>& strategies,
                            const InnerSolveOptions& options = {});

struct FullUpperBound {
  double strategy_information = 0.0;  // max over strategies of I(XB'Y; A)
  double sup_outcome_entropy = 0.0;   // sup_{p_X} H(A)
  double log_outcomes = 0.0;          // log2 |A|
  double value() const noexcept;      // the smallest of the three
};

FullUpperBound upper_bound_full(const Assemblage& assemblage, const std::vector<MeasurementStrategy>& strategies);

struct RestrictedUpperBound {
  double conditional_information = 0.0;  // sup_{p_X} I(A; B | X) = max_x I(A; B)_x
  double sup_outcome_entropy = 0.0;      // sup_{p_X} H(A)
  double entropy_b = 0.0;                // H(B)
  double log_dims = 0.0;                 // log2 min(|A|, d_B)
  double value() const noexcept { return conditional_information; }
};

// Computes every layer and checks their ordering within 1e-9 (throws
// InvariantError otherwise).
RestrictedUpperBound restricted_upper_bound(const Assemblage& assemblage);

// I(A; B) of sum_a |a><a| (x) rho^{a,x} for one input x.
double input_information(const Assemblage& assemblage, std::size_t x);
// sup_{p_X} H(sum_x p(x) p(.|x)) by projected gradient ascent, never below
// the best vertex.
double sup_outcome_entropy(const Assemblage& assemblage);

// (1/2) max_x sum_a ||rho^{a,x} - theta^{a,x}||_1
double restricted_trace_distance(const Assemblage& a1, const Assemblage& a2);

// (1/2) sum_{x,a,y} p(x|y) ||K_y(rho^{a,x} - theta^{a,x})||_1 for one strategy.
double strategy_trace_distance(const Assemblage& a1, const Assemblage& a2, const MeasurementStrategy& strategy);

// Max over the given strategies and the trivial strategy at uniform p_X.
double trace_distance_lower_bound(const Assemblage& a1, const Assemblage& a2,
                                  const std::vector<MeasurementStrategy>& strategies);

struct SeesawOptions {
  std::size_t starts = 10;
  std::size_t n_branches = 2;
  std::size_t rounds = 40;
  std::uint64_t seed = 0;
};

struct SeesawResult {
  double value = 0.0;
  std::vector<MeasurementStrategy> strategies;  // best strategy of every start
};

// Random-restart local search over single-Kraus instruments (output
// dimension d_B) with p(x|y) re-optimized exactly after each move.
SeesawResult seesaw_trace_distance(const Assemblage& a1, const Assemblage& a2, const SeesawOptions& options = {});

// g(eps) = (eps + 1) log2(eps + 1) - eps log2 eps, g(0) = 0. eps in [0, 1].
double g_eps(double eps);

struct ContinuityReport {
  double epsilon = 0.0;  // restricted trace distance
  double bound = 0.0;    // eps log2 min(|A|, d_B) + g(eps)
  Interval first;
  Interval second;
  // Certified lower bound on |R(first) - R(second)|.
  double difference_lower = 0.0;
  double margin = 0.0;  // bound - difference_lower
  bool pass = false;
};

ContinuityReport continuity_bound_check(const Assemblage& a1, const Assemblage& a2, const RresOptions& options = {});

// D(rho_cq || sigma_cq) - ||rho_cq - sigma_cq||_1^2 / (2 ln 2) for a model at p_X.
double pinsker_slack(const Assemblage& assemblage, const LhsModel& model, const ProbabilityVector& p_x);

struct FaithfulnessReport {
  double pinsker_divergence = 0.0;
  double pinsker_distance = 0.0;  // ||rho_cq - sigma_cq||_1
  double pinsker_slack = 0.0;
  Interval rres;
  FeasibilityReport feasibility;
  bool small_implies_feasible = true;  // hi <= 1e-4  =>  feasible
  bool feasible_implies_small = true;  // feasible  =>  hi <= 1e-3
  bool pass = false;
};

FaithfulnessReport faithfulness_check(const Assemblage& assemblage, const RresOptions& options = {});

}  // namespace steer
