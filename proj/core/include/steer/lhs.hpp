#pragma once

// Local-hidden-state (LHS) models in deterministic-strategy form and the two
// solvers over the LHS set: a least-squares feasibility test and a
// Frank-Wolfe minimizer of relative entropy with a duality-gap certificate.
//
// An LHS model stores one subnormalized PSD operator sigma_lambda per
// deterministic response function lambda: X -> A; the hidden-variable weight
// is absorbed into the trace. The induced assemblage is
//   sigma^{a,x} = sum_{lambda : lambda(x) = a} sigma_lambda.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "steer/assemblage.hpp"
#include "steer/linalg.hpp"

namespace steer {

inline constexpr std::size_t kDefaultStrategyCap = 4096;

struct DeterministicStrategy {
  std::vector<std::size_t> response;  // response[x] = a
  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

// All |A|^|X| strategies in lexicographic order of (lambda(0), lambda(1), ...).
// Throws DomainError when the count exceeds `cap`.
std::vector<DeterministicStrategy> enumerate_strategies(std::size_t n_inputs, std::size_t n_outcomes,
                                                        std::size_t cap = kDefaultStrategyCap);

// Number of strategies, or throws DomainError above `cap`.
std::size_t strategy_count(std::size_t n_inputs, std::size_t n_outcomes,
                           std::size_t cap = kDefaultStrategyCap);

// lambda(x) for the strategy with lexicographic index `lambda`.
std::size_t strategy_response(std::size_t lambda, std::size_t x, std::size_t n_inputs,
                              std::size_t n_outcomes);

class LhsModel {
 public:
  // Each sigma_lambda PSD within -1e-10, total trace 1 within 1e-9.
  LhsModel(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b,
           std::vector<HermitianOperator> sigma_lams);

  // sigma_lambda = rho_B / |Lambda|.
  static LhsModel uniform(const Assemblage& assemblage);
  // sigma_lambda = rho_B prod_x p(lambda(x)|x); reproduces p(a|x) rho_B.
  static LhsModel product(const Assemblage& assemblage);

  std::size_t n_inputs() const noexcept { return n_inputs_; }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }
  std::size_t dim_b() const noexcept { return dim_b_; }
  std::size_t n_strategies() const noexcept { return sigma_lams_.size(); }
  const HermitianOperator& sigma(std::size_t lambda) const { return sigma_lams_[lambda]; }
  const std::vector<HermitianOperator>& sigmas() const noexcept { return sigma_lams_; }

 private:
  std::size_t n_inputs_;
  std::size_t n_outcomes_;
  std::size_t dim_b_;
  std::vector<HermitianOperator> sigma_lams_;
};

// The elements sigma^{a,x} (x-major) induced by per-strategy operators.
std::vector<HermitianOperator> induced_elements(std::size_t n_inputs, std::size_t n_outcomes,
                                                std::size_t dim_b,
                                                const std::vector<HermitianOperator>& sigma_lams);

Assemblage lhs_assemblage(const LhsModel& model);

// ---------------------------------------------------------------------------
// Feasibility

enum class FeasibilityStatus { kFeasible, kInfeasible, kInconclusive };

struct FeasibilityOptions {
  double feas_tol = 1e-6;
  // Iterate until the residual drops below this (or infeasibility is certified).
  double target_residual = 1e-9;
  std::size_t max_iterations = 20000;
  std::size_t strategy_cap = kDefaultStrategyCap;
};

struct FeasibilityReport {
  FeasibilityStatus status = FeasibilityStatus::kInconclusive;
  bool feasible = false;
  // sum_{x,a} ||sigma^{a,x} - rho^{a,x}||_1 at the final iterate.
  double residual = 0.0;
  // <G, rho> - max_{LHS} <G, sigma> for the residual direction G. Positive
  // values certify that the assemblage is not LHS. This is a diagnostic built
  // from the last iterate, not an optimal dual certificate.
  double witness_value = 0.0;
  std::size_t iterations = 0;
  std::optional<LhsModel> model;  // present when feasible
};

// Minimizes sum_{x,a} ||sum_lambda delta_{a,lambda(x)} sigma_lambda - rho^{a,x}||_F^2
// over sigma_lambda >= 0 by accelerated projected gradient.
FeasibilityReport lhs_feasibility(const Assemblage& assemblage, const FeasibilityOptions& options = {});

// max over normalized LHS assemblages of sum_{x,a} Tr(G^{a,x} sigma^{a,x}),
// i.e. max_lambda lambda_max(sum_x G^{lambda(x),x}). `g` is x-major.
double lhs_support_function(std::size_t n_inputs, std::size_t n_outcomes,
                            const std::vector<HermitianOperator>& g);

// ---------------------------------------------------------------------------
// Relative-entropy programs over the LHS set

// A block k of a classical-quantum comparison: the divergence term
//   weight * [Tr rho_k log rho_k - Tr rho_k log K_branch(sigma^{a,x})]
// contributes to scalarization group `group`.
struct DivergenceBlock {
  std::size_t group = 0;
  std::size_t x = 0;
  std::size_t a = 0;
  std::size_t branch = 0;
  double weight = 1.0;
  HermitianOperator rho;
  double rho_log_rho = 0.0;
};

class DivergenceProgram {
 public:
  // Groups are the inputs x; block (x, a) has weight 1 and identity map, so
  // group x evaluates d_x(sigma) = sum_a D(rho^{a,x} || sigma^{a,x}).
  static DivergenceProgram restricted(const Assemblage& assemblage,
                                      std::size_t strategy_cap = kDefaultStrategyCap);
  // A single group: D(rho_{XAB'Y} || sigma_{XAB'Y}) for one measurement
  // strategy, blocks weighted by p(x|y).
  static DivergenceProgram for_strategy(const Assemblage& assemblage, const MeasurementStrategy& strategy,
                                        std::size_t strategy_cap = kDefaultStrategyCap);

  std::size_t n_inputs() const noexcept { return n_inputs_; }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }
  std::size_t dim_b() const noexcept { return dim_b_; }
  std::size_t n_strategies() const noexcept { return n_strategies_; }
  std::size_t n_groups() const noexcept { return n_groups_; }
  const std::vector<DivergenceBlock>& blocks() const noexcept { return blocks_; }
  const std::optional<Instrument>& instrument() const noexcept { return instrument_; }
  const Assemblage& assemblage() const noexcept { return assemblage_; }

  // K_branch applied to an induced element (identity when no instrument).
  HermitianOperator map_block(const DivergenceBlock& block, const HermitianOperator& element) const;
  HermitianOperator map_block_adjoint(const DivergenceBlock& block, const HermitianOperator& h) const;

  // Per-group divergences at the given model (bits). Any infinite block
  // makes the group infinite.
  std::vector<ExtendedReal> group_values(const std::vector<HermitianOperator>& sigma_lams) const;

 private:
  DivergenceProgram(const Assemblage& assemblage, std::size_t cap);

  Assemblage assemblage_;
  std::size_t n_inputs_;
  std::size_t n_outcomes_;
  std::size_t dim_b_;
  std::size_t n_strategies_;
  std::size_t n_groups_ = 0;
  std::vector<DivergenceBlock> blocks_;
  std::optional<Instrument> instrument_;
};

// How per-group divergences d_g combine into the minimized objective.
struct Scalarization {
  enum class Kind { kLinear, kLogSumExp };
  Kind kind = Kind::kLinear;
  std::vector<double> weights;  // kLinear: sum_g w_g d_g
  double beta = 1.0;            // kLogSumExp: (1/beta) ln sum_g exp(beta d_g), beta in 1/bits

  static Scalarization linear(std::vector<double> w) { return {Kind::kLinear, std::move(w), 1.0}; }
  static Scalarization log_sum_exp(double beta) { return {Kind::kLogSumExp, {}, beta}; }

  double value(const std::vector<double>& d) const;
  // d(objective)/d(d_g)
  std::vector<double> gradient(const std::vector<double>& d) const;
};

struct FrankWolfeIterate {
  std::size_t iteration;
  double objective;
  double gap;
  const std::vector<HermitianOperator>& sigma_lams;
};

struct FrankWolfeOptions {
  double tolerance = 1e-5;  // stop once gap <= tolerance (bits)
  std::size_t max_iterations = 5000;
  std::size_t line_search_iterations = 60;
  double max_step = 1.0 - 1e-9;
  // Before each Frank-Wolfe step, try a projected-gradient step and a
  // multiplicative step sigma <- M sigma M and take the better one.
  bool projected_steps = true;
  bool multiplicative_steps = true;
  // Heavy-ball momentum on the projected steps, restarted whenever a step is
  // rejected.
  bool momentum = true;
  std::function<void(const FrankWolfeIterate&)> observer;
};

struct FrankWolfeResult {
  double objective = 0.0;
  double gap = 0.0;  // objective - gap lower-bounds the infimum
  std::vector<HermitianOperator> sigma_lams;
  std::vector<double> group_values;
  std::vector<double> group_weights;  // scalarization gradient at the final iterate
  std::size_t iterations = 0;
  bool converged = false;
};

FrankWolfeResult minimize_divergence(const DivergenceProgram& program, const Scalarization& scalarization,
                                     const std::vector<HermitianOperator>& initial,
                                     const FrankWolfeOptions& options = {});

struct InnerSolveOptions {
  double tolerance = 1e-5;
  std::size_t max_iterations = 5000;
  std::size_t strategy_cap = kDefaultStrategyCap;
  std::optional<LhsModel> initial;  // defaults to LhsModel::uniform
  std::function<void(const FrankWolfeIterate&)> observer;
};

struct InnerSolveResult {
  double value = 0.0;  // objective at the returned model (upper bound, bits)
  double gap = 0.0;    // value - gap is a lower bound on the infimum
  LhsModel model;
  std::size_t iterations = 0;
  std::vector<double> per_input;  // d_x at the returned model
};

// inf over LHS of D(rho_{XAB} || sigma_{XAB}) for input distribution p_X.
InnerSolveResult inner_inf_relative_entropy(const Assemblage& assemblage, const ProbabilityVector& p_x,
                                            const InnerSolveOptions& options = {});

// sigma_{XAB} for a model and input distribution.
CqState embed_model(const LhsModel& model, const ProbabilityVector& p_x);

}  // namespace steer
