#pragma once

// Assemblages {rho^{a,x}} on Bob's system, the measurement objects that
// produce and transform them, and the classical-quantum states they induce.
// Indices x, a, y, z are 0-based throughout.

#include <cstddef>
#include <string>
#include <vector>

#include "steer/linalg.hpp"

namespace steer {

// Nonnegative entries summing to 1 within 1e-12.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> p);
  static ProbabilityVector uniform(std::size_t n);
  static ProbabilityVector point_mass(std::size_t n, std::size_t at);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

// Row-stochastic matrix: entry (condition, outcome), rows sum to 1 within
// 1e-12.
class StochasticMatrix {
 public:
  StochasticMatrix(std::size_t n_conditions, std::size_t n_outcomes, std::vector<double> entries);
  static StochasticMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static StochasticMatrix identity(std::size_t n);

  std::size_t n_conditions() const noexcept { return rows_; }
  std::size_t n_outcomes() const noexcept { return cols_; }
  double operator()(std::size_t condition, std::size_t outcome) const {
    return p_[condition * cols_ + outcome];
  }
  const std::vector<double>& entries() const noexcept { return p_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> p_;
};

class Assemblage {
 public:
  // elements[x * n_outcomes + a]. Validates: every element PSD within
  // -1e-10, no-signaling within 1e-9 in trace norm, Tr sum_a = 1 within 1e-9.
  Assemblage(std::size_t n_inputs, std::size_t n_outcomes, std::size_t dim_b,
             std::vector<HermitianOperator> elements);

  std::size_t n_inputs() const noexcept { return n_inputs_; }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }
  std::size_t dim_b() const noexcept { return dim_b_; }
  const HermitianOperator& element(std::size_t x, std::size_t a) const {
    return elements_[x * n_outcomes_ + a];
  }
  const std::vector<HermitianOperator>& elements() const noexcept { return elements_; }

  // Largest trace-norm deviation of sum_a rho^{a,x} from sum_a rho^{a,0}.
  double no_signaling_residual() const;

  friend bool operator==(const Assemblage&, const Assemblage&) = default;

 private:
  std::size_t n_inputs_;
  std::size_t n_outcomes_;
  std::size_t dim_b_;
  std::vector<HermitianOperator> elements_;
};

// rho_B = sum_a rho^{a,x} (taken at x = 0).
DensityOperator reduced_state(const Assemblage& assemblage);
// p(a|x) = Tr rho^{a,x}, rows indexed by x.
StochasticMatrix conditional_probs(const Assemblage& assemblage);

class Povm {
 public:
  // Each element PSD and sum = I within 1e-10.
  explicit Povm(std::vector<HermitianOperator> outcomes);
  std::size_t n_outcomes() const noexcept { return outcomes_.size(); }
  std::size_t dim() const noexcept { return outcomes_.front().dim(); }
  const HermitianOperator& operator[](std::size_t a) const { return outcomes_[a]; }
  const std::vector<HermitianOperator>& outcomes() const noexcept { return outcomes_; }

 private:
  std::vector<HermitianOperator> outcomes_;
};

// Quantum instrument {K_z}: branch z has Kraus operators K_{z,t}
// (output_dim x input_dim); sum_{z,t} K^dagger K = I within 1e-9.
class Instrument {
 public:
  Instrument(std::size_t input_dim, std::size_t output_dim,
             std::vector<std::vector<ComplexMatrix>> branches);
  // One branch, K = I.
  static Instrument identity(std::size_t dim);
  // Measures in the computational basis and discards the system:
  // branch y has the single Kraus operator <y| (output dimension 1).
  static Instrument basis_measurement(std::size_t dim);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t n_branches() const noexcept { return branches_.size(); }
  const std::vector<ComplexMatrix>& kraus(std::size_t z) const { return branches_[z]; }
  const std::vector<std::vector<ComplexMatrix>>& branches() const noexcept { return branches_; }
  bool is_identity() const noexcept { return identity_; }

  // K_z(rho) = sum_t K rho K^dagger
  HermitianOperator apply(std::size_t z, const HermitianOperator& rho) const;
  // K_z^dagger(h) = sum_t K^dagger h K
  HermitianOperator apply_adjoint(std::size_t z, const HermitianOperator& h) const;

  // Branch-wise composition: (then o *this), branches ordered (z_first, z_then)
  // with z_then fastest.
  Instrument then(const Instrument& next) const;

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  std::vector<std::vector<ComplexMatrix>> branches_;
  bool identity_ = false;
};

// Classical-quantum state sum_c |c><c| (x) block(c) with the classical tuple
// c ranging over named registers (row-major, first register slowest).
class CqState {
 public:
  // Blocks PSD within -1e-10 and total trace 1 within 1e-9.
  CqState(std::vector<std::string> register_names, std::vector<std::size_t> register_sizes,
          std::size_t quantum_dim, std::vector<HermitianOperator> blocks);

  const std::vector<std::string>& register_names() const noexcept { return names_; }
  const std::vector<std::size_t>& register_sizes() const noexcept { return sizes_; }
  std::size_t quantum_dim() const noexcept { return quantum_dim_; }
  std::size_t n_blocks() const noexcept { return blocks_.size(); }
  const HermitianOperator& block(std::size_t flat) const { return blocks_[flat]; }
  const HermitianOperator& block(const std::vector<std::size_t>& tuple) const;
  const std::vector<HermitianOperator>& blocks() const noexcept { return blocks_; }
  std::size_t flat_index(const std::vector<std::size_t>& tuple) const;

  double trace() const;
  // Sum of all blocks.
  HermitianOperator quantum_marginal() const;
  // Keep the listed classical registers (and optionally the quantum one);
  // when the quantum register is dropped each block becomes its trace.
  CqState marginal(const std::vector<std::string>& keep, bool keep_quantum) const;
  // Entropy of the whole cq state, in bits.
  double entropy() const;
  // Dense (prod sizes * quantum_dim) matrix, classical registers first.
  HermitianOperator to_dense() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> sizes_;
  std::size_t quantum_dim_;
  std::vector<HermitianOperator> blocks_;
};

// Blockwise D(rho||sigma) via the direct-sum property. Registers must match.
ExtendedReal relative_entropy(const CqState& rho, const CqState& sigma);
// ||rho - sigma||_1 for matching layouts.
double trace_distance_norm(const CqState& rho, const CqState& sigma);
// I(first registers (+quantum); second registers) in bits.
double mutual_information(const CqState& state, const std::vector<std::string>& left,
                          bool left_has_quantum, const std::vector<std::string>& right);

// Strategy for Bob: instrument with branches y, then Alice picks x ~ p(x|y).
struct MeasurementStrategy {
  StochasticMatrix x_given_y;  // rows y, cols x
  Instrument instrument;       // branches y

  MeasurementStrategy(StochasticMatrix x_given_y, Instrument instrument);
  // Identity instrument and a single y with p(x|y) = p_X.
  static MeasurementStrategy trivial(const ProbabilityVector& p_x, std::size_t dim_b);
};

// Restricted one-way LOCC {p(x|x_f), p(a_f|a,x,x_f,z), K_z}.
class RestrictedOneWayLocc {
 public:
  // x_given_xf: rows x_f, cols x.
  // af_given: layout [a][x][x_f][z][a_f], each conditional normalized within 1e-12.
  RestrictedOneWayLocc(StochasticMatrix x_given_xf, std::size_t n_outcomes,
                       std::size_t n_final_outcomes, std::vector<double> af_given,
                       Instrument instrument);
  static RestrictedOneWayLocc identity(std::size_t n_inputs, std::size_t n_outcomes,
                                       std::size_t dim_b);

  std::size_t n_inputs() const noexcept { return x_given_xf_.n_outcomes(); }
  std::size_t n_final_inputs() const noexcept { return x_given_xf_.n_conditions(); }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }
  std::size_t n_final_outcomes() const noexcept { return n_final_outcomes_; }
  const StochasticMatrix& x_given_xf() const noexcept { return x_given_xf_; }
  const Instrument& instrument() const noexcept { return instrument_; }
  const std::vector<double>& af_table() const noexcept { return af_given_; }
  double af_given(std::size_t af, std::size_t a, std::size_t x, std::size_t xf, std::size_t z) const;

 private:
  StochasticMatrix x_given_xf_;
  std::size_t n_outcomes_;
  std::size_t n_final_outcomes_;
  std::vector<double> af_given_;
  Instrument instrument_;
};

// rho^{a,x}_B = Tr_A[(Lambda_a^{(x)} (x) I_B) rho_AB].
Assemblage assemblage_from_state(const DensityOperator& rho_ab, std::size_t dim_a, std::size_t dim_b,
                                 const std::vector<Povm>& povms);

// rho_{XAB} = sum p(x) |x><x| (x) |a><a| (x) rho^{a,x}; registers "X","A".
CqState embed_cq(const Assemblage& assemblage, const ProbabilityVector& p_x);

// rho_{XAB'Y} = sum p(x|y) [x] (x) [a] (x) K_y(rho^{a,x}) (x) [y];
// registers "X","A","Y".
CqState apply_measurement_strategy(const Assemblage& assemblage, const MeasurementStrategy& strat);

// omega^{a_f,x_f} = sum_{a,x,z} p(x|x_f) p(a_f|a,x,x_f,z) K_z(rho^{a,x}).
// Throws InvariantError if the output is not a valid assemblage.
Assemblage apply_restricted_1wlocc(const Assemblage& assemblage, const RestrictedOneWayLocc& op,
                                   std::size_t n_final_inputs, std::size_t n_final_outcomes);

// The single restricted operation equivalent to applying `first` and then
// `second`. The intermediate input is marginalized with Bayes' rule.
RestrictedOneWayLocc compose(const RestrictedOneWayLocc& first, const RestrictedOneWayLocc& second);

}  // namespace steer
