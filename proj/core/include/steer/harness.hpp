#pragma once

// Property suite: every invariant of the library checked on seeded random
// instances. Each property runs independent trials; trial t of property P
// draws from Rng(seed).split(hash(P), t), so results do not depend on thread
// count or scheduling.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "steer/quantifiers.hpp"
#include "steer/random.hpp"

namespace steer {

// One trial. margin is the signed slack of the tightest assertion (negative
// means violated); checks counts the individual assertions evaluated.
struct TrialOutcome {
  double margin = std::numeric_limits<double>::infinity();
  std::size_t checks = 0;
  std::string failure;  // set when the trial failed
  // Slack of the bound chain for every restricted_res solve in this trial.
  std::vector<double> chain_margins;

  void require(double slack, const std::string& what);
};

struct PropertyResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t checks = 0;
  std::optional<double> worst_margin;  // empty when no trial ran
  double seconds = 0.0;
  std::string first_failure;
  bool passed() const noexcept { return failures == 0; }
};

using TrialFunction = std::function<TrialOutcome(std::size_t trial, Rng& rng)>;

// Worker count: STEERLIB_THREADS if set (>= 1), else hardware concurrency.
std::size_t default_thread_count();

// Runs `trials` trials on up to `threads` workers (0 = default_thread_count).
// Exceptions inside a trial count as failures.
PropertyResult run_property(const std::string& name, std::size_t trials, const Rng& rng, const TrialFunction& fn,
                            std::size_t threads = 0, std::vector<double>* chain_margins = nullptr);

struct PropertyConfig {
  std::size_t trials = 20;
  RresOptions rres{};
  double inner_tol = 1e-5;
};

// Named property checks. Each returns the aggregated result over `trials`
// trials; chain margins of all restricted_res solves are appended to
// `chain_margins` when given.
struct PropertyCheck {
  std::string name;
  std::string area;  // linalg, assemblage, lhs, quantifiers, harness, cli
  std::function<PropertyResult(const PropertyConfig&, const Rng&, std::size_t threads, std::vector<double>*)> run;
};

const std::vector<PropertyCheck>& property_checks();
const PropertyCheck& find_property(const std::string& name);

// Slack of hi <= I(A;B|X) + 1e-6 and of the ordering of the restricted chain.
double bound_chain_margin(const Assemblage& assemblage, const Interval& rres);

struct SuiteConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 20;      // per property
  std::size_t threads = 0;      // 0 = default_thread_count()
  bool include_timing = false;  // runtimes make reports differ run to run
  std::vector<std::string> only;  // subset of property names; empty = all
  RresOptions rres{};
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<PropertyResult> properties;
  bool passed() const noexcept;
};

// Runs every property plus the aggregated bound-chain property. trials = 0
// yields an empty passing report.
SuiteReport run_suite(const SuiteConfig& config);

std::string suite_report_to_json(const SuiteReport& report, bool include_timing, int indent = 2);

}  // namespace steer
