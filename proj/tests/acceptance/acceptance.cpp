// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// STEER_ACCEPTANCE_SEED overrides the seed (default 1).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "steer/harness.hpp"
#include "steer/lhs.hpp"
#include "steer/random.hpp"

using namespace steer;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::vector<double> chain;  // bound-chain slack of every restricted_res solve below

void report(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0.0 && secs > limit_seconds) {
    o.pass = false;
    o.detail += " [over the " + std::to_string(static_cast<int>(limit_seconds)) + " s budget]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string margin_text(const PropertyResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu trials, %zu checks, %zu failures, worst margin %.3g", r.trials, r.checks,
                r.failures, r.worst_margin.value_or(0.0));
  std::string s = buf;
  if (!r.first_failure.empty()) s += ", first: " + r.first_failure;
  return s;
}

PropertyResult run(const std::string& name, std::size_t trials, const Rng& root) {
  PropertyConfig cfg;
  cfg.trials = trials;
  return find_property(name).run(cfg, root, 0, &chain);
}

Outcome properties(const std::vector<std::string>& names, std::size_t trials, const Rng& root) {
  Outcome o{true, ""};
  for (const auto& n : names) {
    const auto r = run(n, trials, root);
    o.pass = o.pass && r.passed();
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += n + " " + margin_text(r);
  }
  return o;
}

bool feasible(double eta) { return lhs_feasibility(werner_assemblage(eta)).status == FeasibilityStatus::kFeasible; }

}  // namespace

int main() {
  std::uint64_t seed = 1;
  if (const char* env = std::getenv("STEER_ACCEPTANCE_SEED")) seed = std::strtoull(env, nullptr, 10);
  const Rng root(seed);
  std::printf("acceptance seed %llu\n", static_cast<unsigned long long>(seed));

  report(1, "linear-algebra invariants on 1000 instances", 30.0, [&] {
    return properties({"eig_reconstruction", "klein_inequality", "data_processing_partial_trace", "block_property",
                       "log_frechet_finite_difference"},
                      1000, root);
  });

  report(2, "LHS soundness on 200 constructed LHS assemblages", 300.0,
         [&] { return properties({"lhs_soundness"}, 200, root); });

  report(3, "Werner steerability transition", 120.0, [&] {
    Outcome o;
    const bool low = feasible(0.5);
    const bool high = feasible(0.9);
    double lo = 0.5, hi = 0.9;
    while (hi - lo > 0.01 + 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    o.pass = low && !high && lo >= 0.68 && hi <= 0.74;
    char buf[160];
    std::snprintf(buf, sizeof buf, "eta=0.5 %s, eta=0.9 %s, transition in [%.4f, %.4f]", low ? "feasible" : "not feasible",
                  high ? "feasible" : "infeasible", lo, hi);
    o.detail = buf;
    return o;
  });

  report(4, "minimax overlap on 50 assemblages", 0.0, [&] { return properties({"minimax_overlap"}, 50, root); });
  report(5, "restricted monotonicity on 100 pairs", 0.0,
         [&] { return properties({"restricted_monotonicity"}, 100, root); });
  report(6, "convexity on 50 pairs x 3 weights", 0.0, [&] { return properties({"convexity_restricted"}, 50, root); });
  report(7, "continuity on 50 perturbed pairs", 0.0, [&] { return properties({"continuity"}, 50, root); });

  report(8, "pointwise Pinsker at inner-solver iterates", 0.0, [&] {
    const auto r = run("pinsker_iterates", 20, root);
    Outcome o{r.passed() && r.checks >= 500, margin_text(r)};
    if (r.checks < 500) o.detail += " (fewer than 500 checks)";
    return o;
  });

  report(9, "bound chain on every restricted_res solve above", 0.0, [&] {
    Outcome o{!chain.empty(), ""};
    double worst = chain.empty() ? 0.0 : chain.front();
    std::size_t bad = 0;
    for (double m : chain) {
      worst = std::min(worst, m);
      if (m < 0.0) ++bad;
    }
    o.pass = o.pass && bad == 0;
    char buf[120];
    std::snprintf(buf, sizeof buf, "%zu solves, %zu out of order, worst margin %.3g", chain.size(), bad, worst);
    o.detail = buf;
    return o;
  });

  report(10, "suite reports byte-identical across two runs", 0.0, [&] {
    SuiteConfig cfg;
    cfg.seed = seed;
    cfg.trials = 2;
    const auto first = suite_report_to_json(run_suite(cfg), false);
    const auto second = suite_report_to_json(run_suite(cfg), false);
    return Outcome{first == second, std::to_string(first.size()) + " bytes, " + (first == second ? "identical" : "differ")};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
