// steer: command-line front end for steerlib.
//
// Exit codes: 0 success / feasible, 1 malformed input or bad parameters,
// 2 infeasible (steerable) or failed suite, 3 inconclusive.

#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "steer/harness.hpp"
#include "steer/io.hpp"
#include "steer/quantifiers.hpp"
#include "steer/random.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kBadInput = 1;
constexpr int kInfeasible = 2;
constexpr int kInconclusive = 3;

steer::Assemblage load(const std::string& path) { return steer::assemblage_from_json(steer::read_text_file(path)); }

void emit(const ordered_json& doc, const std::string& out = "") {
  const std::string text = doc.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    steer::write_text_file(out, text);
  }
}

ordered_json interval_json(const steer::Interval& r) {
  ordered_json j;
  j["lo"] = r.lo;
  j["hi"] = r.hi;
  j["width"] = r.width();
  const auto& d = r.diagnostics;
  j["diagnostics"] = {{"outer_iterations", d.outer_iterations}, {"inner_iterations", d.inner_iterations},
                      {"solves", d.solves},
                      {"lo_gap", d.lo_gap},
                      {"best_p", d.best_p},
                      {"stage_hi", d.stage_hi}};
  return j;
}

std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw steer::DomainError("--params: expected key=value, got \"" + item + "\"");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double param_double(const std::map<std::string, std::string>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) throw steer::DomainError("--params: " + key + " is not a number");
  return v;
}

std::size_t param_count(const std::map<std::string, std::string>& p, const std::string& key, std::size_t fallback,
                        std::size_t max) {
  const double v = param_double(p, key, static_cast<double>(fallback));
  if (v < 1 || v > static_cast<double>(max) || v != std::floor(v)) {
    throw steer::DomainError("--params: " + key + " must be an integer in [1, " + std::to_string(max) + "]");
  }
  return static_cast<std::size_t>(v);
}

int cmd_check_lhs(const std::string& path, double tol) {
  if (!(tol > 0.0)) throw steer::DomainError("--tol must be positive");
  const auto a = load(path);
  steer::FeasibilityOptions opts;
  opts.feas_tol = tol;
  const auto rep = steer::lhs_feasibility(a, opts);
  const char* status = rep.status == steer::FeasibilityStatus::kFeasible     ? "feasible"
                       : rep.status == steer::FeasibilityStatus::kInfeasible ? "infeasible"
                                                                               : "inconclusive";
  ordered_json j;
  j["status"] = status;
  j["feasible"] = rep.feasible;
  j["residual"] = rep.residual;
  j["witness_value"] = rep.witness_value;
  j["iterations"] = rep.iterations;
  if (rep.model) j["model"] = ordered_json::parse(steer::model_to_json(*rep.model));
  emit(j);
  switch (rep.status) {
    case steer::FeasibilityStatus::kFeasible:
      return kOk;
    case steer::FeasibilityStatus::kInfeasible:
      return kInfeasible;
    default:
      return kInconclusive;
  }
}

int cmd_rres(const std::string& path, double inner_tol, std::size_t outer, bool exchanged) {
  steer::RresOptions opts;
  opts.inner_tol = inner_tol;
  opts.outer_iterations = outer;
  const auto a = load(path);
  ordered_json j = interval_json(steer::restricted_res(a, opts));
  if (exchanged) j["exchanged"] = interval_json(steer::restricted_res_exchanged(a, opts));
  emit(j);
  return kOk;
}

int cmd_distance(const std::string& p1, const std::string& p2, bool restricted, std::size_t seesaw,
                 std::uint64_t seed) {
  const auto a1 = load(p1);
  const auto a2 = load(p2);
  if (!restricted && seesaw == 0) restricted = true;
  ordered_json j;
  // The two functionals differ; each is reported under its own key.
  if (restricted) j["restricted"] = {{"value", steer::restricted_trace_distance(a1, a2)}};
  if (seesaw > 0) {
    steer::SeesawOptions opts;
    opts.starts = seesaw;
    opts.seed = seed;
    const auto r = steer::seesaw_trace_distance(a1, a2, opts);
    j["seesaw"] = {{"lower_bound", r.value}, {"starts", seesaw}, {"seed", seed}};
  }
  emit(j);
  return kOk;
}

int cmd_bounds(const std::string& path) {
  const auto a = load(path);
  const auto r = steer::restricted_upper_bound(a);
  const auto f = steer::upper_bound_full(a, {});
  ordered_json j;
  j["restricted"] = ordered_json::array({
      {{"label", "R^R_S <= sup_pX I(A;B|X)"}, {"value", r.conditional_information}},
      {{"label", "I(A;B|X) <= sup_pX H(A)"}, {"value", r.sup_outcome_entropy}},
      {{"label", "I(A;B|X) <= H(B)"}, {"value", r.entropy_b}},
      {{"label", "min{H(A),H(B)} <= log2 min{|A|,|B|}"}, {"value", r.log_dims}},
  });
  j["full"] = ordered_json::array({
      {{"label", "R_S <= I(XB'Y;A) (trivial strategy)"}, {"value", f.strategy_information}},
      {{"label", "I(XB'Y;A) <= sup_pX H(A)"}, {"value", f.sup_outcome_entropy}},
      {{"label", "H(A) <= log2 |A|"}, {"value", f.log_outcomes}},
  });
  emit(j);
  return kOk;
}

int cmd_suite(std::uint64_t seed, std::size_t trials, const std::string& out, std::size_t threads,
              const std::vector<std::string>& only, bool timing) {
  steer::SuiteConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.threads = threads;
  cfg.only = only;
  cfg.include_timing = timing;
  const auto report = steer::run_suite(cfg);
  const std::string text = steer::suite_report_to_json(report, timing) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    steer::write_text_file(out, text);
  }
  for (const auto& p : report.properties) {
    std::cerr << (p.passed() ? "pass " : "FAIL ") << p.name << " (" << p.failures << "/" << p.trials << ")";
    if (!p.first_failure.empty()) std::cerr << ": " << p.first_failure;
    std::cerr << "\n";
  }
  return report.passed() ? kOk : kInfeasible;
}

int cmd_gen(const std::string& kind, const std::string& params, std::uint64_t seed, const std::string& out) {
  const auto p = parse_params(params);
  steer::Assemblage a = [&] {
    if (kind == "werner") {
      for (const auto& [k, v] : p) {
        if (k != "eta") throw steer::DomainError("--params: unknown key \"" + k + "\" for werner");
      }
      return steer::werner_assemblage(param_double(p, "eta", 1.0));
    }
    for (const auto& [k, v] : p) {
      if (k != "inputs" && k != "outcomes" && k != "dim") {
        throw steer::DomainError("--params: unknown key \"" + k + "\" for random");
      }
    }
    steer::Rng rng(seed);
    return steer::random_assemblage(param_count(p, "inputs", 2, 6), param_count(p, "outcomes", 2, 6),
                                    param_count(p, "dim", 2, 4), rng);
  }();
  const std::string text = steer::assemblage_to_json(a, 2);
  // Generated documents must read back to the same object.
  if (!(steer::assemblage_from_json(text) == a)) throw steer::InvariantError("generated document does not round-trip");
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
  } else {
    steer::write_text_file(out, text + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steering quantifiers for finite-dimensional assemblages"};
  app.require_subcommand(1);

  std::string path, path2, out, kind = "random", params;
  double tol = 1e-6, inner_tol = 1e-5;
  std::size_t outer = 200, seesaw = 0, trials = 20, threads = 0;
  std::uint64_t seed = 1;
  bool restricted = false, exchanged = false, timing = false;
  std::vector<std::string> only;

  auto* check = app.add_subcommand("check-lhs", "LHS membership test (exit 0 feasible, 2 infeasible, 3 inconclusive)");
  check->add_option("path", path, "assemblage document")->required();
  check->add_option("--tol", tol, "trace-norm residual tolerance")->capture_default_str();

  auto* rres = app.add_subcommand("rres", "two-sided bracket on the restricted relative entropy of steering");
  rres->add_option("path", path, "assemblage document")->required();
  rres->add_option("--inner-tol", inner_tol, "Frank-Wolfe gap tolerance (bits)")->capture_default_str();
  rres->add_option("--outer-iters", outer, "multiplicative-weights iterations")->capture_default_str();
  rres->add_flag("--exchanged", exchanged, "also bracket the exchanged-order problem");

  auto* dist = app.add_subcommand("distance", "trace distance between two assemblages");
  dist->add_option("path1", path, "first assemblage document")->required();
  dist->add_option("path2", path2, "second assemblage document")->required();
  dist->add_flag("--restricted", restricted, "restricted trace distance (exact)");
  dist->add_option("--seesaw", seesaw, "seesaw lower bound with N random starts");
  dist->add_option("--seed", seed, "seesaw seed")->capture_default_str();

  auto* bounds = app.add_subcommand("bounds", "upper-bound chains");
  bounds->add_option("path", path, "assemblage document")->required();

  auto* suite = app.add_subcommand("suite", "run the property suite");
  suite->add_option("--seed", seed)->capture_default_str();
  suite->add_option("--trials", trials, "trials per property")->capture_default_str();
  suite->add_option("--out", out, "report path (default stdout)");
  suite->add_option("--threads", threads, "worker threads (0 = STEERLIB_THREADS or all cores)");
  suite->add_option("--only", only, "run only the named properties");
  suite->add_flag("--timing", timing, "include runtimes in the report");

  auto* gen = app.add_subcommand("gen", "generate an assemblage document");
  gen->add_option("--kind", kind, "random or werner")->check(CLI::IsMember({"random", "werner"}))->capture_default_str();
  gen->add_option("--params", params, "key=value list: inputs,outcomes,dim (random) or eta (werner)");
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--out", out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*check) return cmd_check_lhs(path, tol);
    if (*rres) return cmd_rres(path, inner_tol, outer, exchanged);
    if (*dist) return cmd_distance(path, path2, restricted, seesaw, seed);
    if (*bounds) return cmd_bounds(path);
    if (*suite) return cmd_suite(seed, trials, out, threads, only, timing);
    if (*gen) return cmd_gen(kind, params, seed, out);
  } catch (const steer::Error& e) {
    std::cerr << "steer: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "steer: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
