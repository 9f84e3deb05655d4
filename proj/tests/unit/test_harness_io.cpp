#include <cmath>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "steer/harness.hpp"
#include "steer/io.hpp"

using namespace steer;

TEST_CASE("assemblage JSON round-trips bit for bit") {
  Rng rng(40);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_assemblage(1 + rng.index(3), 2 + rng.index(2), 2 + rng.index(2), rng);
    const std::string text = assemblage_to_json(a);
    const auto back = assemblage_from_json(text);
    CHECK(back == a);
    CHECK(assemblage_to_json(back) == text);
  }
}

TEST_CASE("model JSON round-trips") {
  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    const auto m = random_lhs_model(2, 3, 2, rng);
    const auto back = model_from_json(model_to_json(m));
    CHECK(back.sigmas() == m.sigmas());
  }
}

TEST_CASE("malformed documents are rejected") {
  const std::string good = assemblage_to_json(werner_assemblage(1.0));
  CHECK_THROWS_AS(assemblage_from_json(good.substr(0, good.size() / 2)), FormatError);
  CHECK_THROWS_AS(assemblage_from_json("{}"), FormatError);
  CHECK_THROWS_AS(assemblage_from_json(R"({"version":"2","n_inputs":1,"n_outcomes":1,"dim_b":1,"elements":[[[[[1,0]]]]]})"),
                  FormatError);
  // Well-formed but signaling.
  const std::string signaling =
      R"({"version":"1","n_inputs":2,"n_outcomes":1,"dim_b":2,"elements":[[[[[1,0],[0,0]],[[0,0],[0,0]]]],)"
      R"([[[[0,0],[0,0]],[[0,0],[1,0]]]]]})";
  CHECK_THROWS_AS(assemblage_from_json(signaling), InvariantError);
}

TEST_CASE("generators satisfy their invariants") {
  Rng rng(42);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t nx = 1 + rng.index(3), na = 1 + rng.index(3), d = 1 + rng.index(3);
    // Constructors validate, so building is the check.
    CHECK_NOTHROW(random_assemblage(nx, na, d, rng));
    if (t % 10 == 0) CHECK_NOTHROW(random_lhs_model(nx, na, d, rng));
  }

  const auto pure = random_density(3, 1, rng);
  CHECK(von_neumann_entropy(pure) <= 1e-9);
  const auto full = random_density(2, 2, rng);
  CHECK(eig_hermitian(full.op()).eigenvalues.front() > 0.0);

  for (int t = 0; t < 100; ++t) {
    const auto povm = random_povm(2, 2, rng);
    CHECK(test::max_abs_diff(povm[0] + povm[1], HermitianOperator::identity(2)) <= 1e-10);
    const auto inst = random_instrument(2, 2, 2, rng);
    ComplexMatrix sum(2, 2);
    for (const auto& branch : inst.branches())
      for (const auto& k : branch) sum += k.adjoint() * k;
    CHECK((sum - ComplexMatrix::identity(2)).max_abs() <= 1e-9);
  }
}

TEST_CASE("fixed seeds reproduce generated objects exactly") {
  Rng r1(42), r2(42);
  CHECK(random_density(2, 2, r1).op() == random_density(2, 2, r2).op());
  Rng a1(7), a2(7);
  CHECK(assemblage_to_json(random_assemblage(2, 2, 2, a1)) == assemblage_to_json(random_assemblage(2, 2, 2, a2)));
  const Rng base(3);
  CHECK(base.split(1, 2).next_u64() == Rng(3).split(1, 2).next_u64());
  CHECK(base.split(1, 2).next_u64() != base.split(2, 1).next_u64());
}

TEST_CASE("run_suite with zero trials passes trivially") {
  SuiteConfig cfg;
  cfg.trials = 0;
  const auto rep = run_suite(cfg);
  CHECK(rep.passed());
  for (const auto& p : rep.properties) {
    CHECK(p.trials == 0);
    CHECK_FALSE(p.worst_margin.has_value());
  }
}

TEST_CASE("run_property does not depend on the thread count") {
  const Rng rng(9);
  const TrialFunction fn = [](std::size_t, Rng& r) {
    TrialOutcome out;
    out.require(r.uniform() - 0.01, "uniform draw above 0.01");
    return out;
  };
  const auto one = run_property("draws", 200, rng, fn, 1);
  const auto four = run_property("draws", 200, rng, fn, 4);
  CHECK(one.failures == four.failures);
  CHECK(one.worst_margin == four.worst_margin);
  CHECK(one.first_failure == four.first_failure);

  const TrialFunction throws = [](std::size_t t, Rng&) -> TrialOutcome {
    if (t == 3) throw std::runtime_error("boom");
    return {};
  };
  const auto bad = run_property("throws", 5, rng, throws, 2);
  CHECK(bad.failures == 1);
  CHECK_FALSE(bad.passed());
}

TEST_CASE("suite reports are deterministic") {
  SuiteConfig cfg;
  cfg.seed = 11;
  cfg.trials = 3;
  cfg.only = {"eig_reconstruction", "composition", "json_roundtrip", "g_eps_monotone"};
  const auto a = suite_report_to_json(run_suite(cfg), false);
  cfg.threads = 1;
  const auto b = suite_report_to_json(run_suite(cfg), false);
  CHECK(a == b);
  cfg.only = {"no_such_property"};
  CHECK_THROWS_AS(run_suite(cfg), DomainError);
}
