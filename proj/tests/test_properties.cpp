#include <catch2/catch_amalgamated.hpp>

#include "properties.hpp"

using namespace vbp::testing;

namespace {

void run(SuiteResult (*suite)(Rng&, int), unsigned seed, int cases) {
  Rng rng(seed);
  SuiteResult res = suite(rng, cases);
  INFO(res.first_failure);
  REQUIRE(res.cases == cases);
  REQUIRE(res.failures == 0);
}

}  // namespace

TEST_CASE("protocol tree and order laws") { run(suite_protocol_laws, 11, 200); }

TEST_CASE("views advance monotonically") { run(suite_view_monotonicity, 12, 120); }

TEST_CASE("tau+ is irreflexive in retained executions") {
  run(suite_tau_irreflexive, 13, 120);
}

TEST_CASE("sigma mirrors successful rmws under CC3/CC4") {
  run(suite_sigma_discipline, 14, 150);
}

TEST_CASE("eager CC3/CC4 pruning preserves outcomes") {
  run(suite_prune_safety, 15, 150);
}

TEST_CASE("replay is deterministic and faithful") {
  run(suite_replay_determinism, 16, 120);
}

TEST_CASE("outcome sets ignore choice iteration order") {
  run(suite_order_insensitivity, 17, 120);
}

TEST_CASE("random programs agree with the axiomatic reference") {
  run(suite_oracle_equivalence, 18, 120);
}
