#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "vbp/explorer.hpp"

using namespace vbp;

namespace {

LitmusProgram load_file(const std::string& name) {
  std::ifstream in(std::string(LITMUS_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_litmus(ss.str());
}

CheckReport check_file(const std::string& name, ExploreOptions opt = {}) {
  auto prog = load_file(name);
  auto table = resolve_protocols(prog);
  return check_expectations(prog, table, opt);
}

Valuation val_of(const LitmusProgram& prog, std::initializer_list<std::pair<const char*, Value>> kv) {
  Valuation v;
  for (const auto& [name, value] : kv) v[*prog.find_register(name)] = value;
  return v;
}

std::set<Valuation> keys(const OutcomeSet& outcomes) {
  std::set<Valuation> out;
  for (const auto& [v, e] : outcomes.outcomes) out.insert(v);
  return out;
}

}  // namespace

TEST_CASE("all bundled litmus tests reach their expected verdicts") {
  const char* passing[] = {"2p2w.lit", "arm-weak.lit", "coh.lit",   "coh-c.lit",
                           "coh-v.lit", "coh2.lit",     "coh3.lit",  "corr2.lit",
                           "dcas.lit",  "lb.lit",       "sb.lit"};
  for (const char* name : passing) {
    INFO(name);
    auto report = check_file(name);
    REQUIRE(report.overall_pass);
    for (const auto& v : report.verdicts) REQUIRE(v.holds);
  }
  for (const char* name : {"coh-p1.lit", "coh-p2.lit"}) {
    INFO(name);
    auto report = check_file(name);
    REQUIRE_FALSE(report.overall_pass);
    REQUIRE_FALSE(report.outcomes.mismatches.empty());
  }
}

TEST_CASE("COH outcome set matches coherence exactly") {
  auto prog = load_file("coh.lit");
  auto outcomes = explore(prog, resolve_protocols(prog));
  std::set<Valuation> expected{
      val_of(prog, {{"a", 1}, {"b", 1}}),
      val_of(prog, {{"a", 1}, {"b", 2}}),
      val_of(prog, {{"a", 2}, {"b", 2}}),
  };
  REQUIRE(keys(outcomes) == expected);
}

TEST_CASE("protocol mismatches pinpoint the failing store") {
  auto report = check_file("coh-p1.lit");
  REQUIRE(report.outcomes.outcomes.empty());
  REQUIRE(report.outcomes.mismatches.size() == 1);
  const auto& m = report.outcomes.mismatches.front();
  REQUIRE(m.thread == 0);
  REQUIRE(m.stmt == 0);
  REQUIRE(m.value == 1);  // `x := 1` has no edge in the declared protocol
  REQUIRE(m.state.has_value());
  REQUIRE(m.state->index == 0);
}

TEST_CASE("dCAS admits exactly the single-success outcomes") {
  auto prog = load_file("dcas.lit");
  auto table = resolve_protocols(prog);
  std::set<Valuation> expected{
      val_of(prog, {{"r0", 1}, {"r1", 0}}),
      val_of(prog, {{"r0", 0}, {"r1", 1}}),
  };
  for (bool eager : {true, false}) {
    ExploreOptions opt;
    opt.eager_prune = eager;
    REQUIRE(keys(explore(prog, table, opt)) == expected);
  }
}

TEST_CASE("witnesses replay to the same execution") {
  for (const char* name : {"coh.lit", "corr2.lit", "dcas.lit", "lb.lit", "2p2w.lit"}) {
    INFO(name);
    auto prog = load_file(name);
    auto table = resolve_protocols(prog);
    auto outcomes = explore(prog, table);
    REQUIRE_FALSE(outcomes.outcomes.empty());
    for (const auto& [val, exec] : outcomes.outcomes) {
      Execution again = replay(prog, table, exec);
      REQUIRE(again.registers == val);
      REQUIRE(again.final_state == exec.final_state);
    }
  }
}

TEST_CASE("replay rejects tampered traces") {
  auto prog = load_file("coh.lit");
  auto table = resolve_protocols(prog);
  auto outcomes = explore(prog, table);
  Execution exec = outcomes.outcomes.begin()->second;
  SECTION("truncated trace") {
    exec.trace.pop_back();
    REQUIRE_THROWS_AS(replay(prog, table, exec), ReplayError);
  }
  SECTION("reordered steps") {
    std::swap(exec.trace.front(), exec.trace.back());
    REQUIRE_THROWS_AS(replay(prog, table, exec), ReplayError);
  }
  SECTION("impossible read choice") {
    for (auto& step : exec.trace)
      if (step.rule == Rule::Read) step.chosen.index = 99;
    REQUIRE_THROWS_AS(replay(prog, table, exec), ReplayError);
  }
}

TEST_CASE("a fixed processing order yields a subset of all orders") {
  for (const char* name : {"coh.lit", "coh2.lit", "corr2.lit", "sb.lit"}) {
    INFO(name);
    auto prog = load_file(name);
    auto table = resolve_protocols(prog);
    auto all = explore(prog, table);
    ExploreOptions fixed;
    fixed.all_orders = false;
    auto one = explore(prog, table, fixed);
    REQUIRE(one.orders == 1);
    long factorial = 1;
    for (int i = 2; i <= prog.num_threads(); ++i) factorial *= i;
    REQUIRE(all.orders == factorial);
    for (const auto& v : keys(one)) REQUIRE(keys(all).count(v) == 1);
  }
}

TEST_CASE("the branch budget aborts runaway exploration") {
  auto prog = load_file("corr2.lit");
  auto table = resolve_protocols(prog);
  ExploreOptions opt;
  opt.max_branches = 10;
  REQUIRE_THROWS_AS(explore(prog, table, opt), ResourceLimitError);
}

TEST_CASE("query evaluates polarity against the outcome set") {
  auto prog = load_file("sb.lit");
  auto table = resolve_protocols(prog);
  auto outcomes = explore(prog, table);

  Expectation allowed{Expectation::Polarity::Allowed,
                      {{*prog.find_register("a"), 0}, {*prog.find_register("b"), 0}}};
  auto v1 = query(outcomes, allowed);
  REQUIRE(v1.holds);
  REQUIRE(v1.witness.has_value());

  Expectation forbidden{Expectation::Polarity::Forbidden, {{*prog.find_register("a"), 7}}};
  auto v2 = query(outcomes, forbidden);
  REQUIRE(v2.holds);
  REQUIRE_FALSE(v2.witness.has_value());

  Expectation violated{Expectation::Polarity::Forbidden, {{*prog.find_register("a"), 0}}};
  REQUIRE_FALSE(query(outcomes, violated).holds);
}

TEST_CASE("empty expectation lists pass unless a mismatch killed everything") {
  auto prog = parse_litmus("test E\nvars x = 0\nthread T0 { x := 1; a := x; }\n");
  auto table = resolve_protocols(prog);
  auto report = check_expectations(prog, table);
  REQUIRE(report.overall_pass);
  REQUIRE(report.verdicts.empty());
}
