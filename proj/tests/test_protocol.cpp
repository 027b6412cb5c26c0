#include <catch2/catch_amalgamated.hpp>

#include "vbp/protocol.hpp"

using namespace vbp;

namespace {

Protocol chain(int thread, int loc, std::vector<Value> values, Value initial = 0) {
  Protocol p;
  p.thread = thread;
  p.loc = loc;
  p.location_initial = initial;
  p.value_of.push_back(initial);
  p.state_names.push_back("s0");
  for (size_t i = 0; i < values.size(); ++i) {
    p.value_of.push_back(values[i]);
    p.state_names.push_back("s" + std::to_string(i + 1));
    p.edges.push_back({static_cast<int>(i), values[i], static_cast<int>(i + 1)});
  }
  p.accepting.insert(p.size() - 1);
  return p;
}

}  // namespace

TEST_CASE("derived chain protocols follow each thread's store sequence") {
  auto prog = parse_litmus(
      "test COH2\nvars x = 0\n"
      "thread T0 { x := 1; x := 2; a := x; }\n"
      "thread T1 { x := 3; x := 4; b := x; }\n");
  auto table = derive_chain_protocols(prog);
  REQUIRE(table.derived);
  REQUIRE(table.protocols.size() == 2);
  const Protocol* p0 = table.find(0, 0);
  REQUIRE(p0);
  REQUIRE(p0->value_of == std::vector<Value>{0, 1, 2});
  REQUIRE(p0->edges == std::vector<ProtocolEdge>{{0, 1, 1}, {1, 2, 2}});
  REQUIRE(p0->accepting == std::set<int>{2});
  REQUIRE(table.find(1, 0)->value_of == std::vector<Value>{0, 3, 4});
  // Threads that never store to a location get no protocol for it.
  REQUIRE(table.find(0, 1) == nullptr);
  REQUIRE(validate_protocol(*p0).empty());
}

TEST_CASE("derivation rejects register-valued stores") {
  auto prog = parse_litmus("test T\nvars x = 0, y = 0\nthread T0 { x := y; }\n");
  REQUIRE_THROWS_MATCHES(derive_chain_protocols(prog), ProtocolError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "register-valued store requires explicit protocol")));
}

TEST_CASE("validate_protocol flags broken trees") {
  SECTION("incoming edge to the initial state") {
    Protocol p = chain(0, 0, {1});
    p.edges.push_back({1, 0, 0});
    auto v = validate_protocol(p);
    REQUIRE_FALSE(v.empty());
    REQUIRE(v.front().find("incoming edge") != std::string::npos);
  }
  SECTION("reconverging edges") {
    Protocol p = chain(0, 0, {1, 2});
    p.edges.push_back({0, 2, 2});  // second way into s2
    auto v = validate_protocol(p);
    REQUIRE_FALSE(v.empty());
    REQUIRE(v.front().find("2 incoming edges") != std::string::npos);
  }
  SECTION("unreachable state") {
    Protocol p = chain(0, 0, {1});
    p.state_names.push_back("s2");
    p.value_of.push_back(5);
    auto v = validate_protocol(p);
    REQUIRE(std::any_of(v.begin(), v.end(), [](const std::string& s) {
      return s.find("unreachable") != std::string::npos;
    }));
  }
  SECTION("edge label disagrees with the target value") {
    Protocol p = chain(0, 0, {1});
    p.edges[0].label = 9;
    auto v = validate_protocol(p);
    REQUIRE_FALSE(v.empty());
    REQUIRE(v.front().find("edge/value mismatch") != std::string::npos);
  }
  SECTION("initial value disagrees with the location") {
    Protocol p = chain(0, 0, {1});
    p.location_initial = 7;
    auto v = validate_protocol(p);
    REQUIRE_FALSE(v.empty());
    REQUIRE(v.front().find("initial state value") != std::string::npos);
  }
}

TEST_CASE("reachable and leq follow the tree order") {
  Protocol p = chain(0, 0, {1, 2});
  p.edges.push_back({0, 3, 3});  // branch: s0 -> s3
  p.state_names.push_back("s3");
  p.value_of.push_back(3);
  REQUIRE(reachable(p, p.id(0)) ==
          std::set<StateId>{p.id(0), p.id(1), p.id(2), p.id(3)});
  REQUIRE(reachable(p, p.id(1)) == std::set<StateId>{p.id(1), p.id(2)});
  REQUIRE(leq(p, p.id(0), p.id(2)));
  REQUIRE(leq(p, p.id(1), p.id(1)));
  REQUIRE_FALSE(leq(p, p.id(2), p.id(1)));
  // Sibling branches are incomparable.
  REQUIRE_FALSE(leq(p, p.id(1), p.id(3)));
  REQUIRE_FALSE(leq(p, p.id(3), p.id(1)));
  REQUIRE_THROWS_AS(leq(p, p.id(0), StateId{0, 0, 9}), ProtocolError);
}

TEST_CASE("child picks the lowest-indexed target among same-labeled edges") {
  Protocol p;
  p.thread = 0;
  p.loc = 0;
  p.value_of = {0, 1, 1};
  p.state_names = {"s0", "s1", "s2"};
  p.edges = {{0, 1, 2}, {0, 1, 1}};
  p.accepting = {1, 2};
  REQUIRE(p.child(0, 1) == 1);
  REQUIRE_FALSE(p.child(0, 9).has_value());
}

TEST_CASE("resolve_protocols uses the declared block when present") {
  auto prog = parse_litmus(
      "test D\nvars x = 0\n"
      "protocols {\n"
      "  protocol T0 x {\n"
      "    state s0 init, accepting, val = 0;\n"
      "    state s1 accepting, val = 1;\n"
      "    s0 - 1 -> s1;\n"
      "  }\n"
      "}\n"
      "thread T0 { r := rmw(x, 0, 1); }\n");
  auto table = resolve_protocols(prog);
  REQUIRE_FALSE(table.derived);
  const Protocol* p = table.find(0, 0);
  REQUIRE(p);
  REQUIRE(p->accepting == std::set<int>{0, 1});
  REQUIRE(table.is_initial(p->id(0)));
  REQUIRE_FALSE(table.is_initial(p->id(1)));
  REQUIRE(table.value_of(p->id(1)) == 1);
  REQUIRE(table.initial_states_of(0) == std::vector<StateId>{p->id(0)});
}

TEST_CASE("resolve_protocols rejects invalid declarations") {
  auto reject = [](const std::string& block, const std::string& fragment) {
    auto prog = parse_litmus("test D\nvars x = 0\nprotocols {\n" + block +
                             "}\nthread T0 { x := 1; }\n");
    REQUIRE_THROWS_MATCHES(
        resolve_protocols(prog), ProtocolError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(fragment)));
  };
  reject("protocol T9 x { state s0 init, val = 0; }\n", "unknown thread");
  reject("protocol T0 z { state s0 init, val = 0; }\n", "unknown location");
  reject("protocol T0 x { state s0 val = 0; }\n", "no init state");
  reject("protocol T0 x { state s0 init, val = 0; state s1 init, val = 1; s0 - 1 -> s1; }\n",
         "multiple init states");
  reject("protocol T0 x { state s0 init; }\n", "has no val");
  reject(
      "protocol T0 x { state s0 init, val = 0; state s1 accepting, val = 1; s0 - 1 -> s1; }\n"
      "protocol T0 x { state s0 init, val = 0; state s1 accepting, val = 1; s0 - 1 -> s1; }\n",
      "duplicate protocol");
  reject("protocol T0 x { state s0 init, accepting, val = 0; state s1 val = 1; }\n",
         "unreachable");
  reject("protocol T0 x { state s0 init, accepting, val = 3; }\n", "initial state value");
}

TEST_CASE("a protocol for a non-writing thread produces a warning") {
  auto prog = parse_litmus(
      "test W\nvars x = 0\n"
      "protocols {\n"
      "  protocol T1 x {\n"
      "    state s0 init, accepting, val = 0;\n"
      "  }\n"
      "  protocol T0 x {\n"
      "    state s0 init, val = 0;\n"
      "    state s1 accepting, val = 1;\n"
      "    s0 - 1 -> s1;\n"
      "  }\n"
      "}\n"
      "thread T0 { x := 1; }\nthread T1 { a := x; }\n");
  auto table = resolve_protocols(prog);
  REQUIRE(table.warnings.size() == 1);
  REQUIRE(table.warnings.front().find("never writes") != std::string::npos);
}

TEST_CASE("format_state names states through the table") {
  auto prog = parse_litmus("test F\nvars x = 0\nthread T0 { x := 1; }\n");
  auto table = resolve_protocols(prog);
  REQUIRE(format_state(prog, table, table.find(0, 0)->id(1)) == "T0.x.s1");
}
