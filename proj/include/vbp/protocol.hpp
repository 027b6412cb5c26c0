#pragma once

// Per-thread-per-location protocol trees: representation, validation,
// reachability queries and chain derivation for literal-store programs.

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vbp/litmus.hpp"

namespace vbp {

// Globally unique: the (thread, location) pair identifies the owning protocol,
// the index is local to it.
struct StateId {
  int thread = -1;
  int loc = -1;
  int index = -1;
  friend auto operator<=>(const StateId&, const StateId&) = default;
};

struct ProtocolEdge {
  int src = -1;
  Value label = 0;
  int dst = -1;
  friend bool operator==(const ProtocolEdge&, const ProtocolEdge&) = default;
};

class ProtocolError : public std::runtime_error {
public:
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Protocol {
  int thread = -1;
  int loc = -1;
  Value location_initial = 0;  // declared initial value of the location
  int initial = 0;
  std::vector<Value> value_of;  // indexed by local state
  std::vector<std::string> state_names;
  std::vector<ProtocolEdge> edges;
  std::set<int> accepting;

  int size() const { return static_cast<int>(value_of.size()); }
  StateId id(int local) const { return {thread, loc, local}; }
  bool contains(StateId s) const {
    return s.thread == thread && s.loc == loc && s.index >= 0 && s.index < size();
  }
  bool is_accepting(int local) const { return accepting.count(local) != 0; }

  std::vector<int> children(int src) const {
    std::vector<int> out;
    for (const auto& e : edges)
      if (e.src == src) out.push_back(e.dst);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Lowest-indexed target of an edge labeled `label` from `src`.
  std::optional<int> child(int src, Value label) const {
    std::optional<int> best;
    for (const auto& e : edges)
      if (e.src == src && e.label == label && (!best || e.dst < *best)) best = e.dst;
    return best;
  }
};

inline std::vector<std::string> validate_protocol(const Protocol& p) {
  std::vector<std::string> violations;
  auto state_name = [&](int s) {
    return s >= 0 && s < static_cast<int>(p.state_names.size()) ? p.state_names[s]
                                                                : "#" + std::to_string(s);
  };
  if (p.initial < 0 || p.initial >= p.size()) {
    violations.push_back("initial state out of range");
    return violations;
  }
  for (const auto& e : p.edges) {
    if (e.src < 0 || e.src >= p.size() || e.dst < 0 || e.dst >= p.size()) {
      violations.push_back("edge references unknown state");
      return violations;
    }
  }
  for (int a : p.accepting)
    if (a < 0 || a >= p.size()) violations.push_back("accepting state out of range");

  std::vector<int> incoming(p.size(), 0);
  for (const auto& e : p.edges) ++incoming[e.dst];
  if (incoming[p.initial] > 0)
    violations.push_back("initial state " + state_name(p.initial) + " has an incoming edge");
  for (int s = 0; s < p.size(); ++s) {
    if (s == p.initial) continue;
    if (incoming[s] != 1)
      violations.push_back("state " + state_name(s) + " has " + std::to_string(incoming[s]) +
                           " incoming edges (expected 1)");
  }

  // Reachability from the initial state; with the incoming-edge counts above
  // this establishes the tree property.
  std::vector<bool> seen(p.size(), false);
  std::vector<int> stack{p.initial};
  seen[p.initial] = true;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (const auto& e : p.edges)
      if (e.src == s && !seen[e.dst]) {
        seen[e.dst] = true;
        stack.push_back(e.dst);
      }
  }
  for (int s = 0; s < p.size(); ++s)
    if (!seen[s]) violations.push_back("state " + state_name(s) + " unreachable from initial");

  for (const auto& e : p.edges)
    if (p.value_of[e.dst] != e.label)
      violations.push_back("edge/value mismatch: edge " + state_name(e.src) + " -" +
                           std::to_string(e.label) + "-> " + state_name(e.dst) +
                           " but state value is " + std::to_string(p.value_of[e.dst]));
  if (p.value_of[p.initial] != p.location_initial)
    violations.push_back("initial state value " + std::to_string(p.value_of[p.initial]) +
                         " differs from the location's initial value " +
                         std::to_string(p.location_initial));
  return violations;
}

inline std::set<StateId> reachable(const Protocol& p, StateId s) {
  if (!p.contains(s)) throw ProtocolError("reachable: unknown state");
  std::set<StateId> out{s};
  std::vector<int> stack{s.index};
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    for (int c : p.children(cur))
      if (out.insert(p.id(c)).second) stack.push_back(c);
  }
  return out;
}

inline bool leq(const Protocol& p, StateId a, StateId b) {
  if (!p.contains(a) || !p.contains(b)) throw ProtocolError("leq: unknown state");
  return reachable(p, a).count(b) != 0;
}

struct ProtocolTable {
  std::map<std::pair<int, int>, Protocol> protocols;  // (thread, loc) -> protocol
  bool derived = false;
  std::vector<std::string> warnings;

  const Protocol* find(int thread, int loc) const {
    auto it = protocols.find({thread, loc});
    return it == protocols.end() ? nullptr : &it->second;
  }
  bool is_initial(StateId s) const {
    const Protocol* p = find(s.thread, s.loc);
    return p && p->initial == s.index;
  }
  std::vector<StateId> initial_states_of(int loc) const {
    std::vector<StateId> out;
    for (const auto& [key, p] : protocols)
      if (key.second == loc) out.push_back(p.id(p.initial));
    return out;
  }
  Value value_of(StateId s) const {
    const Protocol* p = find(s.thread, s.loc);
    if (!p || !p->contains(s)) throw ProtocolError("value_of: unknown state");
    return p->value_of[s.index];
  }
};

// A chain protocol per (thread, location) with at least one store, its i-th
// edge labeled with the i-th stored literal; only the last state accepts.
inline ProtocolTable derive_chain_protocols(const LitmusProgram& prog) {
  ProtocolTable table;
  table.derived = true;
  for (int t = 0; t < prog.num_threads(); ++t) {
    std::map<int, std::vector<Value>> stores;  // loc -> literals in program order
    for (size_t i = 0; i < prog.threads[t].size(); ++i) {
      const auto* st = std::get_if<StoreStmt>(&prog.threads[t][i]);
      if (!st) continue;
      if (!st->value.is_literal)
        throw ProtocolError("register-valued store requires explicit protocol: thread " +
                            prog.thread_names[t] + ", statement " + std::to_string(i) + " (" +
                            format_statement(prog, prog.threads[t][i]) + ")");
      stores[st->loc].push_back(st->value.literal);
    }
    for (const auto& [loc, values] : stores) {
      Protocol p;
      p.thread = t;
      p.loc = loc;
      p.location_initial = prog.locations[loc].initial_value;
      p.value_of.push_back(p.location_initial);
      p.state_names.push_back("s0");
      for (size_t i = 0; i < values.size(); ++i) {
        p.value_of.push_back(values[i]);
        p.state_names.push_back("s" + std::to_string(i + 1));
        p.edges.push_back({static_cast<int>(i), values[i], static_cast<int>(i + 1)});
      }
      p.accepting.insert(p.size() - 1);
      table.protocols.emplace(std::make_pair(t, loc), std::move(p));
    }
  }
  return table;
}

namespace detail {

inline Protocol build_declared_protocol(const LitmusProgram& prog, const RawProtocolDecl& decl) {
  auto t = prog.find_thread(decl.thread_name);
  if (!t) throw ProtocolError("protocol for unknown thread '" + decl.thread_name + "'");
  auto loc = prog.find_location(decl.loc_name);
  if (!loc) throw ProtocolError("protocol for unknown location '" + decl.loc_name + "'");
  Protocol p;
  p.thread = *t;
  p.loc = *loc;
  p.location_initial = prog.locations[*loc].initial_value;
  std::map<std::string, int> index;
  std::optional<int> init;
  for (const auto& s : decl.states) {
    if (index.count(s.name))
      throw ProtocolError("protocol " + decl.thread_name + "/" + decl.loc_name +
                          ": duplicate state '" + s.name + "'");
    if (!s.val)
      throw ProtocolError("protocol " + decl.thread_name + "/" + decl.loc_name + ": state '" +
                          s.name + "' has no val");
    int idx = p.size();
    index[s.name] = idx;
    p.state_names.push_back(s.name);
    p.value_of.push_back(*s.val);
    if (s.accepting) p.accepting.insert(idx);
    if (s.init) {
      if (init)
        throw ProtocolError("protocol " + decl.thread_name + "/" + decl.loc_name +
                            ": multiple init states");
      init = idx;
    }
  }
  if (!init)
    throw ProtocolError("protocol " + decl.thread_name + "/" + decl.loc_name + ": no init state");
  p.initial = *init;
  for (const auto& e : decl.edges) {
    auto src = index.find(e.src);
    auto dst = index.find(e.dst);
    if (src == index.end() || dst == index.end())
      throw ProtocolError("protocol " + decl.thread_name + "/" + decl.loc_name +
                          ": edge references unknown state");
    p.edges.push_back({src->second, e.label, dst->second});
  }
  return p;
}

inline bool thread_writes(const LitmusProgram& prog, int t, int loc) {
  for (const auto& stmt : prog.threads[t]) {
    if (const auto* st = std::get_if<StoreStmt>(&stmt))
      if (st->loc == loc) return true;
    if (const auto* rmw = std::get_if<RmwStmt>(&stmt))
      if (rmw->loc == loc) return true;
  }
  return false;
}

}  // namespace detail

// Use the embedded protocols block when present, otherwise derive chains.
// Every resulting protocol passes validate_protocol.
inline ProtocolTable resolve_protocols(const LitmusProgram& prog) {
  if (prog.declared_protocols.empty()) {
    ProtocolTable table = derive_chain_protocols(prog);
    for (const auto& [key, p] : table.protocols) {
      auto violations = validate_protocol(p);
      if (!violations.empty())
        throw ProtocolError("derived protocol invalid: " + violations.front());
    }
    return table;
  }
  ProtocolTable table;
  table.derived = false;
  for (const auto& decl : prog.declared_protocols) {
    Protocol p = detail::build_declared_protocol(prog, decl);
    auto violations = validate_protocol(p);
    if (!violations.empty()) {
      std::string msg = "protocol " + decl.thread_name + "/" + decl.loc_name + " invalid:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw ProtocolError(msg);
    }
    auto key = std::make_pair(p.thread, p.loc);
    if (table.protocols.count(key))
      throw ProtocolError("duplicate protocol for " + decl.thread_name + "/" + decl.loc_name);
    if (!detail::thread_writes(prog, p.thread, p.loc))
      table.warnings.push_back("protocol " + decl.thread_name + "/" + decl.loc_name +
                               " declared but the thread never writes to the location");
    table.protocols.emplace(key, std::move(p));
  }
  // All protocols of a location must agree on the initial state's value; each
  // is already checked against the location's declared initial, so any
  // disagreement would have been reported above.
  return table;
}

inline std::string format_state(const LitmusProgram& prog, const ProtocolTable& table,
                                StateId s) {
  const Protocol* p = table.find(s.thread, s.loc);
  std::string state = p && s.index >= 0 && s.index < p->size() ? p->state_names[s.index]
                                                               : "#" + std::to_string(s.index);
  return prog.thread_names[s.thread] + "." + prog.locations[s.loc].name + "." + state;
}

}  // namespace vbp
