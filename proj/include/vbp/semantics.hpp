#pragma once

// Verification states and the small-step rules over protocol views:
// thread-local views L, most-recently-observed write pi, observed modification
// order tau, and the rmw read-from multiset sigma.

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "vbp/protocol.hpp"

namespace vbp {

// Immutable snapshot; every step copies and returns a fresh one.
struct VerificationState {
  // view[t][x][t'] = the state of P_x^{t'} as seen by t, or nullopt if the
  // protocol does not exist.
  std::vector<std::vector<std::vector<std::optional<StateId>>>> view;
  std::vector<std::optional<StateId>> pi;                      // per location
  std::vector<std::set<std::pair<StateId, StateId>>> tau;      // per location
  std::map<StateId, int> sigma;

  friend bool operator==(const VerificationState&, const VerificationState&) = default;
};

inline VerificationState init_state(const ProtocolTable& table, int num_threads,
                                    int num_locations) {
  VerificationState st;
  st.view.assign(num_threads, {});
  for (int t = 0; t < num_threads; ++t) {
    st.view[t].assign(num_locations, {});
    for (int x = 0; x < num_locations; ++x) {
      st.view[t][x].assign(num_threads, std::nullopt);
      for (int u = 0; u < num_threads; ++u)
        if (const Protocol* p = table.find(u, x)) st.view[t][x][u] = p->id(p->initial);
    }
  }
  st.pi.assign(num_locations, std::nullopt);
  st.tau.assign(num_locations, {});
  return st;
}

// pi(x) := initial state of P_x^t, or undefined if t has no protocol for x.
// Performed at the start of each thread's pass.
inline VerificationState reset_pi(const VerificationState& state, int t,
                                  const ProtocolTable& table) {
  VerificationState out = state;
  for (size_t x = 0; x < out.pi.size(); ++x) {
    const Protocol* p = table.find(t, static_cast<int>(x));
    out.pi[x] = p ? std::optional<StateId>(p->id(p->initial)) : std::nullopt;
  }
  return out;
}

// True iff tau(x)+ relates s strictly before target.
inline bool tau_before(const VerificationState& state, int x, StateId s,
                       const std::optional<StateId>& target) {
  if (!target) return false;
  std::set<StateId> frontier{s}, seen;
  while (!frontier.empty()) {
    StateId cur = *frontier.begin();
    frontier.erase(frontier.begin());
    for (const auto& [a, b] : state.tau[x]) {
      if (a != cur) continue;
      if (b == *target) return true;
      if (seen.insert(b).second) frontier.insert(b);
    }
  }
  return false;
}

// States observable by t at x: states reachable from t's view of other
// threads' protocols that are not tau+-before pi(x), plus pi(x) itself.
inline std::vector<StateId> pread(const VerificationState& state, const ProtocolTable& table,
                                  int t, int x) {
  std::set<StateId> out;
  int num_threads = static_cast<int>(state.view.size());
  for (int u = 0; u < num_threads; ++u) {
    if (u == t) continue;
    const auto& v = state.view[t][x][u];
    if (!v) continue;
    const Protocol* p = table.find(u, x);
    for (StateId s : reachable(*p, *v))
      if (!tau_before(state, x, s, state.pi[x])) out.insert(s);
  }
  if (state.pi[x]) out.insert(*state.pi[x]);
  return {out.begin(), out.end()};
}

// Once a non-initial write has been observed in this pass, initial states are
// no longer readable. pi(x) undefined counts as "nothing observed": a thread
// without a protocol for x must still be able to read initial values.
inline std::vector<StateId> read_set(const VerificationState& state, const ProtocolTable& table,
                                     int t, int x) {
  auto pr = pread(state, table, t, x);
  bool nothing_observed = !state.pi[x] || table.is_initial(*state.pi[x]);
  if (nothing_observed) return pr;
  std::vector<StateId> out;
  for (StateId s : pr)
    if (!table.is_initial(s)) out.push_back(s);
  return out;
}

// True iff tau(x)+ is irreflexive for every location. Reads cannot close a
// cycle (the read_set guard forbids it), but a write can: its tau pair is
// forced by the program, and earlier cross-thread speculation may already
// order the written state before the current pi(x). Executions where this
// happens observed contradictory modification orders and must be discarded.
inline bool tau_irreflexive(const VerificationState& state) {
  for (size_t x = 0; x < state.tau.size(); ++x) {
    std::set<StateId> nodes;
    for (const auto& [a, b] : state.tau[x]) {
      nodes.insert(a);
      nodes.insert(b);
    }
    for (StateId s : nodes)
      if (tau_before(state, static_cast<int>(x), s, s)) return false;
  }
  return true;
}

struct NoTransition {
  int thread = -1;
  int loc = -1;
  Value value = 0;
  std::optional<StateId> from;
};

namespace detail {

inline void record_tau(VerificationState& st, int x, const std::optional<StateId>& from,
                       StateId to) {
  // Pairs with an undefined source or self-pairs are skipped: tau+ must stay
  // irreflexive so that re-reading the same write remains possible.
  if (from && *from != to) st.tau[x].insert({*from, to});
}

}  // namespace detail

inline std::variant<VerificationState, NoTransition> step_write(const VerificationState& state,
                                                                const ProtocolTable& table,
                                                                int t, int x, Value v) {
  const auto& cur = state.view[t][x][t];
  const Protocol* p = table.find(t, x);
  if (!cur || !p) return NoTransition{t, x, v, std::nullopt};
  auto next = p->child(cur->index, v);
  if (!next) return NoTransition{t, x, v, cur};
  StateId s = p->id(*next);
  VerificationState out = state;
  out.view[t][x][t] = s;
  detail::record_tau(out, x, state.pi[x], s);
  out.pi[x] = s;
  return out;
}

struct ReadResult {
  VerificationState state;
  StateId chosen;
  Value value = 0;
};

inline std::vector<ReadResult> step_read(const VerificationState& state,
                                         const ProtocolTable& table, int t, int x) {
  std::vector<ReadResult> out;
  for (StateId s : read_set(state, table, t, x)) {
    VerificationState next = state;
    next.view[t][x][s.thread] = s;
    detail::record_tau(next, x, state.pi[x], s);
    next.pi[x] = s;
    out.push_back({std::move(next), s, table.value_of(s)});
  }
  return out;
}

struct RmwResult {
  VerificationState state;
  bool success = false;
  Value read_value = 0;
  StateId read_from;
  std::optional<StateId> written;
};

// Success branches read an expected-valued state and take the own edge
// labeled with the new value; failure branches are exactly the Read rule on
// states with a different value. An empty result means no rule applies.
inline std::vector<RmwResult> step_rmw(const VerificationState& state,
                                       const ProtocolTable& table, int t, int x, Value expected,
                                       Value desired) {
  std::vector<RmwResult> out;
  for (StateId s : read_set(state, table, t, x)) {
    Value v = table.value_of(s);
    if (v == expected) {
      const auto& cur = state.view[t][x][t];
      const Protocol* p = table.find(t, x);
      if (!cur || !p) continue;
      auto next_idx = p->child(cur->index, desired);
      if (!next_idx) continue;
      StateId written = p->id(*next_idx);
      VerificationState next = state;
      next.view[t][x][s.thread] = s;
      next.view[t][x][t] = written;
      detail::record_tau(next, x, state.pi[x], s);
      detail::record_tau(next, x, s, written);
      next.pi[x] = written;
      ++next.sigma[s];
      out.push_back({std::move(next), true, v, s, written});
    } else {
      VerificationState next = state;
      next.view[t][x][s.thread] = s;
      detail::record_tau(next, x, state.pi[x], s);
      next.pi[x] = s;
      out.push_back({std::move(next), false, v, s, std::nullopt});
    }
  }
  return out;
}

}  // namespace vbp
