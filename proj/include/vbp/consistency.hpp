#pragma once

// The consistency checks CC1-CC4 that filter speculative executions.

#include "vbp/semantics.hpp"

namespace vbp {

// Every protocol owner has reached an accepting state of its own protocol.
inline bool check_cc1(const VerificationState& state, const ProtocolTable& table) {
  for (int t = 0; t < static_cast<int>(state.view.size()); ++t) {
    for (int x = 0; x < static_cast<int>(state.pi.size()); ++x) {
      const auto& own = state.view[t][x][t];
      if (!own) continue;
      const Protocol* p = table.find(t, x);
      if (!p->is_accepting(own->index)) return false;
    }
  }
  return true;
}

// Every speculation about another thread's writes was realized: the actual
// state is reachable from the speculated one. Restricted to pairs in
// `threads` when given (views of unprocessed threads are not yet final).
inline bool check_cc2(const VerificationState& state, const ProtocolTable& table,
                      const std::vector<int>* threads = nullptr) {
  int n = static_cast<int>(state.view.size());
  std::vector<int> all;
  if (!threads) {
    for (int t = 0; t < n; ++t) all.push_back(t);
    threads = &all;
  }
  for (int t : *threads) {
    for (int u : *threads) {
      for (int x = 0; x < static_cast<int>(state.pi.size()); ++x) {
        const auto& speculated = state.view[t][x][u];
        const auto& actual = state.view[u][x][u];
        if (!speculated || !actual) continue;
        if (!leq(*table.find(u, x), *speculated, *actual)) return false;
      }
    }
  }
  return true;
}

// No write was consumed by two rmw operations.
inline bool check_cc3(const VerificationState& state) {
  for (const auto& [s, count] : state.sigma)
    if (count > 1) return false;
  return true;
}

// Per location, at most one initial state was consumed by an rmw: all initial
// states of a location represent the same single write of the initial value.
inline bool check_cc4(const VerificationState& state, const ProtocolTable& table) {
  std::map<int, int> initial_reads;  // loc -> number of distinct initial states in sigma
  for (const auto& [s, count] : state.sigma)
    if (count >= 1 && table.is_initial(s)) ++initial_reads[s.loc];
  for (const auto& [loc, n] : initial_reads)
    if (n > 1) return false;
  return true;
}

}  // namespace vbp
