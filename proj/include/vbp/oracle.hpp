#pragma once

// Brute-force SC-per-location reference for literal-store, rmw-free programs:
// enumerates every reads-from map and per-location modification order and
// keeps the combinations whose per-location relation graph is acyclic.

#include <set>

#include "vbp/explorer.hpp"

namespace vbp {

namespace detail {

struct OracleEvent {
  int thread = -1;  // -1 for Init
  bool is_write = false;
  int loc = -1;
  Value value = 0;   // writes and Init
  int reg = -1;      // reads
  int po = 0;        // program-order index within the thread
};

class Oracle {
public:
  explicit Oracle(const LitmusProgram& prog) : prog_(prog) {
    for (int x = 0; x < prog.num_locations(); ++x) {
      events_.push_back({-1, true, x, prog.locations[x].initial_value, -1, 0});
      init_of_[x] = static_cast<int>(events_.size()) - 1;
    }
    for (int t = 0; t < prog.num_threads(); ++t) {
      int po = 0;
      for (const auto& stmt : prog.threads[t]) {
        if (const auto* st = std::get_if<StoreStmt>(&stmt)) {
          if (!st->value.is_literal)
            throw std::invalid_argument("oracle: register-valued store unsupported");
          events_.push_back({t, true, st->loc, st->value.literal, -1, po++});
        } else if (const auto* ld = std::get_if<LoadStmt>(&stmt)) {
          events_.push_back({t, false, ld->loc, 0, ld->dst, po++});
          reads_.push_back(static_cast<int>(events_.size()) - 1);
        } else {
          throw std::invalid_argument("oracle: rmw unsupported");
        }
      }
    }
    for (int e = 0; e < static_cast<int>(events_.size()); ++e)
      if (events_[e].is_write && events_[e].thread >= 0) writes_of_[events_[e].loc].push_back(e);
  }

  std::set<Valuation> outcomes() {
    rf_.assign(reads_.size(), -1);
    std::set<Valuation> out;
    enumerate_rf(0, out);
    return out;
  }

private:
  const LitmusProgram& prog_;
  std::vector<OracleEvent> events_;
  std::map<int, int> init_of_;               // loc -> Init event
  std::map<int, std::vector<int>> writes_of_;  // loc -> non-Init writes
  std::vector<int> reads_;                   // read events
  std::vector<int> rf_;                      // per read: source write event

  void enumerate_rf(size_t r, std::set<Valuation>& out) {
    if (r == reads_.size()) {
      enumerate_mo(out);
      return;
    }
    int loc = events_[reads_[r]].loc;
    rf_[r] = init_of_[loc];
    enumerate_rf(r + 1, out);
    for (int w : writes_of_[loc]) {
      rf_[r] = w;
      enumerate_rf(r + 1, out);
    }
  }

  void enumerate_mo(std::set<Valuation>& out) {
    // One permutation per location, Init always first.
    std::vector<std::vector<int>> mo_choices;
    std::vector<int> locs;
    for (auto& [loc, writes] : writes_of_) {
      locs.push_back(loc);
      mo_choices.push_back(writes);
      std::sort(mo_choices.back().begin(), mo_choices.back().end());
    }
    std::map<int, std::vector<int>> mo;
    enumerate_mo_rec(0, locs, mo_choices, mo, out);
    if (locs.empty()) check(mo, out);
  }

  void enumerate_mo_rec(size_t i, const std::vector<int>& locs,
                        std::vector<std::vector<int>>& mo_choices,
                        std::map<int, std::vector<int>>& mo, std::set<Valuation>& out) {
    if (i == locs.size()) {
      check(mo, out);
      return;
    }
    auto& perm = mo_choices[i];
    std::sort(perm.begin(), perm.end());
    do {
      mo[locs[i]] = perm;
      enumerate_mo_rec(i + 1, locs, mo_choices, mo, out);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  void check(const std::map<int, std::vector<int>>& mo, std::set<Valuation>& out) {
    for (int x = 0; x < prog_.num_locations(); ++x)
      if (!acyclic_at(x, mo)) return;
    Valuation val;
    for (int r : free_registers(prog_)) val[r] = 0;
    // Later loads into the same register win (program order within a thread).
    for (size_t r = 0; r < reads_.size(); ++r)
      val[events_[reads_[r]].reg] = events_[rf_[r]].value;
    out.insert(val);
  }

  // Acyclicity of po-loc + rf + mo + fr over the events of one location,
  // with fr = rf^-1 ; mo derived.
  bool acyclic_at(int x, const std::map<int, std::vector<int>>& mo) {
    std::vector<int> nodes;
    for (int e = 0; e < static_cast<int>(events_.size()); ++e)
      if (events_[e].loc == x) nodes.push_back(e);
    std::map<int, std::vector<int>> succ;

    auto mo_order = [&](int a, int b) {  // a strictly mo-before b at x
      if (a == init_of_[x]) return b != init_of_[x];
      if (b == init_of_[x]) return false;
      const auto& order = mo.at(x);
      auto ia = std::find(order.begin(), order.end(), a);
      auto ib = std::find(order.begin(), order.end(), b);
      return ia < ib;
    };

    for (int a : nodes) {
      for (int b : nodes) {
        if (a == b) continue;
        bool edge = false;
        // po-loc
        if (events_[a].thread >= 0 && events_[a].thread == events_[b].thread &&
            events_[a].po < events_[b].po)
          edge = true;
        // mo (Init before every write)
        if (events_[a].is_write && events_[b].is_write && mo_order(a, b)) edge = true;
        if (edge) succ[a].push_back(b);
      }
    }
    for (size_t r = 0; r < reads_.size(); ++r) {
      int read = reads_[r];
      if (events_[read].loc != x) continue;
      succ[rf_[r]].push_back(read);  // rf
      for (int w : nodes)
        if (events_[w].is_write && w != rf_[r] && mo_order(rf_[r], w))
          succ[read].push_back(w);  // fr
    }

    // DFS cycle detection.
    std::map<int, int> color;  // 0 white, 1 grey, 2 black
    for (int n : nodes)
      if (color[n] == 0 && has_cycle(n, succ, color)) return false;
    return true;
  }

  bool has_cycle(int n, const std::map<int, std::vector<int>>& succ, std::map<int, int>& color) {
    color[n] = 1;
    auto it = succ.find(n);
    if (it != succ.end()) {
      for (int m : it->second) {
        if (color[m] == 1) return true;
        if (color[m] == 0 && has_cycle(m, succ, color)) return true;
      }
    }
    color[n] = 2;
    return false;
  }
};

}  // namespace detail

inline std::set<Valuation> axiomatic_outcomes(const LitmusProgram& prog) {
  return detail::Oracle(prog).outcomes();
}

}  // namespace vbp
