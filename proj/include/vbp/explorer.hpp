#pragma once

// Enumerates all consistent executions of a litmus program against a protocol
// table and decides outcome queries.
//
// Threads are processed one after the other, each in program order; because
// pi resets and tau accumulation can make the processing order observable,
// all N! orders are enumerated by default and the results unioned.

#include <algorithm>
#include <numeric>
#include <optional>

#include "vbp/consistency.hpp"

namespace vbp {

enum class Rule { Write, Read, RmwS, RmwF };

struct TraceStep {
  int thread = -1;
  int stmt = -1;     // statement index within the thread
  Rule rule = Rule::Write;
  StateId chosen;    // Write: the state written; Read/Rmw: the state read from
  std::optional<StateId> written;  // RmwS only
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Valuation = std::map<int, Value>;  // register -> final value

struct Execution {
  VerificationState final_state;
  Valuation registers;
  std::vector<TraceStep> trace;
  std::vector<int> thread_order;
  friend bool operator==(const Execution&, const Execution&) = default;
};

struct ProtocolMismatch {
  int thread = -1;
  int stmt = -1;
  Value value = 0;
  std::optional<StateId> state;
  friend auto operator<=>(const ProtocolMismatch&, const ProtocolMismatch&) = default;
};

struct ExploreOptions {
  bool all_orders = true;        // enumerate all thread-processing orders
  long max_branches = 1'000'000;
  bool eager_prune = true;       // prune on CC3/CC4 as soon as they fail
  bool cc2_each_step = false;    // additionally check CC2 after every step
  bool reverse_choices = false;  // iterate choice sets in reverse (testing aid)
};

struct OutcomeSet {
  std::map<Valuation, Execution> outcomes;
  std::vector<ProtocolMismatch> mismatches;
  long branches = 0;  // DFS nodes expanded
  int orders = 0;
};

class ResourceLimitError : public std::runtime_error {
public:
  explicit ResourceLimitError(long limit)
      : std::runtime_error("exploration exceeded branch limit of " + std::to_string(limit)) {}
};

namespace detail {

class Explorer {
public:
  Explorer(const LitmusProgram& prog, const ProtocolTable& table, const ExploreOptions& opt)
      : prog_(prog), table_(table), opt_(opt), free_regs_(free_registers(prog)) {}

  OutcomeSet run() {
    int n = prog_.num_threads();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    VerificationState init = init_state(table_, n, prog_.num_locations());
    do {
      ++result_.orders;
      order_ = order;
      std::vector<Value> regs(prog_.registers.size(), 0);
      std::vector<TraceStep> trace;
      enter_thread(0, init, regs, trace);
      if (!opt_.all_orders) break;
    } while (std::next_permutation(order.begin(), order.end()));
    for (const auto& m : seen_mismatches_) result_.mismatches.push_back(m);
    return std::move(result_);
  }

private:
  const LitmusProgram& prog_;
  const ProtocolTable& table_;
  const ExploreOptions& opt_;
  std::set<int> free_regs_;
  std::vector<int> order_;
  std::set<ProtocolMismatch> seen_mismatches_;
  OutcomeSet result_;

  void budget() {
    if (++result_.branches > opt_.max_branches) throw ResourceLimitError(opt_.max_branches);
  }

  Value eval(const Expr& e, const std::vector<Value>& regs) const {
    return e.is_literal ? e.literal : regs[e.reg];
  }

  void enter_thread(int pos, const VerificationState& state, std::vector<Value>& regs,
                    std::vector<TraceStep>& trace) {
    if (pos == static_cast<int>(order_.size())) {
      finish(state, regs, trace);
      return;
    }
    VerificationState st = reset_pi(state, order_[pos], table_);
    step(pos, 0, st, regs, trace);
  }

  void finish(const VerificationState& state, const std::vector<Value>& regs,
              std::vector<TraceStep>& trace) {
    if (!check_cc1(state, table_) || !check_cc2(state, table_) || !check_cc3(state) ||
        !check_cc4(state, table_) || !tau_irreflexive(state))
      return;
    Valuation val;
    for (int r : free_regs_) val[r] = regs[r];
    if (!result_.outcomes.count(val))
      result_.outcomes.emplace(val, Execution{state, val, trace, order_});
  }

  bool cc2_ok_after_pass(const VerificationState& state, int pos) const {
    std::vector<int> processed(order_.begin(), order_.begin() + pos + 1);
    return check_cc2(state, table_, &processed);
  }

  bool cc2_ok_mid_step(const VerificationState& state, int pos) const {
    if (!opt_.cc2_each_step) return true;
    return cc2_ok_after_pass(state, pos);
  }

  void advance(int pos, int stmt, const VerificationState& state, std::vector<Value>& regs,
               std::vector<TraceStep>& trace) {
    if (stmt + 1 < static_cast<int>(prog_.threads[order_[pos]].size())) {
      step(pos, stmt + 1, state, regs, trace);
      return;
    }
    if (!cc2_ok_after_pass(state, pos)) return;
    enter_thread(pos + 1, state, regs, trace);
  }

  void step(int pos, int stmt, const VerificationState& state, std::vector<Value>& regs,
            std::vector<TraceStep>& trace) {
    budget();
    int t = order_[pos];
    const auto& body = prog_.threads[t];
    if (body.empty()) {
      enter_thread(pos + 1, state, regs, trace);
      return;
    }
    const Statement& s = body[stmt];

    if (const auto* store = std::get_if<StoreStmt>(&s)) {
      Value v = eval(store->value, regs);
      auto res = step_write(state, table_, t, store->loc, v);
      if (const auto* miss = std::get_if<NoTransition>(&res)) {
        seen_mismatches_.insert({t, stmt, miss->value, miss->from});
        return;
      }
      const auto& next = std::get<VerificationState>(res);
      StateId written = *next.view[t][store->loc][t];
      // The write's tau pair is forced; if it closed a cycle, the branch
      // observed contradictory modification orders and dies here.
      if (tau_before(next, store->loc, written, written)) return;
      trace.push_back({t, stmt, Rule::Write, written, std::nullopt});
      if (cc2_ok_mid_step(next, pos)) advance(pos, stmt, next, regs, trace);
      trace.pop_back();
      return;
    }

    if (const auto* load = std::get_if<LoadStmt>(&s)) {
      auto choices = step_read(state, table_, t, load->loc);
      if (opt_.reverse_choices) std::reverse(choices.begin(), choices.end());
      for (const auto& c : choices) {
        Value saved = regs[load->dst];
        regs[load->dst] = c.value;
        trace.push_back({t, stmt, Rule::Read, c.chosen, std::nullopt});
        if (cc2_ok_mid_step(c.state, pos)) advance(pos, stmt, c.state, regs, trace);
        trace.pop_back();
        regs[load->dst] = saved;
      }
      return;
    }

    const auto& rmw = std::get<RmwStmt>(s);
    auto choices =
        step_rmw(state, table_, t, rmw.loc, eval(rmw.expected, regs), eval(rmw.desired, regs));
    if (opt_.reverse_choices) std::reverse(choices.begin(), choices.end());
    for (const auto& c : choices) {
      if (c.success && (tau_before(c.state, rmw.loc, c.read_from, c.read_from) ||
                        tau_before(c.state, rmw.loc, *c.written, *c.written)))
        continue;
      if (opt_.eager_prune && c.success &&
          (!check_cc3(c.state) || !check_cc4(c.state, table_)))
        continue;
      std::optional<Value> saved;
      if (rmw.result >= 0) {
        saved = regs[rmw.result];
        regs[rmw.result] = c.success ? 1 : 0;
      }
      trace.push_back({t, stmt, c.success ? Rule::RmwS : Rule::RmwF, c.read_from, c.written});
      if (cc2_ok_mid_step(c.state, pos)) advance(pos, stmt, c.state, regs, trace);
      trace.pop_back();
      if (saved) regs[rmw.result] = *saved;
    }
  }
};

}  // namespace detail

inline OutcomeSet explore(const LitmusProgram& prog, const ProtocolTable& table,
                          const ExploreOptions& opt = {}) {
  return detail::Explorer(prog, table, opt).run();
}

class ReplayError : public std::runtime_error {
public:
  explicit ReplayError(const std::string& msg) : std::runtime_error("replay: " + msg) {}
};

// Re-runs a witness trace, checking every rule precondition, and returns the
// reproduced execution. Deterministic given the recorded choices.
inline Execution replay(const LitmusProgram& prog, const ProtocolTable& table,
                        const Execution& exec) {
  VerificationState st = init_state(table, prog.num_threads(), prog.num_locations());
  std::vector<Value> regs(prog.registers.size(), 0);
  size_t next = 0;
  for (int t : exec.thread_order) {
    st = reset_pi(st, t, table);
    for (int stmt = 0; stmt < static_cast<int>(prog.threads[t].size()); ++stmt) {
      if (next >= exec.trace.size()) throw ReplayError("trace too short");
      const TraceStep& step = exec.trace[next++];
      if (step.thread != t || step.stmt != stmt)
        throw ReplayError("trace step out of order");
      const Statement& s = prog.threads[t][stmt];
      if (const auto* store = std::get_if<StoreStmt>(&s)) {
        if (step.rule != Rule::Write) throw ReplayError("expected Write step");
        Value v = store->value.is_literal ? store->value.literal : regs[store->value.reg];
        auto res = step_write(st, table, t, store->loc, v);
        if (std::holds_alternative<NoTransition>(res))
          throw ReplayError("write has no transition");
        st = std::get<VerificationState>(res);
        if (st.view[t][store->loc][t] != step.chosen) throw ReplayError("write state mismatch");
      } else if (const auto* load = std::get_if<LoadStmt>(&s)) {
        if (step.rule != Rule::Read) throw ReplayError("expected Read step");
        auto choices = step_read(st, table, t, load->loc);
        auto it = std::find_if(choices.begin(), choices.end(),
                               [&](const ReadResult& c) { return c.chosen == step.chosen; });
        if (it == choices.end()) throw ReplayError("recorded read not in read set");
        regs[load->dst] = it->value;
        st = it->state;
      } else {
        const auto& rmw = std::get<RmwStmt>(s);
        bool want_success = step.rule == Rule::RmwS;
        if (step.rule != Rule::RmwS && step.rule != Rule::RmwF)
          throw ReplayError("expected rmw step");
        Value expected = rmw.expected.is_literal ? rmw.expected.literal : regs[rmw.expected.reg];
        Value desired = rmw.desired.is_literal ? rmw.desired.literal : regs[rmw.desired.reg];
        auto choices = step_rmw(st, table, t, rmw.loc, expected, desired);
        auto it = std::find_if(choices.begin(), choices.end(), [&](const RmwResult& c) {
          return c.read_from == step.chosen && c.success == want_success;
        });
        if (it == choices.end()) throw ReplayError("recorded rmw branch not enabled");
        if (rmw.result >= 0) regs[rmw.result] = it->success ? 1 : 0;
        st = it->state;
      }
    }
  }
  if (next != exec.trace.size()) throw ReplayError("trace too long");
  if (!check_cc1(st, table) || !check_cc2(st, table) || !check_cc3(st) ||
      !check_cc4(st, table) || !tau_irreflexive(st))
    throw ReplayError("replayed execution fails a consistency check");
  Valuation val;
  for (int r : free_registers(prog)) val[r] = regs[r];
  return Execution{st, val, exec.trace, exec.thread_order};
}

struct Verdict {
  Expectation expectation;
  bool holds = false;
  std::optional<Execution> witness;  // satisfying execution, when one exists
};

inline bool satisfies(const Valuation& val, const std::vector<std::pair<int, Value>>& clause) {
  for (const auto& [reg, v] : clause) {
    auto it = val.find(reg);
    Value actual = it == val.end() ? 0 : it->second;
    if (actual != v) return false;
  }
  return true;
}

inline Verdict query(const OutcomeSet& outcomes, const Expectation& expectation) {
  Verdict verdict{expectation, false, std::nullopt};
  for (const auto& [val, exec] : outcomes.outcomes) {
    if (satisfies(val, expectation.clause)) {
      verdict.witness = exec;
      break;
    }
  }
  bool reachable_outcome = verdict.witness.has_value();
  verdict.holds = expectation.polarity == Expectation::Polarity::Allowed ? reachable_outcome
                                                                         : !reachable_outcome;
  return verdict;
}

struct CheckReport {
  OutcomeSet outcomes;
  std::vector<Verdict> verdicts;
  bool overall_pass = false;
};

inline CheckReport check_expectations(const LitmusProgram& prog, const ProtocolTable& table,
                                      const ExploreOptions& opt = {}) {
  CheckReport report;
  report.outcomes = explore(prog, table, opt);
  report.overall_pass = true;
  for (const auto& e : prog.expectations) {
    report.verdicts.push_back(query(report.outcomes, e));
    if (!report.verdicts.back().holds) report.overall_pass = false;
  }
  // A protocol/program mismatch that kills every execution makes any verdict
  // vacuous; surface it as a failure rather than a pass.
  if (report.outcomes.outcomes.empty() && !report.outcomes.mismatches.empty())
    report.overall_pass = false;
  return report;
}

}  // namespace vbp
