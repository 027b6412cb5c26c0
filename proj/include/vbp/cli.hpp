#pragma once

// Command implementations behind the command-line tool: check litmus files,
// dump outcome sets, print witness traces, emit machine-readable reports.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "vbp/explorer.hpp"
#include "vbp/oracle.hpp"
#include "vbp/protocol.hpp"

namespace vbp::cli {

// Exit codes: 0 pass, 1 expectation violation or protocol mismatch,
// 2 parse/validation error, 3 resource limit exceeded.
inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitResourceLimit = 3;

struct Options {
  bool json = false;
  bool all_orders = true;
  long max_branches = 1'000'000;
  bool quiet = false;
  bool timings = false;  // include wall_ms in JSON (breaks byte-stability)
  std::optional<std::string> witness_clause;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExploreOptions to_explore_options(const Options& opt) {
  ExploreOptions e;
  e.all_orders = opt.all_orders;
  e.max_branches = opt.max_branches;
  return e;
}

inline std::string format_valuation(const LitmusProgram& prog, const Valuation& val) {
  // Sorted by register name for a canonical listing.
  std::vector<std::pair<std::string, Value>> named;
  for (const auto& [r, v] : val) named.emplace_back(prog.registers[r].name, v);
  std::sort(named.begin(), named.end());
  std::string out;
  for (size_t i = 0; i < named.size(); ++i) {
    if (i) out += " ";
    out += named[i].first + "=" + std::to_string(named[i].second);
  }
  return out.empty() ? "(no registers)" : out;
}

inline std::string format_mismatch(const LitmusProgram& prog, const ProtocolTable& table,
                                   const ProtocolMismatch& m) {
  std::string out = "protocol mismatch: " + prog.thread_names[m.thread] + " `" +
                    format_statement(prog, prog.threads[m.thread][m.stmt]) +
                    "` has no transition labeled " + std::to_string(m.value);
  out += m.state ? " from " + format_state(prog, table, *m.state) : " (no protocol)";
  return out;
}

inline std::string format_trace(const LitmusProgram& prog, const ProtocolTable& table,
                                const Execution& exec) {
  std::ostringstream os;
  os << "thread order:";
  for (int t : exec.thread_order) os << " " << prog.thread_names[t];
  os << "\n";
  for (const auto& step : exec.trace) {
    os << "  " << prog.thread_names[step.thread] << "[" << step.stmt << "] "
       << format_statement(prog, prog.threads[step.thread][step.stmt]);
    switch (step.rule) {
      case Rule::Write:
        os << "  (write -> " << format_state(prog, table, step.chosen) << ")";
        break;
      case Rule::Read:
        os << "  (read " << table.value_of(step.chosen) << " from "
           << format_state(prog, table, step.chosen) << ")";
        break;
      case Rule::RmwS:
        os << "  (rmw success: read from " << format_state(prog, table, step.chosen)
           << ", wrote " << format_state(prog, table, *step.written) << ")";
        break;
      case Rule::RmwF:
        os << "  (rmw failure: read " << table.value_of(step.chosen) << " from "
           << format_state(prog, table, step.chosen) << ")";
        break;
    }
    os << "\n";
  }
  return os.str();
}

inline nlohmann::ordered_json json_report(const LitmusProgram& prog, const ProtocolTable& table,
                                          const CheckReport& report, const Options& opt,
                                          long wall_ms) {
  nlohmann::ordered_json j;
  j["test"] = prog.name;
  j["protocols"] = table.derived ? "derived" : "explicit";
  j["outcomes"] = nlohmann::ordered_json::array();
  for (const auto& [val, exec] : report.outcomes.outcomes) {
    nlohmann::ordered_json regs = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, Value>> named;
    for (const auto& [r, v] : val) named.emplace_back(prog.registers[r].name, v);
    std::sort(named.begin(), named.end());
    for (const auto& [name, v] : named) regs[name] = v;
    j["outcomes"].push_back({{"regs", regs}, {"witness_len", exec.trace.size()}});
  }
  j["expectations"] = nlohmann::ordered_json::array();
  for (const auto& v : report.verdicts) {
    j["expectations"].push_back(
        {{"polarity",
          v.expectation.polarity == Expectation::Polarity::Allowed ? "allowed" : "forbidden"},
         {"clause", format_clause(prog, v.expectation.clause)},
         {"status", v.holds ? "holds" : "violated"}});
  }
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& w : table.warnings) j["diagnostics"].push_back(w);
  for (const auto& m : report.outcomes.mismatches)
    j["diagnostics"].push_back(format_mismatch(prog, table, m));
  j["stats"] = {{"branches", report.outcomes.branches}, {"orders", report.outcomes.orders}};
  if (opt.timings) j["stats"]["wall_ms"] = wall_ms;
  return j;
}

struct LoadedTest {
  LitmusProgram prog;
  ProtocolTable table;
};

inline LoadedTest load(const std::string& path, std::ostream& err) {
  LoadedTest lt;
  lt.prog = parse_litmus(read_file(path));
  lt.table = resolve_protocols(lt.prog);
  for (const auto& w : lt.table.warnings) err << "warning: " << w << "\n";
  return lt;
}

}  // namespace detail

inline int cmd_check(const std::string& path, const Options& opt, std::ostream& out,
                     std::ostream& err) {
  using namespace detail;
  try {
    auto start = std::chrono::steady_clock::now();
    LoadedTest lt = load(path, err);
    CheckReport report = check_expectations(lt.prog, lt.table, to_explore_options(opt));
    long wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (opt.json) {
      out << json_report(lt.prog, lt.table, report, opt, wall_ms).dump(2) << "\n";
    } else if (!opt.quiet) {
      out << "test " << lt.prog.name << " (" << (lt.table.derived ? "derived" : "explicit")
          << " protocols)\n";
      for (const auto& v : report.verdicts) {
        out << "  "
            << (v.expectation.polarity == Expectation::Polarity::Allowed ? "allowed"
                                                                         : "forbidden")
            << " { " << format_clause(lt.prog, v.expectation.clause)
            << " }: " << (v.holds ? "HOLDS" : "VIOLATED") << "\n";
      }
      if (report.verdicts.empty()) {
        out << "  no expectations; consistent outcomes:\n";
        for (const auto& [val, exec] : report.outcomes.outcomes)
          out << "    " << format_valuation(lt.prog, val) << "\n";
      }
      for (const auto& m : report.outcomes.mismatches)
        out << "  " << format_mismatch(lt.prog, lt.table, m) << "\n";
      out << (report.overall_pass ? "PASS" : "FAIL") << "\n";
    }
    return report.overall_pass ? kExitPass : kExitViolation;
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << "\n";
    return kExitResourceLimit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

namespace detail {

inline std::vector<std::pair<int, Value>> parse_witness_clause(const LitmusProgram& prog,
                                                               const std::string& text) {
  // Comma-separated R==V equalities, e.g. "a==2,b==1".
  std::vector<std::pair<int, Value>> clause;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto pos = item.find("==");
    if (pos == std::string::npos) throw std::runtime_error("bad witness clause: " + item);
    std::string name = item.substr(0, pos);
    name.erase(remove_if(name.begin(), name.end(), ::isspace), name.end());
    auto reg = prog.find_register(name);
    if (!reg) throw std::runtime_error("unknown register in witness clause: " + name);
    clause.emplace_back(*reg, std::stoll(item.substr(pos + 2)));
  }
  return clause;
}

}  // namespace detail

inline int cmd_outcomes(const std::string& path, const Options& opt, std::ostream& out,
                        std::ostream& err) {
  using namespace detail;
  try {
    LoadedTest lt = load(path, err);
    OutcomeSet outcomes = explore(lt.prog, lt.table, to_explore_options(opt));
    if (opt.witness_clause) {
      auto clause = parse_witness_clause(lt.prog, *opt.witness_clause);
      for (const auto& [val, exec] : outcomes.outcomes) {
        if (satisfies(val, clause)) {
          out << format_trace(lt.prog, lt.table, exec);
          return kExitPass;
        }
      }
      out << "UNREACHABLE\n";
      return kExitPass;
    }
    for (const auto& [val, exec] : outcomes.outcomes)
      out << format_valuation(lt.prog, val) << "\n";
    for (const auto& m : outcomes.mismatches)
      err << format_mismatch(lt.prog, lt.table, m) << "\n";
    return outcomes.outcomes.empty() && !outcomes.mismatches.empty() ? kExitViolation
                                                                     : kExitPass;
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << "\n";
    return kExitResourceLimit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

// Hidden debugging subcommand: brute-force outcome set for literal-store,
// rmw-free programs.
inline int cmd_oracle(const std::string& path, const Options& opt, std::ostream& out,
                      std::ostream& err) {
  using namespace detail;
  try {
    LoadedTest lt = load(path, err);
    for (const auto& val : axiomatic_outcomes(lt.prog))
      out << format_valuation(lt.prog, val) << "\n";
    return kExitPass;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace vbp::cli
