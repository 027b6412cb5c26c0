#include <CLI11.hpp>

#include "vbp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"litmus test checker for relaxed atomics over view-based protocols"};
  app.require_subcommand(1);

  std::string path;
  vbp::cli::Options opt;
  std::string thread_orders = "all";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", path, "litmus test file")->required();
    cmd->add_option("--thread-orders", thread_orders, "thread processing orders: all or fixed")
        ->check(CLI::IsMember({"all", "fixed"}));
    cmd->add_option("--max-branches", opt.max_branches, "exploration branch cap");
  };

  auto* check = app.add_subcommand("check", "verify a litmus file's expectations");
  add_common(check);
  check->add_flag("--json", opt.json, "emit a JSON report");
  check->add_flag("--quiet", opt.quiet, "suppress the report text");
  check->add_flag("--timings", opt.timings, "include wall_ms in the JSON report");

  auto* outcomes = app.add_subcommand("outcomes", "list all consistent final valuations");
  add_common(outcomes);
  std::string witness;
  outcomes->add_option("--witness", witness,
                       "print a trace for a valuation matching R==V,... or UNREACHABLE");

  auto* oracle = app.add_subcommand("oracle", "brute-force outcome set (debugging)");
  add_common(oracle);
  oracle->group("");  // hidden

  CLI11_PARSE(app, argc, argv);
  opt.all_orders = thread_orders == "all";
  if (!witness.empty()) opt.witness_clause = witness;

  if (check->parsed()) return vbp::cli::cmd_check(path, opt, std::cout, std::cerr);
  if (outcomes->parsed()) return vbp::cli::cmd_outcomes(path, opt, std::cout, std::cerr);
  return vbp::cli::cmd_oracle(path, opt, std::cout, std::cerr);
}
