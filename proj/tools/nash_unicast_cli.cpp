// Copyright 2026 The nash-unicast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nash_unicast: solve, construct-ne, audit, simulate, report.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nash_unicast/cli.hpp"

namespace {

using nash_unicast::cli::Options;

void add_common(CLI::App* cmd, Options& opt, bool needs_profile) {
  cmd->add_option("--scenario", opt.scenario, "Scenario file (or directory)")
      ->required();
  if (needs_profile) {
    cmd->add_option("--profile", opt.profile, "Message profile file");
  }
  cmd->add_option("--out", opt.out, "Write the result here instead of stdout");
  cmd->add_option("--grid", opt.grid, "Lattice points per axis");
  cmd->add_option("--seed", opt.seed, "Override the scenario seeds");
  cmd->add_option("--tolerance", opt.tolerance, "Solver KKT tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized unicast rate allocation: solve, build and audit "
               "Nash equilibria of the tax mechanism"};
  app.require_subcommand(1);
  Options opt;
  auto* solve = app.add_subcommand("solve", "Solve the centralized problem");
  auto* construct =
      app.add_subcommand("construct-ne", "Build the equilibrium profile");
  auto* audit = app.add_subcommand("audit", "Audit a message profile");
  auto* simulate =
      app.add_subcommand("simulate", "Run best-response dynamics");
  auto* report =
      app.add_subcommand("report", "Summarize a directory of scenarios");
  add_common(solve, opt, false);
  add_common(construct, opt, false);
  add_common(audit, opt, true);
  add_common(simulate, opt, true);
  add_common(report, opt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nash_unicast::cli::kExitError;
  }

  namespace c = nash_unicast::cli;
  if (solve->parsed()) return c::cmd_solve(opt, std::cout, std::cerr);
  if (construct->parsed()) return c::cmd_construct_ne(opt, std::cout, std::cerr);
  if (audit->parsed()) return c::cmd_audit(opt, std::cout, std::cerr);
  if (simulate->parsed()) return c::cmd_simulate(opt, std::cout, std::cerr);
  if (report->parsed()) return c::cmd_report(opt, std::cout, std::cerr);
  return c::kExitError;
}
