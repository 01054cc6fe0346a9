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

// Subcommands behind the nash_unicast command-line tool. Each returns the
// process exit code: 0 when every gated check passes, 2 when one fails, 1 on
// error.

#pragma once

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nash_unicast/dynamics.hpp"
#include "nash_unicast/equilibrium.hpp"
#include "nash_unicast/error.hpp"
#include "nash_unicast/mechanism.hpp"
#include "nash_unicast/scenario.hpp"
#include "nash_unicast/solver.hpp"

namespace nash_unicast::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFailedCheck = 2;

inline constexpr const char* kReportSchema = "nash-unicast/report-v1";

// Gate tolerances for audits.
inline constexpr double kPriceUniformityTol = 1e-12;
inline constexpr double kSlacknessTol = 1e-6;
inline constexpr double kTaxDerivativeTol = 1e-5;
inline constexpr double kBestResponseTol = 1e-4;
inline constexpr double kIrTol = 1e-9;
inline constexpr double kBudgetTol = 1e-9;
inline constexpr double kCorollaryTol = 1e-9;
inline constexpr double kOptimalityTol = 1e-6;
inline constexpr double kWalrasianStep = 1e-3;
inline constexpr int kDefaultAuditGrid = 200;

struct Options {
  std::string scenario;
  std::string profile;
  std::string out;
  std::optional<int> grid;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

/// Verbosity from NASH_UNICAST_LOG: "quiet", "info" (default) or "debug".
class Log {
 public:
  explicit Log(std::ostream& sink) : sink_(sink) {
    const char* env = std::getenv("NASH_UNICAST_LOG");
    const std::string v = env ? env : "info";
    level_ = v == "quiet" ? 0 : v == "debug" ? 2 : 1;
  }
  void info(const std::string& msg) const {
    if (level_ >= 1) sink_ << "[info] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= 2) sink_ << "[debug] " << msg << '\n';
  }
  void error(const std::string& msg) const { sink_ << "error: " << msg << '\n'; }

 private:
  std::ostream& sink_;
  int level_ = 1;
};

/// Rounds to 12 significant digits.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  bool pass = true;
  bool gated = true;
  std::string note;
};

inline Check at_most(std::string name, double value, double tol) {
  return Check{std::move(name), value, tol, "<=", value <= tol, true, ""};
}
inline Check at_least(std::string name, double value, double tol) {
  return Check{std::move(name), value, tol, ">=", value >= tol, true, ""};
}
inline Check is_true(std::string name, bool value) {
  return Check{std::move(name), value ? 1.0 : 0.0, 1.0, "==", value, true, ""};
}

inline nlohmann::json checks_to_json(const std::vector<Check>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json row{{"check", c.name},
                       {"value", round12(c.value)},
                       {"tolerance", c.tolerance},
                       {"relation", c.relation},
                       {"pass", c.pass},
                       {"gated", c.gated}};
    if (!c.note.empty()) row["note"] = c.note;
    out.push_back(row);
  }
  return out;
}

inline bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return !c.gated || c.pass; });
}

inline std::string first_failure(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (c.gated && !c.pass) return c.name;
  }
  return "";
}

namespace detail {

inline Scenario load_with_overrides(const Options& opt) {
  Scenario sc = load_scenario(opt.scenario);
  if (opt.seed) {
    sc.params.rng_seed = *opt.seed;
    sc.dynamics.seed = *opt.seed;
  }
  if (opt.tolerance) {
    if (!(*opt.tolerance > 0.0)) {
      throw Error(ErrorCode::kInvalidParams, "--tolerance must be positive");
    }
    sc.solver.tolerance = *opt.tolerance;
  }
  if (opt.grid) {
    if (*opt.grid < 2) {
      throw Error(ErrorCode::kInvalidParams, "--grid must be at least 2");
    }
    sc.dynamics.br_grid = *opt.grid;
  }
  return sc;
}

inline bool all_concave(const Scenario& sc) {
  return std::all_of(sc.utilities.begin(), sc.utilities.end(),
                     [](const UtilitySpec& u) { return is_concave(u); });
}

// Two-user links that have no eligible subsidy recipient.
inline std::vector<std::string> unassigned_links(const Scenario& sc,
                                                 const SubsidyAssignment& s) {
  std::vector<std::string> out;
  for (const LinkId l : sc.network.links()) {
    if (sc.network.group_size(l) == 2 && !s.recipient.count(l)) {
      out.push_back(sc.network.link_name(l));
    }
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

inline Check budget_check(double gap, const std::vector<std::string>& missing) {
  Check c = at_most("budget_gap", gap, kBudgetTol);
  if (!missing.empty()) {
    c.gated = false;
    c.note = "not applicable: no eligible subsidy recipient on two-user "
             "link(s) " + join(missing);
  }
  return c;
}

inline nlohmann::json allocation_to_json(const Scenario& sc,
                                         const Allocation& a,
                                         const SubsidyAssignment& s) {
  const Network& net = sc.network;
  nlohmann::json users = nlohmann::json::array();
  for (const UserId i : net.users()) {
    users.push_back(
        {{"user", net.user_name(i)},
         {"x", round12(a.x[i.value])},
         {"tax", round12(a.t[i.value])},
         {"subsidy", round12(a.breakdown.subsidy[i.value])},
         {"payoff",
          round12(payoff(sc.utilities[i.value], a.x[i.value], a.t[i.value]))}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto& e : a.breakdown.entries) {
    links.push_back({{"user", net.user_name(e.user)},
                     {"link", net.link_name(e.link)},
                     {"delta1", round12(e.delta1)},
                     {"delta2", round12(e.delta2)},
                     {"delta3", round12(e.delta3)},
                     {"penalty", round12(e.penalty)},
                     {"tax", round12(e.total())}});
  }
  nlohmann::json recipients = nlohmann::json::object();
  for (const auto& [l, u] : s.recipient) {
    recipients[net.link_name(l)] = net.user_name(u);
  }
  return {{"users", users}, {"links", links}, {"recipients", recipients}};
}

// The gated audit rows shared by audit, simulate and report.
inline std::vector<Check> audit_checks(const Scenario& sc,
                                       const MessageProfile& profile,
                                       const SubsidyAssignment& subsidies,
                                       int grid, const Log& log,
                                       nlohmann::json* details) {
  const NeAuditReport r =
      audit(sc.network, sc.utilities, profile, sc.params, subsidies, grid);
  std::vector<Check> checks;
  checks.push_back(is_true("feasibility", r.feasibility));
  checks.push_back(
      at_most("price_uniformity", r.price_uniformity, kPriceUniformityTol));
  checks.push_back(at_most("complementary_slackness",
                           r.complementary_slackness, kSlacknessTol));
  checks.push_back(
      at_most("tax_derivative_gap", r.tax_derivative_gap, kTaxDerivativeTol));
  checks.push_back(
      at_most("best_response_gap", r.best_response_gap, kBestResponseTol));
  checks.push_back(at_least("ir_min_payoff", r.ir_min_payoff, -kIrTol));
  checks.push_back(
      budget_check(r.budget_gap, unassigned_links(sc, subsidies)));
  checks.push_back(at_most("corollary_tax_gap_balanced",
                           r.balanced_corollary_gap, kCorollaryTol));
  Check verbatim =
      at_most("corollary_tax_gap_verbatim", r.corollary_tax_gap, kCorollaryTol);
  verbatim.gated = false;
  verbatim.note =
      "three-user closed form with +p^2 x_k/gamma; not budget-consistent";
  checks.push_back(verbatim);

  if (r.price_uniformity <= kPriceUniformityTol) {
    const auto w =
        check_walrasian(sc.network, sc.utilities, profile, kWalrasianStep);
    double worst = 0.0;
    for (double g : w.payoff_gap) worst = std::max(worst, g);
    Check c = is_true("walrasian", w.all());
    c.note = "max payoff gap " + fmt12(worst) + " at grid step 1e-3";
    checks.push_back(c);
  }
  if (all_concave(sc)) {
    log.debug("solving centralized problem for the optimality check");
    const auto sol = solve_centralized(sc.network, sc.utilities, sc.solver);
    const auto opt = check_optimality(sc.network, sc.utilities, profile, sol,
                                      sc.params, subsidies, kOptimalityTol);
    checks.push_back(at_most("welfare_gap", opt.gap, kOptimalityTol));
  }
  if (details) {
    nlohmann::json payoffs = nlohmann::json::array();
    for (double v : r.payoffs) payoffs.push_back(round12(v));
    (*details)["payoffs"] = payoffs;
  }
  return checks;
}

inline int emit(const Options& opt, const std::string& text, std::ostream& out,
                const Log& log) {
  if (opt.out.empty()) {
    out << text;
    return 0;
  }
  std::ofstream f(opt.out);
  if (!f) {
    log.error("cannot write " + opt.out);
    return kExitError;
  }
  f << text;
  log.info("wrote " + opt.out);
  return 0;
}

inline nlohmann::json report_header(const std::string& command,
                                    const Scenario& sc) {
  return {{"schema", kReportSchema},
          {"command", command},
          {"scenario", sc.name},
          {"digest", sc.digest}};
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  const Log log(err);
  try {
    return body(log);
  } catch (const Error& e) {
    log.error(e.what());
    return kExitError;
  } catch (const std::exception& e) {
    log.error(e.what());
    return kExitError;
  }
}

inline MessageProfile profile_for(const Options& opt, const Scenario& sc) {
  if (!opt.profile.empty()) return load_profile(sc.network, opt.profile);
  if (sc.profile) return *sc.profile;
  throw Error(ErrorCode::kValidationError,
              "no message profile: pass --profile or add a \"profile\" "
              "section to the scenario");
}

}  // namespace detail

inline int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&](const Log& log) {
    const Scenario sc = detail::load_with_overrides(opt);
    log.info("solving '" + sc.name + "'");
    const SolveResult r = solve_centralized(sc.network, sc.utilities, sc.solver);
    nlohmann::json doc = detail::report_header("solve", sc);
    nlohmann::json users = nlohmann::json::array();
    for (const UserId i : sc.network.users()) {
      users.push_back({{"user", sc.network.user_name(i)},
                       {"x", round12(r.x_star[i.value])},
                       {"nu", round12(r.nu_star[i.value])}});
    }
    nlohmann::json links = nlohmann::json::array();
    for (const LinkId l : sc.network.links()) {
      links.push_back({{"link", sc.network.link_name(l)},
                       {"lambda", round12(r.lambda_star[l.value])}});
    }
    const std::vector<Check> checks{
        at_most("kkt_residual", r.kkt_residual, sc.solver.tolerance)};
    doc["users"] = users;
    doc["links"] = links;
    doc["objective"] = round12(r.objective);
    doc["iterations"] = r.iterations;
    doc["checks"] = checks_to_json(checks);
    doc["passed"] = all_pass(checks);
    if (int rc = detail::emit(opt, doc.dump(2) + "\n", out, log)) return rc;
    return all_pass(checks) ? kExitPass : kExitFailedCheck;
  });
}

inline int cmd_construct_ne(const Options& opt, std::ostream& out,
                            std::ostream& err) {
  return detail::guarded(err, [&](const Log& log) {
    const Scenario sc = detail::load_with_overrides(opt);
    log.info("constructing equilibrium for '" + sc.name + "'");
    const SolveResult sol =
        solve_centralized(sc.network, sc.utilities, sc.solver);
    const MessageProfile profile =
        profile_from_solution(sc.network, sol, sc.params);
    const auto subsidies =
        assign_subsidies(sc.network, sc.params.rng_seed, true);
    const Allocation alloc =
        outcome(sc.network, profile, sc.params, subsidies);

    double sum_t = 0.0;
    for (double t : alloc.t) sum_t += t;
    const double balanced = nash_unicast::detail::corollary_gap(
        sc.network, profile, sc.params, subsidies, alloc, true);
    const double verbatim = nash_unicast::detail::corollary_gap(
        sc.network, profile, sc.params, subsidies, alloc, false);
    std::vector<Check> checks;
    checks.push_back(
        detail::budget_check(std::abs(sum_t),
                             detail::unassigned_links(sc, subsidies)));
    checks.push_back(
        at_most("corollary_tax_gap_balanced", balanced, kCorollaryTol));
    Check v = at_most("corollary_tax_gap_verbatim", verbatim, kCorollaryTol);
    v.gated = false;
    v.note = "three-user closed form with +p^2 x_k/gamma; not budget-consistent";
    checks.push_back(v);

    nlohmann::json doc = detail::report_header("construct-ne", sc);
    doc["messages"] = profile_to_json(sc.network, profile);
    doc["allocation"] = detail::allocation_to_json(sc, alloc, subsidies);
    doc["welfare"] = round12(welfare(sc.utilities, alloc.x));
    doc["checks"] = checks_to_json(checks);
    doc["passed"] = all_pass(checks);
    if (int rc = detail::emit(opt, doc.dump(2) + "\n", out, log)) return rc;
    return all_pass(checks) ? kExitPass : kExitFailedCheck;
  });
}

inline int cmd_audit(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&](const Log& log) {
    const Scenario sc = detail::load_with_overrides(opt);
    const MessageProfile profile = detail::profile_for(opt, sc);
    validate_profile(sc.network, profile, sc.params);
    const int grid = opt.grid.value_or(kDefaultAuditGrid);
    log.info("auditing '" + sc.name + "' on a " + std::to_string(grid) +
             "-point lattice");
    const auto subsidies =
        assign_subsidies(sc.network, sc.params.rng_seed, true);
    const Allocation alloc =
        outcome(sc.network, profile, sc.params, subsidies);
    nlohmann::json details;
    const auto checks =
        detail::audit_checks(sc, profile, subsidies, grid, log, &details);

    nlohmann::json doc = detail::report_header("audit", sc);
    doc["grid"] = grid;
    doc["allocation"] = detail::allocation_to_json(sc, alloc, subsidies);
    doc["checks"] = checks_to_json(checks);
    doc["passed"] = all_pass(checks);
    if (!all_pass(checks)) {
      log.info("failed check: " + first_failure(checks));
      doc["failed"] = first_failure(checks);
    }
    if (int rc = detail::emit(opt, doc.dump(2) + "\n", out, log)) return rc;
    return all_pass(checks) ? kExitPass : kExitFailedCheck;
  });
}

namespace detail {

inline std::string prices_text(const Network& net, const Message& m) {
  std::string s;
  for (const auto& [l, p] : m.prices) {
    s += (s.empty() ? "" : ",") + net.link_name(l) + "=" + fmt12(p);
  }
  return s;
}

}  // namespace detail

/// Row-per-step TSV log of a best-response run, followed by the verdict and,
/// for converged runs, the audit of the endpoint.
inline int cmd_simulate(const Options& opt, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&](const Log& log) {
    const Scenario sc = detail::load_with_overrides(opt);
    const MessageProfile start = !opt.profile.empty() || sc.profile
                                     ? detail::profile_for(opt, sc)
                                     : start_profile(sc);
    const auto subsidies =
        assign_subsidies(sc.network, sc.params.rng_seed, true);
    log.info("simulating '" + sc.name + "' with a " +
             std::to_string(sc.dynamics.br_grid) + "-point lattice");
    const Trajectory traj = run_dynamics(sc.network, sc.utilities, start,
                                         sc.dynamics, sc.params, subsidies);
    std::ostringstream s;
    s << "# scenario\t" << sc.name << "\tdigest\t" << sc.digest << '\n';
    s << "round\tuser\told_x\told_prices\tnew_x\tnew_prices\tpayoff_delta\n";
    for (const Step& st : traj.steps) {
      s << st.round << '\t' << sc.network.user_name(st.user) << '\t'
        << fmt12(st.old_message.x) << '\t'
        << detail::prices_text(sc.network, st.old_message) << '\t'
        << fmt12(st.new_message.x) << '\t'
        << detail::prices_text(sc.network, st.new_message) << '\t'
        << fmt12(st.payoff_delta) << '\n';
    }
    s << "# verdict\t" << to_string(traj.verdict) << "\trounds\t" << traj.rounds
      << '\n';
    bool pass = traj.verdict == Verdict::kConverged;
    if (pass) {
      const auto checks =
          detail::audit_checks(sc, traj.final_profile, subsidies,
                               sc.dynamics.br_grid, log, nullptr);
      for (const auto& c : checks) {
        s << "# check\t" << c.name << '\t' << fmt12(c.value) << '\t'
          << c.relation << ' ' << fmt12(c.tolerance) << '\t'
          << (c.pass ? "pass" : "FAIL") << (c.gated ? "" : " (info)") << '\n';
      }
      pass = all_pass(checks);
    }
    for (const UserId i : sc.network.users()) {
      const Message& m = traj.final_profile[i.value];
      s << "# final\t" << sc.network.user_name(i) << '\t' << fmt12(m.x) << '\t'
        << detail::prices_text(sc.network, m) << '\n';
    }
    if (int rc = detail::emit(opt, s.str(), out, log)) return rc;
    return pass ? kExitPass : kExitFailedCheck;
  });
}

struct ReportRow {
  std::string file;
  std::string name;
  std::size_t users = 0;
  std::size_t links = 0;
  std::string mode;
  double welfare = 0.0;
  double budget_gap = 0.0;
  double br_gap = 0.0;
  int status = kExitPass;
  std::string detail;
};

namespace detail {

inline ReportRow report_one(const std::filesystem::path& path,
                            const Options& opt) {
  ReportRow row;
  row.file = path.filename().string();
  std::ostringstream sink;
  const Log log(sink);
  try {
    Options o = opt;
    o.scenario = path.string();
    const Scenario sc = load_with_overrides(o);
    row.name = sc.name;
    row.users = sc.network.num_users();
    row.links = sc.network.num_links();
    const auto subsidies =
        assign_subsidies(sc.network, sc.params.rng_seed, true);
    MessageProfile profile;
    int grid = opt.grid.value_or(kDefaultAuditGrid);
    if (all_concave(sc)) {
      row.mode = "construct-ne";
      profile = construct_ne(sc.network, sc.utilities, sc.params, sc.solver);
    } else {
      row.mode = "dynamics";
      const auto traj =
          run_dynamics(sc.network, sc.utilities,
                       sc.profile ? *sc.profile : start_profile(sc),
                       sc.dynamics, sc.params, subsidies);
      profile = traj.final_profile;
      grid = sc.dynamics.br_grid;
      if (traj.verdict != Verdict::kConverged) {
        row.status = kExitFailedCheck;
        row.detail = std::string("dynamics ") +
                     std::string(to_string(traj.verdict));
        return row;
      }
    }
    const Allocation alloc =
        outcome(sc.network, profile, sc.params, subsidies);
    row.welfare = welfare(sc.utilities, alloc.x);
    double sum_t = 0.0;
    for (double t : alloc.t) sum_t += t;
    row.budget_gap = std::abs(sum_t);
    const auto checks = audit_checks(sc, profile, subsidies, grid, log, nullptr);
    for (const auto& c : checks) {
      if (c.name == "best_response_gap") row.br_gap = c.value;
    }
    if (!all_pass(checks)) {
      row.status = kExitFailedCheck;
      row.detail = "failed " + first_failure(checks);
    } else {
      row.detail = "ok";
    }
  } catch (const std::exception& e) {
    row.status = kExitError;
    row.detail = e.what();
  }
  return row;
}

}  // namespace detail

/// Summary table over every *.json scenario in a directory, evaluated
/// concurrently.
inline int cmd_report(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&](const Log& log) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(opt.scenario)) {
      throw Error(ErrorCode::kValidationError,
                  "report expects a directory, got '" + opt.scenario + "'");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opt.scenario)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    log.info("reporting on " + std::to_string(files.size()) + " scenario(s)");
    std::vector<std::future<ReportRow>> jobs;
    for (const auto& f : files) {
      jobs.push_back(std::async(std::launch::async, detail::report_one, f, opt));
    }
    std::ostringstream s;
    s << "file\tscenario\tusers\tlinks\tmode\twelfare\tbudget_gap\t"
         "best_response_gap\tstatus\tdetail\n";
    int rc = kExitPass;
    for (auto& job : jobs) {
      const ReportRow row = job.get();
      const char* status = row.status == kExitPass          ? "pass"
                           : row.status == kExitFailedCheck ? "FAIL"
                                                            : "ERROR";
      s << row.file << '\t' << row.name << '\t' << row.users << '\t'
        << row.links << '\t' << row.mode << '\t' << fmt12(row.welfare) << '\t'
        << fmt12(row.budget_gap) << '\t' << fmt12(row.br_gap) << '\t' << status
        << '\t' << row.detail << '\n';
      if (row.status == kExitError) {
        rc = kExitError;
      } else if (row.status == kExitFailedCheck && rc == kExitPass) {
        rc = kExitFailedCheck;
      }
    }
    if (int e = detail::emit(opt, s.str(), out, log)) return e;
    return rc;
  });
}

}  // namespace nash_unicast::cli
