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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nash_unicast/cli.hpp"

namespace nash_unicast {
namespace {

namespace fs = std::filesystem;

const std::string kScenarioDir = NASH_UNICAST_SCENARIO_DIR;

std::string scenario_path(const std::string& name) {
  return kScenarioDir + "/" + name;
}

fs::path temp_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() /
             (std::string("nash_unicast_") + info->name());
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

nlohmann::json run(int (*cmd)(const cli::Options&, std::ostream&,
                              std::ostream&),
                   const cli::Options& opt, int expected) {
  std::ostringstream out, err;
  const int rc = cmd(opt, out, err);
  EXPECT_EQ(rc, expected) << err.str();
  if (out.str().empty()) return {};
  return nlohmann::json::parse(out.str());
}

TEST(LoadScenario, ShippedScenariosParse) {
  for (const auto& entry : fs::directory_iterator(kScenarioDir)) {
    if (entry.path().extension() != ".json") continue;
    const Scenario sc = load_scenario(entry.path().string());
    EXPECT_EQ(sc.utilities.size(), sc.network.num_users());
    EXPECT_EQ(sc.digest.size(), 16u);
  }
}

TEST(LoadScenario, ErrorsNameThePath) {
  const auto dir = temp_dir();
  auto code_and_text = [&](const std::string& text) {
    write(dir / "s.json", text);
    try {
      load_scenario((dir / "s.json").string());
    } catch (const Error& e) {
      return std::make_pair(e.code(), std::string(e.what()));
    }
    return std::make_pair(ErrorCode::kUnknownLink, std::string());
  };
  auto [c1, m1] = code_and_text("{ not json");
  EXPECT_EQ(c1, ErrorCode::kParseError);
  auto [c2, m2] = code_and_text(
      R"({"schema":"nash-unicast/scenario-v1","links":[{"id":"A","capacity":1}],
          "users":[{"id":"u","utility":{"family":"log","params":{"a":1}}}]})");
  EXPECT_EQ(c2, ErrorCode::kValidationError);
  EXPECT_NE(m2.find("'u'"), std::string::npos);
  auto [c3, m3] = code_and_text(
      R"({"schema":"nash-unicast/scenario-v1","links":[{"id":"A","capacity":1}],
          "users":[{"id":"u","route":["A"],
                    "utility":{"family":"cubic","params":{"a":1}}}]})");
  EXPECT_EQ(c3, ErrorCode::kParseError);
  auto [c4, m4] = code_and_text(
      R"({"schema":"nash-unicast/scenario-v1","links":[{"id":"A","capacity":-1}],
          "users":[{"id":"u","route":["A"],
                    "utility":{"family":"log","params":{"a":1}}}]})");
  EXPECT_EQ(c4, ErrorCode::kValidationError);
}

TEST(Profile, JsonRoundTrip) {
  const Scenario sc = load_scenario(scenario_path("mixed_groups.json"));
  const auto profile = construct_ne(sc.network, sc.utilities, sc.params);
  const nlohmann::json doc{{"messages", profile_to_json(sc.network, profile)}};
  const auto back = profile_from_json(sc.network, nlohmann::json::parse(
                                                      doc.dump()),
                                      "mem");
  ASSERT_EQ(back.size(), profile.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].x, profile[i].x);
    EXPECT_EQ(back[i].prices, profile[i].prices);
  }
}

TEST(Round12, Values) {
  EXPECT_EQ(cli::round12(2.0 / 3.0), 0.666666666667);
  EXPECT_EQ(cli::round12(0.0), 0.0);
  EXPECT_EQ(cli::fmt12(0.5), "0.5");
}

TEST(Cli, SolveGolden) {
  cli::Options opt;
  opt.scenario = scenario_path("two_users_one_link.json");
  const auto doc = run(cli::cmd_solve, opt, cli::kExitPass);
  EXPECT_EQ(doc["links"][0]["lambda"].get<double>(), 0.666666666667);
  EXPECT_EQ(doc["users"][0]["x"].get<double>(), 0.5);
  EXPECT_TRUE(doc["passed"].get<bool>());
}

TEST(Cli, ConstructThenAuditPasses) {
  const auto dir = temp_dir();
  cli::Options opt;
  opt.scenario = scenario_path("mixed_groups.json");
  opt.out = (dir / "ne.json").string();
  run(cli::cmd_construct_ne, opt, cli::kExitPass);
  cli::Options audit;
  audit.scenario = opt.scenario;
  audit.profile = opt.out;
  audit.grid = 60;
  const auto doc = run(cli::cmd_audit, audit, cli::kExitPass);
  EXPECT_TRUE(doc["passed"].get<bool>());
}

TEST(Cli, TamperedProfileFailsAudit) {
  const auto dir = temp_dir();
  cli::Options opt;
  opt.scenario = scenario_path("mixed_groups.json");
  opt.out = (dir / "ne.json").string();
  run(cli::cmd_construct_ne, opt, cli::kExitPass);
  std::ifstream in(opt.out);
  auto doc = nlohmann::json::parse(in);
  doc["messages"][0]["x"] = doc["messages"][0]["x"].get<double>() * 0.5;
  write(dir / "tampered.json", doc.dump());
  cli::Options audit;
  audit.scenario = opt.scenario;
  audit.profile = (dir / "tampered.json").string();
  audit.grid = 40;
  const auto out = run(cli::cmd_audit, audit, cli::kExitFailedCheck);
  EXPECT_FALSE(out["passed"].get<bool>());
  EXPECT_TRUE(out.contains("failed"));
}

TEST(Cli, MissingFileIsError) {
  cli::Options opt;
  opt.scenario = "/nonexistent/scenario.json";
  run(cli::cmd_solve, opt, cli::kExitError);
  opt.scenario = scenario_path("two_users_one_link.json");
  run(cli::cmd_audit, opt, cli::kExitError);  // no profile anywhere
}

TEST(Cli, BudgetNotApplicableWithoutRecipient) {
  cli::Options opt;
  opt.scenario = scenario_path("two_users_one_link.json");
  const auto doc = run(cli::cmd_construct_ne, opt, cli::kExitPass);
  bool found = false;
  for (const auto& c : doc["checks"]) {
    if (c["check"] == "budget_gap") {
      found = true;
      EXPECT_FALSE(c["gated"].get<bool>());
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, SimulateSigmoidConverges) {
  cli::Options opt;
  opt.scenario = scenario_path("sigmoid_single_link.json");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_simulate(opt, out, err), cli::kExitPass) << err.str();
  EXPECT_NE(out.str().find("# verdict\tConverged"), std::string::npos)
      << out.str();
}

TEST(Cli, SimulateIsReproducible) {
  cli::Options opt;
  opt.scenario = scenario_path("sigmoid_single_link.json");
  opt.seed = 5;
  std::ostringstream a, b, err;
  cli::cmd_simulate(opt, a, err);
  cli::cmd_simulate(opt, b, err);
  EXPECT_EQ(a.str(), b.str());
}

}  // namespace
}  // namespace nash_unicast
