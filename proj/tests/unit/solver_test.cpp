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

#include <cmath>
#include <vector>

#include "nash_unicast/solver.hpp"
#include "support/generators.hpp"

namespace nash_unicast {
namespace {

TEST(SolveCentralized, TwoLogUsersOneLink) {
  const std::vector<LinkSpec> links{{"A", 1}};
  const std::vector<RouteSpec> routes{{"1", {"A"}}, {"2", {"A"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u{LogUtility{1}, LogUtility{1}};
  const auto r = solve_centralized(net, u);
  EXPECT_NEAR(r.x_star[0], 0.5, 1e-9);
  EXPECT_NEAR(r.x_star[1], 0.5, 1e-9);
  EXPECT_NEAR(r.lambda_star[0], 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.objective, 2.0 * std::log(1.5), 1e-9);
  EXPECT_LE(r.kkt_residual, 1e-8);
}

// Reference optimum from tests/oracle/solver_oracle.py (bisection on the
// reduced KKT system, cross-checked with SLSQP).
TEST(SolveCentralized, ThreeUserTwoLinkOracle) {
  const std::vector<LinkSpec> links{{"A", 1}, {"B", 2}};
  const std::vector<RouteSpec> routes{
      {"u0", {"A"}}, {"u1", {"A", "B"}}, {"u2", {"B"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u{LogUtility{1}, PowerUtility{1, 0.5},
                                   QuadCapUtility{3, 0.5}};
  const auto r = solve_centralized(net, u);
  EXPECT_NEAR(r.x_star[0], 0.9047673147863459, 1e-8);
  EXPECT_NEAR(r.x_star[1], 0.09523268521365413, 1e-8);
  EXPECT_NEAR(r.x_star[2], 1.904767314786346, 1e-8);
  EXPECT_NEAR(r.lambda_star[0], 0.5249985088662485, 1e-8);
  EXPECT_NEAR(r.lambda_star[1], 1.095232685213654, 1e-8);
  EXPECT_NEAR(r.objective, 4.853190473827465, 1e-9);
}

TEST(SolveCentralized, SlackLinkHasZeroPrice) {
  // QuadCap saturates at a/(2b) = 1 below capacity 5.
  const std::vector<LinkSpec> links{{"A", 5}};
  const std::vector<RouteSpec> routes{{"1", {"A"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u{QuadCapUtility{2, 1}};
  const auto r = solve_centralized(net, u);
  EXPECT_NEAR(r.x_star[0], 1.0, 1e-9);
  EXPECT_EQ(r.lambda_star[0], 0.0);
}

TEST(SolveCentralized, Errors) {
  const std::vector<LinkSpec> links{{"A", 1}};
  const std::vector<RouteSpec> routes{{"1", {"A"}}};
  const Network net = build_network(links, routes);
  auto code_of = [&](const std::vector<UtilitySpec>& u, SolverConfig c) {
    try {
      solve_centralized(net, u, c);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kParseError;
  };
  EXPECT_EQ(code_of({SigmoidUtility{1, 0.1}}, {}),
            ErrorCode::kNonConcaveUtility);
  EXPECT_EQ(code_of({}, {}), ErrorCode::kMissingUser);
  SolverConfig bad;
  bad.tolerance = 0;
  EXPECT_EQ(code_of({LogUtility{1}}, bad), ErrorCode::kInvalidParams);
}

TEST(SolveCentralized, NotConvergedWithinBudget) {
  const std::vector<LinkSpec> links{{"A", 1}, {"B", 2}};
  const std::vector<RouteSpec> routes{
      {"u0", {"A"}}, {"u1", {"A", "B"}}, {"u2", {"B"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u{LogUtility{1}, PowerUtility{1, 0.5},
                                   QuadCapUtility{3, 0.5}};
  SolverConfig tiny;
  tiny.tolerance = 1e-300;  // below rounding of the residual
  tiny.max_iterations = 3;
  try {
    solve_centralized(net, u, tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotConverged);
  }
}

TEST(BruteForce, SmallInstance) {
  const std::vector<LinkSpec> links{{"A", 1}};
  const std::vector<RouteSpec> routes{{"1", {"A"}}, {"2", {"A"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u{LogUtility{1}, LogUtility{1}};
  const auto x = brute_force_centralized(net, u, 1e-3);
  EXPECT_NEAR(x[0], 0.5, 1e-12);
  EXPECT_NEAR(x[1], 0.5, 1e-12);
  EXPECT_THROW(brute_force_centralized(net, u, 0.0), Error);
}

TEST(BruteForce, GridTooLarge) {
  const std::vector<LinkSpec> links{{"A", 10}};
  const std::vector<RouteSpec> routes{
      {"1", {"A"}}, {"2", {"A"}}, {"3", {"A"}}, {"4", {"A"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u(4, LogUtility{1});
  try {
    brute_force_centralized(net, u, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridTooLarge);
  }
}

TEST(KktResiduals, DetectsViolation) {
  const std::vector<LinkSpec> links{{"A", 1}};
  const std::vector<RouteSpec> routes{{"1", {"A"}}, {"2", {"A"}}};
  const Network net = build_network(links, routes);
  const std::vector<UtilitySpec> u{LogUtility{1}, LogUtility{1}};
  const std::vector<double> lam{2.0 / 3.0}, nu{0, 0};
  EXPECT_LE(kkt_residuals(net, u, std::vector<double>{0.5, 0.5}, lam, nu).max(),
            1e-15);
  const auto r = kkt_residuals(net, u, std::vector<double>{0.6, 0.6}, lam, nu);
  EXPECT_NEAR(r.primal, 0.2, 1e-15);
}

TEST(SolverProperty, KktAndFeasibilityOnRandomScenarios) {
  testing::Rng rng(41);
  for (int k = 0; k < 60; ++k) {
    const auto s = testing::random_concave_scenario(rng);
    const auto r = solve_centralized(s.net, s.utilities);
    EXPECT_LE(r.kkt_residual, 1e-8);
    EXPECT_TRUE(is_feasible(s.net, r.x_star));
    EXPECT_NEAR(r.objective, welfare(s.utilities, r.x_star), 1e-12);
  }
}

TEST(SolverProperty, Deterministic) {
  testing::Rng rng(42);
  for (int k = 0; k < 10; ++k) {
    const auto s = testing::random_concave_scenario(rng);
    const auto a = solve_centralized(s.net, s.utilities);
    const auto b = solve_centralized(s.net, s.utilities);
    EXPECT_EQ(a.x_star, b.x_star);
    EXPECT_EQ(a.lambda_star, b.lambda_star);
  }
}

// No feasible grid point beats the solver objective.
TEST(SolverProperty, DominatesBruteForce) {
  testing::Rng rng(43);
  testing::TopologyShape shape;
  shape.min_users = 2;
  shape.max_users = 3;
  shape.max_links = 3;
  for (int k = 0; k < 15; ++k) {
    const auto s = testing::random_concave_scenario(rng, shape);
    const auto r = solve_centralized(s.net, s.utilities);
    const auto grid = brute_force_centralized(s.net, s.utilities, 1e-2);
    EXPECT_TRUE(is_feasible(s.net, grid));
    EXPECT_GE(r.objective, welfare(s.utilities, grid) - 1e-9);
  }
}

}  // namespace
}  // namespace nash_unicast
