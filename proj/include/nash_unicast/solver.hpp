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

// Centralized welfare maximization
//
//   max Σ U_i(x_i)  s.t.  Σ_{i∈G^l} x_i ≤ c^l,  x_i ≥ 0
//
// by dual subgradient on the link multipliers, plus a brute-force grid oracle.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nash_unicast/error.hpp"
#include "nash_unicast/network.hpp"
#include "nash_unicast/utility.hpp"

namespace nash_unicast {

struct SolverConfig {
  double tolerance = 1e-8;
  std::int64_t max_iterations = 200000;
  // Step a/(b+k). A non-positive a means 1/(max link degree).
  double step_a = 0.0;
  double step_b = 10.0;
};

struct KktReport {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double link_slackness = 0.0;
  double user_slackness = 0.0;

  double max() const {
    return std::max({stationarity, primal, dual, link_slackness,
                     user_slackness});
  }
};

struct SolveResult {
  RateVector x_star;
  std::vector<double> lambda_star;  // by link id
  std::vector<double> nu_star;      // by user id
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::int64_t iterations = 0;
};

inline double welfare(std::span<const UtilitySpec> utilities,
                      std::span<const double> x) {
  double w = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) w += value(utilities[i], x[i]);
  return w;
}

inline double route_price(const Network& net, UserId i,
                          std::span<const double> lambda) {
  double s = 0.0;
  for (const LinkId l : net.route(i)) s += lambda[l.value];
  return s;
}

inline KktReport kkt_residuals(const Network& net,
                               std::span<const UtilitySpec> utilities,
                               std::span<const double> x,
                               std::span<const double> lambda,
                               std::span<const double> nu) {
  KktReport r;
  const auto excess = link_excess(net, x);
  for (const UserId i : net.users()) {
    const std::size_t k = i.value;
    const double xi = std::max(x[k], 0.0);
    const double grad = derivative(utilities[k], xi);
    r.stationarity = std::max(
        r.stationarity, std::abs(grad - route_price(net, i, lambda) + nu[k]));
    r.primal = std::max(r.primal, -x[k]);
    r.dual = std::max(r.dual, -nu[k]);
    r.user_slackness = std::max(r.user_slackness, std::abs(nu[k] * x[k]));
  }
  for (const LinkId l : net.links()) {
    const std::size_t k = l.value;
    r.primal = std::max(r.primal, excess[k]);
    r.dual = std::max(r.dual, -lambda[k]);
    r.link_slackness =
        std::max(r.link_slackness, std::abs(lambda[k] * excess[k]));
  }
  if (std::isnan(r.stationarity)) {
    r.stationarity = std::numeric_limits<double>::infinity();
  }
  return r;
}

namespace detail {

struct DualState {
  const Network& net;
  std::span<const UtilitySpec> utilities;
  std::vector<double> box;  // per-user demand upper bound

  RateVector demands(std::span<const double> lambda) const {
    RateVector x(net.num_users());
    for (const UserId i : net.users()) {
      x[i.value] = demand(utilities[i.value], route_price(net, i, lambda),
                          box[i.value]);
    }
    return x;
  }

  // dx_i/d(route price); zero where the demand sits on a bound.
  double demand_slope(UserId i, double xi) const {
    if (!(xi > 0.0) || xi >= box[i.value]) return 0.0;
    const double curv = second_derivative(utilities[i.value], xi);
    return curv < 0.0 ? 1.0 / curv : 0.0;
  }
};

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

// Complementarity residual min(lambda_l, -excess_l): zero exactly when
// lambda >= 0, excess <= 0 and lambda * excess = 0 on every link.
inline std::vector<double> complementarity(const std::vector<double>& lambda,
                                           const std::vector<double>& excess) {
  std::vector<double> r(lambda.size());
  for (std::size_t l = 0; l < r.size(); ++l) {
    r[l] = std::min(lambda[l], -excess[l]);
  }
  return r;
}

// Dual function D(lambda) = sum_i max_x [U_i(x) - p_i x] + lambda . c,
// evaluated at the boxed demands x.
inline double dual_value(const DualState& dual,
                         const std::vector<double>& lambda,
                         const RateVector& x) {
  const Network& net = dual.net;
  double d = 0.0;
  for (const UserId i : net.users()) {
    d += value(dual.utilities[i.value], x[i.value]) -
         route_price(net, i, lambda) * x[i.value];
  }
  for (const LinkId l : net.links()) d += lambda[l.value] * net.capacity(l);
  return d;
}

// Projected Newton on the convex dual. Links at zero price whose capacity
// is slack stay fixed; the rest take a regularized Newton step, projected
// onto lambda >= 0 and backtracked. A step is accepted on sufficient
// decrease of D, or when it shrinks the complementarity residual without
// raising D beyond rounding (near the optimum D stops resolving progress).
// Redundant links make the Hessian singular; the step then runs along its
// null space until a bound is hit.
inline std::vector<double> newton_polish(const DualState& dual,
                                         std::vector<double> lambda) {
  const Network& net = dual.net;
  const std::size_t num_links = net.num_links();
  RateVector x = dual.demands(lambda);
  std::vector<double> excess = link_excess(net, x);
  double d = dual_value(dual, lambda, x);
  for (int it = 0; it < 200; ++it) {
    const double norm = inf_norm(complementarity(lambda, excess));
    if (norm <= 1e-15 * (1.0 + net.max_capacity())) break;
    // Gradient of D is c - load = -excess.
    std::vector<std::size_t> free;
    for (std::size_t l = 0; l < num_links; ++l) {
      if (lambda[l] > 1e-12 || excess[l] > 0.0) free.push_back(l);
    }
    if (free.empty()) break;
    const auto m = static_cast<Eigen::Index>(free.size());
    std::vector<Eigen::Index> slot(num_links, -1);
    for (Eigen::Index a = 0; a < m; ++a) slot[free[a]] = a;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd grad(m);
    for (Eigen::Index a = 0; a < m; ++a) grad(a) = -excess[free[a]];
    for (const UserId i : net.users()) {
      const double slope = dual.demand_slope(i, x[i.value]);
      if (slope == 0.0) continue;
      for (const LinkId la : net.route(i)) {
        if (slot[la.value] < 0) continue;
        for (const LinkId lb : net.route(i)) {
          if (slot[lb.value] < 0) continue;
          hess(slot[la.value], slot[lb.value]) -= slope;
        }
      }
    }
    const double mu = 1e-10 * std::max(1.0, hess.diagonal().maxCoeff());
    hess.diagonal().array() += mu;
    const Eigen::VectorXd dir = hess.ldlt().solve(grad);

    bool accepted = false;
    for (double t = 1.0; t > 1e-14; t *= 0.5) {
      std::vector<double> cand = lambda;
      double decrease = 0.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        const std::size_t l = free[a];
        cand[l] = std::max(0.0, lambda[l] - t * dir(a));
        decrease += grad(a) * (lambda[l] - cand[l]);
      }
      RateVector xc = dual.demands(cand);
      std::vector<double> ec = link_excess(net, xc);
      const double dc = dual_value(dual, cand, xc);
      const bool armijo = dc <= d - 1e-4 * decrease && decrease > 0.0;
      const bool residual =
          dc <= d + 1e-12 * (1.0 + std::abs(d)) &&
          inf_norm(complementarity(cand, ec)) < (1.0 - 1e-4 * t) * norm;
      if (armijo || residual) {
        lambda = std::move(cand);
        x = std::move(xc);
        excess = std::move(ec);
        d = dc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return lambda;
}

// Demands at lambda, shrunk onto the feasible set, with nu and the residual.
inline SolveResult evaluate_dual(const DualState& dual,
                                 const std::vector<double>& lambda) {
  const Network& net = dual.net;
  SolveResult r;
  r.lambda_star = lambda;
  r.x_star = dual.demands(lambda);
  for (const UserId i : net.users()) {
    double scale = 1.0;
    for (const LinkId l : net.route(i)) {
      double load = 0.0;
      for (const UserId u : net.group(l)) load += r.x_star[u.value];
      if (load > net.capacity(l)) scale = std::min(scale, net.capacity(l) / load);
    }
    r.x_star[i.value] *= scale;
  }
  r.nu_star.assign(net.num_users(), 0.0);
  for (const UserId i : net.users()) {
    if (r.x_star[i.value] == 0.0) {
      r.nu_star[i.value] =
          std::max(0.0, route_price(net, i, lambda) -
                            derivative(dual.utilities[i.value], 0.0));
    }
  }
  r.kkt_residual =
      kkt_residuals(net, dual.utilities, r.x_star, r.lambda_star, r.nu_star)
          .max();
  r.objective = welfare(dual.utilities, r.x_star);
  return r;
}

}  // namespace detail

/// Dual subgradient: x_i = demand(U_i, Σ_{l∈R_i} λ^l), then
/// λ^l ← max(0, λ^l + step (Σ_{i∈G^l} x_i − c^l)). Each demand is boxed at
/// twice the user's smallest route capacity so an overloaded link always
/// shows positive excess. At doubling checkpoints the iterate is refined by
/// projected Newton steps on the dual and accepted once the KKT residual is
/// within tolerance.
inline SolveResult solve_centralized(const Network& net,
                                     std::span<const UtilitySpec> utilities,
                                     const SolverConfig& config = {}) {
  if (utilities.size() != net.num_users()) {
    throw Error(ErrorCode::kMissingUser, "one utility per user is required");
  }
  if (!(config.tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "solver tolerance must be positive");
  }
  for (std::size_t k = 0; k < utilities.size(); ++k) {
    validate_utility(utilities[k]);
    if (!is_concave(utilities[k])) {
      throw Error(ErrorCode::kNonConcaveUtility,
                  "user '" + net.user_name(UserId{static_cast<std::uint32_t>(
                                 k)}) +
                      "' has a non-concave utility");
    }
  }
  detail::DualState dual{net, utilities, {}};
  for (const UserId i : net.users()) {
    dual.box.push_back(2.0 * min_route_capacity(net, i));
  }
  const double step_a =
      config.step_a > 0.0
          ? config.step_a
          : 1.0 / static_cast<double>(std::max<std::size_t>(
                      1, net.max_group_size()));

  std::vector<double> lambda(net.num_links(), 0.0);
  SolveResult best;
  best.kkt_residual = std::numeric_limits<double>::infinity();
  std::int64_t checkpoint = 0;
  for (std::int64_t k = 0; k <= config.max_iterations; ++k) {
    if (k == checkpoint || k == config.max_iterations) {
      auto polished = detail::newton_polish(dual, lambda);
      auto candidate = detail::evaluate_dual(dual, polished);
      candidate.iterations = k;
      if (candidate.kkt_residual < best.kkt_residual) best = candidate;
      if (best.kkt_residual <= config.tolerance) return best;
      checkpoint = checkpoint == 0 ? 16 : 2 * checkpoint;
    }
    if (k == config.max_iterations) break;
    const RateVector x = dual.demands(lambda);
    const auto excess = link_excess(net, x);
    const double step = step_a / (config.step_b + static_cast<double>(k));
    for (std::size_t l = 0; l < lambda.size(); ++l) {
      lambda[l] = std::max(0.0, lambda[l] + step * excess[l]);
    }
  }
  throw Error(ErrorCode::kNotConverged,
              "KKT residual " + std::to_string(best.kkt_residual) +
                  " after " + std::to_string(config.max_iterations) +
                  " iterations");
}

/// Exhaustive search over the grid {0, h, 2h, ...} per user. All users but
/// the last are enumerated; the last takes its largest feasible grid point,
/// which is optimal because every utility is non-decreasing.
inline RateVector brute_force_centralized(
    const Network& net, std::span<const UtilitySpec> utilities,
    double grid_step) {
  if (!(grid_step > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "grid step must be positive");
  }
  const std::size_t n = net.num_users();
  std::vector<std::vector<double>> values(n);
  double size = 1.0;
  for (const UserId i : net.users()) {
    const auto points = static_cast<std::size_t>(
        std::floor(min_route_capacity(net, i) / grid_step + 1e-9)) + 1;
    if (i.value + 1 < n) size *= static_cast<double>(points);
    if (size > 1e8) {
      throw Error(ErrorCode::kGridTooLarge,
                  "grid has more than 1e8 points at step " +
                      std::to_string(grid_step));
    }
    values[i.value].resize(points);
    for (std::size_t k = 0; k < points; ++k) {
      values[i.value][k] =
          value(utilities[i.value], static_cast<double>(k) * grid_step);
    }
  }

  std::vector<double> residual(net.num_links());
  for (const LinkId l : net.links()) residual[l.value] = net.capacity(l);
  std::vector<std::size_t> current(n, 0), best(n, 0);
  double best_value = -std::numeric_limits<double>::infinity();

  auto max_index = [&](std::size_t u) {
    double room = std::numeric_limits<double>::infinity();
    for (const LinkId l : net.route(UserId{static_cast<std::uint32_t>(u)})) {
      room = std::min(room, residual[l.value]);
    }
    if (room < 0.0) return std::size_t{0};
    return std::min(values[u].size() - 1,
                    static_cast<std::size_t>(
                        std::floor(room / grid_step + 1e-9)));
  };

  auto dfs = [&](auto&& self, std::size_t u, double acc) -> void {
    const auto& route = net.route(UserId{static_cast<std::uint32_t>(u)});
    if (u + 1 == n) {
      const std::size_t k = max_index(u);
      const double total = acc + values[u][k];
      if (total > best_value) {
        best_value = total;
        current[u] = k;
        best = current;
      }
      return;
    }
    const std::size_t top = max_index(u);
    for (std::size_t k = 0; k <= top; ++k) {
      const double x = static_cast<double>(k) * grid_step;
      for (const LinkId l : route) residual[l.value] -= x;
      current[u] = k;
      self(self, u + 1, acc + values[u][k]);
      for (const LinkId l : route) residual[l.value] += x;
    }
  };
  dfs(dfs, 0, 0.0);

  RateVector x(n);
  for (std::size_t u = 0; u < n; ++u) {
    x[u] = static_cast<double>(best[u]) * grid_step;
  }
  return x;
}

}  // namespace nash_unicast
