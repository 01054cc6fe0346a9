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

// Building Nash equilibria from the centralized optimum and auditing
// arbitrary message profiles against the equilibrium properties.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nash_unicast/error.hpp"
#include "nash_unicast/mechanism.hpp"
#include "nash_unicast/network.hpp"
#include "nash_unicast/solver.hpp"
#include "nash_unicast/utility.hpp"

namespace nash_unicast {

/// m_i = (x_i*, λ* on every route link). Multipliers above the price bound
/// raise PriceBoundExceeded rather than being clipped.
inline MessageProfile profile_from_solution(const Network& net,
                                            const SolveResult& solution,
                                            const MechanismParams& params) {
  MessageProfile profile(net.num_users());
  for (const LinkId l : net.links()) {
    if (solution.lambda_star[l.value] > params.price_bound) {
      throw Error(ErrorCode::kPriceBoundExceeded,
                  "multiplier " + std::to_string(solution.lambda_star[l.value]) +
                      " on link '" + net.link_name(l) + "' exceeds M = " +
                      std::to_string(params.price_bound));
    }
  }
  for (const UserId i : net.users()) {
    Message& m = profile[i.value];
    m.x = std::min(solution.x_star[i.value], min_route_capacity(net, i));
    for (const LinkId l : net.route(i)) {
      m.prices[l] = solution.lambda_star[l.value];
    }
  }
  return profile;
}

inline MessageProfile construct_ne(const Network& net,
                                   std::span<const UtilitySpec> utilities,
                                   const MechanismParams& params,
                                   const SolverConfig& solver_config = {}) {
  return profile_from_solution(
      net, solve_centralized(net, utilities, solver_config), params);
}

struct NeAuditReport {
  bool feasibility = false;
  double price_uniformity = 0.0;
  double complementary_slackness = 0.0;
  double tax_derivative_gap = 0.0;
  double best_response_gap = 0.0;
  double ir_min_payoff = 0.0;
  double budget_gap = 0.0;
  // Distance to the closed-form equilibrium taxes, three-user links taking
  // p[x_i - (x_j + x_k)/2] + p^2 x_k/gamma.
  double corollary_tax_gap = 0.0;
  // Same, with the three-user form the balanced mechanism actually produces:
  // p[x_i - (x_j + x_k)/2] + p^2 (x_k - x_j)/(2 gamma).
  double balanced_corollary_gap = 0.0;
  std::vector<double> payoffs;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  for (int k = 0; k < points; ++k) {
    out[static_cast<std::size_t>(k)] =
        lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return out;
}

struct LatticeBest {
  double payoff = -std::numeric_limits<double>::infinity();
  double x = 0.0;
  std::vector<double> prices;  // route order
};

inline bool lex_less(double x, std::span<const double> p, double bx,
                     std::span<const double> bp) {
  if (x != bx) return x < bx;
  return std::lexicographical_compare(p.begin(), p.end(), bp.begin(),
                                      bp.end());
}

/// Grid argmax of user i's payoff over: rates linspace(0, cap, G) plus the
/// current rate, crossed with uniform prices linspace(0, M, G), the current
/// price vector, and single-link price sweeps from the current vector. Ties
/// go to the smallest rate, then the lexicographically smallest prices.
inline LatticeBest search_lattice(const Network& net, const UtilitySpec& u,
                                  const OwnTaxEvaluator& eval, UserId i,
                                  const Message& current,
                                  const MechanismParams& params, int grid) {
  const auto& route = net.route(i);
  const std::size_t nl = route.size();
  std::vector<double> current_prices(nl);
  for (std::size_t k = 0; k < nl; ++k) {
    current_prices[k] = current.prices.at(route[k]);
  }
  std::vector<double> xs = linspace(0.0, min_route_capacity(net, i), grid);
  xs.push_back(current.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const std::vector<double> ps = linspace(0.0, params.price_bound, grid);

  LatticeBest best;
  std::vector<double> cand(nl);
  auto consider = [&](double payoff, double x, std::span<const double> p) {
    if (payoff > best.payoff ||
        (payoff == best.payoff && lex_less(x, p, best.x, best.prices))) {
      best.payoff = payoff;
      best.x = x;
      best.prices.assign(p.begin(), p.end());
    }
  };

  std::vector<double> cur_tax(nl);
  for (const double x : xs) {
    const double ux = value(u, x);
    double cur_total = eval.received_q();
    for (std::size_t k = 0; k < nl; ++k) {
      cur_tax[k] = eval.link_tax(k, x, current_prices[k]);
      cur_total += cur_tax[k];
    }
    consider(ux - cur_total, x, current_prices);
    for (const double p : ps) {
      std::fill(cand.begin(), cand.end(), p);
      consider(ux - eval.total_tax_uniform(x, p), x, cand);
    }
    if (nl > 1) {
      for (std::size_t k = 0; k < nl; ++k) {
        cand = current_prices;
        for (const double p : ps) {
          cand[k] = p;
          const double t = cur_total - cur_tax[k] + eval.link_tax(k, x, p);
          consider(ux - t, x, cand);
        }
      }
    }
  }
  return best;
}

inline double link_price_spread(const Network& net,
                                const MessageProfile& profile, LinkId l) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const UserId u : net.group(l)) {
    const double p = profile[u.value].prices.at(l);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return hi - lo;
}

inline double link_mean_price(const Network& net,
                              const MessageProfile& profile, LinkId l) {
  double s = 0.0;
  for (const UserId u : net.group(l)) s += profile[u.value].prices.at(l);
  return s / static_cast<double>(net.group_size(l));
}

// Closed-form equilibrium tax of user i on link l at common price p.
inline double corollary_link_tax(const Network& net,
                                 const MessageProfile& profile, LinkId l,
                                 UserId i, double p, double gamma,
                                 bool balanced) {
  const auto& g = net.group(l);
  const std::size_t n = g.size();
  const double xi = profile[i.value].x;
  if (n == 1) return 0.0;
  if (n == 2) return p * xi;
  const std::size_t pos = position_in_group(net, l, i);
  if (n == 3) {
    const double xj = profile[g[(pos + 1) % 3].value].x;
    const double xk = profile[g[(pos + 2) % 3].value].x;
    const double base = p * (xi - 0.5 * (xj + xk));
    return balanced ? base + p * p * (xk - xj) / (2.0 * gamma)
                    : base + p * p * xk / gamma;
  }
  double others = 0.0;
  for (const UserId u : g) {
    if (u != i) others += profile[u.value].x;
  }
  return p * (xi - others / static_cast<double>(n - 1));
}

inline double corollary_gap(const Network& net, const MessageProfile& profile,
                            const MechanismParams& params,
                            const SubsidyAssignment& subsidies,
                            const Allocation& alloc, bool balanced) {
  double gap = 0.0;
  std::vector<double> expected(net.num_users(), 0.0);
  for (const auto& e : alloc.breakdown.entries) {
    const double p = link_mean_price(net, profile, e.link);
    const double form = corollary_link_tax(net, profile, e.link, e.user, p,
                                           params.gamma, balanced);
    gap = std::max(gap, std::abs(e.total() - form));
    expected[e.user.value] += form;
  }
  for (const auto& [l, k] : subsidies.recipient) {
    const double p = link_mean_price(net, profile, l);
    double load = 0.0;
    for (const UserId u : net.group(l)) load += profile[u.value].x;
    expected[k.value] -= p * load;
  }
  for (const UserId i : net.users()) {
    gap = std::max(gap, std::abs(alloc.t[i.value] - expected[i.value]));
  }
  return gap;
}

}  // namespace detail

/// Evaluates every equilibrium condition for a valid profile. Tax
/// derivatives are left-sided differences of the penalty-free link tax with
/// h = 1e-6 (1 + x_i), one-sided to the right only when x_i < h; single-user
/// links carry no price-dependent tax and are skipped.
inline NeAuditReport audit(const Network& net,
                           std::span<const UtilitySpec> utilities,
                           const MessageProfile& profile,
                           const MechanismParams& params,
                           const SubsidyAssignment& subsidies, int br_grid) {
  const Allocation alloc = outcome(net, profile, params, subsidies);
  NeAuditReport r;
  r.feasibility = is_feasible(net, alloc.x);

  const auto excess = link_excess(net, alloc.x);
  for (const LinkId l : net.links()) {
    r.price_uniformity =
        std::max(r.price_uniformity, detail::link_price_spread(net, profile, l));
    double p_max = 0.0;
    for (const UserId u : net.group(l)) {
      p_max = std::max(p_max, profile[u.value].prices.at(l));
    }
    r.complementary_slackness =
        std::max(r.complementary_slackness,
                 p_max * std::abs(excess[l.value]) / params.gamma);
  }

  r.ir_min_payoff = std::numeric_limits<double>::infinity();
  double sum_t = 0.0;
  for (const UserId i : net.users()) {
    const Message& m = profile[i.value];
    const UtilitySpec& u = utilities[i.value];
    const double v = payoff(u, m.x, alloc.t[i.value]);
    r.payoffs.push_back(v);
    r.ir_min_payoff = std::min(r.ir_min_payoff, v);
    sum_t += alloc.t[i.value];

    const OwnTaxEvaluator eval(net, profile, i, params, subsidies);
    const auto& route = net.route(i);
    for (std::size_t k = 0; k < route.size(); ++k) {
      if (net.group_size(route[k]) < 2) continue;
      const double p = m.prices.at(route[k]);
      const double h = 1e-6 * (1.0 + m.x);
      const double lo = m.x >= h ? m.x - h : m.x;
      const double hi = m.x >= h ? m.x : m.x + h;
      const double d =
          (eval.link_tax(k, hi, p, false) - eval.link_tax(k, lo, p, false)) /
          (hi - lo);
      const double target = detail::link_mean_price(net, profile, route[k]);
      r.tax_derivative_gap = std::max(r.tax_derivative_gap,
                                      std::abs(d - target));
    }

    const auto best =
        detail::search_lattice(net, u, eval, i, m, params, br_grid);
    std::vector<double> own_prices;
    for (const LinkId l : route) own_prices.push_back(m.prices.at(l));
    const double current = value(u, m.x) - eval.total_tax(m.x, own_prices);
    r.best_response_gap = std::max(r.best_response_gap, best.payoff - current);
  }
  r.budget_gap = std::abs(sum_t);
  r.corollary_tax_gap =
      detail::corollary_gap(net, profile, params, subsidies, alloc, false);
  r.balanced_corollary_gap =
      detail::corollary_gap(net, profile, params, subsidies, alloc, true);
  return r;
}

struct OptimalityReport {
  bool optimal = false;
  double gap = 0.0;         // relative welfare gap to the solver objective
  double budget_gap = 0.0;  // |Σ t_i|
  bool certified = false;   // solver residual within tol
};

inline OptimalityReport check_optimality(
    const Network& net, std::span<const UtilitySpec> utilities,
    const MessageProfile& profile, const SolveResult& solution,
    const MechanismParams& params, const SubsidyAssignment& subsidies,
    double tol) {
  OptimalityReport r;
  const Allocation alloc = outcome(net, profile, params, subsidies);
  const double w = welfare(utilities, alloc.x);
  r.gap = std::abs(solution.objective - w) /
          std::max(1.0, std::abs(solution.objective));
  double sum_t = 0.0;
  for (double t : alloc.t) sum_t += t;
  r.budget_gap = std::abs(sum_t);
  r.certified = solution.kkt_residual <= tol;
  r.optimal = r.certified && is_feasible(net, alloc.x) && r.gap <= tol &&
              r.budget_gap <= tol;
  return r;
}

/// Own price on link l that makes user i's link tax vanish when it requests
/// x_i = 0 and everyone else keeps their message. Two-user links give the
/// other user's price; larger groups take the upper root of
///   d^2 - 2 P d E_{-i}/gamma + B_i = 0,  d = p_i - P_{-i},
/// with B_i the balancing term.
inline double zero_tax_deviation_price(const Network& net,
                                       const MessageProfile& profile, LinkId l,
                                       UserId i,
                                       const MechanismParams& params) {
  const std::size_t n = net.group_size(l);
  if (n < 2) {
    throw Error(ErrorCode::kWrongGroupSize,
                "single-user link '" + net.link_name(l) +
                    "' has no price-dependent tax");
  }
  const auto ctx = detail::own_link_context(net, profile, l, i, params);
  if (n == 2) return ctx.p_ref;
  const double shift = ctx.p_ref * ctx.e_minus / params.gamma;
  const double disc = shift * shift - ctx.balance;
  if (disc < 0.0) {
    throw Error(ErrorCode::kNoZeroTaxPrice,
                "no real root on link '" + net.link_name(l) + "' for user '" +
                    net.user_name(i) + "'");
  }
  const double p = ctx.p_ref + shift + std::sqrt(disc);
  if (p < 0.0 || p > params.price_bound) {
    throw Error(ErrorCode::kNoZeroTaxPrice,
                "root " + std::to_string(p) + " outside [0, M]");
  }
  return p;
}

struct WalrasianReport {
  std::vector<bool> passes;
  std::vector<double> rate_gap;    // |x_i - grid argmax|
  std::vector<double> payoff_gap;  // grid max - own payoff
  bool all() const {
    return std::all_of(passes.begin(), passes.end(), [](bool b) { return b; });
  }
};

/// Each user's rate must be a grid maximizer of U_i(x) - (Σ_{l∈R_i} p^l) x
/// over [0, min_l (c^l - Σ_{j≠i} x_j)].
inline WalrasianReport check_walrasian(const Network& net,
                                       std::span<const UtilitySpec> utilities,
                                       const MessageProfile& profile,
                                       double grid_step) {
  for (const LinkId l : net.links()) {
    if (detail::link_price_spread(net, profile, l) > kBoundaryTolerance) {
      throw Error(ErrorCode::kNonUniformPrices,
                  "prices differ on link '" + net.link_name(l) + "'");
    }
  }
  RateVector x(net.num_users());
  for (const UserId i : net.users()) x[i.value] = profile[i.value].x;
  const auto excess = link_excess(net, x);

  WalrasianReport r;
  for (const UserId i : net.users()) {
    const UtilitySpec& u = utilities[i.value];
    const double xi = x[i.value];
    double price = 0.0;
    double room = std::numeric_limits<double>::infinity();
    for (const LinkId l : net.route(i)) {
      price += detail::link_mean_price(net, profile, l);
      room = std::min(room, xi - excess[l.value]);
    }
    room = std::max(room, 0.0);
    const auto points =
        static_cast<std::size_t>(std::floor(room / grid_step + 1e-9));
    double best_x = 0.0;
    double best_v = 0.0;  // x = 0
    for (std::size_t k = 1; k <= points; ++k) {
      const double xk = static_cast<double>(k) * grid_step;
      const double v = value(u, xk) - price * xk;
      if (v > best_v) {
        best_v = v;
        best_x = xk;
      }
    }
    const double own = value(u, xi) - price * xi;
    const double rate_gap = std::abs(xi - best_x);
    const double payoff_gap = best_v - own;
    r.rate_gap.push_back(rate_gap);
    r.payoff_gap.push_back(payoff_gap);
    r.passes.push_back(rate_gap <= grid_step + kBoundaryTolerance &&
                       payoff_gap <= 1e-6);
  }
  return r;
}

}  // namespace nash_unicast
