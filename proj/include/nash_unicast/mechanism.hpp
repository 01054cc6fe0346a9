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

// The game form: messages, per-link taxes for every group size, the
// balancing terms, two-user-link subsidies and the outcome function.
//
// Per-link tax of user i on link l, with P = P_{-i}, E = E_{-i}:
//
//   |G| = 1   q/(1-q), q = 1{x_i > c}
//   |G| = 2   p_j x_i + (p_i - p_j)^2/alpha - 2 p_j (p_i - p_j)(E + x_i)/gamma
//             + pen
//   |G| = 3   (P + p_k (p_j - p_k)/gamma) x_i + (p_i - P)^2
//             - 2 P (p_i - P)(E + x_i)/gamma + pen + Omega_i
//   |G| > 3   P x_i + (p_i - P)^2 - 2 P (p_i - P)(E + x_i)/gamma + pen + Phi_i
//
// pen = q/(1-q) with q = 1{x_i > 0} 1{E + x_i > 0}. On three-user links the
// users (i, j, k) are taken cyclically in ascending id order.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nash_unicast/error.hpp"
#include "nash_unicast/network.hpp"
#include "nash_unicast/utility.hpp"

namespace nash_unicast {

struct MechanismParams {
  double alpha = 1e4;
  double gamma = 1e4;
  double epsilon = 1e-6;
  double price_bound = 1e3;
  std::uint64_t rng_seed = 0;
};

inline void validate_params(const MechanismParams& params) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(params.alpha) || !positive(params.gamma) ||
      !positive(params.price_bound)) {
    throw Error(ErrorCode::kInvalidParams,
                "alpha, gamma and price_bound must be finite and positive");
  }
  if (!(params.epsilon > 0.0 && params.epsilon < 0.5)) {
    throw Error(ErrorCode::kInvalidParams,
                "epsilon must lie in (0, 0.5), got " +
                    std::to_string(params.epsilon));
  }
}

/// alpha = gamma = 1e4 (max c)^2, epsilon = 1e-6, and M = 1e3 times the
/// largest marginal utility at the origin. Power utilities have an unbounded
/// marginal at 0, so theirs is read at 1e-6 * max c instead.
inline MechanismParams default_params(const Network& net,
                                      std::span<const UtilitySpec> utilities) {
  MechanismParams params;
  const double cmax = net.max_capacity();
  params.alpha = 1e4 * cmax * cmax;
  params.gamma = 1e4 * cmax * cmax;
  double marginal = 0.0;
  for (const auto& u : utilities) {
    double m = max_marginal(u, 0.0);
    if (!std::isfinite(m)) m = max_marginal(u, 1e-6 * cmax);
    marginal = std::max(marginal, m);
  }
  if (marginal > 0.0) params.price_bound = 1e3 * marginal;
  return params;
}

struct Message {
  double x = 0.0;
  std::map<LinkId, double> prices;
};

// Indexed by dense user id.
using MessageProfile = std::vector<Message>;

inline Message uniform_message(const Network& net, UserId i, double x,
                               double price) {
  Message m;
  m.x = x;
  for (const LinkId l : net.route(i)) m.prices[l] = price;
  return m;
}

inline double indicator(bool holds, double eps) {
  return holds ? 1.0 - eps : 0.0;
}

// q/(1-q) with 1-q written out, since q sits within 2 eps of 1.
inline double penalty(bool a, bool b, double eps) {
  if (!a || !b) return 0.0;
  return (1.0 - eps) * (1.0 - eps) / (eps * (2.0 - eps));
}

struct LinkTerms {
  double p_minus_i = 0.0;
  double e_minus_i = 0.0;
  double e_i = 0.0;
  std::size_t group_size = 0;
};

struct LinkTax {
  UserId user;
  LinkId link;
  double delta1 = 0.0;
  double delta2 = 0.0;  // includes the penalty
  double delta3 = 0.0;
  double penalty = 0.0;
  // delta2 minus the penalty, kept apart so it never loses digits to it.
  double delta2_smooth = 0.0;

  double total() const { return delta1 + delta2 + delta3; }
  double without_penalty() const { return delta1 + delta2_smooth + delta3; }
};

struct TaxBreakdown {
  std::vector<LinkTax> entries;
  // Money received from two-user-link subsidies, i.e. minus the Q's credited.
  std::vector<double> subsidy;
  std::vector<double> total;
};

// Two-user link → recipient. A link may be absent only when the assignment
// was built with allow_unassigned.
struct SubsidyAssignment {
  std::map<LinkId, UserId> recipient;
};

struct Allocation {
  RateVector x;
  std::vector<double> t;
  TaxBreakdown breakdown;
};

namespace detail {

inline std::size_t position_in_group(const Network& net, LinkId l, UserId i) {
  const auto& g = net.group(l);
  auto it = std::find(g.begin(), g.end(), i);
  if (it == g.end()) {
    throw Error(ErrorCode::kUserNotOnLink,
                "user '" + net.user_name(i) + "' is not on link '" +
                    net.link_name(l) + "'");
  }
  return static_cast<std::size_t>(it - g.begin());
}

inline double price_of(const MessageProfile& profile, UserId i, LinkId l) {
  return profile[i.value].prices.at(l);
}

// Omega_i from the two other users' messages; (j, k) follow i cyclically.
inline double omega_core(double pj, double pk, double xj, double xk, double c,
                         double gamma) {
  const double p_mean = 0.5 * (pj + pk);
  const double e_minus = xj + xk - c;
  const double ej = 2.0 * xj - c;
  const double ek = 2.0 * xk - c;
  const double pairs = (2.0 * pj * pk * (1.0 + xj / gamma) - xj * pk) +
                       (2.0 * pk * pj * (1.0 + xk / gamma) - xk * pj);
  const double slack = 2.0 * pk * (pj * ek - xj * pk) +
                       2.0 * pj * (pk * ej - xk * pj);
  // The last term cancels the constant part of the pair sums; without it the
  // link's taxes add up to c (p_i p_j + p_i p_k + p_j p_k)/gamma.
  return pj * pj * xk / gamma + pairs / 2.0 + slack / (4.0 * gamma) -
         (pj * pj + pk * pk) / 2.0 - p_mean * p_mean -
         2.0 * e_minus * p_mean * p_mean / gamma - c * pj * pk / gamma;
}

inline double phi_core(std::span<const double> p, std::span<const double> x,
                       double c, double gamma) {
  const std::size_t m = p.size();  // |G| - 1
  const double n1 = static_cast<double>(m);
  double sum_p = 0.0, sum_x = 0.0, sum_e = 0.0, sum_p2 = 0.0;
  std::vector<double> e(m);
  for (std::size_t a = 0; a < m; ++a) {
    e[a] = n1 * x[a] - c;
    sum_p += p[a];
    sum_x += x[a];
    sum_e += e[a];
    sum_p2 += p[a] * p[a];
  }
  const double p_mean = sum_p / n1;
  const double e_minus = sum_x - c;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      s1 += 2.0 * p[a] * p[b] * (1.0 + x[a] / gamma) - x[a] * p[b];
      // Σ over r ∉ {i, a, b} of (p_a E_r - x_a p_r).
      const double rest = p[a] * (sum_e - e[a] - e[b]) -
                          x[a] * (sum_p - p[a] - p[b]);
      s2 += 2.0 * p[b] * rest;
      s3 += 2.0 * p[b] * (p[a] * e[b] - x[a] * p[b]);
    }
  }
  return s1 / (n1 * (n1 - 1.0)) + s2 / (gamma * n1 * n1 * (n1 - 2.0)) +
         s3 / (gamma * n1 * n1 * (n1 - 1.0)) - sum_p2 / n1 -
         p_mean * p_mean - 2.0 * e_minus * p_mean * p_mean / gamma;
}

// Everything about link l that user i does not control.
struct OwnLinkContext {
  LinkId link;
  std::size_t group_size = 0;
  double capacity = 0.0;
  double p_ref = 0.0;       // p_j for |G| = 2, P_{-i} otherwise
  double e_minus = 0.0;     // E_{-i}
  double price_coef = 0.0;  // multiplies x_i
  double balance = 0.0;     // Omega_i, Phi_i or 0
};

struct LinkTaxParts {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double penalty = 0.0;
  double delta2_smooth = 0.0;
};

inline LinkTaxParts link_tax_core(const OwnLinkContext& ctx, double x,
                                  double p, const MechanismParams& params) {
  LinkTaxParts parts;
  const double total_excess = ctx.e_minus + x;
  if (ctx.group_size == 1) {
    if (x > ctx.capacity + kBoundaryTolerance) {
      parts.penalty = (1.0 - params.epsilon) / params.epsilon;
    }
    parts.delta2 = parts.penalty;
    return parts;
  }
  const double diff = p - ctx.p_ref;
  const double quad_div = ctx.group_size == 2 ? params.alpha : 1.0;
  parts.penalty =
      penalty(x > 0.0, total_excess > kBoundaryTolerance, params.epsilon);
  parts.delta1 = ctx.price_coef * x;
  parts.delta2_smooth = diff * diff / quad_div -
                        2.0 * ctx.p_ref * diff * total_excess / params.gamma;
  parts.delta2 = parts.delta2_smooth + parts.penalty;
  parts.delta3 = ctx.balance;
  return parts;
}

inline OwnLinkContext own_link_context(const Network& net,
                                       const MessageProfile& profile,
                                       LinkId l, UserId i,
                                       const MechanismParams& params) {
  const auto& g = net.group(l);
  const std::size_t pos = position_in_group(net, l, i);
  OwnLinkContext ctx;
  ctx.link = l;
  ctx.group_size = g.size();
  ctx.capacity = net.capacity(l);
  const double c = ctx.capacity;
  double others_x = 0.0;
  for (const UserId u : g) {
    if (u != i) others_x += profile[u.value].x;
  }
  ctx.e_minus = others_x - c;
  const std::size_t n = g.size();
  if (n == 1) return ctx;
  if (n == 2) {
    const UserId j = g[1 - pos];
    ctx.p_ref = price_of(profile, j, l);
    ctx.price_coef = ctx.p_ref;
    return ctx;
  }
  if (n == 3) {
    const UserId j = g[(pos + 1) % 3];
    const UserId k = g[(pos + 2) % 3];
    const double pj = price_of(profile, j, l);
    const double pk = price_of(profile, k, l);
    ctx.p_ref = 0.5 * (pj + pk);
    ctx.price_coef = ctx.p_ref + pk * (pj - pk) / params.gamma;
    ctx.balance = omega_core(pj, pk, profile[j.value].x, profile[k.value].x,
                             c, params.gamma);
    return ctx;
  }
  std::vector<double> p, x;
  p.reserve(n - 1);
  x.reserve(n - 1);
  for (const UserId u : g) {
    if (u == i) continue;
    p.push_back(price_of(profile, u, l));
    x.push_back(profile[u.value].x);
  }
  double sum_p = 0.0;
  for (double v : p) sum_p += v;
  ctx.p_ref = sum_p / static_cast<double>(n - 1);
  ctx.price_coef = ctx.p_ref;
  ctx.balance = phi_core(p, x, c, params.gamma);
  return ctx;
}

}  // namespace detail

inline LinkTerms link_terms(const Network& net, const MessageProfile& profile,
                            LinkId l, UserId i) {
  const auto& g = net.group(l);
  detail::position_in_group(net, l, i);
  LinkTerms terms;
  terms.group_size = g.size();
  double p_sum = 0.0, x_sum = 0.0;
  for (const UserId u : g) {
    if (u == i) continue;
    p_sum += detail::price_of(profile, u, l);
    x_sum += profile[u.value].x;
  }
  const double c = net.capacity(l);
  const double n = static_cast<double>(g.size());
  terms.p_minus_i = g.size() > 1 ? p_sum / (n - 1.0) : 0.0;
  terms.e_minus_i = x_sum - c;
  terms.e_i = (n - 1.0) * profile[i.value].x - c;
  return terms;
}

inline double omega(const Network& net, const MessageProfile& profile,
                    LinkId l, UserId i, const MechanismParams& params) {
  if (net.group_size(l) != 3) {
    throw Error(ErrorCode::kWrongGroupSize,
                "omega needs a three-user link, '" + net.link_name(l) +
                    "' has " + std::to_string(net.group_size(l)));
  }
  return detail::own_link_context(net, profile, l, i, params).balance;
}

inline double phi(const Network& net, const MessageProfile& profile, LinkId l,
                  UserId i, const MechanismParams& params) {
  if (net.group_size(l) <= 3) {
    throw Error(ErrorCode::kWrongGroupSize,
                "phi needs more than three users, '" + net.link_name(l) +
                    "' has " + std::to_string(net.group_size(l)));
  }
  return detail::own_link_context(net, profile, l, i, params).balance;
}

/// Taxes of every user on link l, in ascending user order.
inline std::vector<LinkTax> tax_link(const Network& net,
                                     const MessageProfile& profile, LinkId l,
                                     const MechanismParams& params) {
  std::vector<LinkTax> out;
  for (const UserId i : net.group(l)) {
    const auto ctx = detail::own_link_context(net, profile, l, i, params);
    const double p = detail::price_of(profile, i, l);
    const auto parts =
        detail::link_tax_core(ctx, profile[i.value].x, p, params);
    out.push_back(LinkTax{i, l, parts.delta1, parts.delta2, parts.delta3,
                          parts.penalty, parts.delta2_smooth});
  }
  return out;
}

/// Draws one recipient outside G^l for every two-user link, in link order.
/// With allow_unassigned, links without an eligible outsider are skipped
/// instead of raising NoEligibleRecipient; their Q is then never credited.
inline SubsidyAssignment assign_subsidies(const Network& net,
                                          std::uint64_t seed,
                                          bool allow_unassigned = false) {
  SubsidyAssignment out;
  std::mt19937_64 rng(seed);
  for (const LinkId l : net.links()) {
    if (net.group_size(l) != 2) continue;
    std::vector<UserId> eligible;
    for (const UserId u : net.users()) {
      if (!net.on_route(u, l)) eligible.push_back(u);
    }
    if (eligible.empty()) {
      if (allow_unassigned) continue;
      throw Error(ErrorCode::kNoEligibleRecipient,
                  "every user is on two-user link '" + net.link_name(l) + "'");
    }
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    out.recipient[l] = eligible[pick(rng)];
  }
  return out;
}

/// Q^l = -(t_i^l + t_j^l) with penalties left out.
inline double link_subsidy_q(const Network& net, const MessageProfile& profile,
                             LinkId l, const MechanismParams& params) {
  if (net.group_size(l) != 2) {
    throw Error(ErrorCode::kWrongGroupSize,
                "Q needs a two-user link, '" + net.link_name(l) + "' has " +
                    std::to_string(net.group_size(l)));
  }
  double sum = 0.0;
  for (const auto& tax : tax_link(net, profile, l, params)) {
    sum += tax.without_penalty();
  }
  return -sum;
}

inline void validate_profile(const Network& net, const MessageProfile& profile,
                             const MechanismParams& params) {
  if (profile.size() != net.num_users()) {
    throw Error(ErrorCode::kMissingUser,
                "profile has " + std::to_string(profile.size()) +
                    " messages for " + std::to_string(net.num_users()) +
                    " users");
  }
  for (const UserId i : net.users()) {
    const Message& m = profile[i.value];
    const double cap = min_route_capacity(net, i);
    if (!std::isfinite(m.x) || m.x < 0.0 || m.x > cap + kBoundaryTolerance) {
      throw Error(ErrorCode::kRateOutOfBounds,
                  "user '" + net.user_name(i) + "' requests " +
                      std::to_string(m.x) + " outside [0, " +
                      std::to_string(cap) + "]");
    }
    const auto& route = net.route(i);
    bool keys_match = m.prices.size() == route.size();
    for (const LinkId l : route) keys_match = keys_match && m.prices.count(l);
    if (!keys_match) {
      throw Error(ErrorCode::kRouteMismatch,
                  "prices of user '" + net.user_name(i) +
                      "' do not name exactly its route links");
    }
    for (const auto& [l, p] : m.prices) {
      if (!std::isfinite(p) || p < 0.0 || p > params.price_bound) {
        throw Error(ErrorCode::kPriceOutOfBounds,
                    "user '" + net.user_name(i) + "' quotes " +
                        std::to_string(p) + " on link '" + net.link_name(l) +
                        "'");
      }
    }
  }
}

inline Allocation outcome(const Network& net, const MessageProfile& profile,
                          const MechanismParams& params,
                          const SubsidyAssignment& subsidies) {
  validate_params(params);
  validate_profile(net, profile, params);
  const std::size_t n = net.num_users();
  Allocation a;
  a.x.resize(n);
  for (std::size_t k = 0; k < n; ++k) a.x[k] = profile[k].x;
  a.t.assign(n, 0.0);
  a.breakdown.subsidy.assign(n, 0.0);
  for (const LinkId l : net.links()) {
    auto taxes = tax_link(net, profile, l, params);
    double non_penalty = 0.0;
    for (const auto& tax : taxes) {
      a.t[tax.user.value] += tax.total();
      non_penalty += tax.without_penalty();
      a.breakdown.entries.push_back(tax);
    }
    if (taxes.size() == 2) {
      auto it = subsidies.recipient.find(l);
      if (it != subsidies.recipient.end()) {
        const double q = -non_penalty;
        a.t[it->second.value] += q;
        a.breakdown.subsidy[it->second.value] -= q;
      }
    }
  }
  a.breakdown.total = a.t;
  return a;
}

/// Evaluates user i's own taxes for candidate messages while everyone else's
/// message stays fixed. Each link costs O(1) after construction.
class OwnTaxEvaluator {
 public:
  OwnTaxEvaluator(const Network& net, const MessageProfile& profile, UserId i,
                  const MechanismParams& params,
                  const SubsidyAssignment& subsidies)
      : params_(params) {
    for (const LinkId l : net.route(i)) {
      links_.push_back(detail::own_link_context(net, profile, l, i, params));
    }
    for (const auto& [l, recipient] : subsidies.recipient) {
      if (recipient == i) received_q_ += link_subsidy_q(net, profile, l, params);
    }
  }

  std::size_t num_links() const { return links_.size(); }
  const detail::OwnLinkContext& link(std::size_t k) const { return links_[k]; }

  /// t_i^l for the k-th route link.
  double link_tax(std::size_t k, double x, double p,
                  bool with_penalty = true) const {
    const auto parts = detail::link_tax_core(links_[k], x, p, params_);
    return with_penalty ? parts.delta1 + parts.delta2 + parts.delta3
                        : parts.delta1 + parts.delta2_smooth + parts.delta3;
  }

  /// Total tax for message (x, prices), prices in route order.
  double total_tax(double x, std::span<const double> prices) const {
    double t = received_q_;
    for (std::size_t k = 0; k < links_.size(); ++k) {
      t += link_tax(k, x, prices[k]);
    }
    return t;
  }

  double total_tax_uniform(double x, double p) const {
    double t = received_q_;
    for (std::size_t k = 0; k < links_.size(); ++k) t += link_tax(k, x, p);
    return t;
  }

  double received_q() const { return received_q_; }

 private:
  MechanismParams params_;
  std::vector<detail::OwnLinkContext> links_;
  double received_q_ = 0.0;
};

}  // namespace nash_unicast
