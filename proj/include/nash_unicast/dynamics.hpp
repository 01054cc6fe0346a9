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

// Grid best-response dynamics. One possible adjustment process among many;
// nothing here claims convergence, the verdict only records what happened.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "nash_unicast/equilibrium.hpp"
#include "nash_unicast/mechanism.hpp"
#include "nash_unicast/network.hpp"
#include "nash_unicast/utility.hpp"

namespace nash_unicast {

enum class Schedule { kRoundRobin, kRandom };

struct DynamicsConfig {
  Schedule schedule = Schedule::kRoundRobin;
  std::uint64_t seed = 0;
  int max_rounds = 100;
  int br_grid = 51;
  double stop_tolerance = 1e-9;
};

enum class Verdict { kConverged, kCycled, kExhausted };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kConverged: return "Converged";
    case Verdict::kCycled: return "Cycled";
    case Verdict::kExhausted: return "Exhausted";
  }
  return "Unknown";
}

struct Step {
  int round = 0;
  UserId user;
  Message old_message;
  Message new_message;
  double payoff_delta = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
  Verdict verdict = Verdict::kExhausted;
  int rounds = 0;
  MessageProfile final_profile;
};

inline void validate_dynamics_config(const DynamicsConfig& config) {
  if (config.max_rounds < 1 || config.br_grid < 2 ||
      !(config.stop_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidParams,
                "dynamics needs max_rounds >= 1, br_grid >= 2 and a "
                "non-negative stop tolerance");
  }
}

/// Grid argmax of user i's payoff over the audit's deviation lattice.
inline Message best_response(const Network& net,
                             std::span<const UtilitySpec> utilities,
                             const MessageProfile& profile, UserId i,
                             const MechanismParams& params,
                             const SubsidyAssignment& subsidies, int br_grid) {
  const OwnTaxEvaluator eval(net, profile, i, params, subsidies);
  const auto best = detail::search_lattice(
      net, utilities[i.value], eval, i, profile[i.value], params, br_grid);
  Message m;
  m.x = best.x;
  const auto& route = net.route(i);
  for (std::size_t k = 0; k < route.size(); ++k) {
    m.prices[route[k]] = best.prices[k];
  }
  return m;
}

namespace detail {

inline double own_payoff(const Network& net, const UtilitySpec& u,
                         const MessageProfile& profile, UserId i,
                         const MechanismParams& params,
                         const SubsidyAssignment& subsidies) {
  const OwnTaxEvaluator eval(net, profile, i, params, subsidies);
  const Message& m = profile[i.value];
  std::vector<double> prices;
  for (const LinkId l : net.route(i)) prices.push_back(m.prices.at(l));
  return value(u, m.x) - eval.total_tax(m.x, prices);
}

inline std::vector<long long> quantize(const MessageProfile& profile) {
  std::vector<long long> key;
  for (const Message& m : profile) {
    key.push_back(std::llround(m.x * 1e9));
    for (const auto& [l, p] : m.prices) key.push_back(std::llround(p * 1e9));
  }
  return key;
}

}  // namespace detail

/// Users best-respond one at a time. A user only switches when the gain
/// exceeds stop_tolerance, so a converged pass leaves the profile untouched.
inline Trajectory run_dynamics(const Network& net,
                               std::span<const UtilitySpec> utilities,
                               const MessageProfile& start,
                               const DynamicsConfig& config,
                               const MechanismParams& params,
                               const SubsidyAssignment& subsidies) {
  validate_dynamics_config(config);
  validate_profile(net, start, params);
  Trajectory traj;
  MessageProfile profile = start;
  std::mt19937_64 rng(config.seed);
  std::set<std::vector<long long>> seen{detail::quantize(profile)};
  std::vector<UserId> order = net.users();

  for (int round = 0; round < config.max_rounds; ++round) {
    if (config.schedule == Schedule::kRandom) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    double max_delta = 0.0;
    for (const UserId i : order) {
      const UtilitySpec& u = utilities[i.value];
      const double before =
          detail::own_payoff(net, u, profile, i, params, subsidies);
      Message next =
          best_response(net, utilities, profile, i, params, subsidies,
                        config.br_grid);
      const Message old = profile[i.value];
      profile[i.value] = next;
      const double after =
          detail::own_payoff(net, u, profile, i, params, subsidies);
      const double delta = after - before;
      if (!(delta > config.stop_tolerance)) {
        profile[i.value] = old;
        next = old;
      }
      max_delta = std::max(max_delta, delta);
      traj.steps.push_back(Step{round, i, old, next, std::max(delta, 0.0)});
    }
    traj.rounds = round + 1;
    if (max_delta <= config.stop_tolerance) {
      traj.verdict = Verdict::kConverged;
      traj.final_profile = profile;
      return traj;
    }
    if (!seen.insert(detail::quantize(profile)).second) {
      traj.verdict = Verdict::kCycled;
      traj.final_profile = profile;
      return traj;
    }
  }
  traj.verdict = Verdict::kExhausted;
  traj.final_profile = profile;
  return traj;
}

}  // namespace nash_unicast
