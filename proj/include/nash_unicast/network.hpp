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

// Network topology: links with capacities, users with fixed routes, and the
// per-link user groups derived from the routes.

#pragma once

#include <algorithm>
#include <compare>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nash_unicast/error.hpp"

namespace nash_unicast {

// Absolute slack used whenever a capacity boundary is compared.
inline constexpr double kBoundaryTolerance = 1e-12;

struct LinkId {
  std::uint32_t value = 0;
  auto operator<=>(const LinkId&) const = default;
};

struct UserId {
  std::uint32_t value = 0;
  auto operator<=>(const UserId&) const = default;
};

// Rates indexed by dense user id.
using RateVector = std::vector<double>;

struct LinkSpec {
  std::string name;
  double capacity = 0.0;
};

struct RouteSpec {
  std::string user;
  std::vector<std::string> links;
};

/// Immutable topology. Ids are dense and assigned in declaration order, so
/// `UserId{k}` is the k-th declared user and groups list users ascending.
class Network {
 public:
  std::size_t num_links() const { return capacities_.size(); }
  std::size_t num_users() const { return routes_.size(); }

  double capacity(LinkId l) const { return capacities_.at(l.value); }
  const std::vector<LinkId>& route(UserId i) const {
    if (i.value >= routes_.size()) {
      throw Error(ErrorCode::kUnknownUser,
                  "user id " + std::to_string(i.value));
    }
    return routes_[i.value];
  }
  const std::vector<UserId>& group(LinkId l) const {
    return groups_.at(l.value);
  }
  std::size_t group_size(LinkId l) const { return group(l).size(); }

  const std::string& link_name(LinkId l) const {
    return link_names_.at(l.value);
  }
  const std::string& user_name(UserId i) const {
    return user_names_.at(i.value);
  }

  bool on_route(UserId i, LinkId l) const {
    const auto& r = route(i);
    return std::find(r.begin(), r.end(), l) != r.end();
  }

  double max_capacity() const {
    return *std::max_element(capacities_.begin(), capacities_.end());
  }

  std::vector<LinkId> links() const {
    std::vector<LinkId> out(num_links());
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = LinkId{static_cast<std::uint32_t>(k)};
    }
    return out;
  }
  std::vector<UserId> users() const {
    std::vector<UserId> out(num_users());
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = UserId{static_cast<std::uint32_t>(k)};
    }
    return out;
  }

  std::size_t max_group_size() const {
    std::size_t m = 0;
    for (const auto& g : groups_) m = std::max(m, g.size());
    return m;
  }

 private:
  friend Network build_network(std::span<const LinkSpec>,
                               std::span<const RouteSpec>);

  std::vector<double> capacities_;
  std::vector<std::string> link_names_;
  std::vector<std::vector<LinkId>> routes_;
  std::vector<std::string> user_names_;
  std::vector<std::vector<UserId>> groups_;
};

inline Network build_network(std::span<const LinkSpec> link_specs,
                             std::span<const RouteSpec> route_specs) {
  if (link_specs.empty()) {
    throw Error(ErrorCode::kUnknownLink, "network declares no links");
  }
  Network net;
  std::unordered_map<std::string, LinkId> by_name;
  for (const auto& spec : link_specs) {
    if (!(spec.capacity > 0.0) || !std::isfinite(spec.capacity)) {
      throw Error(ErrorCode::kNonPositiveCapacity,
                  "link '" + spec.name + "' has capacity " +
                      std::to_string(spec.capacity));
    }
    const LinkId id{static_cast<std::uint32_t>(net.capacities_.size())};
    if (!by_name.emplace(spec.name, id).second) {
      throw Error(ErrorCode::kDuplicateLink, "link '" + spec.name + "'");
    }
    net.capacities_.push_back(spec.capacity);
    net.link_names_.push_back(spec.name);
  }

  std::unordered_map<std::string, UserId> users;
  net.groups_.assign(net.capacities_.size(), {});
  for (const auto& spec : route_specs) {
    const UserId uid{static_cast<std::uint32_t>(net.routes_.size())};
    if (!users.emplace(spec.user, uid).second) {
      throw Error(ErrorCode::kDuplicateUser, "user '" + spec.user + "'");
    }
    if (spec.links.empty()) {
      throw Error(ErrorCode::kEmptyRoute, "user '" + spec.user + "'");
    }
    std::vector<LinkId> route;
    for (const auto& name : spec.links) {
      auto it = by_name.find(name);
      if (it == by_name.end()) {
        throw Error(ErrorCode::kUnknownLink,
                    "route of user '" + spec.user + "' uses '" + name + "'");
      }
      // A route is a set; repeated links collapse.
      if (std::find(route.begin(), route.end(), it->second) == route.end()) {
        route.push_back(it->second);
        net.groups_[it->second.value].push_back(uid);
      }
    }
    net.routes_.push_back(std::move(route));
    net.user_names_.push_back(spec.user);
  }
  if (net.routes_.empty()) {
    throw Error(ErrorCode::kMissingUser, "network declares no users");
  }
  return net;
}

inline bool is_feasible(const Network& net, std::span<const double> x) {
  if (x.size() != net.num_users()) {
    throw Error(ErrorCode::kMissingUser,
                "rate vector has " + std::to_string(x.size()) +
                    " entries for " + std::to_string(net.num_users()) +
                    " users");
  }
  for (double xi : x) {
    if (!(xi >= 0.0) || !std::isfinite(xi)) return false;
  }
  for (const LinkId l : net.links()) {
    double load = 0.0;
    for (const UserId i : net.group(l)) load += x[i.value];
    if (load > net.capacity(l) + kBoundaryTolerance) return false;
  }
  return true;
}

inline double min_route_capacity(const Network& net, UserId user) {
  const auto& route = net.route(user);
  if (route.empty()) {
    throw Error(ErrorCode::kEmptyRoute, "user " + net.user_name(user));
  }
  double cap = std::numeric_limits<double>::infinity();
  for (const LinkId l : route) cap = std::min(cap, net.capacity(l));
  return cap;
}

/// Σ_{i∈G^l} x_i − c^l for every link.
inline std::vector<double> link_excess(const Network& net,
                                       std::span<const double> x) {
  std::vector<double> out(net.num_links());
  for (const LinkId l : net.links()) {
    double load = 0.0;
    for (const UserId i : net.group(l)) load += x[i.value];
    out[l.value] = load - net.capacity(l);
  }
  return out;
}

}  // namespace nash_unicast
