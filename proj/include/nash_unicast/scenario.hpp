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

// Scenario and message-profile files (JSON, schema "nash-unicast/scenario-v1").
//
//   {
//     "schema": "nash-unicast/scenario-v1",
//     "name": "two_users_one_link",
//     "links": [{"id": "A", "capacity": 1}],
//     "users": [{"id": "u1", "route": ["A"],
//                "utility": {"family": "log", "params": {"a": 1}}}],
//     "mechanism": {"alpha": .., "gamma": .., "epsilon": .., "price_bound": ..,
//                   "seed": 0},
//     "solver": {"tolerance": .., "max_iterations": .., "step_a": ..,
//                "step_b": ..},
//     "dynamics": {"schedule": "round-robin", "seed": 0, "max_rounds": 100,
//                  "br_grid": 51, "stop_tolerance": 1e-9,
//                  "start": {"x": 0, "price": 0}},
//     "profile": {"messages": [{"user": "u1", "x": 0.5,
//                               "prices": {"A": 0.66}}]}
//   }
//
// Every section after "users" is optional; missing mechanism fields fall back
// to default_params.

#pragma once

#include "json.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nash_unicast/dynamics.hpp"
#include "nash_unicast/error.hpp"
#include "nash_unicast/mechanism.hpp"
#include "nash_unicast/network.hpp"
#include "nash_unicast/solver.hpp"
#include "nash_unicast/utility.hpp"

namespace nash_unicast {

inline constexpr const char* kScenarioSchema = "nash-unicast/scenario-v1";
inline constexpr const char* kProfileSchema = "nash-unicast/profile-v1";

struct StartSpec {
  double x = 0.0;
  double price = 0.0;
};

struct Scenario {
  std::string name;
  Network network;
  std::vector<UtilitySpec> utilities;
  MechanismParams params;
  SolverConfig solver;
  DynamicsConfig dynamics;
  StartSpec start;
  std::optional<MessageProfile> profile;
  std::string digest;
};

namespace detail {

using Json = nlohmann::json;

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte, text.size() + 1);
    for (std::size_t k = 0; k + 1 < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParseError,
                origin + ":" + std::to_string(line) + ":" +
                    std::to_string(col) + ": malformed JSON");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Typed field access that reports the JSON path on failure.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const {
    return j_.is_object() && j_.contains(key);
  }
  Reader at(const char* key) const {
    if (!has(key)) {
      throw Error(ErrorCode::kValidationError,
                  path_ + ": missing field '" + key + "'");
    }
    return Reader(j_.at(key), path_ + "." + key);
  }
  Reader at(std::size_t k) const {
    return Reader(j_.at(k), path_ + "[" + std::to_string(k) + "]");
  }
  const std::string& path() const { return path_; }
  const Json& json() const { return j_; }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<std::int64_t>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }
  std::int64_t integer_or(const char* key, std::int64_t fallback) const {
    return has(key) ? at(key).integer() : fallback;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError, path_ + ": " + what);
  }

 private:
  const Json& j_;
  std::string path_;
};

inline UtilitySpec parse_utility(const Reader& r) {
  r.require_object();
  const std::string family = r.at("family").string();
  const Reader params = r.has("params") ? r.at("params") : r;
  auto num = [&](const char* key) { return params.at(key).number(); };
  UtilitySpec u;
  if (family == "log") {
    u = LogUtility{num("a")};
  } else if (family == "power") {
    u = PowerUtility{num("a"), num("theta")};
  } else if (family == "quadcap") {
    u = QuadCapUtility{num("a"), num("b")};
  } else if (family == "sigmoid") {
    u = SigmoidUtility{num("a"), num("s")};
  } else {
    throw Error(ErrorCode::kParseError,
                r.path() + ".family: unknown utility family '" + family + "'");
  }
  try {
    validate_utility(u);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidationError, r.path() + ": " + e.what());
  }
  return u;
}

inline Json utility_to_json(const UtilitySpec& u) {
  Json params = std::visit(
      Overloaded{[](const LogUtility& f) { return Json{{"a", f.a}}; },
                 [](const PowerUtility& f) {
                   return Json{{"a", f.a}, {"theta", f.theta}};
                 },
                 [](const QuadCapUtility& f) {
                   return Json{{"a", f.a}, {"b", f.b}};
                 },
                 [](const SigmoidUtility& f) {
                   return Json{{"a", f.a}, {"s", f.s}};
                 }},
      u);
  return Json{{"family", std::string(family_name(u))}, {"params", params}};
}

inline std::unordered_map<std::string, UserId> user_index(const Network& net) {
  std::unordered_map<std::string, UserId> out;
  for (const UserId i : net.users()) out[net.user_name(i)] = i;
  return out;
}

inline std::unordered_map<std::string, LinkId> link_index(const Network& net) {
  std::unordered_map<std::string, LinkId> out;
  for (const LinkId l : net.links()) out[net.link_name(l)] = l;
  return out;
}

}  // namespace detail

/// Reads a message profile from any document with a "messages" array. Users
/// missing from the array raise ValidationError.
inline MessageProfile profile_from_json(const Network& net,
                                        const nlohmann::json& doc,
                                        const std::string& origin) {
  const detail::Reader root(doc, origin);
  const auto messages = root.at("messages");
  const auto users = detail::user_index(net);
  const auto links = detail::link_index(net);
  MessageProfile profile(net.num_users());
  std::vector<bool> seen(net.num_users(), false);
  for (std::size_t k = 0; k < messages.array_size(); ++k) {
    const auto m = messages.at(k);
    const std::string name = m.at("user").string();
    auto it = users.find(name);
    if (it == users.end()) {
      throw Error(ErrorCode::kValidationError,
                  m.path() + ": unknown user '" + name + "'");
    }
    Message& msg = profile[it->second.value];
    seen[it->second.value] = true;
    msg.x = m.at("x").number();
    const auto prices = m.at("prices");
    prices.require_object();
    for (const auto& [link, value] : prices.json().items()) {
      auto lt = links.find(link);
      if (lt == links.end()) {
        throw Error(ErrorCode::kValidationError,
                    prices.path() + ": unknown link '" + link + "'");
      }
      msg.prices[lt->second] =
          detail::Reader(value, prices.path() + "." + link).number();
    }
  }
  for (const UserId i : net.users()) {
    if (!seen[i.value]) {
      throw Error(ErrorCode::kValidationError,
                  origin + ": no message for user '" + net.user_name(i) + "'");
    }
  }
  return profile;
}

inline nlohmann::json profile_to_json(const Network& net,
                                      const MessageProfile& profile) {
  nlohmann::json messages = nlohmann::json::array();
  for (const UserId i : net.users()) {
    const Message& m = profile[i.value];
    nlohmann::json prices = nlohmann::json::object();
    for (const auto& [l, p] : m.prices) prices[net.link_name(l)] = p;
    messages.push_back(
        {{"user", net.user_name(i)}, {"x", m.x}, {"prices", prices}});
  }
  return messages;
}

inline MessageProfile load_profile(const Network& net,
                                   const std::string& path) {
  return profile_from_json(
      net, detail::parse_json(detail::read_file(path), path), path);
}

inline Scenario scenario_from_json(const nlohmann::json& doc,
                                   const std::string& origin) {
  const detail::Reader root(doc, origin);
  root.require_object();
  const std::string schema = root.at("schema").string();
  if (schema != kScenarioSchema) {
    throw Error(ErrorCode::kValidationError,
                origin + ".schema: expected '" + kScenarioSchema + "', got '" +
                    schema + "'");
  }
  Scenario sc;
  sc.name = root.has("name") ? root.at("name").string() : origin;

  std::vector<LinkSpec> link_specs;
  const auto links = root.at("links");
  for (std::size_t k = 0; k < links.array_size(); ++k) {
    const auto l = links.at(k);
    link_specs.push_back({l.at("id").string(), l.at("capacity").number()});
  }
  std::vector<RouteSpec> route_specs;
  const auto users = root.at("users");
  for (std::size_t k = 0; k < users.array_size(); ++k) {
    const auto u = users.at(k);
    RouteSpec route;
    route.user = u.at("id").string();
    if (!u.has("route")) {
      throw Error(ErrorCode::kValidationError,
                  u.path() + ": user '" + route.user + "' has no route");
    }
    const auto r = u.at("route");
    for (std::size_t m = 0; m < r.array_size(); ++m) {
      route.links.push_back(r.at(m).string());
    }
    route_specs.push_back(std::move(route));
    sc.utilities.push_back(detail::parse_utility(u.at("utility")));
  }
  try {
    sc.network = build_network(link_specs, route_specs);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidationError, origin + ": " + e.what());
  }

  sc.params = default_params(sc.network, sc.utilities);
  if (root.has("mechanism")) {
    const auto m = root.at("mechanism");
    sc.params.alpha = m.number_or("alpha", sc.params.alpha);
    sc.params.gamma = m.number_or("gamma", sc.params.gamma);
    sc.params.epsilon = m.number_or("epsilon", sc.params.epsilon);
    sc.params.price_bound = m.number_or("price_bound", sc.params.price_bound);
    sc.params.rng_seed = static_cast<std::uint64_t>(m.integer_or("seed", 0));
  }
  try {
    validate_params(sc.params);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidationError, origin + ".mechanism: " + e.what());
  }

  if (root.has("solver")) {
    const auto s = root.at("solver");
    sc.solver.tolerance = s.number_or("tolerance", sc.solver.tolerance);
    sc.solver.max_iterations =
        s.integer_or("max_iterations", sc.solver.max_iterations);
    sc.solver.step_a = s.number_or("step_a", sc.solver.step_a);
    sc.solver.step_b = s.number_or("step_b", sc.solver.step_b);
  }

  if (root.has("dynamics")) {
    const auto d = root.at("dynamics");
    if (d.has("schedule")) {
      const std::string s = d.at("schedule").string();
      if (s == "round-robin") {
        sc.dynamics.schedule = Schedule::kRoundRobin;
      } else if (s == "random") {
        sc.dynamics.schedule = Schedule::kRandom;
      } else {
        d.at("schedule").fail("unknown schedule '" + s + "'");
      }
    }
    sc.dynamics.seed = static_cast<std::uint64_t>(d.integer_or("seed", 0));
    sc.dynamics.max_rounds =
        static_cast<int>(d.integer_or("max_rounds", sc.dynamics.max_rounds));
    sc.dynamics.br_grid =
        static_cast<int>(d.integer_or("br_grid", sc.dynamics.br_grid));
    sc.dynamics.stop_tolerance =
        d.number_or("stop_tolerance", sc.dynamics.stop_tolerance);
    if (d.has("start")) {
      const auto s = d.at("start");
      sc.start.x = s.number_or("x", 0.0);
      sc.start.price = s.number_or("price", 0.0);
    }
    try {
      validate_dynamics_config(sc.dynamics);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidationError, d.path() + ": " + e.what());
    }
  }

  if (root.has("profile")) {
    sc.profile = profile_from_json(sc.network, root.at("profile").json(),
                                   origin + ".profile");
    try {
      validate_profile(sc.network, *sc.profile, sc.params);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidationError,
                  origin + ".profile: " + e.what());
    }
  }
  sc.digest = detail::hex64(detail::fnv1a(doc.dump()));
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(
      detail::parse_json(detail::read_file(path), path), path);
}

/// Uniform start profile from the scenario's dynamics section, with rates
/// clipped to each user's message box.
inline MessageProfile start_profile(const Scenario& sc) {
  MessageProfile p(sc.network.num_users());
  for (const UserId i : sc.network.users()) {
    p[i.value] = uniform_message(
        sc.network, i, std::min(sc.start.x, min_route_capacity(sc.network, i)),
        sc.start.price);
  }
  return p;
}

}  // namespace nash_unicast
