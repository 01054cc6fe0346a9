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

// Parametric user utilities. Every family satisfies U(0) = 0 and is
// non-decreasing on [0, inf). Log, Power and QuadCap are concave; Sigmoid is
// only quasi-concave.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>

#include "nash_unicast/error.hpp"

namespace nash_unicast {

/// U(x) = a ln(1 + x)
struct LogUtility {
  double a = 1.0;
};
/// U(x) = a x^theta, 0 < theta < 1
struct PowerUtility {
  double a = 1.0;
  double theta = 0.5;
};
/// U(x) = a x - b x^2 up to the peak a/(2b), flat afterwards.
struct QuadCapUtility {
  double a = 1.0;
  double b = 1.0;
};
/// U(x) = a x^2 / (s + x^2)
struct SigmoidUtility {
  double a = 1.0;
  double s = 1.0;
};

using UtilitySpec =
    std::variant<LogUtility, PowerUtility, QuadCapUtility, SigmoidUtility>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline std::string_view family_name(const UtilitySpec& u) {
  return std::visit(
      Overloaded{[](const LogUtility&) { return std::string_view("log"); },
                 [](const PowerUtility&) { return std::string_view("power"); },
                 [](const QuadCapUtility&) {
                   return std::string_view("quadcap");
                 },
                 [](const SigmoidUtility&) {
                   return std::string_view("sigmoid");
                 }},
      u);
}

inline bool is_concave(const UtilitySpec& u) {
  return !std::holds_alternative<SigmoidUtility>(u);
}

inline void validate_utility(const UtilitySpec& u) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const bool ok = std::visit(
      Overloaded{
          [&](const LogUtility& f) { return positive(f.a); },
          [&](const PowerUtility& f) {
            return positive(f.a) && std::isfinite(f.theta) && f.theta > 0.0 &&
                   f.theta < 1.0;
          },
          [&](const QuadCapUtility& f) {
            return positive(f.a) && positive(f.b);
          },
          [&](const SigmoidUtility& f) {
            return positive(f.a) && positive(f.s);
          }},
      u);
  if (!ok) {
    throw Error(ErrorCode::kInvalidUtility,
                "bad parameters for family " + std::string(family_name(u)));
  }
}

namespace detail {
inline void require_rate(double x) {
  if (!(x >= 0.0)) {
    throw Error(ErrorCode::kNegativeRate, "rate " + std::to_string(x));
  }
}
}  // namespace detail

inline double value(const UtilitySpec& u, double x) {
  detail::require_rate(x);
  return std::visit(
      Overloaded{[x](const LogUtility& f) { return f.a * std::log1p(x); },
                 [x](const PowerUtility& f) {
                   return f.a * std::pow(x, f.theta);
                 },
                 [x](const QuadCapUtility& f) {
                   const double peak = f.a / (2.0 * f.b);
                   const double y = std::min(x, peak);
                   return f.a * y - f.b * y * y;
                 },
                 [x](const SigmoidUtility& f) {
                   return f.a * x * x / (f.s + x * x);
                 }},
      u);
}

inline double derivative(const UtilitySpec& u, double x) {
  detail::require_rate(x);
  return std::visit(
      Overloaded{[x](const LogUtility& f) { return f.a / (1.0 + x); },
                 [x](const PowerUtility& f) {
                   return f.a * f.theta * std::pow(x, f.theta - 1.0);
                 },
                 [x](const QuadCapUtility& f) {
                   return x >= f.a / (2.0 * f.b) ? 0.0 : f.a - 2.0 * f.b * x;
                 },
                 [x](const SigmoidUtility& f) {
                   const double d = f.s + x * x;
                   return 2.0 * f.a * f.s * x / (d * d);
                 }},
      u);
}

inline double second_derivative(const UtilitySpec& u, double x) {
  detail::require_rate(x);
  return std::visit(
      Overloaded{[x](const LogUtility& f) {
                   return -f.a / ((1.0 + x) * (1.0 + x));
                 },
                 [x](const PowerUtility& f) {
                   return f.a * f.theta * (f.theta - 1.0) *
                          std::pow(x, f.theta - 2.0);
                 },
                 [x](const QuadCapUtility& f) {
                   return x >= f.a / (2.0 * f.b) ? 0.0 : -2.0 * f.b;
                 },
                 [x](const SigmoidUtility& f) {
                   const double d = f.s + x * x;
                   return 2.0 * f.a * f.s * (f.s - 3.0 * x * x) / (d * d * d);
                 }},
      u);
}

/// Largest marginal utility on [floor, inf).
inline double max_marginal(const UtilitySpec& u, double floor) {
  if (const auto* f = std::get_if<SigmoidUtility>(&u)) {
    return derivative(u, std::max(floor, std::sqrt(f->s / 3.0)));
  }
  return derivative(u, floor);
}

namespace detail {

// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// argmax over x in [0, cap] of U(x) - price * x.
///
/// Closed forms for the concave families. QuadCap at price 0 has a plateau of
/// maximizers; the smallest one (its peak) is returned. Sigmoid combines a
/// golden-section search on the concave branch with the x = 0 endpoint, since
/// U(x) - price * x can have a local maximum at both.
inline double demand(const UtilitySpec& u, double price, double cap) {
  cap = std::max(cap, 0.0);
  price = std::max(price, 0.0);
  return std::visit(
      Overloaded{
          [&](const LogUtility& f) {
            if (price == 0.0) return cap;
            return std::clamp(f.a / price - 1.0, 0.0, cap);
          },
          [&](const PowerUtility& f) {
            if (price == 0.0) return cap;
            const double x =
                std::pow(price / (f.a * f.theta), 1.0 / (f.theta - 1.0));
            return std::clamp(x, 0.0, cap);
          },
          [&](const QuadCapUtility& f) {
            return std::clamp((f.a - price) / (2.0 * f.b), 0.0, cap);
          },
          [&](const SigmoidUtility& f) {
            if (price == 0.0) return cap;
            auto objective = [&](double x) {
              return f.a * x * x / (f.s + x * x) - price * x;
            };
            const double inflection = std::min(std::sqrt(f.s / 3.0), cap);
            const double interior =
                detail::golden_section_max(objective, inflection, cap, 1e-10);
            double best = 0.0;
            double best_value = 0.0;
            for (double x : {interior, cap}) {
              const double v = objective(x);
              if (v > best_value) {
                best = x;
                best_value = v;
              }
            }
            return best;
          }},
      u);
}

inline double payoff(const UtilitySpec& u, double x, double tax) {
  return value(u, x) - tax;
}

}  // namespace nash_unicast
