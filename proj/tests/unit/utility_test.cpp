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

#include "nash_unicast/utility.hpp"
#include "support/generators.hpp"

namespace nash_unicast {
namespace {

TEST(Value, Examples) {
  EXPECT_DOUBLE_EQ(value(LogUtility{1}, 0.0), 0.0);
  EXPECT_NEAR(value(LogUtility{1}, std::exp(1.0) - 1.0), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(value(SigmoidUtility{2, 1}, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(value(QuadCapUtility{2, 1}, 3.0), 1.0);  // a^2/(4b)
}

TEST(Value, NegativeRateThrows) {
  try {
    value(LogUtility{1}, -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeRate);
  }
}

TEST(Derivative, Examples) {
  EXPECT_NEAR(derivative(LogUtility{1}, 0.5), 1.0 / 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(derivative(QuadCapUtility{2, 1}, 1.5), 0.0);
  EXPECT_THROW(derivative(LogUtility{1}, -1.0), Error);
}

TEST(Demand, Examples) {
  EXPECT_NEAR(demand(LogUtility{1}, 2.0 / 3.0, 1.0), 0.5, 1e-12);
  // Grid search of x^0.5 - x at step 1e-4 peaks at 0.25.
  EXPECT_NEAR(demand(PowerUtility{1, 0.5}, 1.0, 10.0), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(demand(LogUtility{2}, 0.0, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(demand(PowerUtility{1, 0.3}, 0.0, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(demand(SigmoidUtility{1, 0.1}, 0.0, 3.0), 3.0);
  // Flat past its peak: the smallest maximizer is returned.
  EXPECT_DOUBLE_EQ(demand(QuadCapUtility{2, 1}, 0.0, 3.0), 1.0);
}

TEST(Demand, SigmoidPicksGlobalMaximum) {
  // U - p x has a local maximum at 0 and another on the concave branch.
  const SigmoidUtility u{1.0, 0.1};
  for (double p : {0.2, 0.5, 1.0, 1.5, 2.0}) {
    const double x = demand(u, p, 2.0);
    double best = 0.0, best_x = 0.0;
    for (int k = 0; k <= 200000; ++k) {
      const double g = 2.0 * k / 200000.0;
      const double v = value(u, g) - p * g;
      if (v > best) {
        best = v;
        best_x = g;
      }
    }
    EXPECT_NEAR(x, best_x, 1e-4) << "price " << p;
    EXPECT_GE(value(u, x) - p * x, best - 1e-9);
  }
}

TEST(Payoff, Examples) {
  EXPECT_DOUBLE_EQ(payoff(LogUtility{1}, 0.0, 0.0), 0.0);
  EXPECT_NEAR(payoff(LogUtility{1}, std::exp(1.0) - 1.0, 0.4), 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(payoff(LogUtility{1}, 0.0, -1.0), 1.0);
}

TEST(ValidateUtility, RejectsBadParameters) {
  EXPECT_THROW(validate_utility(LogUtility{0}), Error);
  EXPECT_THROW(validate_utility(PowerUtility{1, 1.0}), Error);
  EXPECT_THROW(validate_utility(QuadCapUtility{1, -1}), Error);
  EXPECT_THROW(validate_utility(SigmoidUtility{1, 0}), Error);
  EXPECT_NO_THROW(validate_utility(PowerUtility{1, 0.5}));
}

TEST(UtilityProperty, ZeroAtOriginAndMonotone) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const UtilitySpec u = testing::random_utility(rng);
    EXPECT_EQ(value(u, 0.0), 0.0);
    const double y = testing::uniform(rng, 0.0, 5.0);
    const double x = y + testing::uniform(rng, 1e-3, 2.0);
    if (const auto* q = std::get_if<QuadCapUtility>(&u)) {
      EXPECT_GE(value(u, x), value(u, y));
      if (x <= q->a / (2 * q->b)) {
        EXPECT_GT(value(u, x), value(u, y));
      }
    } else {
      EXPECT_GT(value(u, x), value(u, y));
    }
  }
}

TEST(UtilityProperty, DerivativeMatchesFiniteDifference) {
  testing::Rng rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    const UtilitySpec u = testing::random_utility(rng);
    double x = testing::uniform(rng, 0.01, 5.0);
    if (const auto* q = std::get_if<QuadCapUtility>(&u)) {
      // Stay away from the kink at the peak.
      if (std::abs(x - q->a / (2 * q->b)) < 1e-3) x += 2e-3;
    }
    const double h = 1e-6;
    const double fd = (value(u, x + h) - value(u, x - h)) / (2 * h);
    const double d = derivative(u, x);
    EXPECT_NEAR(d, fd, 1e-6 * std::max(1.0, std::abs(d)));
  }
}

TEST(UtilityProperty, ConcaveDemandMonotoneBoundedAndStationary) {
  testing::Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const UtilitySpec u = testing::random_concave_utility(rng);
    const double cap = testing::uniform(rng, 0.1, 5.0);
    const double p1 = testing::uniform(rng, 0.0, 4.0);
    const double p2 = p1 + testing::uniform(rng, 0.0, 2.0);
    const double d1 = demand(u, p1, cap);
    const double d2 = demand(u, p2, cap);
    EXPECT_GE(d1, 0.0);
    EXPECT_LE(d1, cap);
    EXPECT_GE(d1, d2);
    if (d1 > 0.0 && d1 < cap) {
      EXPECT_NEAR(derivative(u, d1), p1, 1e-8);
    }
  }
}

TEST(UtilityProperty, SigmoidDemandBounded) {
  testing::Rng rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const SigmoidUtility u{testing::uniform(rng, 0.5, 3),
                           testing::uniform(rng, 0.01, 1)};
    const double cap = testing::uniform(rng, 0.1, 3.0);
    const double p = testing::uniform(rng, 0.0, 3.0);
    const double x = demand(u, p, cap);
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, cap);
    EXPECT_GE(value(u, x) - p * x, -1e-15);  // never worse than x = 0
  }
}

TEST(MaxMarginal, Families) {
  EXPECT_DOUBLE_EQ(max_marginal(LogUtility{2}, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(max_marginal(QuadCapUtility{3, 1}, 0.0), 3.0);
  const SigmoidUtility s{1, 0.3};
  const double peak = std::sqrt(0.1);
  EXPECT_DOUBLE_EQ(max_marginal(s, 0.0), derivative(s, peak));
  EXPECT_GT(max_marginal(s, 0.0), derivative(s, 0.9 * peak));
  EXPECT_GT(max_marginal(s, 0.0), derivative(s, 1.1 * peak));
}

}  // namespace
}  // namespace nash_unicast
