# Copyright 2026 The nash-unicast Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Reference optimum for a three-user, two-link network.

  links  A: c=1, B: c=2
  users  u0: [A]     log(a=1)
         u1: [A, B]  power(a=1, theta=0.5)
         u2: [B]     quadcap(a=3, b=0.5)

Both links bind at the optimum, so the KKT system reduces to
  x0 + x1 = 1, x1 + x2 = 2,
  1/(1+x0) = lA, 0.5/sqrt(x1) = lA + lB, 3 - x2 = lB.
It is solved here by bisection on x1 in exact float arithmetic and
cross-checked with scipy's SLSQP. Values are frozen into
tests/unit/solver_test.cpp.
"""
import math

import numpy as np
from scipy.optimize import minimize


def residual(x1):
    x0, x2 = 1 - x1, 2 - x1
    return 0.5 / math.sqrt(x1) - (1 / (1 + x0) + (3 - x2))


lo, hi = 1e-12, 1 - 1e-12
for _ in range(200):
    mid = (lo + hi) / 2
    if residual(mid) > 0:
        lo = mid
    else:
        hi = mid
x1 = (lo + hi) / 2
x0, x2 = 1 - x1, 2 - x1
lam_a, lam_b = 1 / (1 + x0), 3 - x2
obj = math.log1p(x0) + math.sqrt(x1) + (3 * x2 - 0.5 * x2 * x2)
print("x", repr(x0), repr(x1), repr(x2))
print("lambda", repr(lam_a), repr(lam_b))
print("objective", repr(obj))


def neg(v):
    a, b, c = v
    return -(math.log1p(a) + math.sqrt(max(b, 0)) + 3 * c - 0.5 * c * c)


res = minimize(neg, np.array([0.3, 0.3, 1.0]), method="SLSQP",
               bounds=[(0, None)] * 3,
               constraints=[{"type": "ineq", "fun": lambda v: 1 - v[0] - v[1]},
                            {"type": "ineq", "fun": lambda v: 2 - v[1] - v[2]}],
               options={"ftol": 1e-14, "maxiter": 500})
print("slsqp", res.x.tolist(), -res.fun)
