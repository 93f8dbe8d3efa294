"""The (n, alpha, b) = (3, 0, 2) case, where everything is explicit.

K = H = C = 2/pi, the profile is B(t) = 1 - (2/pi) arctan t, and the
hypergeometric evaluation, the ODE shooting oracle and the closed form should
all agree.  Then a few weighted cases where only the first two are available.
"""
import math

import numpy as np

from finsler_hardy.constants import const_C, const_H, const_K
from finsler_hardy.ground_state import GroundState, ode_oracle, slope_limit

print("K(3,0,2) =", const_K(3, 0, 2))
print("H(3,0)   =", const_H(3, 0))
print("C(3,2)   =", const_C(3, 2))
print("2/pi     =", 2 / math.pi)

gs = GroundState.build(3, 0.0, 2.0)
t = np.array([0.01, 0.1, 1.0, 10.0, 100.0])
exact = 1 - 2 / math.pi * np.arctan(t)
oracle = ode_oracle(gs.params, t)
print("\n   t        B(hyp)              B(exact)            B(ode)")
for row in zip(t, gs.B(t), exact, oracle.B):
    print("{:7.2f}  {:.15f}  {:.15f}  {:.15f}".format(*row))

# -t^alpha B'(t) -> K as t -> 0, for weighted cases too
print("\n(n, alpha, b)       slope limit          K")
for p in [(3, 0.0, 2.0), (2, 0.5, 2.0), (4, -0.5, 3.0), (5, 0.3, 4.1)]:
    lim, _ = slope_limit(GroundState.build(*p))
    print(f"{str(p):18s}  {lim:.12f}  {const_K(*p):.12f}")
