"""Near-optimizer sequences for the three sharpness statements.

1. K: the quotient along the truncated ground states falls toward 2/pi but
   only like 1/ln(1/eps); the ratio of increments dN/dD converges much faster.
2. 1/4: with eps_0 already sent to zero the remainder quotient Q_1 closes in
   on 1/4 as eps_1 -> 0.
3. Weight power: replacing X_1^2 by X_1^{2-eps} lets the ratio go to zero.
"""
import math

from finsler_hardy.finsler_core import NormSpec
from finsler_hardy.quadrature import DomainSpec
from finsler_hardy.sweeps import sharpness_K_sweep, sharpness_remainder_sweep, weight_power_failure_sweep

p = (3, 0.0, 2.0)
ball = DomainSpec.wulff_half_ball(NormSpec.euclidean(3))

sw = sharpness_K_sweep(p, eps_list=(0.2, 0.1, 0.05, 1e-2, 1e-3, 1e-4))
print("eps       Q[u_eps]   target 2/pi =", 2 / math.pi)
prev = None
for r in sw.rows:
    N, D = r.extras["numerator"], r.extras["denominator"]
    inc = "" if prev is None else f"   dN/dD = {(N - prev[0]) / (D - prev[1]):.5f}"
    print(f"{r.control_parameter:<8g}  {r.quotient:.5f}{inc}")
    prev = (N, D)

sw = sharpness_remainder_sweep(p, None, ball, 1, [(0.0, e) for e in (0.05, 0.02, 0.01, 0.004, 0.002)])
print("\n(eps0, eps1)     Q_1")
for r in sw.rows:
    print(f"{str(r.control_parameter):15s}  {r.quotient:.5f}")

sw = weight_power_failure_sweep(p, None, ball, 1, 0.5, [3, 5, 8, 20, 100])
print("\nm     ratio     N (quad / closed)             D (quad / closed)")
for r in sw.rows:
    e = r.extras
    print(f"{r.control_parameter:<4d}  {r.quotient:.5f}   {e['N_model']:.10f} / {e['N_closed']:.10f}"
          f"   {e['D_model']:.10f} / {e['D_closed']:.10f}")
