"""Deficits of the interpolation, series and cone inequalities for random bumps.

Each bump is a product of smooth one-dimensional bumps inside a cylinder or
a cone; the deficit should stay non-negative for every Finsler norm.  The
Picone column is the same deficit computed as the integral of the
ground-state remainder, which is a second, independent route.
"""
import math

from finsler_hardy.finsler_core import LiftedNorm, NormSpec
from finsler_hardy.ground_state import ProblemParams
from finsler_hardy.quadrature import DomainSpec
from finsler_hardy.verifier import bump_corpus, deficit_cone, deficit_series

norms = {
    "euclidean": NormSpec.euclidean(2),
    "lp4": NormSpec.lp(4, 2),
    "ellipsoid": NormSpec.ellipsoid([[2.0, 0.6], [0.6, 1.0]]),
}
p = ProblemParams(2, 0.5, 2.2)
print("norm        k  deficit        picone         energy")
for name, spec in norms.items():
    lifted = LiftedNorm(spec)
    dom = DomainSpec.cylinder(lifted, 1.0, 1.0)
    for u in bump_corpus(dom, 2, seed=3):
        for k in (0, 2):
            r = deficit_series(u, p, lifted, dom, k, picone=True)
            print(f"{name:10s}  {k}  {r.deficit:.6e}  {r.picone:.6e}  {r.energy:.6e}")

theta = math.pi / 6
print("\ncone theta = pi/6, n = 2, b = 2")
for name, spec in norms.items():
    lifted = LiftedNorm(spec)
    dom = DomainSpec.cone(lifted, theta)
    for u in bump_corpus(dom, 2, seed=4):
        r = deficit_cone(u, 2, 2.0, theta, lifted, dom, k=1)
        print(f"{name:10s}  deficit {r.deficit:.6e}  lateral trace {r.trace_term:.6e}  {r.verdict}")
