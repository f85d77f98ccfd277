"""
Probabilistically switched linear system
========================================

dv/dt = A v where A switches at random between

    A1 = [[-5, -4], [-1, -2]]    and    A2 = [[-2, -4], [20, -2]].

The plane is cut into k equal sectors; in each sector the flow of each matrix
is over-approximated by the cone spanned by the images of the two boundary
rays. Coarse partitions over-approximate too much for a Stable verdict; finer
ones succeed.
"""

import math

from pphs_stability import verify
from pphs_stability.casestudy import switched_system
from pphs_stability.harness import simulate_pphs

for k in (4, 8, 16):
    res = verify(switched_system(k))
    ab = res.abstraction
    print(f"{k:2d} sectors: {res.verdict.value:8s} max mean payoff {res.analysis.value:+.4f}  "
          f"{ab.wmdp.n_states} states, {ab.n_edges} edges, {sum(ab.lp_counts)} LPs, "
          f"T_red {res.t_red:.3f} s, T_stab {res.t_stab:.2e} s")
    if ab.divergent:
        print("    locations with a direction that never leaves the sector:", sorted(ab.divergent))

# The verdict depends on where the sector boundaries sit. Sweep the offset
# of the first boundary across one sector width for 8 sectors.
print("\n8 sectors, first boundary rotated by t/8 of a sector width:")
for t in range(8):
    offset = -math.pi / 8 + t * (2 * math.pi / 8) / 8
    res = verify(switched_system(8, offset=offset))
    print(f"  t={t}: {res.verdict.value:8s} {res.analysis.value:+.4f}")

# Sampled executions of the 8-sector system. These follow the
# over-approximating flow cones, so they are heuristic evidence only.
rep = simulate_pphs(switched_system(8), horizon=1_000, runs=10, seed=0)
print(f"\nsimulated average log ratio: {rep.estimate:+.4f}, "
      f"fraction of negative runs: {rep.negative_fraction:.2f}")
