"""
Maximum expected mean payoff of a small weighted MDP
====================================================

Build a three-state WMDP by hand, compute its optimal expected mean payoff
with the LP pipeline and compare it with brute-force policy enumeration and
with a long simulation of the best policy.
"""

import numpy as np

from pphs_stability import Wmdp, analyze, decide_as_convergence, induce, oracle_max_mean_payoff
from pphs_stability.harness import policy_value, simulate_chain

# State 0 can gamble (coin flip into 1 or 2) or stay put at a small cost.
# State 1 drifts back to 0 and state 2 is absorbing with a negative weight.
m = Wmdp.build([
    [({1: 0.5, 2: 0.5}, 1.0), ({0: 1.0}, -0.5)],
    [({0: 1.0}, -1.0)],
    [({2: 1.0}, -2.0)],
])

res = analyze(m)
print("optimal expected mean payoff:", res.value)
print("verdict:", res.verdict.value)
print("maximal end components:", [sorted(mec.states) for mec in res.mecs])
print("their gains on the transformed weights:", np.round(res.gains, 6))

# The brute-force oracle evaluates every memoryless policy exactly.
print("oracle:", oracle_max_mean_payoff(m))
for rho in ([0, 0, 0], [1, 0, 0]):
    print(f"  policy {rho}: {policy_value(m, rho):+.6f}")

# Staying at 0 forever gives -0.5 surely; gambling ends in state 2 with -2.
# Simulate the better policy: every run converges to -0.5.
rep = simulate_chain(induce(m, [1, 0, 0]), horizon=100_000, runs=4, seed=0)
print("simulated partial means:", np.round(rep.partial_means, 4))

# Almost-sure convergence asks whether every policy gives a negative mean
# payoff on every bottom component that it can reach.
dec = decide_as_convergence(m)
print("almost-surely convergent:", dec.convergent, "after", dec.policies_checked, "policies")
