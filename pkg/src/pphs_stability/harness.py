"""Independent oracles and simulators used to cross-check the analyses.

``oracle_max_mean_payoff`` enumerates memoryless policies and evaluates each
induced chain exactly (bottom components, stationary distributions, absorption
probabilities). The simulators estimate partial averages S_n/n by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .chain import DEFAULT_POLICY_CAP, absorption_probabilities, effective_weight, policies
from .graph import bsccs_reachable
from .mdp import INF, Wdtmc, Wmdp, induce

if TYPE_CHECKING:
    from .abstraction import Pphs


@dataclass
class SimulationReport:
    runs: int
    horizon: int
    partial_means: list[float]
    stuck: int = 0
    steps: list[list] = field(default_factory=list)

    @property
    def estimate(self) -> float:
        return float(np.mean(self.partial_means)) if self.partial_means else math.nan

    @property
    def negative_fraction(self) -> float:
        if not self.partial_means:
            return 0.0
        return float(np.mean([x < 0.0 for x in self.partial_means]))

    def to_dict(self) -> dict:
        def enc(x: float):
            return "+inf" if x == INF else "-inf" if x == -INF else x
        return {
            "runs": self.runs,
            "horizon": self.horizon,
            "partial_means": [enc(x) for x in self.partial_means],
            "estimate": enc(self.estimate),
            "negative_fraction": self.negative_fraction,
            "stuck": self.stuck,
        }


def policy_value(m: Wmdp, rho) -> float:
    """Expected mean payoff of ``m`` under the memoryless policy ``rho``."""
    chain = induce(m, rho)
    bottoms = bsccs_reachable(chain)
    probs = absorption_probabilities(chain, bottoms)
    total = 0.0
    for b, p in zip(bottoms, probs):
        if p <= 1e-15:
            continue
        w = effective_weight(chain, b)
        if w == INF:
            return INF
        total += p * w
    return total


def oracle_mean_payoff(m: Wmdp, maximize: bool = True,
                       cap: int | None = DEFAULT_POLICY_CAP) -> float:
    best = -INF if maximize else INF
    for rho in policies(m, cap):
        v = policy_value(m, rho)
        best = max(best, v) if maximize else min(best, v)
    return best


def oracle_max_mean_payoff(m: Wmdp, cap: int | None = DEFAULT_POLICY_CAP) -> float:
    """Brute-force maximum expected mean payoff over memoryless deterministic policies."""
    return oracle_mean_payoff(m, True, cap)


def _run_seed(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng([seed, run])


def simulate_chain(c: Wdtmc, horizon: int, runs: int = 1, seed: int = 0,
                   chunk: int = 200_000) -> SimulationReport:
    """Sample ``runs`` paths of length ``horizon`` from init and report S_n/n per run."""
    if horizon < 1 or runs < 1:
        raise ValueError("horizon and runs must be positive")
    n = c.n_states
    cum = np.cumsum(c.P, axis=1)
    cum[:, -1] = 1.0
    means = []
    for r in range(runs):
        rng = _run_seed(seed, r)
        s = c.init
        total = 0.0
        done = 0
        while done < horizon:
            size = min(chunk, horizon - done)
            u = rng.random(size)
            # Next state for every (current state, draw) pair; the walk then
            # only indexes into these tables.
            table = [np.searchsorted(cum[k], u, side="right").tolist() for k in range(n)]
            path = [0] * (size + 1)
            path[0] = s
            for i in range(size):
                s = table[s][i]
                path[i + 1] = s
            arr = np.asarray(path)
            total += float(c.W[arr[:-1], arr[1:]].sum())
            done += size
        means.append(total / horizon)
    return SimulationReport(runs, horizon, means)


def simulate_pphs(H: "Pphs", horizon: int, runs: int = 1, seed: int = 0,
                  record: bool = False, mix_probability: float = 0.5) -> SimulationReport:
    """Sample executions of a PPHS and report the average log norm ratio per switch.

    Each continuous phase picks a flow direction from the flow polyhedron's
    generators (a single generator, or with ``mix_probability`` a random
    combination of them), follows the straight line to the first facet hit and
    takes the guard's probabilistic edge. The state is renormalised after each
    phase, which the scale-invariant dynamics allow.
    """
    from .abstraction import simulate_runs  # local import: abstraction imports harness types

    return simulate_runs(H, horizon, runs, seed, record, mix_probability)
