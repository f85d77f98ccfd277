"""Long-run behaviour of weighted Markov chains and almost-sure convergence of WMDPs.

An irreducible chain has a single long-run average weight (its effective
weight): the stationary-distribution average of its edge weights. A general
chain almost surely ends in one of its reachable bottom SCCs, so it converges
almost surely exactly when every such component has negative effective weight.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import bsccs_reachable, reachable_states, tarjan
from .mdp import INF, MemorylessPolicy, Wdtmc, Wmdp, induce

DEFAULT_POLICY_CAP = 10**6


class NotIrreducible(ValueError):
    pass


class SingularSystem(ArithmeticError):
    pass


class EnumerationTooLarge(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} memoryless policies exceed the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class StationaryDistribution:
    states: tuple[int, ...]
    probs: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.states, self.probs.tolist()))


@dataclass(frozen=True)
class AsWitness:
    policy: MemorylessPolicy
    bscc: frozenset[int]
    weight: float


@dataclass(frozen=True)
class AsDecision:
    convergent: bool
    witness: AsWitness | None = None
    policies_checked: int = 0

    def __bool__(self) -> bool:
        return self.convergent


def stationary_distribution(c: Wdtmc, component: Iterable[int]) -> StationaryDistribution:
    """Solve the balance equations of ``c`` restricted to ``component``.

    One balance row is replaced by the normalisation row, which makes the
    system nonsingular for an irreducible restriction (periodic or not).
    """
    states = tuple(sorted(component))
    idx = np.array(states)
    sub = c.P[np.ix_(idx, idx)]
    k = len(states)
    if np.any(np.abs(sub.sum(axis=1) - 1.0) > 1e-9):
        raise NotIrreducible("component is not closed under the chain's transitions")
    if len(tarjan(k, lambda i: np.flatnonzero(sub[i] > 0.0).tolist())) != 1:
        raise NotIrreducible("restricted chain has more than one SCC")
    A = sub.T - np.eye(k)
    A[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    try:
        d = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(d)):
        raise SingularSystem("non-finite stationary distribution")
    d = np.clip(d, 0.0, None)
    d /= d.sum()
    return StationaryDistribution(states, d)


def effective_weight(c: Wdtmc, component: Iterable[int]) -> float:
    """Almost-sure mean payoff of the irreducible chain on ``component``."""
    dist = stationary_distribution(c, component)
    idx = np.array(dist.states)
    P = c.P[np.ix_(idx, idx)]
    W = c.W[np.ix_(idx, idx)]
    support = P > 0.0
    if np.any(np.isinf(W[support])):
        return INF
    return float(dist.probs @ np.where(support, P * W, 0.0).sum(axis=1))


def wdtmc_as_convergent(c: Wdtmc) -> bool:
    return all(effective_weight(c, b) < 0.0 for b in bsccs_reachable(c))


def count_policies(m: Wmdp) -> int:
    return math.prod(len(a) for a in m.actions)


def policies(m: Wmdp, cap: int | None = DEFAULT_POLICY_CAP):
    """Memoryless deterministic policies in lexicographic order (state 0 most significant)."""
    total = count_policies(m)
    if cap is not None and total > cap:
        raise EnumerationTooLarge(total, cap)
    return itertools.product(*(range(len(a)) for a in m.actions))


def decide_as_convergence(m: Wmdp, cap: int | None = DEFAULT_POLICY_CAP) -> AsDecision:
    """Exact almost-sure convergence check by enumerating memoryless policies.

    Returns the first policy (in lexicographic order) that induces a reachable
    bottom component with nonnegative effective weight, if any.
    """
    checked = 0
    for rho in policies(m, cap):
        checked += 1
        chain = induce(m, rho)
        for b in bsccs_reachable(chain):
            w = effective_weight(chain, b)
            if w >= 0.0:
                return AsDecision(False, AsWitness(tuple(rho), b, w), checked)
    return AsDecision(True, None, checked)


def absorption_probabilities(c: Wdtmc, targets: Sequence[frozenset[int]]) -> np.ndarray:
    """Probability of ending in each of ``targets`` (disjoint closed sets) from init."""
    n = c.n_states
    in_target = np.full(n, -1)
    for i, b in enumerate(targets):
        for s in b:
            in_target[s] = i
    out = np.zeros(len(targets))
    if in_target[c.init] >= 0:
        out[in_target[c.init]] = 1.0
        return out
    reach = reachable_states(c, c.init)
    transient = np.array([s for s in sorted(reach) if in_target[s] < 0], dtype=int)
    pos = {s: i for i, s in enumerate(transient)}
    Q = c.P[np.ix_(transient, transient)]
    R = np.zeros((len(transient), len(targets)))
    for j, b in enumerate(targets):
        R[:, j] = c.P[np.ix_(transient, sorted(b))].sum(axis=1)
    try:
        X = np.linalg.solve(np.eye(len(transient)) - Q, R)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("targets must cover every reachable bottom component") from exc
    return np.clip(X[pos[c.init]], 0.0, 1.0)
