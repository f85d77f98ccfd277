"""Weighted MDPs, memoryless policies and the weighted Markov chains they induce."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

PROB_TOL = 1e-9
INF = math.inf


class PolicyActionUnavailable(ValueError):
    def __init__(self, state: int, action: int):
        super().__init__(f"policy picks action {action} unavailable at state {state}")
        self.state = state
        self.action = action


class InvalidPath(ValueError):
    pass


@dataclass(frozen=True)
class Action:
    """One state-action pair: successor distribution and weight (may be +inf)."""

    dist: Mapping[int, float]
    weight: float
    label: str | None = None

    def support(self) -> list[int]:
        return [t for t, p in self.dist.items() if p > 0.0]


@dataclass(frozen=True)
class Violation:
    kind: str
    state: int | None = None
    action: int | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = []
        if self.state is not None:
            where.append(f"state {self.state}")
        if self.action is not None:
            where.append(f"action {self.action}")
        loc = f" at {', '.join(where)}" if where else ""
        return f"{self.kind}{loc}: {self.detail}" if self.detail else f"{self.kind}{loc}"


@dataclass(frozen=True)
class Wmdp:
    """A finite weighted MDP.

    ``actions[s]`` lists the actions available at state ``s``; actions are
    identified by their position in that list.
    """

    n_states: int
    actions: tuple[tuple[Action, ...], ...]
    init: int = 0

    @classmethod
    def build(cls, actions: Sequence[Sequence[Action | tuple]], init: int = 0) -> "Wmdp":
        """Convenience constructor; plain ``(dist, weight)`` tuples are accepted."""
        rows = []
        for acts in actions:
            row = []
            for a in acts:
                if not isinstance(a, Action):
                    a = Action({int(k): float(v) for k, v in a[0].items()}, float(a[1]),
                               *(a[2:] if len(a) > 2 else ()))
                row.append(a)
            rows.append(tuple(row))
        return cls(len(rows), tuple(rows), init)

    def state_actions(self):
        for s, acts in enumerate(self.actions):
            for i, a in enumerate(acts):
                yield s, i, a

    @property
    def n_pairs(self) -> int:
        return sum(len(a) for a in self.actions)

    def successors(self, s: int) -> set[int]:
        out: set[int] = set()
        for a in self.actions[s]:
            out.update(a.support())
        return out

    def weights(self) -> list[float]:
        return [a.weight for _, _, a in self.state_actions()]

    def map_weights(self, fn) -> "Wmdp":
        rows = tuple(
            tuple(Action(a.dist, fn(a.weight), a.label) for a in acts) for acts in self.actions
        )
        return Wmdp(self.n_states, rows, self.init)

    def restrict(self, states: Sequence[int], enabled: Mapping[int, Sequence[int]] | None = None,
                 init: int | None = None) -> tuple["Wmdp", list[int]]:
        """Sub-model on ``states`` (which must be closed under the kept actions).

        Returns the sub-model and the list mapping new indices to old ones.
        """
        order = sorted(states)
        index = {s: i for i, s in enumerate(order)}
        rows = []
        for s in order:
            keep = enabled[s] if enabled is not None else range(len(self.actions[s]))
            row = []
            for k in keep:
                a = self.actions[s][k]
                row.append(Action({index[t]: p for t, p in a.dist.items() if p > 0.0},
                                  a.weight, a.label))
            rows.append(tuple(row))
        new_init = index[init if init is not None else self.init] if (
            (init if init is not None else self.init) in index) else 0
        return Wmdp(len(order), tuple(rows), new_init), order


MemorylessPolicy = tuple[int, ...]
"""Action index chosen at each state."""


@dataclass(frozen=True)
class Wdtmc:
    """A weighted Markov chain: row-stochastic ``P`` with per-edge weights.

    ``W[s, t]`` is meaningful only where ``P[s, t] > 0``; elsewhere it is 0.
    """

    P: np.ndarray
    W: np.ndarray
    init: int = 0

    @property
    def n_states(self) -> int:
        return int(self.P.shape[0])

    def successors(self, s: int) -> set[int]:
        return set(np.flatnonzero(self.P[s] > 0.0).tolist())

    @classmethod
    def from_matrices(cls, P, W, init: int = 0) -> "Wdtmc":
        P = np.asarray(P, dtype=float)
        W = np.where(P > 0.0, np.asarray(W, dtype=float), 0.0)
        return cls(P, W, init)


@dataclass(frozen=True)
class MeanPayoffValue:
    value: float
    reason: str | None = None

    def __post_init__(self):
        if math.isnan(self.value):
            raise ValueError("mean payoff cannot be NaN")

    @property
    def is_infinite(self) -> bool:
        return self.value == INF

    def __float__(self) -> float:
        return self.value


def validate(m: Wmdp) -> list[Violation]:
    out: list[Violation] = []
    if m.n_states < 1:
        out.append(Violation("EmptyModel", detail="at least one state is required"))
    if not 0 <= m.init < max(m.n_states, 1):
        out.append(Violation("InitOutOfRange", detail=f"init {m.init} with {m.n_states} states"))
    for s, acts in enumerate(m.actions):
        if not acts:
            out.append(Violation("BlockingState", s))
        for i, a in enumerate(acts):
            total = 0.0
            for t, p in a.dist.items():
                if not 0 <= t < m.n_states:
                    out.append(Violation("SuccessorOutOfRange", s, i, f"successor {t}"))
                if not (0.0 <= p <= 1.0):
                    out.append(Violation("ProbabilityOutOfRange", s, i, f"p({t}) = {p}"))
                total += p
            if abs(total - 1.0) > PROB_TOL:
                out.append(Violation("DistributionNotStochastic", s, i, f"sums to {total:.12g}"))
            w = a.weight
            if math.isnan(w) or w == -INF:
                out.append(Violation("InvalidWeight", s, i, f"weight {w}"))
    return out


def induce(m: Wmdp, policy: Sequence[int]) -> Wdtmc:
    """The chain obtained by fixing ``policy[s]`` at every state."""
    n = m.n_states
    P = np.zeros((n, n))
    W = np.zeros((n, n))
    for s in range(n):
        k = policy[s]
        if not 0 <= k < len(m.actions[s]):
            raise PolicyActionUnavailable(s, k)
        a = m.actions[s][k]
        for t, p in a.dist.items():
            if p > 0.0:
                P[s, t] += p
                W[s, t] = a.weight
    return Wdtmc(P, W, m.init)


def path_weight(m: Wmdp, path: Sequence[int]) -> float:
    """Sum of weights along ``path = [s0, a1, s1, a2, s2, ...]``."""
    if len(path) % 2 != 1:
        raise InvalidPath("a path alternates states and actions and ends in a state")
    total = 0.0
    for i in range(1, len(path), 2):
        s, k, t = path[i - 1], path[i], path[i + 1]
        if not 0 <= k < len(m.actions[s]):
            raise InvalidPath(f"action {k} unavailable at state {s}")
        a = m.actions[s][k]
        if a.dist.get(t, 0.0) <= 0.0:
            raise InvalidPath(f"step {s} -{k}-> {t} has probability 0")
        total += a.weight
    return total


def mean_payoff(m: Wmdp, path: Sequence[int]) -> float:
    n = len(path) // 2
    return path_weight(m, path) / n if n else 0.0


def path_probability(c: Wdtmc, states: Sequence[int]) -> float:
    """Probability of a finite state sequence of ``c`` started at its init state."""
    if not states or states[0] != c.init:
        return 0.0
    prob = 1.0
    for s, t in zip(states, states[1:]):
        prob *= float(c.P[s, t])
    return prob
