"""Maximum expected mean payoff of a finite WMDP.

Pipeline: restrict to the part reachable from init, short-circuit on any
reachable +inf weight, negate-and-bias the weights so they are all positive,
decompose into maximal end components, solve a gain LP per component, collapse
the components into a quotient with coin actions to two sinks, and read the
answer off a reachability LP on the quotient.

Negating the weights turns "maximize the original" into "minimize the
transformed", so the component gains and the quotient reachability are
optimized in the opposite direction of the requested one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lp as lpmod
from .graph import Mec, mec_decompose, reachable_states
from .mdp import INF, Action, MeanPayoffValue, Wmdp

EPS_VERDICT = 1e-9
GAIN_TOL = 1e-9


class LpInfeasible(RuntimeError):
    """A gain or reachability LP did not reach an optimum."""


class GainOutOfRange(ValueError):
    pass


class Verdict(enum.Enum):
    STABLE = "Stable"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class WeightTransform:
    bias_c: float
    transformed: Wmdp | None
    had_infinite_edge: bool
    reachable: tuple[int, ...] = ()


@dataclass
class MecQuotient:
    mdp: Wmdp
    f: list[float]
    r_max: float
    s_plus: int
    s_minus: int
    rep: list[int]
    n_mecs: int

    @property
    def init(self) -> int:
        return self.mdp.init

    @property
    def n_states(self) -> int:
        return self.mdp.n_states


@dataclass
class MeanPayoffAnalysis:
    value: float
    verdict: Verdict
    reason: str | None = None
    bias_c: float = 0.0
    r_max: float | None = None
    reach_probability: float | None = None
    mecs: list[Mec] = field(default_factory=list)
    gains: list[float] = field(default_factory=list)
    quotient_states: int | None = None

    @property
    def payoff(self) -> MeanPayoffValue:
        return MeanPayoffValue(self.value, self.reason)


def gain_lp(m: Wmdp, maximize: bool = True) -> float:
    """Optimal long-run average weight of a communicating WMDP.

    Occupation-measure LP over variables x(s,a) (recurrent frequencies) and
    y(s,a) (transient flow) with a uniform initial distribution. Minimization
    is done by maximizing the negated weights.
    """
    if not maximize:
        return -gain_lp(m.map_weights(lambda w: -w), True)
    pairs = [(s, a) for s, _, a in m.state_actions()]
    k = len(pairs)
    n = m.n_states
    weights = np.array([a.weight for _, a in pairs], dtype=float)
    if not np.all(np.isfinite(weights)):
        raise ValueError("gain LP requires finite weights")
    prog = lpmod.LinearProgram(np.concatenate([weights, np.zeros(k)]))
    flow = np.zeros((n, k))
    for v, (s, a) in enumerate(pairs):
        flow[s, v] += 1.0
        for t, p in a.dist.items():
            flow[t, v] -= p
    for j in range(n):
        prog.add(np.concatenate([flow[j], np.zeros(k)]), "=", 0.0)
    own = np.zeros((n, k))
    for v, (s, _) in enumerate(pairs):
        own[s, v] = 1.0
    for j in range(n):
        prog.add(np.concatenate([own[j], flow[j]]), "=", 1.0 / n)
    sol = lpmod.solve(prog)
    if not sol.optimal:
        raise LpInfeasible(f"gain LP is {sol.status.value}; is the model communicating?")
    return sol.value


def transform_weights(m: Wmdp) -> WeightTransform:
    """Negate all weights of the reachable part and add the smallest bias making them positive."""
    reach = sorted(reachable_states(m, m.init))
    sub, _ = m.restrict(reach)
    if any(a.weight == INF for _, _, a in sub.state_actions()):
        return WeightTransform(0.0, None, True, tuple(reach))
    low = min(-w for w in sub.weights())
    c = abs(low) + 1.0 if low <= 0.0 else 0.0
    return WeightTransform(c, sub.map_weights(lambda w: -w + c), False, tuple(reach))


def build_quotient(m: Wmdp, mecs: Sequence[Mec], gains: Sequence[float]) -> MecQuotient:
    """Collapse each MEC to one vertex with a coin action to the sinks ``s_plus``/``s_minus``."""
    r_max = max(m.weights())
    if r_max <= 0.0:
        raise GainOutOfRange("quotient construction needs positive weights")
    for g in gains:
        if g > r_max + GAIN_TOL or g < -GAIN_TOL:
            raise GainOutOfRange(f"gain {g} outside [0, {r_max}]")
    k = len(mecs)
    rep = [-1] * m.n_states
    for i, mec in enumerate(mecs):
        for s in mec.states:
            rep[s] = i
    nxt = k
    for s in range(m.n_states):
        if rep[s] < 0:
            rep[s] = nxt
            nxt += 1
    s_plus, s_minus = nxt, nxt + 1
    rows: list[list[Action]] = [[] for _ in range(nxt + 2)]

    def lifted(a: Action) -> Action:
        dist: dict[int, float] = {}
        for t, p in a.dist.items():
            if p > 0.0:
                dist[rep[t]] = dist.get(rep[t], 0.0) + p
        return Action(dist, 0.0, a.label)

    for s in range(m.n_states):
        inside = mecs[rep[s]].enabled.get(s, ()) if rep[s] < k else ()
        for i, a in enumerate(m.actions[s]):
            if i not in inside:
                rows[rep[s]].append(lifted(a))
    f = [min(1.0, max(0.0, g / r_max)) for g in gains]
    for i in range(k):
        rows[i].append(Action({s_plus: f[i], s_minus: 1.0 - f[i]}, 0.0, "coin"))
    rows[s_plus].append(Action({s_plus: 1.0}, 0.0))
    rows[s_minus].append(Action({s_minus: 1.0}, 0.0))
    q = Wmdp(nxt + 2, tuple(tuple(r) for r in rows), rep[m.init])
    return MecQuotient(q, f, r_max, s_plus, s_minus, rep, k)


def _can_reach(m: Wmdp, target: int) -> set[int]:
    pred: list[set[int]] = [set() for _ in range(m.n_states)]
    for s in range(m.n_states):
        for t in m.successors(s):
            pred[t].add(s)
    seen = {target}
    stack = [target]
    while stack:
        t = stack.pop()
        for s in pred[t]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def _can_avoid(m: Wmdp, target: int) -> set[int]:
    """States from which some policy never reaches ``target``."""
    z = set(range(m.n_states)) - {target}
    changed = True
    while changed:
        changed = False
        for s in list(z):
            if not any(all(t in z for t in a.support()) for a in m.actions[s]):
                z.discard(s)
                changed = True
    return z


def reach_probability(q: MecQuotient, maximize: bool = True) -> float:
    """Optimal probability of eventually reaching ``s_plus`` from the quotient's init."""
    m = q.mdp
    n = m.n_states
    if maximize:
        zero = set(range(n)) - _can_reach(m, q.s_plus)
    else:
        zero = _can_avoid(m, q.s_plus)
    if q.init == q.s_plus:
        return 1.0
    if q.init in zero:
        return 0.0
    bounds: list[tuple[float | None, float | None]] = []
    for s in range(n):
        if s == q.s_plus:
            bounds.append((1.0, 1.0))
        elif s in zero:
            bounds.append((0.0, 0.0))
        else:
            bounds.append((0.0, 1.0))
    sense = lpmod.Sense.MINIMIZE if maximize else lpmod.Sense.MAXIMIZE
    prog = lpmod.LinearProgram(np.ones(n), sense=sense, bounds=bounds)
    for s in range(n):
        if s == q.s_plus or s in zero:
            continue
        for a in m.actions[s]:
            row = np.zeros(n)
            row[s] = 1.0
            for t, p in a.dist.items():
                row[t] -= p
            prog.add(row, ">=" if maximize else "<=", 0.0)
    sol = lpmod.solve(prog)
    if not sol.optimal:
        raise LpInfeasible(f"reachability LP is {sol.status.value}")
    return float(min(1.0, max(0.0, sol.point[q.init])))


def max_reach_probability(q: MecQuotient) -> float:
    return reach_probability(q, maximize=True)


def min_reach_probability(q: MecQuotient) -> float:
    return reach_probability(q, maximize=False)


def reaches_infinite_edge(m: Wmdp) -> bool:
    """Depth-first search from init that stops at the first +inf action."""
    seen = {m.init}
    stack = [m.init]
    while stack:
        for a in m.actions[stack.pop()]:
            if a.weight == INF:
                return True
            for t in a.dist:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    return False


def analyze(m: Wmdp, maximize: bool = True) -> MeanPayoffAnalysis:
    """Optimal expected mean payoff from init (maximum by default) with its intermediates."""
    # Cheap short-circuit: a reachable +inf edge decides the maximum without any LP.
    wt = (WeightTransform(0.0, None, True) if reaches_infinite_edge(m)
          else transform_weights(m))
    if wt.had_infinite_edge:
        value = INF if maximize else math.nan
        if not maximize:
            raise ValueError("minimization is undefined with reachable +inf weights")
        return MeanPayoffAnalysis(value, Verdict.UNKNOWN, "InfiniteEdge")
    mt = wt.transformed
    # The transformed weights are negated: optimize them the other way round.
    inner_max = not maximize
    mecs = mec_decompose(mt)
    assert mecs, "a finite non-blocking model always has an end component"
    gains = []
    for mec in mecs:
        sub, _ = mt.restrict(sorted(mec.states), {s: list(a) for s, a in mec.enabled.items()},
                             init=min(mec.states))
        gains.append(gain_lp(sub, maximize=inner_max))
    q = build_quotient(mt, mecs, gains)
    p = reach_probability(q, maximize=inner_max)
    v = q.r_max * p
    value = -(v - wt.bias_c)
    verdict = Verdict.STABLE if value < -EPS_VERDICT else Verdict.UNKNOWN
    reason = None if verdict is Verdict.STABLE else "NonNegativeMeanPayoff"
    return MeanPayoffAnalysis(value, verdict, reason, wt.bias_c, q.r_max, p, mecs, gains,
                              q.n_states)


def max_expected_mean_payoff(m: Wmdp) -> MeanPayoffValue:
    return analyze(m).payoff


def min_expected_mean_payoff(m: Wmdp) -> MeanPayoffValue:
    return analyze(m, maximize=False).payoff


def wmdp_stability_verdict(m: Wmdp) -> Verdict:
    """Stable iff the maximum expected mean payoff is strictly negative."""
    return analyze(m).verdict
