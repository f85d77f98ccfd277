"""Polyhedral probabilistic hybrid systems and their finite WMDP abstraction.

An abstract state is a pair (location, facet). From a state (q, f1) there is
one action per guarded facet f2 of I(q) that a straight flow segment can reach
from f1; its weight bounds log(|x2|/|x1|) (infinity norm) over all such
segments and its distribution is the guard's switching distribution.

Scale invariance of cone invariants lets every weight be computed with
|x1| = 1. That normalisation is split into 2n cases (coordinate i of x1 is
+1 or -1), and the maximised coordinate of x2 into 2n more, giving 4n² LPs
per edge.
"""

from __future__ import annotations

import math
import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import lp as lpmod
from .mdp import INF, PROB_TOL, Action, Violation, Wmdp
from .meanpayoff import MeanPayoffAnalysis, Verdict, analyze
from .polyhedra import (ZERO_TOL, ConeInvariant, Facet, Polyhedron, add_membership,
                        cone_contained, enumerate_facets, generators, has_nonzero_point)

DEAD_END_WEIGHT = -1e3
"""Weight of the self-loop that closes off dead-end states, and the floor used
when every segment of an edge ends at the origin (log 0)."""

DISPLACEMENT_TOL = 1e-9
THREADS_ENV = "PPHS_THREADS"


class InitNotOnFacet(ValueError):
    def __init__(self, message: str, candidates: Sequence[Facet] = ()):
        super().__init__(message)
        self.candidates = list(candidates)


class InfeasibleEdge(ValueError):
    pass


class InvalidPphs(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class Location:
    invariant: ConeInvariant
    flow: Polyhedron
    name: str | None = None


@dataclass(frozen=True)
class GuardEdge:
    """Switching distribution fired when location ``loc`` reaches facet ``facet_index``."""

    loc: int
    facet_index: int
    dist: Mapping[int, float]


@dataclass(frozen=True)
class Pphs:
    dim: int
    locations: tuple[Location, ...]
    edges: tuple[GuardEdge, ...]
    init_loc: int
    init_point: tuple[float, ...]

    def guard(self, loc: int, facet_index: int) -> GuardEdge | None:
        for e in self.edges:
            if e.loc == loc and e.facet_index == facet_index:
                return e
        return None

    def facet_set(self, f: Facet) -> Polyhedron:
        return self.locations[f.owner].invariant.base.activated(f.index)

    def scaled(self, lam: float) -> "Pphs":
        return Pphs(self.dim, self.locations, self.edges, self.init_loc,
                    tuple(lam * v for v in self.init_point))


def validate_pphs(H: Pphs) -> list[Violation]:
    out: list[Violation] = []
    if not H.locations:
        return [Violation("EmptyModel", detail="at least one location is required")]
    for q, loc in enumerate(H.locations):
        if loc.invariant.dim != H.dim or loc.flow.dim != H.dim:
            out.append(Violation("DimensionMismatch", q))
    if not 0 <= H.init_loc < len(H.locations):
        out.append(Violation("InitOutOfRange", detail=f"init location {H.init_loc}"))
    if len(H.init_point) != H.dim:
        out.append(Violation("DimensionMismatch", detail="init point"))
    seen = set()
    for k, e in enumerate(H.edges):
        if not 0 <= e.loc < len(H.locations):
            out.append(Violation("LocationOutOfRange", e.loc, k))
            continue
        hs = H.locations[e.loc].invariant.base.halfspaces
        if not 0 <= e.facet_index < len(hs) or hs[e.facet_index].relation != "<=":
            out.append(Violation("FacetOutOfRange", e.loc, k, f"facet index {e.facet_index}"))
            continue
        if (e.loc, e.facet_index) in seen:
            out.append(Violation("DuplicateGuard", e.loc, k, f"facet index {e.facet_index}"))
        seen.add((e.loc, e.facet_index))
        total = sum(e.dist.values())
        if abs(total - 1.0) > PROB_TOL:
            out.append(Violation("DistributionNotStochastic", e.loc, k, f"sums to {total:.12g}"))
        for t, p in e.dist.items():
            if not 0 <= t < len(H.locations):
                out.append(Violation("LocationOutOfRange", e.loc, k, f"target {t}"))
            elif not 0.0 <= p <= 1.0:
                out.append(Violation("ProbabilityOutOfRange", e.loc, k, f"p({t}) = {p}"))
            elif p > 0.0 and not cone_contained([H.facet_set(Facet(e.loc, e.facet_index))],
                                                H.locations[t].invariant.base):
                out.append(Violation("GuardOutsideTarget", e.loc, k,
                                     f"facet {e.facet_index} is not inside the invariant of {t}"))
    return out


def admits_zero_flow(flow: Polyhedron) -> bool:
    """Whether the rate 0 is allowed, so the state may stay put.

    A flow cone always contains its apex; that apex only counts when the cone
    is {0} itself.
    """
    if flow.is_cone:
        return not has_nonzero_point([flow], flow.dim)
    return flow.contains(np.zeros(flow.dim))


def _segment_program(H: Pphs, q: int, f1: Facet, f2: Facet, objective: np.ndarray,
                     i: int, s1: float) -> lpmod.LinearProgram:
    """Variables x1 (n), x2 (n), lam: x1 on f1 with s1*x1[i] = 1 and |x1| <= 1,
    x2 on f2, both in I(q), and x2 - x1 in lam * F(q)."""
    n = H.dim
    loc = H.locations[q]
    bounds = [(-1.0, 1.0)] * n + [(None, None)] * n + [(0.0, None)]
    prog = lpmod.LinearProgram(objective, bounds=bounds)
    row = np.zeros(2 * n + 1)
    row[i] = s1
    prog.add(row, "=", 1.0)
    add_membership(prog, H.facet_set(f1), 0)
    add_membership(prog, loc.invariant.base, 0)
    add_membership(prog, H.facet_set(f2), n)
    add_membership(prog, loc.invariant.base, n)
    add_membership(prog, loc.flow, n, scale=2 * n, minus=0)
    return prog


def _cases(n: int):
    for i in range(n):
        for s in (1.0, -1.0):
            yield i, s


def continuous_edge_feasible(H: Pphs, q: int, f1: Facet, f2: Facet) -> bool:
    """Whether a flow segment of location ``q`` leads from facet ``f1`` to facet ``f2``.

    Unless the flow admits rate zero, the segment must actually move: some
    normalised x1 must allow a nonzero displacement x2 - x1.
    """
    n = H.dim
    if admits_zero_flow(H.locations[q].flow):
        return any(lpmod.solve(_segment_program(H, q, f1, f2, np.zeros(2 * n + 1), i, s)).optimal
                   for i, s in _cases(n))
    for i, s1 in _cases(n):
        if not lpmod.solve(_segment_program(H, q, f1, f2, np.zeros(2 * n + 1), i, s1)).optimal:
            continue
        for j, s2 in _cases(n):
            c = np.zeros(2 * n + 1)
            c[n + j] = s2
            c[j] = -s2
            sol = lpmod.solve(_segment_program(H, q, f1, f2, c, i, s1))
            if sol.status is lpmod.Status.UNBOUNDED or (sol.optimal and sol.value > DISPLACEMENT_TOL):
                return True
    return False


@dataclass(frozen=True)
class EdgeWeight:
    weight: float
    norm_ratio: float
    lp_count: int
    best_case: tuple[int, float, int, float] | None = None


def edge_weight(H: Pphs, q: int, f1: Facet, f2: Facet) -> EdgeWeight:
    """Supremum of log(|x2|/|x1|) over flow segments from ``f1`` to ``f2`` in location ``q``.

    Solves all 4n² case LPs. An unbounded case means +inf; a maximum of 0
    (every segment ends at the origin) is floored to ``DEAD_END_WEIGHT``.
    """
    n = H.dim
    best = -INF
    best_case = None
    count = 0
    for i, s1 in _cases(n):
        for j, s2 in _cases(n):
            c = np.zeros(2 * n + 1)
            c[n + j] = s2
            prog = _segment_program(H, q, f1, f2, c, i, s1)
            for k in range(n):
                if k == j:
                    continue
                for sk in (1.0, -1.0):
                    row = np.zeros(2 * n + 1)
                    row[n + k] = sk
                    row[n + j] = -s2
                    prog.add(row, "<=", 0.0)
            sol = lpmod.solve(prog)
            count += 1
            if sol.status is lpmod.Status.UNBOUNDED:
                best, best_case = INF, (i, s1, j, s2)
            elif sol.optimal and sol.value > best:
                best, best_case = sol.value, (i, s1, j, s2)
    if best == -INF:
        raise InfeasibleEdge(f"no flow segment from {f1} to {f2} in location {q}")
    if best == INF:
        return EdgeWeight(INF, INF, count, best_case)
    ratio = max(best, 0.0)
    w = math.log(ratio) if ratio > 0.0 else DEAD_END_WEIGHT
    return EdgeWeight(max(w, DEAD_END_WEIGHT), ratio, count, best_case)


def divergent_location(H: Pphs, q: int) -> bool:
    """Whether some nonzero flow direction stays inside I(q) forever (2n LPs)."""
    n = H.dim
    loc = H.locations[q]
    for k, s in _cases(n):
        c = np.zeros(n + 1)
        c[k] = s
        prog = lpmod.LinearProgram(c, bounds=[(-1.0, 1.0)] * n + [(0.0, None)])
        add_membership(prog, loc.invariant.base, 0)
        add_membership(prog, loc.flow, 0, scale=n)
        sol = lpmod.solve(prog)
        if sol.optimal and sol.value > ZERO_TOL:
            return True
    return False


def init_facet(H: Pphs) -> Facet:
    """The unique facet of I(q0) containing x0."""
    x0 = np.asarray(H.init_point, dtype=float)
    scale = float(np.max(np.abs(x0))) if x0.size else 0.0
    if scale == 0.0:
        raise InitNotOnFacet("the initial point is the origin, which lies on every facet")
    x = x0 / scale
    inv = H.locations[H.init_loc].invariant
    if not inv.base.contains(x, 1e-9):
        raise InitNotOnFacet("the initial point is outside the initial invariant")
    hits = [f for f in enumerate_facets(inv, H.init_loc) if H.facet_set(f).contains(x, 1e-9)]
    if len(hits) != 1:
        what = "no facet" if not hits else f"{len(hits)} facets"
        raise InitNotOnFacet(f"the initial point lies on {what} of the initial invariant", hits)
    return hits[0]


@dataclass
class AbstractWmdp:
    wmdp: Wmdp
    states: list[tuple[int, Facet]]
    provenance: list[list[dict]]
    diagnostics: list[str] = field(default_factory=list)
    lp_counts: list[int] = field(default_factory=list)
    divergent: list[int] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def n_edges(self) -> int:
        return self.wmdp.n_pairs

    def index(self, state: tuple[int, Facet]) -> int:
        return self.states.index(state)


class _Abstractor:
    def __init__(self, H: Pphs, workers: int):
        self.H = H
        self.workers = workers
        self.facets = [enumerate_facets(loc.invariant, q) for q, loc in enumerate(H.locations)]
        self._lift: dict[tuple[Facet, int], Facet] = {}
        self._divergent: dict[int, bool] = {}

    def lift(self, f: Facet, target: int) -> Facet:
        """Name ``f`` from the viewpoint of ``target``: its own facet if geometrically equal."""
        key = (f, target)
        if key not in self._lift:
            mine = self.H.facet_set(f)
            found = f
            for g in self.facets[target]:
                other = self.H.facet_set(g)
                if g == f or (cone_contained([mine], other) and cone_contained([other], mine)):
                    found = g
                    break
            self._lift[key] = found
        return self._lift[key]

    def divergent(self, q: int) -> bool:
        if q not in self._divergent:
            self._divergent[q] = divergent_location(self.H, q)
        return self._divergent[q]

    def explore(self, q: int, f1: Facet):
        """(f2, guard, weight) for each reachable guarded facet, plus unguarded reachable facets."""
        guarded, unguarded = [], []
        for f2 in self.facets[q]:
            if not continuous_edge_feasible(self.H, q, f1, f2):
                continue
            g = self.H.guard(q, f2.index)
            if g is None:
                unguarded.append(f2)
            else:
                guarded.append((f2, g, edge_weight(self.H, q, f1, f2)))
        return guarded, unguarded


def abstract(H: Pphs, workers: int | None = None) -> AbstractWmdp:
    """Reachable part of the abstract WMDP of ``H`` from (q0, facet of x0)."""
    start = time.perf_counter()
    bad = validate_pphs(H)
    if bad:
        raise InvalidPphs(bad)
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    ab = _Abstractor(H, max(1, workers))
    s0 = (H.init_loc, init_facet(H))
    states = [s0]
    index = {s0: 0}
    rows: list[list[Action]] = []
    prov: list[list[dict]] = []
    diagnostics: list[str] = []
    lp_counts: list[int] = []
    queue = deque([0])
    pending: dict[int, tuple] = {}

    def state_id(s) -> int:
        if s not in index:
            index[s] = len(states)
            states.append(s)
            queue.append(index[s])
        return index[s]

    def work(k: int):
        q, f1 = states[k]
        if ab.divergent(q):
            return "diverge", None
        return "edges", ab.explore(q, f1)

    pool = ThreadPoolExecutor(ab.workers) if ab.workers > 1 else None
    try:
        while queue:
            batch = list(queue)
            queue.clear()
            results = list(pool.map(work, batch)) if pool else [work(k) for k in batch]
            for k, res in zip(batch, results):
                pending[k] = res
            for k in batch:
                kind, payload = pending.pop(k)
                q, f1 = states[k]
                acts: list[Action] = []
                meta: list[dict] = []
                if kind == "diverge":
                    acts.append(Action({k: 1.0}, INF, "diverge"))
                    meta.append({"kind": "diverge", "loc": q})
                    diagnostics.append(f"InfiniteEdge: location {q} has a flow direction inside its invariant")
                else:
                    guarded, unguarded = payload
                    for f2 in unguarded:
                        diagnostics.append(f"NoGuard: location {q} reaches facet {f2.index} without a guard")
                    for f2, g, ew in guarded:
                        dist: dict[int, float] = {}
                        for t, p in sorted(g.dist.items()):
                            if p > 0.0:
                                sid = state_id((t, ab.lift(f2, t)))
                                dist[sid] = dist.get(sid, 0.0) + p
                        acts.append(Action(dist, ew.weight, f"{f1.owner}.{f1.index}->{f2.index}"))
                        meta.append({"kind": "flow", "loc": q, "from": (f1.owner, f1.index),
                                     "to": (f2.owner, f2.index), "lp_count": ew.lp_count,
                                     "norm_ratio": ew.norm_ratio})
                        lp_counts.append(ew.lp_count)
                    own = H.guard(q, f1.index) if f1.owner == q else None
                    if not acts and own is not None:
                        # The flow leaves through f1 at once: the guard of f1
                        # fires after zero time, so the norm is unchanged.
                        dist = {}
                        for t, p in sorted(own.dist.items()):
                            if p > 0.0:
                                sid = state_id((t, ab.lift(f1, t)))
                                dist[sid] = dist.get(sid, 0.0) + p
                        acts.append(Action(dist, 0.0, "instant"))
                        meta.append({"kind": "instant", "loc": q, "from": (f1.owner, f1.index)})
                    if not acts:
                        acts.append(Action({k: 1.0}, DEAD_END_WEIGHT, "dead-end"))
                        meta.append({"kind": "dead-end", "loc": q})
                        diagnostics.append(f"DeadEnd: state (location {q}, facet {f1.owner}.{f1.index}) "
                                           "has no guarded continuation")
                while len(rows) <= k:
                    rows.append([])
                    prov.append([])
                rows[k] = acts
                prov[k] = meta
    finally:
        if pool:
            pool.shutdown()
    m = Wmdp(len(states), tuple(tuple(r) for r in rows), 0)
    divergent = sorted(q for q, d in ab._divergent.items() if d)
    return AbstractWmdp(m, states, prov, diagnostics, lp_counts, divergent,
                        time.perf_counter() - start)


@dataclass
class VerifyResult:
    abstraction: AbstractWmdp
    analysis: MeanPayoffAnalysis
    t_red: float
    t_stab: float

    @property
    def verdict(self) -> Verdict:
        return self.analysis.verdict


def verify(H: Pphs, workers: int | None = None) -> VerifyResult:
    """Abstract ``H`` and analyse the abstraction, timing both phases separately."""
    t0 = time.perf_counter()
    ab = abstract(H, workers)
    t1 = time.perf_counter()
    res = analyze(ab.wmdp)
    t2 = time.perf_counter()
    return VerifyResult(ab, res, t1 - t0, t2 - t1)


def pphs_stability_verdict(H: Pphs) -> Verdict:
    """Stable when the abstraction's maximum expected mean payoff is negative, else Unknown."""
    return verify(H).verdict


# Simulation -------------------------------------------------------------------------------


@dataclass(frozen=True)
class SimStep:
    loc: int
    source: Facet
    target: Facet
    weight: float


def simulate_runs(H: Pphs, horizon: int, runs: int, seed: int, record: bool,
                  mix_probability: float):
    from .harness import SimulationReport

    if horizon < 1 or runs < 1:
        raise ValueError("horizon and runs must be positive")
    ab = _Abstractor(H, 1)
    dirs = []
    for loc in H.locations:
        verts, rays = generators(loc.flow)
        gens = [g for g in (verts + rays) if np.max(np.abs(g)) > ZERO_TOL]
        dirs.append(gens)
    f0 = init_facet(H)
    x_start = np.asarray(H.init_point, dtype=float)
    x_start = x_start / np.max(np.abs(x_start))
    means, traces = [], []
    stuck = 0
    for r in range(runs):
        rng = np.random.default_rng([seed, r])
        q, f, x = H.init_loc, f0, x_start.copy()
        total = 0.0
        trace = []
        for _ in range(horizon):
            step = _advance(H, ab, dirs, q, x, rng, mix_probability)
            if step is None and f.owner == q and H.guard(q, f.index) is not None:
                # The flow leaves through the entry facet at once: switch after zero time.
                step = (0.0, f, x)
            if step is None:
                stuck += 1
                break
            w, f2, x2 = step
            total += w
            if record:
                trace.append(SimStep(q, f, f2, w))
            if w == INF or x2 is None:
                break
            g = H.guard(q, f2.index)
            if g is None:
                stuck += 1
                break
            targets = sorted(g.dist)
            probs = np.array([g.dist[t] for t in targets])
            q_next = targets[int(rng.choice(len(targets), p=probs / probs.sum()))]
            f = ab.lift(f2, q_next)
            q = q_next
            x = x2 / np.max(np.abs(x2))
        means.append(total / horizon)
        traces.append(trace)
    return SimulationReport(runs, horizon, means, stuck, traces if record else [])


def _advance(H: Pphs, ab: _Abstractor, dirs, q: int, x: np.ndarray, rng, mix: float,
             tries: int = 16):
    """One continuous phase: (log ratio, exit facet, new point) or None when stuck."""
    gens = dirs[q]
    if not gens:
        return None
    hs = H.locations[q].invariant.base.halfspaces
    for _ in range(tries):
        if len(gens) > 1 and rng.random() < mix:
            wts = rng.random(len(gens))
            d = sum(w * g for w, g in zip(wts / wts.sum(), gens))
        else:
            d = gens[int(rng.integers(len(gens)))]
        if np.max(np.abs(d)) <= ZERO_TOL:
            continue
        t_best, j_best = INF, None
        for j, h in enumerate(hs):
            if h.relation != "<=":
                continue
            rate = float(h.a @ d)
            if rate > 1e-12:
                t = -float(h.a @ x) / rate
                if t < t_best - 1e-12:
                    t_best, j_best = t, j
        if j_best is None:
            return INF, None, None
        if t_best <= 1e-12:
            continue  # leaves the invariant at once; pick another direction
        x2 = x + t_best * d
        norm = float(np.max(np.abs(x2)))
        f2 = Facet(q, j_best)
        if norm <= 1e-12:
            return DEAD_END_WEIGHT, f2, None
        return math.log(norm / float(np.max(np.abs(x)))), f2, x2
    return None
