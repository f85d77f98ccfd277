"""Random model generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools

import numpy as np

from pphs_stability.graph import is_end_component
from pphs_stability.mdp import Action, Wdtmc, Wmdp


def random_distribution(rng, n, support=None):
    k = int(rng.integers(1, n + 1)) if support is None else support
    succ = rng.choice(n, size=k, replace=False)
    p = rng.random(k) + 0.05
    p /= p.sum()
    return {int(t): float(q) for t, q in zip(succ, p)}


def random_wmdp(rng, max_states=6, max_actions=3, low=-5.0, high=5.0, full_support=False):
    n = int(rng.integers(1, max_states + 1))
    rows = []
    for _ in range(n):
        k = int(rng.integers(1, max_actions + 1))
        rows.append(tuple(
            Action(random_distribution(rng, n, n if full_support else None),
                   float(rng.uniform(low, high)))
            for _ in range(k)))
    return Wmdp(n, tuple(rows), int(rng.integers(n)))


def random_irreducible_chain(rng, n, low=-1.0, high=1.0, init=0):
    """Dense positive transition matrix, so the chain is irreducible and aperiodic."""
    P = rng.random((n, n)) + 0.05
    P /= P.sum(axis=1, keepdims=True)
    W = rng.uniform(low, high, size=(n, n))
    return Wdtmc.from_matrices(P, W, init)


def chain_as_wmdp(c: Wdtmc) -> Wmdp:
    """Single-action WMDP whose action weight is the row-average edge weight.

    Only equivalent to ``c`` in mean payoff when the weights of each row agree;
    callers build chains with row-constant weights for that reason.
    """
    rows = []
    for s in range(c.n_states):
        dist = {int(t): float(c.P[s, t]) for t in np.flatnonzero(c.P[s] > 0)}
        w = float(c.W[s, next(iter(dist))])
        rows.append((Action(dist, w),))
    return Wmdp(c.n_states, tuple(rows), c.init)


def row_constant_chain(rng, n, low=-5.0, high=5.0, sparse=False):
    if sparse:
        # a random cycle keeps the chain irreducible; extra edges are random
        perm = rng.permutation(n)
        P = np.zeros((n, n))
        for i in range(n):
            P[perm[i], perm[(i + 1) % n]] = 1.0
        P += (rng.random((n, n)) < 0.3) * rng.random((n, n))
        P /= P.sum(axis=1, keepdims=True)
    else:
        P = rng.random((n, n)) + 0.05
        P /= P.sum(axis=1, keepdims=True)
    w = rng.uniform(low, high, size=n)
    W = np.repeat(w[:, None], n, axis=1)
    return Wdtmc.from_matrices(P, W, 0)


def scc_oracle(n, succ):
    """SCCs by transitive closure: s ~ t iff each reaches the other."""
    R = np.eye(n, dtype=bool)
    for s in range(n):
        for t in succ(s):
            R[s, t] = True
    for k in range(n):
        R = R | (R[:, [k]] & R[[k], :])
    comps = {frozenset(np.flatnonzero(R[s] & R[:, s]).tolist()) for s in range(n)}
    return sorted(comps, key=min)


def mec_oracle(m: Wmdp):
    """All maximal end components, by enumerating every set of state-action pairs."""
    pairs = [(s, k) for s, k, _ in m.state_actions()]
    ecs = []
    for r in range(1, len(pairs) + 1):
        for sub in itertools.combinations(pairs, r):
            if is_end_component(m, sub):
                ecs.append(frozenset(sub))
    return {e for e in ecs if not any(e < f for f in ecs)}


def lp_vertex_oracle(c, A, b, upper):
    """max c.x over {A x <= b, 0 <= x <= upper} by enumerating basic solutions."""
    n = len(c)
    G = np.vstack([A, np.eye(n), -np.eye(n)])
    h = np.concatenate([b, np.full(n, upper), np.zeros(n)])
    best = None
    for rows in itertools.combinations(range(len(G)), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            v = float(c @ x)
            best = v if best is None else max(best, v)
    return best


def random_quadrant_pphs(rng, max_per_quadrant=2, divergent_p=0.1):
    """Random counterclockwise quadrant system with two-generator flow cones.

    Every flow cone lies between the directions R(-1, a) and R(-1, b) of its
    quadrant (R the rotation onto that quadrant), so runs leave through the
    exit axis; with probability ``divergent_p`` a location instead gets a flow
    that points into its quadrant and never leaves it.
    """
    from pphs_stability.abstraction import GuardEdge, Location, Pphs
    from pphs_stability.polyhedra import ConeInvariant, Polyhedron

    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    ids, locations = [], []
    for k in range(4):
        R = np.linalg.matrix_power(rot, k)
        e, x = R @ [1.0, 0.0], R @ [0.0, 1.0]
        inv = ConeInvariant(Polyhedron.from_rows(2, [[e[1], -e[0], "<=", 0], [-x[1], x[0], "<=", 0]]))
        row = []
        for _ in range(int(rng.integers(1, max_per_quadrant + 1))):
            if rng.random() < divergent_p:
                u, w = e, x
            else:
                a, b = sorted(rng.uniform(0.2, 1.2, size=2))
                u, w = R @ [-1.0, b + 1e-3], R @ [-1.0, a]  # counterclockwise from u to w
            flow = Polyhedron.from_rows(2, [[u[1], -u[0], "<=", 0], [-w[1], w[0], "<=", 0]])
            row.append(len(locations))
            locations.append(Location(inv, flow))
        ids.append(row)
    edges = []
    for k in range(4):
        nxt = ids[(k + 1) % 4]
        for q in ids[k]:
            p = rng.random(len(nxt)) + 0.1
            edges.append(GuardEdge(q, 1, {t: float(v) for t, v in zip(nxt, p / p.sum())}))
    return Pphs(2, tuple(locations), tuple(edges), 0, (1.0, 0.0))


def prefix_gadget(m: Wmdp, rng, length=3, scale=100.0) -> Wmdp:
    """Prepend ``length`` transient states with large random weights before ``m``'s init."""
    rows = []
    for i in range(length):
        nxt = i + 1 if i + 1 < length else length + m.init
        acts = [Action({nxt: 1.0}, float(rng.uniform(-scale, scale)))]
        if rng.random() < 0.5:
            # a shortcut straight to the original init with its own weight
            acts.append(Action({length + m.init: 1.0}, float(rng.uniform(-scale, scale))))
        rows.append(tuple(acts))
    for acts in m.actions:
        rows.append(tuple(Action({t + length: p for t, p in a.dist.items()}, a.weight, a.label)
                          for a in acts))
    return Wmdp(m.n_states + length, tuple(rows), 0)
