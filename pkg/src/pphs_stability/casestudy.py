"""Model builders: the hybridised switched linear system and small quadrant systems.

Switched system: dv/dt = A v with A switching between two matrices. The plane
is cut into k equal angular sectors; each sector gets one location per matrix
whose flow is the cone spanned by the images of the sector's two boundary
rays. Crossing a boundary ray moves to either location of the adjacent sector
with probability 1/2.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .abstraction import GuardEdge, Location, Pphs
from .polyhedra import ConeInvariant, Polyhedron

A1 = np.array([[-5.0, -4.0], [-1.0, -2.0]])
A2 = np.array([[-2.0, -4.0], [20.0, -2.0]])

_ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])


def _ccw_between(u: np.ndarray, w: np.ndarray) -> list[list]:
    """Constraint rows of the cone turning counterclockwise from ray ``u`` to ray ``w``.

    Row 0 keeps points on the left of ``u``, row 1 on the right of ``w``;
    activating row 0 (row 1) gives the ray ``u`` (``w``).
    """
    return [[u[1], -u[0], "<=", 0.0], [-w[1], w[0], "<=", 0.0]]


def _ray_cone(u: np.ndarray) -> list[list]:
    return [[-u[1], u[0], "=", 0.0], [-u[0], -u[1], "<=", 0.0]]


def _det(u, w) -> float:
    return float(u[0] * w[1] - u[1] * w[0])


def image_cone(A: np.ndarray, ra: np.ndarray, rb: np.ndarray) -> Polyhedron:
    """The cone {A v : v between ``ra`` and ``rb``}, spanned by the two image rays."""
    u, w = A @ ra, A @ rb
    u, w = u / np.max(np.abs(u)), w / np.max(np.abs(w))
    d = _det(u, w)
    if abs(d) < 1e-12:
        if float(u @ w) <= 0.0:
            raise ValueError("image rays are opposite; the flow cone is not pointed")
        return Polyhedron.from_rows(2, _ray_cone(u))
    if d < 0.0:
        u, w = w, u
    return Polyhedron.from_rows(2, _ccw_between(u, w))


def switched_system(sectors: int, matrices: Sequence[np.ndarray] = (A1, A2),
                    offset: float | None = None) -> Pphs:
    """Hybridisation of the probabilistically switched linear system with ``sectors`` sectors.

    Sector s spans the angles [offset + 2*pi*s/k, offset + 2*pi*(s+1)/k]; the
    default offset is -pi/k, which centres sector 0 on the positive x-axis.
    With offset 0 instead, 8 sectors are not enough for a Stable verdict and
    16 are. Location ``m * sector + i`` follows matrix ``i`` in that sector.
    Initial state: location 0 at the point (cos offset, sin offset).
    """
    if offset is None:
        offset = -math.pi / sectors
    if sectors < 3:
        raise ValueError("need at least three sectors so that every sector is a pointed cone")
    k = len(matrices)
    rays = [np.array([math.cos(offset + 2 * math.pi * s / sectors),
                      math.sin(offset + 2 * math.pi * s / sectors)]) for s in range(sectors + 1)]
    locations, edges = [], []
    for s in range(sectors):
        ra, rb = rays[s], rays[s + 1]
        inv = ConeInvariant(Polyhedron.from_rows(2, _ccw_between(ra, rb)))
        for i, A in enumerate(matrices):
            locations.append(Location(inv, image_cone(np.asarray(A, float), ra, rb),
                                      f"sector{s}/A{i + 1}"))
    for s in range(sectors):
        prev, nxt = (s - 1) % sectors, (s + 1) % sectors
        for i in range(k):
            q = k * s + i
            edges.append(GuardEdge(q, 0, {k * prev + j: 1.0 / k for j in range(k)}))
            edges.append(GuardEdge(q, 1, {k * nxt + j: 1.0 / k for j in range(k)}))
    x0 = (math.cos(offset), math.sin(offset))
    return Pphs(2, tuple(locations), tuple(edges), 0, x0)


def quadrant_system(ratios: Sequence[Sequence[float]], divergent: Sequence[tuple[int, int]] = (),
                    init_point: Sequence[float] = (1.0, 0.0)) -> Pphs:
    """Counterclockwise quadrant system with single-ray flows.

    ``ratios[k][j]`` configures location j of quadrant k: its flow is the
    single direction carrying the entry axis point of norm 1 to the exit axis
    point of norm ``ratios[k][j]``. Locations listed in ``divergent`` instead
    get the flow {rates pointing into the quadrant}, which never leaves it.
    Every exit axis is a guard leading uniformly to the next quadrant's
    locations.
    """
    if len(ratios) != 4 or any(len(r) == 0 for r in ratios):
        raise ValueError("need at least one location in each of the four quadrants")
    ids, locations = [], []
    for k in range(4):
        R = np.linalg.matrix_power(_ROT90, k)
        entry, exit_ = R @ np.array([1.0, 0.0]), R @ np.array([0.0, 1.0])
        inv = ConeInvariant(Polyhedron.from_rows(2, _ccw_between(entry, exit_)))
        row = []
        for j, rho in enumerate(ratios[k]):
            if (k, j) in set(map(tuple, divergent)):
                flow = Polyhedron.from_rows(2, _ccw_between(entry, exit_))
            else:
                if rho <= 0.0:
                    raise ValueError("ratios must be positive")
                flow = Polyhedron.from_rows(2, _ray_cone(R @ np.array([-1.0, rho])))
            row.append(len(locations))
            locations.append(Location(inv, flow, f"Q{k + 1}/{j}"))
        ids.append(row)
    edges = []
    for k in range(4):
        nxt = ids[(k + 1) % 4]
        for q in ids[k]:
            edges.append(GuardEdge(q, 1, {t: 1.0 / len(nxt) for t in nxt}))
    return Pphs(2, tuple(locations), tuple(edges), 0, tuple(float(v) for v in init_point))


def contracting_quadrants(ratio: float = 0.5) -> Pphs:
    """One location per quadrant, each switch scales the norm by ``ratio``."""
    return quadrant_system([[ratio]] * 4)


def eight_location_example(ratios: Sequence[float] = (0.5, 0.8, 0.6, 0.9, 0.7, 0.5, 0.8, 0.6),
                           p: Sequence[float] = (0.5, 0.5, 0.5, 0.5)) -> Pphs:
    """Eight locations over the four quadrants, q0 and q7 sharing the first one.

    q0 -> {q1, q2} -> {q3, q4} -> {q5, q6} -> {q7, q0}; q7 behaves like q0.
    ``p[k]`` is the probability of the first target at the k-th switch.
    Starting at (1, 0) in q0 the abstraction has eight states.
    """
    quad = [0, 1, 1, 2, 2, 3, 3, 0]
    targets = [(1, 2), (3, 4), (3, 4), (5, 6), (5, 6), (7, 0), (7, 0), (1, 2)]
    stage = [0, 1, 1, 2, 2, 3, 3, 0]
    locations, edges = [], []
    for q in range(8):
        R = np.linalg.matrix_power(_ROT90, quad[q])
        entry, exit_ = R @ np.array([1.0, 0.0]), R @ np.array([0.0, 1.0])
        inv = ConeInvariant(Polyhedron.from_rows(2, _ccw_between(entry, exit_)))
        flow = Polyhedron.from_rows(2, _ray_cone(R @ np.array([-1.0, ratios[q]])))
        locations.append(Location(inv, flow, f"q{q}"))
        a, b = targets[q]
        pa = p[stage[q]]
        edges.append(GuardEdge(q, 1, {a: pa, b: 1.0 - pa}))
    return Pphs(2, tuple(locations), tuple(edges), 0, (1.0, 0.0))
