"""Polyhedra in constraint form, polyhedral cones and their facets.

A polyhedron is a list of halfspaces ``a·x <= b`` or hyperplanes ``a·x = b``.
Invariants are cones (every offset is zero), which makes them closed under
positive scaling. A facet of a cone activates one of its inequalities.

Most queries are answered with small LPs over a block of variables inside a
larger program; :func:`add_membership` writes the rows for one block.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import lp as lpmod

ZERO_TOL = 1e-9


class EmptyInvariant(ValueError):
    pass


@dataclass(frozen=True)
class Halfspace:
    normal: tuple[float, ...]
    relation: str  # "<=" or "="
    offset: float = 0.0

    @classmethod
    def make(cls, normal: Sequence[float], relation: str, offset: float = 0.0) -> "Halfspace":
        a = [float(v) for v in normal]
        b = float(offset)
        if relation == ">=":
            a, b, relation = [-v for v in a], -b, "<="
        if relation not in ("<=", "="):
            raise ValueError(f"unknown relation {relation!r}")
        return cls(tuple(a), relation, b)

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.normal)


@dataclass(frozen=True)
class Polyhedron:
    dim: int
    halfspaces: tuple[Halfspace, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        for h in self.halfspaces:
            if len(h.normal) != self.dim:
                raise ValueError(f"normal {h.normal} does not have length {self.dim}")
            if all(v == 0.0 for v in h.normal):
                raise ValueError("all-zero normal")

    @classmethod
    def from_rows(cls, dim: int, rows: Iterable[Sequence]) -> "Polyhedron":
        """Rows are ``(a_1, ..., a_dim, relation, b)``."""
        hs = []
        for r in rows:
            r = list(r)
            if len(r) != dim + 2:
                raise ValueError(f"constraint row {r} must have {dim} coefficients, a relation and an offset")
            hs.append(Halfspace.make(r[:dim], r[dim], r[dim + 1]))
        return cls(dim, tuple(hs))

    @property
    def is_cone(self) -> bool:
        return all(h.offset == 0.0 for h in self.halfspaces)

    def contains(self, x: Sequence[float], tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        for h in self.halfspaces:
            v = float(h.a @ x) - h.offset
            if h.relation == "<=" and v > tol or h.relation == "=" and abs(v) > tol:
                return False
        return True

    def activated(self, index: int) -> "Polyhedron":
        """The same polyhedron with inequality ``index`` turned into an equality."""
        hs = list(self.halfspaces)
        h = hs[index]
        hs[index] = Halfspace(h.normal, "=", h.offset)
        return Polyhedron(self.dim, tuple(hs))

    def to_rows(self) -> list[list]:
        return [list(h.normal) + [h.relation, h.offset] for h in self.halfspaces]


@dataclass(frozen=True)
class ConeInvariant:
    base: Polyhedron

    def __post_init__(self):
        if not self.base.is_cone:
            raise ValueError("invariant not a cone")

    @property
    def dim(self) -> int:
        return self.base.dim


@dataclass(frozen=True, order=True)
class Facet:
    """Inequality ``index`` of the invariant of location ``owner``, activated."""

    owner: int
    index: int


def add_membership(prog: lpmod.LinearProgram, poly: Polyhedron, offset: int,
                   scale: int | None = None, sign: float = 1.0, minus: int | None = None) -> None:
    """Constrain variables ``x[offset:offset+dim]`` to lie in ``poly``.

    With ``minus`` the constrained vector is ``x[offset:] - x[minus:]``; with
    ``scale`` every offset ``b`` is multiplied by the variable ``x[scale]``
    (homogenisation).
    """
    n = prog.n_vars
    for h in poly.halfspaces:
        row = np.zeros(n)
        row[offset:offset + poly.dim] += sign * h.a
        if minus is not None:
            row[minus:minus + poly.dim] -= sign * h.a
        rhs = sign * h.offset
        if scale is not None:
            row[scale] -= rhs
            rhs = 0.0
        prog.add(row, h.relation, rhs)


def _box_program(dim: int, polys: Sequence[Polyhedron], objective: np.ndarray) -> lpmod.LinearProgram:
    prog = lpmod.LinearProgram(objective, bounds=[(-1.0, 1.0)] * dim)
    for p in polys:
        add_membership(prog, p, 0)
    return prog


def has_nonzero_point(polys: Sequence[Polyhedron], dim: int) -> bool:
    """Whether the intersection of the cones ``polys`` contains a nonzero point (2n LPs)."""
    for k in range(dim):
        for s in (1.0, -1.0):
            c = np.zeros(dim)
            c[k] = s
            sol = lpmod.solve(_box_program(dim, polys, c))
            if sol.optimal and sol.value > ZERO_TOL:
                return True
    return False


def cone_contained(inner: Sequence[Polyhedron], outer: Polyhedron) -> bool:
    """Whether the cone ``∩ inner`` lies inside the cone ``outer`` (one LP per constraint side)."""
    dim = outer.dim
    for h in outer.halfspaces:
        sides = (1.0,) if h.relation == "<=" else (1.0, -1.0)
        for s in sides:
            sol = lpmod.solve(_box_program(dim, inner, s * h.a))
            if sol.status is lpmod.Status.INFEASIBLE:
                return True
            if sol.value > ZERO_TOL:
                return False
    return True


def enumerate_facets(inv: ConeInvariant, owner: int = 0) -> list[Facet]:
    """Facets of a cone invariant: activated inequalities that keep a nonzero point.

    Every cone facet contains the origin, so a facet is only counted when it
    has some other point too.
    """
    if not has_nonzero_point([inv.base], inv.dim):
        raise EmptyInvariant("invariant cone contains only the origin")
    out = []
    for i, h in enumerate(inv.base.halfspaces):
        if h.relation == "<=" and has_nonzero_point([inv.base.activated(i)], inv.dim):
            out.append(Facet(owner, i))
    return out


def _point_program(poly: Polyhedron) -> lpmod.LinearProgram:
    prog = lpmod.LinearProgram(np.zeros(poly.dim), bounds=[(None, None)] * poly.dim)
    add_membership(prog, poly, 0)
    return prog


def generators(poly: Polyhedron, tol: float = 1e-9) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Vertices and extreme rays of a pointed polyhedron by brute-force active sets.

    Only meant for the small flow polyhedra handled by the simulator.
    """
    n = poly.dim
    A = np.array([h.normal for h in poly.halfspaces], dtype=float).reshape(-1, n)
    b = np.array([h.offset for h in poly.halfspaces])
    eq = np.array([h.relation == "=" for h in poly.halfspaces], dtype=bool)
    m = len(poly.halfspaces)

    def feasible(x, rhs):
        r = A @ x - rhs
        return bool(np.all(r[~eq] <= tol) and np.all(np.abs(r[eq]) <= tol))

    def dedupe(points):
        out: list[np.ndarray] = []
        for p in points:
            if not any(np.allclose(p, q, atol=1e-9) for q in out):
                out.append(p)
        return out

    vertices = []
    for rows in itertools.combinations(range(m), n):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if feasible(x, b):
            vertices.append(x)
    if not vertices:
        # No vertex: the polyhedron is empty or contains a line. Use any point.
        sol = lpmod.solve(_box_program(n, [], np.zeros(n)) if m == 0 else _point_program(poly))
        if sol.optimal:
            vertices.append(np.asarray(sol.point[:n], dtype=float))
    rays = []
    # Lineality directions are reported in both orientations.
    for rows in itertools.combinations(range(m), n - 1):
        M = A[list(rows)].reshape(-1, n)
        _, sv, vt = np.linalg.svd(np.vstack([M, np.zeros((1, n))]))
        if int(np.sum(sv > 1e-12)) != n - 1:
            continue
        d = vt[-1]
        for s in (1.0, -1.0):
            r = s * d / np.max(np.abs(d))
            if feasible(r, np.zeros(m)):
                rays.append(r)
    return dedupe(vertices), dedupe(rays)
