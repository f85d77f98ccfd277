"""Dense linear programs and a two-phase primal simplex solver.

The solver is deliberately simple: a dense tableau, Bland's rule for both
entering and leaving variables, and explicit tolerances. Problem sizes in
this package are small (at most a few hundred variables), so clarity and
determinism matter more than speed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPS_FEAS = 1e-8
EPS_OPT = 1e-8
PIVOT_TOL = 1e-10
MAX_ITERATIONS = 50_000


def set_tolerance(eps: float) -> None:
    """Set the feasibility and optimality tolerances used by :func:`solve`."""
    global EPS_FEAS, EPS_OPT
    if not (0.0 < eps < 1e-2):
        raise ValueError("LP tolerance must lie in (0, 1e-2)")
    EPS_FEAS = EPS_OPT = float(eps)


class MalformedProgram(ValueError):
    """The program violates a structural invariant (shape, finiteness)."""


class NumericalFailure(RuntimeError):
    """The simplex iteration cap was exceeded."""


class Sense(enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


_RELATIONS = ("<=", "=", ">=")


@dataclass
class Constraint:
    coeffs: np.ndarray
    relation: str
    rhs: float


@dataclass
class LinearProgram:
    """``sense`` objective·x subject to linear constraints and variable bounds.

    ``bounds`` holds one ``(lower, upper)`` pair per variable, ``None`` meaning
    unbounded on that side. When omitted every variable is nonnegative.
    """

    objective: np.ndarray
    constraints: list[Constraint] = field(default_factory=list)
    sense: Sense = Sense.MAXIMIZE
    bounds: list[tuple[float | None, float | None]] | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)

    @property
    def n_vars(self) -> int:
        return int(self.objective.shape[0])

    def add(self, coeffs: Sequence[float] | np.ndarray, relation: str, rhs: float) -> None:
        self.constraints.append(Constraint(np.asarray(coeffs, dtype=float), relation, float(rhs)))

    def variable_bounds(self) -> list[tuple[float | None, float | None]]:
        if self.bounds is None:
            return [(0.0, None)] * self.n_vars
        return list(self.bounds)

    def check(self) -> None:
        n = self.n_vars
        if self.objective.ndim != 1 or not np.all(np.isfinite(self.objective)):
            raise MalformedProgram("objective must be a finite vector")
        for k, con in enumerate(self.constraints):
            if con.coeffs.shape != (n,):
                raise MalformedProgram(
                    f"constraint {k} has {con.coeffs.shape[0] if con.coeffs.ndim else 0} "
                    f"coefficients, expected {n}"
                )
            if con.relation not in _RELATIONS:
                raise MalformedProgram(f"constraint {k} has unknown relation {con.relation!r}")
            if not (np.all(np.isfinite(con.coeffs)) and math.isfinite(con.rhs)):
                raise MalformedProgram(f"constraint {k} has non-finite data")
        if self.bounds is not None:
            if len(self.bounds) != n:
                raise MalformedProgram(f"{len(self.bounds)} bounds given for {n} variables")
            for j, (lo, hi) in enumerate(self.bounds):
                if (lo is not None and math.isnan(lo)) or (hi is not None and math.isnan(hi)):
                    raise MalformedProgram(f"bound {j} is NaN")

    def residuals(self, point: np.ndarray) -> np.ndarray:
        """Constraint violations at ``point`` (zero where satisfied)."""
        out = []
        for con in self.constraints:
            lhs = float(con.coeffs @ point)
            if con.relation == "<=":
                out.append(max(0.0, lhs - con.rhs))
            elif con.relation == ">=":
                out.append(max(0.0, con.rhs - lhs))
            else:
                out.append(abs(lhs - con.rhs))
        for (lo, hi), x in zip(self.variable_bounds(), point):
            if lo is not None and lo != -math.inf:
                out.append(max(0.0, lo - x))
            if hi is not None and hi != math.inf:
                out.append(max(0.0, x - hi))
        return np.asarray(out, dtype=float)


@dataclass
class LpSolution:
    status: Status
    value: float | None = None
    point: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _finite(b: float | None) -> bool:
    return b is not None and math.isfinite(b)


def _standardize(lp: LinearProgram):
    """Rewrite ``lp`` as ``A y (rel) b`` with ``y >= 0`` and ``x = offset + M y``."""
    n = lp.n_vars
    columns: list[tuple[int, float]] = []  # (original var, sign)
    offset = np.zeros(n)
    extra_rows: list[tuple[np.ndarray, str, float]] = []
    for j, (lo, hi) in enumerate(lp.variable_bounds()):
        if _finite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            if _finite(hi):
                if hi < lo:
                    return None
                extra_rows.append((len(columns) - 1, "<=", hi - lo))
        elif _finite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))
    n_std = len(columns)
    M = np.zeros((n, n_std))
    for k, (j, sign) in enumerate(columns):
        M[j, k] = sign
    rows = []
    rels = []
    rhs = []
    for con in lp.constraints:
        rows.append(con.coeffs @ M)
        rels.append(con.relation)
        rhs.append(con.rhs - float(con.coeffs @ offset))
    for k, rel, r in extra_rows:
        row = np.zeros(n_std)
        row[k] = 1.0
        rows.append(row)
        rels.append(rel)
        rhs.append(r)
    A = np.array(rows, dtype=float).reshape(len(rows), n_std)
    return A, rels, np.array(rhs, dtype=float), lp.objective @ M, offset, M


def _run_simplex(T: np.ndarray, basis: list[int], n_cols: int, budget: list[int]) -> bool:
    """Maximize over tableau ``T`` (last row holds reduced costs) using Bland's rule.

    Only the first ``n_cols`` columns may enter. Returns False when unbounded.
    """
    m = T.shape[0] - 1
    while True:
        costs = T[-1, :n_cols]
        candidates = np.flatnonzero(costs < -EPS_OPT)
        if candidates.size == 0:
            return True
        col = int(candidates[0])
        column = T[:m, col]
        positive = np.flatnonzero(column > PIVOT_TOL)
        if positive.size == 0:
            return False
        ratios = T[positive, -1] / column[positive]
        best = ratios.min()
        ties = positive[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col
        budget[0] += 1
        if budget[0] > MAX_ITERATIONS:
            raise NumericalFailure(f"simplex exceeded {MAX_ITERATIONS} iterations")


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly up to the module tolerances.

    Raises MalformedProgram for inconsistent shapes and NumericalFailure when
    the iteration cap is hit.
    """
    lp.check()
    if lp.n_vars == 0:
        for con in lp.constraints:
            ok = {"<=": 0.0 <= con.rhs + EPS_FEAS, ">=": 0.0 >= con.rhs - EPS_FEAS,
                  "=": abs(con.rhs) <= EPS_FEAS}[con.relation]
            if not ok:
                return LpSolution(Status.INFEASIBLE)
        return LpSolution(Status.OPTIMAL, 0.0, np.zeros(0))

    std = _standardize(lp)
    if std is None:
        return LpSolution(Status.INFEASIBLE)
    A, rels, b, c, offset, M = std
    sign = 1.0 if lp.sense is Sense.MAXIMIZE else -1.0
    c = sign * c
    m, n = A.shape

    # Flip rows so every right-hand side is nonnegative.
    rels = list(rels)
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

    n_slack = sum(1 for r in rels if r != "=")
    art_rows = [i for i in range(m) if rels[i] != "<="]
    n_art = len(art_rows)
    width = n + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = [-1] * m
    k = n
    for i in range(m):
        if rels[i] == "<=":
            T[i, k] = 1.0
            basis[i] = k
            k += 1
        elif rels[i] == ">=":
            T[i, k] = -1.0
            k += 1
    for a, i in enumerate(art_rows):
        T[i, n + n_slack + a] = 1.0
        basis[i] = n + n_slack + a

    budget = [0]
    art_start = n + n_slack
    if n_art:
        # Phase 1: maximize -(sum of artificials).
        T[-1, art_start:width] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        _run_simplex(T, basis, width, budget)
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if -T[-1, -1] > EPS_FEAS * scale:
            return LpSolution(Status.INFEASIBLE, iterations=budget[0])
        # Drive remaining artificials out of the basis; drop redundant rows.
        keep = []
        for i in range(m):
            if basis[i] >= art_start:
                nz = np.flatnonzero(np.abs(T[i, :art_start]) > 1e-9)
                if nz.size:
                    _pivot(T, i, int(nz[0]))
                    basis[i] = int(nz[0])
                    keep.append(i)
            else:
                keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, np.s_[art_start:width], axis=1)
        m = len(keep)

    # Phase 2.
    T[-1] = 0.0
    T[-1, :n] = -c
    for i, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[i]
    if not _run_simplex(T, basis, n + n_slack, budget):
        return LpSolution(Status.UNBOUNDED, iterations=budget[0])

    y = np.zeros(n + n_slack)
    for i, j in enumerate(basis):
        y[j] = T[i, -1]
    x = offset + M @ y[:n]
    value = float(lp.objective @ x)
    return LpSolution(Status.OPTIMAL, value, x, budget[0])
