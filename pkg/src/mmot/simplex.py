"""Two-phase revised simplex returning basic (vertex) solutions.

Problems are given in standard form ``min/max c @ x  s.t.  A @ x == b, x >= 0``.
The basis inverse is kept explicitly, updated by rank-one pivots and
refactorized every ``REFACTOR_EVERY`` pivots.  With ``exact=True`` all
arithmetic is carried out on :class:`fractions.Fraction` objects and every
tolerance is zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import CyclingError, NumericalError, ValidationError

logger = logging.getLogger(__name__)

REFACTOR_EVERY = 50
DANTZIG_FALLBACK_AFTER = 20
CONDITION_LIMIT = 1e12
EXACT_MAX_COLUMNS = 500


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    sense: str = "min"

    def __post_init__(self):
        exact = any(np.asarray(v).dtype == object for v in (self.c, self.A, self.b))
        dtype = object if exact else float
        c = np.array(self.c, dtype=dtype).reshape(-1)
        A = np.array(self.A, dtype=dtype)
        b = np.array(self.b, dtype=dtype).reshape(-1)
        if A.ndim != 2 or A.shape != (b.size, c.size) or b.size < 1 or c.size < 1:
            raise ValidationError(f"inconsistent LP shapes: A {A.shape}, b {b.shape}, c {c.shape}")
        if self.sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if not exact and not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValidationError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def to_exact(self) -> "LinearProgram":
        conv = np.vectorize(Fraction, otypes=[object])
        return LinearProgram(conv(self.c), conv(self.A), conv(self.b), self.sense)


@dataclass
class LPSolution:
    """Result of :func:`solve`.

    For ``status == "optimal"`` the reduced costs ``c - A.T @ y`` are
    nonnegative (min) or nonpositive (max) on every column.  For
    ``"infeasible"``, ``farkas`` holds ``y`` with ``y @ A <= 0`` and
    ``y @ b > 0``.
    """

    status: str
    x: np.ndarray | None
    objective: float | Fraction | None
    basis: tuple[int, ...] = ()
    y: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    farkas: np.ndarray | None = None
    sense: str = "min"
    exact: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def support(self, tol: float = 1e-10) -> np.ndarray:
        if self.exact:
            return np.flatnonzero(self.x > 0)
        return np.flatnonzero(self.x > tol)

    def basis_margin(self):
        """Smallest strict-optimality slack over the nonbasic columns.

        Positive means every nonbasic column would strictly worsen the
        objective.  ``inf`` if all columns are basic.
        """
        nonbasic = np.setdiff1d(np.arange(self.reduced_costs.size), self.basis)
        if nonbasic.size == 0:
            return float("inf")
        d = self.reduced_costs[nonbasic]
        return min(d) if self.sense == "min" else min(-d)


class _Tolerances:
    def __init__(self, exact: bool, c, b):
        if exact:
            self.dual = self.pivot = self.primal = self.tie = self.feas = 0
        else:
            scale_c = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
            scale_b = 1.0 + float(np.max(np.abs(b)))
            self.dual = 1e-10 * scale_c
            self.pivot = 1e-9
            self.primal = 1e-12 * scale_b
            self.tie = 1e-12 * scale_b
            self.feas = 1e-9 * scale_b


def _inverse(B, exact: bool):
    m = B.shape[0]
    if not exact:
        try:
            lu = scipy.linalg.lu_factor(B, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"basis factorization failed: {exc}") from exc
        Binv = scipy.linalg.lu_solve(lu, np.eye(m), check_finite=False)
        cond = np.linalg.norm(B, 1) * np.linalg.norm(Binv, 1)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise NumericalError(f"basis condition estimate {cond:.3g} exceeds {CONDITION_LIMIT:g}")
        return Binv
    # Gauss-Jordan over the rationals
    M = np.concatenate([B.copy(), np.array(np.eye(m, dtype=int), dtype=object)], axis=1)
    M = np.vectorize(Fraction, otypes=[object])(M)
    for col in range(m):
        piv = next((r for r in range(col, m) if M[r, col] != 0), None)
        if piv is None:
            raise NumericalError("singular basis in exact mode")
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
        M[col] = M[col] / M[col, col]
        for r in range(m):
            if r != col and M[r, col] != 0:
                M[r] = M[r] - M[r, col] * M[col]
    return M[:, m:]


class _Simplex:
    def __init__(self, A, b, exact: bool, rule: str, tol: _Tolerances):
        self.A, self.b = A, b
        self.m, self.n = A.shape
        self.exact = exact
        self.rule = rule
        self.tol = tol
        self.pivots = 0
        self.degenerate_pivots = 0
        self.since_refactor = 0

    def refactor(self):
        self.Binv = _inverse(self.A[:, self.basis], self.exact)
        self.since_refactor = 0

    def pivot(self, r: int, j: int, u):
        Binv = self.Binv
        row = Binv[r] / u[r]
        Binv -= np.outer(u, row)
        Binv[r] = row
        self.basis[r] = j
        self.pivots += 1
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def run(self, c, allowed, guard: int):
        """Iterate to optimality for cost ``c``; returns 'optimal' or 'unbounded'."""
        tol = self.tol
        rule = self.rule
        consecutive_degenerate = 0
        in_basis = np.zeros(self.n, dtype=bool)
        max_pivots = guard * 20 + 10_000
        start = self.pivots
        while True:
            if self.pivots - start > max_pivots:
                raise NumericalError(f"simplex exceeded {max_pivots} pivots")
            in_basis[:] = False
            in_basis[self.basis] = True
            xB = self.Binv @ self.b
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            candidates = np.flatnonzero(allowed & ~in_basis & (d < -tol.dual))
            if candidates.size == 0:
                return "optimal"
            if rule == "bland":
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmin(d[candidates])])
            u = self.Binv @ self.A[:, j]
            rows = np.flatnonzero(u > tol.pivot)
            if rows.size == 0:
                return "unbounded"
            ratios = xB[rows] / u[rows]
            theta = min(ratios)
            ties = rows[np.flatnonzero(ratios <= theta + tol.tie)]
            r = int(ties[np.argmin(np.asarray([self.basis[t] for t in ties]))])
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug("pivot %d: enter %d (d=%s) leave %d theta=%s", self.pivots, j, d[j], self.basis[r], theta)
            self.pivot(r, j, u)
            if theta <= tol.primal:
                self.degenerate_pivots += 1
                consecutive_degenerate += 1
                if rule == "dantzig" and consecutive_degenerate >= DANTZIG_FALLBACK_AFTER:
                    logger.debug("falling back to Bland's rule after %d degenerate pivots", consecutive_degenerate)
                    rule = self.rule = "bland"
                    consecutive_degenerate = 0
                elif rule == "bland" and consecutive_degenerate > guard:
                    raise CyclingError(
                        f"{consecutive_degenerate} consecutive degenerate pivots under Bland's rule"
                    )
            else:
                consecutive_degenerate = 0


def solve(lp: LinearProgram, *, rule: str = "bland", exact: bool | None = None) -> LPSolution:
    """Solve ``lp`` with the two-phase revised simplex method.

    ``rule`` is ``"bland"`` (smallest-index entering column) or ``"dantzig"``
    (most negative reduced cost, falling back to Bland after a run of
    degenerate pivots).  ``exact`` defaults to whether ``lp`` already holds
    rational data.
    """
    if rule not in ("bland", "dantzig"):
        raise ValidationError(f"unknown pivot rule {rule!r}")
    if exact is None:
        exact = lp.A.dtype == object
    if exact:
        if lp.A.dtype != object:
            lp = lp.to_exact()
        if lp.shape[1] > EXACT_MAX_COLUMNS:
            raise ValidationError(f"exact mode supports at most {EXACT_MAX_COLUMNS} columns")
    m, n = lp.shape
    c_min = -lp.c if lp.sense == "max" else lp.c
    signs = np.where(lp.b < 0, -1, 1)
    A = lp.A * signs[:, None]
    b = lp.b * signs
    tol = _Tolerances(exact, c_min, b)
    guard = 50 * (m + n)

    eye = np.eye(m, dtype=int)
    if exact:
        eye = np.array(eye, dtype=object)
        zero, one = Fraction(0), Fraction(1)
    else:
        eye = eye.astype(float)
        zero, one = 0.0, 1.0
    engine = _Simplex(np.concatenate([A, eye], axis=1), b, exact, rule, tol)
    engine.basis = list(range(n, n + m))
    engine.Binv = np.array(eye, copy=True)
    c1 = np.array([zero] * n + [one] * m, dtype=object if exact else float)
    allowed = np.zeros(n + m, dtype=bool)
    allowed[:n] = True
    engine.run(c1, allowed, guard)
    phase1_pivots = engine.pivots

    xB = engine.Binv @ b
    infeas = c1[engine.basis] @ xB
    if infeas > tol.feas:
        y1 = c1[engine.basis] @ engine.Binv
        farkas = y1 * signs
        stats = {"pivots": engine.pivots, "phase1_pivots": phase1_pivots}
        return LPSolution("infeasible", None, None, farkas=farkas, sense=lp.sense, exact=exact, stats=stats)

    # drive zero-level artificials out of the basis; their rows are redundant otherwise
    redundant = []
    for r in range(m):
        if engine.basis[r] < n:
            continue
        row = engine.Binv[r] @ A
        row[[j for j in engine.basis if j < n]] = 0
        mags = np.abs(row) if not exact else np.array([abs(v) for v in row], dtype=object)
        j = int(np.argmax(mags)) if n else 0
        if mags[j] > tol.pivot:
            u = engine.Binv @ engine.A[:, j]
            engine.pivot(r, j, u)
        else:
            redundant.append(r)
    keep = np.array([r for r in range(m) if r not in redundant], dtype=int)
    if redundant:
        logger.debug("dropping %d redundant rows", len(redundant))
    A2, b2 = A[keep], b[keep]
    basis = [engine.basis[r] for r in keep]
    engine2 = _Simplex(A2, b2, exact, engine.rule, tol)
    engine2.pivots = engine.pivots
    engine2.degenerate_pivots = engine.degenerate_pivots
    engine2.basis = basis
    engine2.refactor()
    status = engine2.run(c_min, np.ones(n, dtype=bool), guard)
    stats = {
        "pivots": engine2.pivots,
        "phase1_pivots": phase1_pivots,
        "degenerate_pivots": engine2.degenerate_pivots,
        "redundant_rows": len(redundant),
        "rule": engine2.rule,
    }
    if status == "unbounded":
        return LPSolution("unbounded", None, None, sense=lp.sense, exact=exact, stats=stats)

    engine2.refactor()
    xB = engine2.Binv @ b2
    x = np.array([zero] * n, dtype=object if exact else float)
    x[engine2.basis] = xB
    if not exact:
        x[(x < 0) & (x > -1e-10)] = 0.0
    y_kept = c_min[engine2.basis] @ engine2.Binv
    y = np.array([zero] * m, dtype=object if exact else float)
    y[keep] = y_kept
    y = y * signs
    d = c_min - y @ lp.A
    if lp.sense == "max":
        y, d = -y, -d
    objective = lp.c @ x
    # report the original row indices implied by the kept rows' basis
    return LPSolution(
        "optimal",
        x,
        objective,
        basis=tuple(int(j) for j in engine2.basis),
        y=y,
        reduced_costs=d,
        sense=lp.sense,
        exact=exact,
        stats=stats,
    )


def certify_unique(lp: LinearProgram, sol: LPSolution, cap=1.0):
    """Largest uniform reduced-cost slack attainable by an optimal dual.

    Solves ``max t`` over duals ``y`` that are complementary to ``sol.x``
    (zero reduced cost on its support) with reduced cost at least ``t`` on
    every other column, ``0 <= t <= cap``.  A positive value proves ``sol.x``
    is the unique optimum; it is never smaller than :meth:`LPSolution.basis_margin`
    clipped at ``cap``.
    """
    if not sol.optimal:
        raise ValidationError("uniqueness certification needs an optimal solution")
    exact = sol.exact
    if exact and lp.A.dtype != object:
        lp = lp.to_exact()
    m, n = lp.shape
    c = -lp.c if lp.sense == "max" else lp.c
    S = set(int(j) for j in sol.support())
    free = [j for j in range(n) if j not in S]
    rows = n + 1
    cols = 2 * m + 1 + len(free) + 1
    dtype = object if exact else float
    zero = Fraction(0) if exact else 0.0
    M = np.array([[zero] * cols for _ in range(rows)], dtype=dtype)
    rhs = np.array([zero] * rows, dtype=dtype)
    At = lp.A.T
    M[:n, :m] = At
    M[:n, m : 2 * m] = -At
    for s, j in enumerate(free):
        M[j, 2 * m] = 1
        M[j, 2 * m + 1 + s] = 1
    rhs[:n] = c
    M[n, 2 * m] = 1
    M[n, cols - 1] = 1
    rhs[n] = Fraction(cap) if exact else float(cap)
    obj = np.array([zero] * cols, dtype=dtype)
    obj[2 * m] = -1
    if not free:
        return Fraction(cap) if exact else float("inf")
    res = solve(LinearProgram(obj, M, rhs, "min"), rule="bland", exact=exact)
    if not res.optimal:
        raise NumericalError(f"uniqueness LP ended with status {res.status}")
    return res.x[2 * m]
