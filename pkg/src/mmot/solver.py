"""Kantorovich solvers over the extreme points of the symmetric plan polytope.

Every symmetric plan with marginal ``lam*`` is a mixture of symmetrized Diracs,
one per quantized measure ``q``, and the mixture weights only have to satisfy
``sum_q alpha_q q / N = lam*``.  That is an LP with ``l`` equality rows, so
its vertex solutions use at most ``l`` extreme points: an SAE state.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from .costs import CostSpec, NBodyCallable, NBodyTable, PairwiseCost
from .errors import CapacityError, InfeasibleError, NumericalError, ValidationError
from .extremal import (
    ExtremePointCatalog,
    gangbo_swiech_extreme,
    phi_n,
    soft_wasserstein_objective,
)
from .measures import (
    Marginal,
    PairMeasure,
    QuantizedMeasure,
    SAEState,
    SymmetricPlan,
    as_marginal,
    count_quantized,
    marginal_k,
    symmetrize,
)
from .monge import MongeState, count_monge_candidates
from .simplex import LinearProgram, LPSolution, certify_unique, solve

logger = logging.getLogger(__name__)

UNIQUE_TOL = 1e-9
FEASIBILITY_TOL = 1e-8
DEFAULT_ORACLE_LIMIT = 10**6
DEFAULT_ARRANGEMENT_BUDGET = 10**6
DEFAULT_MONGE_BUDGET = 10**6
CERTIFY_LIMIT = 2000

__all__ = [
    "SAEState",
    "SolveReport",
    "extreme_cost_pairwise",
    "extreme_cost_general",
    "extreme_cost",
    "catalog_costs",
    "solve_sae",
    "solve_colgen",
    "solve_oracle_full",
    "solve_monge_bruteforce",
    "maximize_wasserstein",
    "maximize_gs",
    "reduced_functional",
]


# --- costs of extreme plans ---------------------------------------------------


def _pair_counts(rho: Sequence[int]) -> Iterator[tuple[int, int, int]]:
    """(i, j, number of particle pairs on sites i <= j)."""
    l = len(rho)
    for i in range(l):
        if rho[i] >= 2:
            yield i, i, rho[i] * (rho[i] - 1) // 2
        for j in range(i + 1, l):
            if rho[i] and rho[j]:
                yield i, j, rho[i] * rho[j]


def extreme_cost_pairwise(q: QuantizedMeasure, c) -> float:
    """Pair-cost energy of the configuration ``q``.

    Equal to ``N^2/2 <c, lam x lam> - N/2 <diag c, lam>`` with ``lam = rho/N``;
    infinite as soon as one occupied pair of sites has infinite cost.
    """
    mat = c.matrix if isinstance(c, PairwiseCost) else PairwiseCost(c).matrix
    if q.l != mat.shape[0]:
        raise ValidationError(f"cost is for l={mat.shape[0]}, measure has l={q.l}")
    return math.fsum(n * mat[i, j] for i, j, n in _pair_counts(q.rho))


def _pairwise_catalog_costs(occupations: np.ndarray, mat: np.ndarray) -> np.ndarray:
    rho = occupations.astype(float)
    infinite = ~np.isfinite(mat)
    finite = np.where(infinite, 0.0, mat)
    F = 0.5 * (np.einsum("ki,ij,kj->k", rho, finite, rho) - rho @ np.diag(finite))
    inf_off = infinite & ~np.eye(mat.shape[0], dtype=bool)
    occ = (occupations > 0).astype(float)
    hit = np.einsum("ki,ij,kj->k", occ, inf_off.astype(float), occ) > 0
    hit |= ((occupations >= 2) & np.diag(infinite)[None, :]).any(axis=1)
    F[hit] = np.inf
    return F


def _multiset_permutations(items: Sequence[int]) -> Iterator[tuple[int, ...]]:
    a = sorted(items)
    n = len(a)
    while True:
        yield tuple(a)
        i = n - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1 :] = reversed(a[i + 1 :])


def arrangement_count(q: QuantizedMeasure) -> int:
    return math.factorial(q.N) // math.prod(math.factorial(r) for r in q.rho)


def extreme_cost_general(q: QuantizedMeasure, cost, budget: int = DEFAULT_ARRANGEMENT_BUDGET) -> float:
    """Cost of the symmetrized Dirac plan at ``q`` for an N-body cost.

    Averages the cost over the distinct rearrangements of ``q``'s multi-index;
    a symmetric cost is evaluated once on the sorted tuple.
    """
    idx = q.multi_index
    if isinstance(cost, PairwiseCost):
        return extreme_cost_pairwise(q, cost)
    if getattr(cost, "symmetric", False):
        return float(cost(idx))
    count = arrangement_count(q)
    if count > budget:
        raise CapacityError(f"{count} rearrangements of {idx} exceed budget {budget}")
    values = [float(cost(p)) for p in _multiset_permutations(idx)]
    if any(v == math.inf for v in values):
        return math.inf
    return math.fsum(values) / count


def extreme_cost(q: QuantizedMeasure, cost: CostSpec) -> float:
    if isinstance(cost, PairwiseCost):
        return extreme_cost_pairwise(q, cost)
    return extreme_cost_general(q, cost)


def _cost_l(cost: CostSpec) -> int:
    if isinstance(cost, (PairwiseCost, NBodyTable, NBodyCallable)):
        return cost.l
    raise ValidationError(f"unsupported cost object {type(cost).__name__}")


def catalog_costs(catalog: ExtremePointCatalog, cost: CostSpec, threads: int | None = None) -> np.ndarray:
    """Cost of every extreme plan in catalog order."""
    if isinstance(cost, NBodyTable) and cost.N != catalog.N:
        raise ValidationError(f"N-body table is for N={cost.N}, problem has N={catalog.N}")
    if isinstance(cost, NBodyCallable) and cost.N not in (None, catalog.N):
        raise ValidationError(f"N-body cost is for N={cost.N}, problem has N={catalog.N}")
    if isinstance(cost, PairwiseCost):
        return _pairwise_catalog_costs(catalog.occupations, cost.matrix)
    if isinstance(cost, NBodyCallable) and cost.pairwise is not None:
        return _pairwise_catalog_costs(catalog.occupations, cost.pairwise.matrix)
    measures = catalog.measures
    if threads == 1 or len(measures) < 64:
        return np.array([extreme_cost_general(q, cost) for q in measures])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.fromiter(pool.map(lambda q: extreme_cost_general(q, cost), measures), float, len(measures))


def _exact_catalog_costs(catalog: ExtremePointCatalog, cost: CostSpec, cols) -> list[Fraction]:
    pair = cost if isinstance(cost, PairwiseCost) else getattr(cost, "pairwise", None)
    out = []
    for k in cols:
        q = catalog.measure(int(k))
        if pair is not None:
            out.append(sum((n * Fraction(pair.matrix[i, j]) for i, j, n in _pair_counts(q.rho)), Fraction(0)))
        else:
            out.append(Fraction(extreme_cost_general(q, cost)))
    return out


def plan_cost(plan: SymmetricPlan, cost: CostSpec) -> float:
    """Expected cost of a plan, evaluating the N-body cost directly on each atom."""
    total = []
    for idx, w in plan.entries.items():
        if isinstance(cost, PairwiseCost):
            v = math.fsum(cost.matrix[idx[a], idx[b]] for a in range(plan.N) for b in range(a + 1, plan.N))
        else:
            v = extreme_cost_general(QuantizedMeasure.from_multi_index(idx, plan.l), cost)
        total.append(w * v)
    return math.fsum(total)


def reduced_functional(alphas: Sequence[float], lambdas: Sequence, c, N: int) -> float:
    """Reduced pair-cost functional of an SAE parametrization.

    ``sum_nu alpha_nu (N^2/2 <c, lam_nu x lam_nu> - N/2 <diag c, lam_nu>)``.
    """
    mat = c.matrix if isinstance(c, PairwiseCost) else np.asarray(c, dtype=float)
    total = 0.0
    for a, lam in zip(alphas, lambdas):
        w = as_marginal(lam).weights
        if a == 0:
            continue
        total += a * (N**2 / 2 * (w @ mat @ w) - N / 2 * (np.diag(mat) @ w))
    return float(total)


# --- reports ----------------------------------------------------------------


def _num(v):
    if v is None:
        return None
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class SolveReport:
    """Outcome of an SAE solve.

    ``status`` is ``"optimal"`` or ``"infinite"`` (no plan of finite cost).
    ``uniqueness_margin`` is the certified strict-complementarity slack; the
    optimum is reported unique when it exceeds ``UNIQUE_TOL`` (or is positive
    in exact mode).  ``certified`` is False for heuristic column generation
    that could not verify optimality.
    """

    status: str
    cost: float
    state: SAEState | None
    plan: SymmetricPlan | None
    method: str
    uniqueness_margin: Any = None
    basis_margin: Any = None
    unique: bool | None = None
    certified: bool = True
    cost_exact: Fraction | None = None
    stats: dict = field(default_factory=dict)

    @property
    def support_size(self) -> int:
        return 0 if self.state is None else len(self.state.support)

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "method": self.method,
            "cost": _num(self.cost),
            "support": None if self.state is None else self.state.to_dict()["support"],
            "state": None if self.state is None else self.state.to_dict(),
            "plan": None if self.plan is None else self.plan.to_dict(),
            "margins": {
                "uniqueness": _num(self.uniqueness_margin),
                "basis": _num(self.basis_margin),
                "unique": self.unique,
                "threshold": UNIQUE_TOL,
            },
            "certified": self.certified,
            "stats": self.stats,
        }
        if self.cost_exact is not None:
            out["cost_exact"] = str(self.cost_exact)
        return out


def _check_marginal(marginal, l: int) -> Marginal:
    lam = as_marginal(marginal)
    if lam.l != l:
        raise ValidationError(f"marginal has {lam.l} sites, cost has {l}")
    return lam


def _uniqueness(lp: LinearProgram, sol: LPSolution, certify: bool):
    basis = sol.basis_margin()
    margin = basis
    threshold = 0 if sol.exact else UNIQUE_TOL
    if certify and not basis > threshold and lp.shape[1] <= CERTIFY_LIMIT:
        margin = certify_unique(lp, sol)
    unique = bool(margin > threshold)
    return margin, basis, unique


def _build_state(N: int, l: int, sol: LPSolution, measures: Sequence[QuantizedMeasure]) -> SAEState:
    support = sol.support()
    if support.size > l:
        raise NumericalError(f"vertex solution has {support.size} > l={l} atoms")
    alphas = [sol.x[k] for k in support]
    if not sol.exact:
        s = float(sum(alphas))
        alphas = [float(a) / s for a in alphas]
    return SAEState(N, l, tuple((a, measures[k]) for a, k in zip(alphas, support))).with_canonical_maps()


def _verify(report: SolveReport, lam: Marginal, cost: CostSpec):
    plan_marg = marginal_k(report.plan, 1).weights
    err = np.max(np.abs(plan_marg - lam.weights))
    if err > FEASIBILITY_TOL:
        raise NumericalError(f"plan marginal misses the target by {err:.3g}")
    direct = plan_cost(report.plan, cost)
    if abs(direct - report.cost) > FEASIBILITY_TOL * (1 + abs(report.cost)):
        raise NumericalError(f"recomputed plan cost {direct!r} differs from LP value {report.cost!r}")


# --- SAE solver ---------------------------------------------------------------


def solve_sae(
    cost: CostSpec,
    marginal,
    N: int,
    *,
    exact: bool = False,
    rule: str = "bland",
    limit: int | None = None,
    certify: bool = True,
    threads: int | None = None,
) -> SolveReport:
    """Minimize the Kantorovich cost over symmetric plans with marginal ``marginal``.

    The LP runs over every extreme plan of finite cost; the returned vertex
    is an SAE state with at most ``l`` sites.  ``exact=True`` solves the LP
    in rational arithmetic (catalogs of at most 500 columns).
    """
    t0 = time.perf_counter()
    l = _cost_l(cost)
    lam = _check_marginal(marginal, l)
    if N < 1:
        raise ValidationError("N must be positive")
    cat = ExtremePointCatalog(l, N, limit)
    F = catalog_costs(cat, cost, threads)
    cols = np.flatnonzero(np.isfinite(F))
    stats: dict[str, Any] = {"columns": len(cat), "finite_columns": int(cols.size)}
    if cols.size == 0:
        stats["wall_time"] = time.perf_counter() - t0
        return SolveReport("infinite", math.inf, None, None, "sae", stats=stats)
    if exact:
        c = np.array(_exact_catalog_costs(cat, cost, cols), dtype=object)
        A = np.array([[Fraction(int(cat.occupations[k, i]), N) for k in cols] for i in range(l)], dtype=object)
        b = np.array(lam.as_fractions(), dtype=object)
        lp = LinearProgram(c, A, b)
    else:
        lp = LinearProgram(F[cols], cat.lambdas[cols].T, lam.weights)
    sol = solve(lp, rule=rule, exact=exact)
    stats.update(sol.stats)
    if sol.status == "infeasible":
        if cols.size < len(cat):
            stats["wall_time"] = time.perf_counter() - t0
            return SolveReport("infinite", math.inf, None, None, "sae", stats=stats)
        raise InfeasibleError("SAE master LP infeasible with the full catalog; this is a bug")
    if sol.status != "optimal":
        raise NumericalError(f"SAE LP ended with status {sol.status}")
    measures = [cat.measure(int(k)) for k in cols]
    state = _build_state(N, l, sol, measures)
    margin, basis, unique = _uniqueness(lp, sol, certify)
    stats["wall_time"] = time.perf_counter() - t0
    report = SolveReport(
        "optimal",
        float(sol.objective),
        state,
        state.plan(),
        "sae",
        uniqueness_margin=margin,
        basis_margin=basis,
        unique=unique,
        cost_exact=sol.objective if exact else None,
        stats=stats,
    )
    _verify(report, lam, cost)
    return report


# --- column generation --------------------------------------------------------


def _random_composition(rng: np.random.Generator, N: int, l: int) -> tuple[int, ...]:
    return tuple(int(v) for v in rng.multinomial(N, np.full(l, 1.0 / l)))


def _local_search(score, start: tuple[int, ...]) -> tuple[tuple[int, ...], float]:
    """Steepest descent on ``score`` moving one particle between two sites."""
    cur, val = start, score(start)
    l = len(start)
    while True:
        best, best_val = None, val
        for i in range(l):
            if cur[i] == 0:
                continue
            for j in range(l):
                if j == i:
                    continue
                nxt = list(cur)
                nxt[i] -= 1
                nxt[j] += 1
                nxt = tuple(nxt)
                v = score(nxt)
                if v < best_val - 1e-15:
                    best, best_val = nxt, v
        if best is None:
            return cur, val
        cur, val = best, best_val


def solve_colgen(
    cost: CostSpec,
    marginal,
    N: int,
    *,
    pricing: str = "enumerate",
    seed: int = 0,
    restarts: int = 20,
    batch: int | None = None,
    max_rounds: int = 10_000,
    limit: int | None = None,
    rule: str = "bland",
    certify: bool = True,
) -> SolveReport:
    """SAE solve by column generation on a restricted master LP.

    ``pricing="enumerate"`` scans the whole catalog for the most negative
    reduced costs and reaches the same optimum as :func:`solve_sae`.
    ``pricing="local-search"`` descends from random occupation vectors with
    single-particle moves; its answer is an upper bound and is marked
    ``certified`` only if a final full reduced-cost scan finds nothing negative.
    """
    if pricing not in ("enumerate", "local-search"):
        raise ValidationError(f"unknown pricing {pricing!r}")
    pair = cost if isinstance(cost, PairwiseCost) else getattr(cost, "pairwise", None)
    if pair is None:
        raise ValidationError("column generation needs a pairwise cost")
    t0 = time.perf_counter()
    l = pair.l
    lam = _check_marginal(marginal, l)
    mat = pair.matrix
    rng = np.random.default_rng(seed)
    batch = batch or l
    tol = 1e-9 * max(1.0, float(np.max(np.abs(mat[np.isfinite(mat)]), initial=0.0)) * N * N)

    catalog = None
    if pricing == "enumerate":
        catalog = ExtremePointCatalog(l, N, limit)
        F_all = _pairwise_catalog_costs(catalog.occupations, mat)
        lam_all = catalog.lambdas

    def F_of(rho):
        return _pairwise_catalog_costs(np.array([rho]), mat)[0]

    columns: list[tuple[int, ...]] = []
    col_cost: list[float] = []
    seen: set[tuple[int, ...]] = set()

    def add(rho):
        if rho in seen:
            return False
        v = F_of(rho)
        if not math.isfinite(v):
            return False
        seen.add(rho)
        columns.append(rho)
        col_cost.append(v)
        return True

    for i in range(l):
        add(tuple(N if j == i else 0 for j in range(l)))

    def price(duals, phase_one: bool) -> list[tuple[int, ...]]:
        weight = 0.0 if phase_one else 1.0
        if pricing == "enumerate":
            red = -(lam_all @ duals) + (weight * F_all if not phase_one else 0.0)
            red = np.where(np.isfinite(F_all), red, np.inf)
            order = np.argsort(red, kind="stable")
            picked = []
            for k in order:
                if red[k] >= -tol or len(picked) >= batch:
                    break
                rho = tuple(int(v) for v in catalog.occupations[k])
                if rho not in seen:
                    picked.append(rho)
            return picked

        def score(rho):
            v = F_of(rho)
            if not math.isfinite(v):
                return math.inf
            return weight * v - float(np.dot(duals, rho)) / N

        starts = list(columns) + [_random_composition(rng, N, l) for _ in range(restarts)]
        found = {}
        for s in starts:
            if not math.isfinite(score(s)):
                continue
            rho, val = _local_search(score, s)
            if val < -tol and rho not in seen:
                found[rho] = val
        return sorted(found, key=found.get)[:batch]

    pivots = 0
    rounds = 0
    infinite = False
    if not columns:
        # every pure column is infinite; any finite column scores below zero here
        for rho in price(lam.weights, phase_one=True):
            add(rho)
        infinite = not columns
    while not infinite:
        rounds += 1
        if rounds > max_rounds:
            raise NumericalError(f"column generation did not converge in {max_rounds} rounds")
        A = (np.array(columns, dtype=float) / N).T
        lp = LinearProgram(np.array(col_cost), A, lam.weights)
        sol = solve(lp, rule=rule)
        pivots += sol.stats.get("pivots", 0)
        if sol.status == "infeasible":
            new = price(sol.farkas, phase_one=True)
            if not new:
                if pricing == "local-search":
                    # a failed heuristic search is not proof of infeasibility
                    cat_full = ExtremePointCatalog(l, N, limit)
                    Fk = _pairwise_catalog_costs(cat_full.occupations, mat)
                    hits = np.flatnonzero(np.isfinite(Fk) & (cat_full.lambdas @ sol.farkas > tol))
                    new = [tuple(int(v) for v in cat_full.occupations[k]) for k in hits[:batch]]
                if not new:
                    infinite = True
                    break
            for rho in new:
                add(rho)
            continue
        if sol.status != "optimal":
            raise NumericalError(f"restricted master ended with status {sol.status}")
        new = price(sol.y, phase_one=False)
        if not new:
            break
        for rho in new:
            add(rho)

    stats: dict[str, Any] = {"columns_generated": len(columns), "rounds": rounds, "pivots": pivots, "pricing": pricing}
    if infinite:
        stats["wall_time"] = time.perf_counter() - t0
        return SolveReport("infinite", math.inf, None, None, "colgen", stats=stats)

    measures = [QuantizedMeasure(N, rho) for rho in columns]
    state = _build_state(N, l, sol, measures)
    certified = pricing == "enumerate"
    margin = basis = sol.basis_margin()
    unique = None
    full = catalog
    if full is None and count_quantized(l, N) <= (limit or 5_000_000):
        full = ExtremePointCatalog(l, N, limit)
    if full is not None:
        Fk = _pairwise_catalog_costs(full.occupations, mat)
        red = Fk - full.lambdas @ sol.y
        finite = np.isfinite(Fk)
        if pricing == "local-search":
            certified = bool(np.all(red[finite] >= -tol))
        in_basis = {columns[k] for k in sol.basis}
        mask = finite & np.array([tuple(int(v) for v in row) not in in_basis for row in full.occupations])
        basis = float(red[mask].min()) if mask.any() else math.inf
        margin = basis
        if certify and not basis > UNIQUE_TOL and finite.sum() <= CERTIFY_LIMIT and certified:
            cols = np.flatnonzero(finite)
            lp_full = LinearProgram(Fk[cols], full.lambdas[cols].T, lam.weights)
            idx = {tuple(int(v) for v in full.occupations[k]): n for n, k in enumerate(cols)}
            x = np.zeros(cols.size)
            for k, rho in enumerate(columns):
                x[idx[rho]] += sol.x[k]
            proxy = LPSolution("optimal", x, sol.objective, sense="min")
            margin = certify_unique(lp_full, proxy)
        unique = bool(margin > UNIQUE_TOL)
    stats["wall_time"] = time.perf_counter() - t0
    report = SolveReport(
        "optimal",
        float(sol.objective),
        state,
        state.plan(),
        "colgen",
        uniqueness_margin=margin,
        basis_margin=basis,
        unique=unique,
        certified=certified,
        stats=stats,
    )
    _verify(report, lam, cost)
    return report


# --- brute-force oracles ------------------------------------------------------


@dataclass
class OracleResult:
    status: str
    cost: float
    plan: np.ndarray | None
    stats: dict = field(default_factory=dict)

    def symmetric_plan(self) -> SymmetricPlan:
        l = self.plan.shape[0]
        weights = {idx: float(self.plan[idx]) for idx in zip(*np.nonzero(self.plan > 1e-14))}
        return symmetrize(weights, l)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "method": "oracle",
            "cost": _num(self.cost),
            "plan": None if self.plan is None else self.symmetric_plan().to_dict(),
            "stats": self.stats,
        }


def solve_oracle_full(
    cost: CostSpec,
    marginal,
    N: int,
    *,
    limit: int = DEFAULT_ORACLE_LIMIT,
    rule: str = "bland",
) -> OracleResult:
    """Solve the unreduced Kantorovich LP over all ``l**N`` points of X^N.

    One equality row per (coordinate, site) pins every one-point marginal to
    ``marginal``; the cost of a point is the symmetrized N-body cost there.
    """
    t0 = time.perf_counter()
    l = _cost_l(cost)
    lam = _check_marginal(marginal, l)
    T = l**N
    if T > limit:
        raise CapacityError(f"{T} atoms in X^N exceed the oracle limit {limit}")
    cat = ExtremePointCatalog(l, N)
    F = catalog_costs(cat, cost)
    tuples = np.indices((l,) * N).reshape(N, -1).T
    counts = np.zeros((T, l), dtype=np.int64)
    for k in range(N):
        counts[np.arange(T), tuples[:, k]] += 1
    radix = (N + 1) ** np.arange(l, dtype=np.int64)
    cat_keys = cat.occupations @ radix
    order = np.argsort(cat_keys)
    pos = order[np.searchsorted(cat_keys[order], counts @ radix)]
    c_full = F[pos]
    cols = np.flatnonzero(np.isfinite(c_full))
    stats: dict[str, Any] = {"atoms": T, "finite_atoms": int(cols.size)}
    if cols.size == 0:
        return OracleResult("infinite", math.inf, None, stats)
    A = np.zeros((N * l, cols.size))
    for k in range(N):
        A[k * l + tuples[cols, k], np.arange(cols.size)] = 1.0
    b = np.tile(lam.weights, N)
    sol = solve(LinearProgram(c_full[cols], A, b), rule=rule)
    stats.update(sol.stats)
    stats["wall_time"] = time.perf_counter() - t0
    if sol.status == "infeasible":
        if cols.size < T:
            return OracleResult("infinite", math.inf, None, stats)
        raise InfeasibleError("full Kantorovich LP infeasible; this is a bug")
    if sol.status != "optimal":
        raise NumericalError(f"oracle LP ended with status {sol.status}")
    dense = np.zeros(T)
    dense[cols] = sol.x
    return OracleResult("optimal", float(sol.objective), dense.reshape((l,) * N), stats)


@dataclass
class MongeReport:
    cost: float
    state: MongeState | None
    plan: SymmetricPlan | None
    candidates: int
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "status": "optimal" if math.isfinite(self.cost) else "infinite",
            "method": "monge",
            "cost": _num(self.cost),
            "monge_state": None if self.state is None else self.state.to_list(),
            "plan": None if self.plan is None else self.plan.to_dict(),
            "stats": {"candidates": self.candidates, **self.stats},
        }


def solve_monge_bruteforce(
    cost: CostSpec,
    N: int,
    marginal=None,
    *,
    budget: int = DEFAULT_MONGE_BUDGET,
) -> MongeReport:
    """Best symmetrized Monge state by exhaustive search with ``T_1 = id``.

    Monge states only exist for the uniform marginal; any other ``marginal``
    is rejected.
    """
    t0 = time.perf_counter()
    l = _cost_l(cost)
    if marginal is not None and not _check_marginal(marginal, l).is_uniform():
        raise ValidationError("Monge states have uniform marginal; got a non-uniform one")
    total = count_monge_candidates(l, N)
    if total > budget:
        raise CapacityError(f"{total} Monge candidates exceed budget {budget}")
    cat = ExtremePointCatalog(l, N)
    F = catalog_costs(cat, cost)
    lookup = {tuple(int(v) for v in row): F[k] for k, row in enumerate(cat.occupations)}
    identity = tuple(range(l))
    best_cost, best = math.inf, None
    for rest in itertools.product(itertools.permutations(range(l)), repeat=N - 1):
        perms = (identity,) + rest
        value = 0.0
        for nu in range(l):
            rho = [0] * l
            for p in perms:
                rho[p[nu]] += 1
            value += lookup[tuple(rho)]
        value /= l
        if value < best_cost - 1e-15 or best is None:
            if best is None or value < best_cost - 1e-15:
                best_cost, best = value, perms
    state = MongeState(best)
    return MongeReport(
        float(best_cost),
        state,
        state.plan(),
        total,
        {"wall_time": time.perf_counter() - t0},
    )


# --- maximization problems ----------------------------------------------------


@dataclass
class MaxResult:
    value: float
    weights: list[tuple[float, QuantizedMeasure]]
    N: int
    quantized: bool
    margin: Any = None
    unique: bool | None = None
    kind: str = "wasserstein"

    @property
    def optimizer(self):
        if self.kind == "wasserstein":
            return PairMeasure(sum(a * phi_n(q, self.N) for a, q in self.weights))
        entries: dict = {}
        for a, q in self.weights:
            entries[q.multi_index] = entries.get(q.multi_index, 0.0) + a
        return SymmetricPlan(self.N, self.weights[0][1].l, entries)

    def to_dict(self) -> dict:
        opt = self.optimizer
        return {
            "objective": "gangbo-swiech" if self.kind == "gs" else "wasserstein",
            "N": self.N,
            "value": float(self.value),
            "optimizer": opt.to_dict(),
            "weights": [{"alpha": float(a), "rho": list(q.rho)} for a, q in self.weights],
            "quantized": self.quantized,
            "margin": _num(self.margin),
            "unique": self.unique,
        }


def _maximize_over_catalog(lam, N: int, values_of, kind: str, certify: bool, limit) -> MaxResult:
    if N < 2:
        raise ValidationError("maximization problems need N >= 2")
    m = as_marginal(lam)
    cat = ExtremePointCatalog(m.l, N, limit)
    lp = LinearProgram(values_of(cat), cat.lambdas.T, m.weights, sense="max")
    sol = solve(lp)
    if not sol.optimal:
        raise NumericalError(f"maximization LP ended with status {sol.status}")
    support = sol.support(1e-12)
    weights = [(float(sol.x[k]), cat.measure(int(k))) for k in support]
    quantized = m.quantize(N) is not None
    margin = unique = None
    if quantized:
        margin, _, unique = _uniqueness(lp, sol, certify)
    return MaxResult(float(sol.objective), weights, N, quantized, margin, unique, kind)


def maximize_wasserstein(lam, N: int, *, certify: bool = True, limit: int | None = None) -> MaxResult:
    """Maximize the discrete-metric transport cost over N-representable pair measures with marginal ``lam``.

    For quantized ``lam`` the optimum is ``phi_N(lam)`` with value
    ``N/(N-1) (1 - sum lam_i^2)``; uniqueness is then certified.
    """
    return _maximize_over_catalog(lam, N, lambda cat: cat.wasserstein_values, "wasserstein", certify, limit)


def maximize_gs(lam, N: int, *, certify: bool = True, limit: int | None = None) -> MaxResult:
    """Maximize the Gangbo-Swiech cost over symmetric plans with marginal ``lam``."""

    def values(cat):
        return np.array([gangbo_swiech_extreme(q) for q in cat.measures], dtype=float)

    return _maximize_over_catalog(lam, N, values, "gs", certify, limit)


@dataclass
class SoftMaxResult:
    value: float
    argmax: QuantizedMeasure
    gap: float


def maximize_soft_wasserstein(lam, N: int, limit: int | None = None) -> SoftMaxResult:
    """Maximize the soft-constraint objective over all N-representable pair measures.

    A linear objective over a polytope peaks at a vertex, so scanning the
    catalog suffices; ``gap`` is the lead of the best vertex over the runner-up.
    """
    m = as_marginal(lam)
    cat = ExtremePointCatalog(m.l, N, limit)
    vals = np.array([soft_wasserstein_objective(mu, m, N) for mu in cat.phi_images])
    order = np.argsort(-vals, kind="stable")
    gap = float(vals[order[0]] - vals[order[1]]) if len(vals) > 1 else math.inf
    return SoftMaxResult(float(vals[order[0]]), cat.measure(int(order[0])), gap)


def maximize_soft_gs(lam, N: int, limit: int | None = None) -> SoftMaxResult:
    m = as_marginal(lam)
    cat = ExtremePointCatalog(m.l, N, limit)
    vals = N**2 * (cat.lambdas @ m.weights) + np.array([gangbo_swiech_extreme(q) for q in cat.measures])
    order = np.argsort(-vals, kind="stable")
    gap = float(vals[order[0]] - vals[order[1]]) if len(vals) > 1 else math.inf
    return SoftMaxResult(float(vals[order[0]]), cat.measure(int(order[0])), gap)
