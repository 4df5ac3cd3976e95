"""Convex geometry of N-representable pair measures and symmetric N-point plans."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from .errors import NumericalError, ValidationError
from .measures import (
    Marginal,
    PairMeasure,
    QuantizedMeasure,
    SymmetricPlan,
    as_marginal,
    enumerate_quantized,
    occupation_array,
)
from .simplex import LinearProgram, solve

WITNESS_TOL = 1e-8


def phi_n(lam, N: int) -> np.ndarray:
    """Marginal-to-correlated-state map ``lam -> lam x lam + (lam x lam - diag(lam)) / (N - 1)``.

    Defined for every probability vector; the result is a symmetric matrix
    with row sums ``lam`` that is nonnegative exactly when no site carries
    mass strictly between 0 and 1/N.  Quantized inputs are evaluated from
    integer occupations so that their zero entries come out exactly zero.
    """
    if N < 2:
        raise ValidationError(f"phi_N needs N >= 2, got {N}")
    if isinstance(lam, QuantizedMeasure):
        if lam.N != N:
            raise ValidationError(f"quantized measure has N={lam.N}, expected {N}")
        rho = np.array(lam.rho, dtype=float)
        return (np.outer(rho, rho) - np.diag(rho)) / (N * (N - 1))
    w = as_marginal(lam).weights
    return (N * np.outer(w, w) - np.diag(w)) / (N - 1)


def phi_n_measure(q: QuantizedMeasure) -> PairMeasure:
    if q.N < 2:
        raise ValidationError(f"phi_N needs N >= 2, got {q.N}")
    return PairMeasure(phi_n(q, q.N))


def psi_n(q: QuantizedMeasure) -> SymmetricPlan:
    """The unique symmetrized Dirac plan with one-point marginal ``q``."""
    return SymmetricPlan(q.N, q.l, {q.multi_index: 1.0})


def wasserstein_discrete(mu) -> float:
    """Transport cost of ``mu`` for the discrete metric: its off-diagonal mass."""
    m = mu.matrix if isinstance(mu, PairMeasure) else np.asarray(mu, dtype=float)
    return float(m.sum() - np.trace(m))


def gangbo_swiech_extreme(q: QuantizedMeasure) -> int:
    """Number of particle pairs at distinct sites in the configuration ``q``."""
    return math.comb(q.N, 2) - sum(math.comb(r, 2) for r in q.rho)


def gangbo_swiech_cost(plan: SymmetricPlan) -> float:
    """Expected number of particle pairs on distinct sites."""
    if plan.N < 2:
        raise ValidationError("Gangbo-Swiech cost needs N >= 2")
    total = 0.0
    for idx, w in plan.entries.items():
        total += w * gangbo_swiech_extreme(QuantizedMeasure.from_multi_index(idx, plan.l))
    return total


def manifold_height(lam) -> float:
    """``g(lam) = sum_{i<j} lam_i lam_j``, the height of the curved manifold over the simplex."""
    w = np.asarray(lam.weights if isinstance(lam, Marginal) else lam, dtype=float)
    return float((w.sum() ** 2 - w @ w) / 2)


def manifold_gradient(lam) -> np.ndarray:
    w = np.asarray(lam.weights if isinstance(lam, Marginal) else lam, dtype=float)
    return w.sum() - w


def manifold_hessian(l: int) -> np.ndarray:
    v = np.ones(l)
    return np.outer(v, v) - np.eye(l)


def reduced_coordinates(mu, N: int) -> np.ndarray:
    """Linear image ``(row sums, (N-1)/N * sum_{i<j} mu_ij)`` of a pair measure."""
    m = mu.matrix if isinstance(mu, PairMeasure) else np.asarray(mu, dtype=float)
    upper = m[np.triu_indices(m.shape[0], k=1)].sum()
    return np.append(m.sum(axis=1), (N - 1) / N * upper)


def soft_wasserstein_objective(mu, lam, N: int) -> float:
    """``2N/(N-1) * <lam, M1 mu> + W[mu]``; maximized over the catalog at phi_N(lam)."""
    m = mu.matrix if isinstance(mu, PairMeasure) else np.asarray(mu, dtype=float)
    w = as_marginal(lam).weights
    return float(2 * N / (N - 1) * (w @ m.sum(axis=1)) + wasserstein_discrete(m))


def soft_gangbo_swiech_objective(plan: SymmetricPlan, lam) -> float:
    from .measures import marginal_k

    w = as_marginal(lam).weights
    return float(plan.N**2 * (w @ marginal_k(plan, 1).weights) + gangbo_swiech_cost(plan))


class ExtremePointCatalog:
    """Quantized measures for (l, N) in enumeration order, with lazy phi_N images."""

    def __init__(self, l: int, N: int, limit: int | None = None):
        self.l, self.N = l, N
        self.occupations = occupation_array(l, N, limit)
        self.occupations.flags.writeable = False
        self._limit = limit

    def __len__(self):
        return self.occupations.shape[0]

    @cached_property
    def measures(self) -> list[QuantizedMeasure]:
        return enumerate_quantized(self.l, self.N, self._limit)

    @cached_property
    def lambdas(self) -> np.ndarray:
        return self.occupations / self.N

    @cached_property
    def phi_images(self) -> np.ndarray:
        if self.N < 2:
            raise ValidationError("phi_N needs N >= 2")
        rho = self.occupations.astype(float)
        pair = rho[:, :, None] * rho[:, None, :]
        idx = np.arange(self.l)
        pair[:, idx, idx] -= rho
        return pair / (self.N * (self.N - 1))

    @cached_property
    def wasserstein_values(self) -> np.ndarray:
        lam = self.lambdas
        return self.N / (self.N - 1) * (1.0 - np.einsum("ki,ki->k", lam, lam))

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(v) for v in row): k for k, row in enumerate(self.occupations)}

    def index_of(self, q: QuantizedMeasure | tuple[int, ...]) -> int:
        rho = q.rho if isinstance(q, QuantizedMeasure) else tuple(q)
        return self._index[rho]

    def measure(self, k: int) -> QuantizedMeasure:
        return QuantizedMeasure(self.N, tuple(int(v) for v in self.occupations[k]))


@dataclass
class RepresentabilityCertificate:
    verdict: str
    N: int
    witness: list[tuple[float, QuantizedMeasure]] | None = None
    functional: np.ndarray | None = None
    margin: float | None = None

    @property
    def representable(self) -> bool:
        return self.verdict == "representable"

    def reconstruct(self) -> np.ndarray:
        return sum(a * phi_n(q, self.N) for a, q in self.witness)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "N": self.N,
            "witness": None
            if self.witness is None
            else [{"alpha": float(a), "rho": list(q.rho)} for a, q in self.witness],
            "functional": None if self.functional is None else self.functional.tolist(),
            "margin": self.margin,
        }


def check_representable(mu, N: int, tol: float = WITNESS_TOL, limit: int | None = None) -> RepresentabilityCertificate:
    """Decide whether ``mu`` is the pair marginal of a symmetric N-point plan.

    Solves the feasibility LP ``sum_q alpha_q phi_N(q) = mu, alpha >= 0`` over
    the upper triangle of ``mu``.  A feasible vertex gives a sparse witness; an
    infeasible one gives a separating functional from the phase-one duals,
    scaled to unit max-norm, with ``margin = <L, mu> - max_q <L, phi_N(q)>``.
    """
    pm = mu if isinstance(mu, PairMeasure) else PairMeasure(mu)
    l = pm.l
    if N < 2:
        raise ValidationError("N-representability needs N >= 2")
    cat = ExtremePointCatalog(l, N, limit)
    iu, ju = np.triu_indices(l)
    A = cat.phi_images[:, iu, ju].T
    b = pm.matrix[iu, ju]
    sol = solve(LinearProgram(np.zeros(len(cat)), A, b))
    if sol.status == "optimal":
        support = sol.support(1e-12)
        witness = [(float(sol.x[k]), cat.measure(int(k))) for k in support]
        cert = RepresentabilityCertificate("representable", N, witness=witness)
        err = np.max(np.abs(cert.reconstruct() - pm.matrix))
        if err > tol:
            raise NumericalError(f"representability witness misses mu by {err:.3g}")
        return cert
    if sol.status != "infeasible":
        raise NumericalError(f"representability LP ended with status {sol.status}")
    y = sol.farkas
    L = np.zeros((l, l))
    L[iu, ju] = y
    L = (L + L.T) / 2
    L[np.arange(l), np.arange(l)] = y[iu == ju]
    L /= np.max(np.abs(L))
    values = np.einsum("kij,ij->k", cat.phi_images, L)
    margin = float(np.sum(L * pm.matrix) - values.max())
    if not margin > 0:
        raise NumericalError(f"separating functional has non-positive margin {margin:.3g}")
    return RepresentabilityCertificate("not-representable", N, functional=L, margin=margin)
