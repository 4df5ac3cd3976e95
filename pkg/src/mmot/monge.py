"""Monge states and their exact passage to and from equal-weight SAE states.

An equal-weight SAE state with uniform marginal has value distributions whose
occupation counts form an integer matrix with all row and column sums equal
to N.  Peeling off one perfect matching of its positive support at a time
writes it as a sum of N permutation matrices, which are the Monge maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NotMongeError, ValidationError
from .measures import QuantizedMeasure, SAEState, SymmetricPlan, plan_from_maps

UNIFORM_WEIGHT_TOL = 1e-10


@dataclass(frozen=True)
class MongeState:
    """N permutations; ``perms[k][nu]`` is the site index of ``T_k(a_nu)``."""

    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        perms = tuple(tuple(int(v) for v in p) for p in self.perms)
        if not perms:
            raise ValidationError("Monge state needs at least one map")
        l = len(perms[0])
        for p in perms:
            if sorted(p) != list(range(l)):
                raise ValidationError(f"{p} is not a permutation of range({l})")
        object.__setattr__(self, "perms", perms)

    @property
    def N(self) -> int:
        return len(self.perms)

    @property
    def l(self) -> int:
        return len(self.perms[0])

    def plan(self) -> SymmetricPlan:
        return plan_from_maps([1.0 / self.l] * self.l, np.array(self.perms), self.l)

    def to_list(self) -> list[list[int]]:
        return [list(p) for p in self.perms]

    @classmethod
    def from_list(cls, data) -> "MongeState":
        if isinstance(data, dict):
            data = data.get("maps", data.get("perms"))
        if not isinstance(data, list):
            raise ValidationError("Monge state must be a list of image vectors")
        return cls(tuple(tuple(p) for p in data))


@dataclass(frozen=True, eq=False)
class QuantizedDoublyStochastic:
    """Doubly stochastic matrix with entries ``counts / N``."""

    counts: np.ndarray
    N: int

    def __post_init__(self):
        c = np.array(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
            raise ValidationError("doubly stochastic matrix must be square and non-empty")
        if not np.issubdtype(c.dtype, np.integer):
            raise ValidationError("counts must be integers; use from_matrix for real entries")
        if self.N < 1 or c.min() < 0:
            raise ValidationError("counts must be nonnegative and N positive")
        if np.any(c.sum(axis=0) != self.N) or np.any(c.sum(axis=1) != self.N):
            raise ValidationError(f"rows and columns must each sum to N={self.N}")
        c = c.astype(np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_matrix(cls, A, N: int, tol: float = 1e-12) -> "QuantizedDoublyStochastic":
        if any(isinstance(v, Fraction) for v in np.ravel(np.asarray(A, dtype=object))):
            scaled = np.array([[Fraction(v) * N for v in row] for row in A], dtype=object)
            if any(v.denominator != 1 for v in scaled.ravel()):
                raise ValidationError(f"entries are not multiples of 1/{N}")
            return cls(scaled.astype(np.int64), N)
        A = np.asarray(A, dtype=float)
        scaled = A * N
        counts = np.rint(scaled)
        if np.max(np.abs(scaled - counts)) > tol * N:
            raise ValidationError(f"entries are not multiples of 1/{N} within {tol}")
        rows, cols = A.sum(axis=1), A.sum(axis=0)
        if np.max(np.abs(rows - 1)) > tol or np.max(np.abs(cols - 1)) > tol:
            raise ValidationError("matrix is not doubly stochastic")
        return cls(counts.astype(np.int64), N)

    @property
    def matrix(self) -> np.ndarray:
        return self.counts / self.N


@dataclass
class MatchingResult:
    verdict: str
    pairs: list[tuple[int, int]] | None = None
    witness: list[int] | None = None

    @property
    def matched(self) -> bool:
        return self.verdict == "matched"

    def permutation(self) -> tuple[int, ...]:
        perm = [0] * len(self.pairs)
        for left, right in self.pairs:
            perm[left] = right
        return tuple(perm)


def neighborhood(adjacency, W: Sequence[int]) -> set[int]:
    adj = np.asarray(adjacency, dtype=bool)
    return {int(j) for w in W for j in np.flatnonzero(adj[w])}


def perfect_matching(adjacency) -> MatchingResult:
    """Perfect matching of rows to columns, or a Hall-violating row set.

    Augmenting paths are searched depth-first from rows in increasing order,
    trying free columns before rerouting matched ones, each in increasing
    order, so the result is deterministic.
    """
    adj = np.asarray(adjacency, dtype=bool)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValidationError("adjacency must be a square boolean matrix")
    n = adj.shape[0]
    nbrs = [list(np.flatnonzero(adj[i])) for i in range(n)]
    match_col = [-1] * n

    def augment(i: int, seen: list[bool]) -> bool:
        # a free column ends the path at once; only then reroute matched ones
        for j in nbrs[i]:
            if not seen[j] and match_col[j] < 0:
                seen[j] = True
                match_col[j] = i
                return True
        for j in nbrs[i]:
            if seen[j]:
                continue
            seen[j] = True
            if augment(match_col[j], seen):
                match_col[j] = i
                return True
        return False

    for i in range(n):
        seen = [False] * n
        if not augment(i, seen):
            # rows reachable from i by alternating paths have too few neighbours
            W, frontier = {i}, [i]
            while frontier:
                r = frontier.pop()
                for j in nbrs[r]:
                    owner = match_col[j]
                    if owner >= 0 and owner not in W:
                        W.add(owner)
                        frontier.append(owner)
            return MatchingResult("deficient", witness=sorted(W))
    pairs = sorted((match_col[j], j) for j in range(n))
    return MatchingResult("matched", pairs=[(int(a), int(b)) for a, b in pairs])


def birkhoff_quantized_decompose(A: QuantizedDoublyStochastic) -> list[tuple[int, ...]]:
    """Write ``A`` as the average of exactly ``N`` permutation matrices.

    Returns permutations ``tau`` with ``tau[nu]`` the row matched to column
    ``nu``, so that ``sum_k P_k == A.counts`` with ``P_k[tau_k[nu], nu] = 1``.
    """
    remaining = np.array(A.counts, dtype=np.int64)
    l, N = remaining.shape[0], A.N
    perms = []
    for step in range(N):
        result = perfect_matching(remaining.T > 0)
        if not result.matched:
            raise ValidationError(
                f"no perfect matching at step {step}: columns {result.witness} violate Hall's condition; "
                "input is not a quantized doubly stochastic matrix"
            )
        tau = result.permutation()
        remaining[list(tau), list(range(l))] -= 1
        left = N - step - 1
        if remaining.min() < 0 or np.any(remaining.sum(axis=0) != left) or np.any(remaining.sum(axis=1) != left):
            raise AssertionError("remainder lost double stochasticity")
        perms.append(tau)
    return perms


def monge_to_sae(m: MongeState) -> SAEState:
    """Equal-weight SAE state whose value distributions come from the maps of ``m``."""
    maps = np.array(m.perms, dtype=np.int64)
    weight = Fraction(1, m.l)
    support = tuple(
        (weight, QuantizedMeasure(m.N, tuple(int(v) for v in np.bincount(maps[:, nu], minlength=m.l))))
        for nu in range(m.l)
    )
    return SAEState(m.N, m.l, support, maps)


def sae_to_monge(s: SAEState) -> MongeState:
    """Recover N permutation maps realizing an equal-weight, uniform-marginal SAE state.

    Raises :class:`NotMongeError` when ``s`` has fewer than ``l`` sites, unequal
    site weights, or a non-uniform marginal.
    """
    l, N = s.l, s.N
    if len(s.support) != l:
        raise NotMongeError(f"SAE state uses {len(s.support)} of {l} sites; Monge states need all {l} with weight 1/{l}")
    alphas = s.alphas
    if np.max(np.abs(alphas - 1.0 / l)) > UNIFORM_WEIGHT_TOL:
        raise NotMongeError(f"site weights {alphas.tolist()} are not all equal to 1/{l}")
    counts = np.array([q.rho for _, q in s.support], dtype=np.int64).T
    if np.any(counts.sum(axis=1) != N):
        raise NotMongeError(f"summed occupations {counts.sum(axis=1).tolist()} are not uniform (each should be {N})")
    perms = birkhoff_quantized_decompose(QuantizedDoublyStochastic(counts, N))
    state = MongeState(tuple(perms))
    if not state.plan().isclose(s.plan(), tol=1e-12):
        raise AssertionError("decomposed maps do not reproduce the SAE plan")
    return state


def count_monge_candidates(l: int, N: int) -> int:
    """Number of map tuples with ``T_1 = id``."""
    return math.factorial(l) ** (N - 1)
