"""Finite state spaces and the measures that live on them.

Indices are 0-based throughout: site ``i`` of a state space with ``l`` sites is
``i in range(l)``, and a multi-index is a nondecreasing tuple of such sites.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CapacityError, ValidationError

NORMALIZATION_TOL = 1e-12
DROP_TOL = 1e-14
QUANTIZATION_TOL = 1e-9
DEFAULT_ENUMERATION_LIMIT = 5_000_000
HARD_ENUMERATION_LIMIT = 2**32

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class StateSpace:
    l: int
    labels: tuple[str, ...] = ()
    coordinates: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 1:
            raise ValidationError(f"state space size must be a positive integer, got {self.l!r}")
        labels = tuple(str(s) for s in self.labels) or tuple(f"a{i + 1}" for i in range(self.l))
        if len(labels) != self.l:
            raise ValidationError(f"expected {self.l} labels, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValidationError("state labels must be distinct")
        object.__setattr__(self, "labels", labels)
        if self.coordinates is not None:
            pts = np.array(self.coordinates, dtype=float)
            if pts.ndim == 1:
                pts = pts[:, None]
            if pts.shape[0] != self.l:
                raise ValidationError(f"expected {self.l} coordinates, got {pts.shape[0]}")
            if not np.all(np.isfinite(pts)):
                raise ValidationError("coordinates must be finite")
            pts.flags.writeable = False
            object.__setattr__(self, "coordinates", pts)


def _fraction_guess(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10**12)


@dataclass(frozen=True, eq=False)
class Marginal:
    """Probability vector on ``l`` sites.

    ``exact`` optionally carries the same vector as rationals; the exact LP
    mode uses it instead of guessing fractions from the float weights.
    """

    weights: np.ndarray
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("marginal weights must be a non-empty vector")
        if not np.all(np.isfinite(w)):
            raise ValidationError("marginal weights must be finite")
        if np.any(w < 0):
            raise ValidationError(f"marginal weights must be nonnegative, got {w.tolist()}")
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"marginal weights sum to {w.sum()!r}, not 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.exact is not None:
            ex = tuple(Fraction(v) for v in self.exact)
            if len(ex) != w.size or sum(ex) != 1 or min(ex) < 0:
                raise ValidationError("exact marginal must be a nonnegative rational vector summing to 1")
            if max(abs(float(a) - b) for a, b in zip(ex, w)) > NORMALIZATION_TOL:
                raise ValidationError("exact and float marginal weights disagree")
            object.__setattr__(self, "exact", ex)

    @classmethod
    def uniform(cls, l: int) -> "Marginal":
        return cls.from_fractions([Fraction(1, l)] * l)

    @classmethod
    def from_fractions(cls, values: Iterable[Fraction | int | str]) -> "Marginal":
        ex = tuple(Fraction(v) for v in values)
        return cls(np.array([float(v) for v in ex]), exact=ex)

    @classmethod
    def dirac(cls, i: int, l: int) -> "Marginal":
        return cls.from_fractions([int(j == i) for j in range(l)])

    @property
    def l(self) -> int:
        return self.weights.size

    def as_fractions(self) -> tuple[Fraction, ...]:
        """Rational form of the weights, guessed from floats when not given."""
        if self.exact is not None:
            return self.exact
        ex = tuple(_fraction_guess(float(v)) for v in self.weights)
        if sum(ex) != 1:
            raise ValidationError(
                "cannot recover an exactly normalized rational marginal; pass one explicitly"
            )
        return ex

    def quantize(self, N: int, tol: float = QUANTIZATION_TOL) -> "QuantizedMeasure | None":
        """Occupation vector ``rho`` with ``rho / N == weights``, or None."""
        scaled = self.weights * N
        rho = np.rint(scaled)
        if np.max(np.abs(scaled - rho)) > tol or int(rho.sum()) != N:
            return None
        return QuantizedMeasure(N, tuple(int(r) for r in rho))

    def is_uniform(self, tol: float = 1e-10) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.l) <= tol))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"weights": self.weights.tolist()}
        if self.exact is not None:
            out["exact"] = [str(v) for v in self.exact]
        return out

    @classmethod
    def from_dict(cls, data: Mapping | Sequence | str, l: int | None = None) -> "Marginal":
        if isinstance(data, str):
            if data != "uniform" or l is None:
                raise ValidationError(f"unknown marginal specification {data!r}")
            return cls.uniform(l)
        try:
            if isinstance(data, Mapping):
                if "exact" in data:
                    return cls.from_fractions(data["exact"])
                data = data["weights"]
            if any(isinstance(v, str) for v in data):
                return cls.from_fractions(data)
            return cls(np.asarray(data, dtype=float))
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed marginal {data!r}: {exc}") from exc

    def __repr__(self):
        return f"Marginal({self.weights.tolist()})"


def as_marginal(lam) -> Marginal:
    if isinstance(lam, Marginal):
        return lam
    if isinstance(lam, QuantizedMeasure):
        return lam.marginal
    return Marginal(np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class QuantizedMeasure:
    """Occupation numbers ``rho`` of ``N`` particles on ``l`` sites."""

    N: int
    rho: tuple[int, ...]

    def __post_init__(self):
        rho = tuple(int(r) for r in self.rho)
        if any(r != v for r, v in zip(rho, self.rho)):
            raise ValidationError(f"occupation numbers must be integers, got {self.rho!r}")
        if self.N < 1:
            raise ValidationError("N must be positive")
        if not rho or min(rho) < 0:
            raise ValidationError(f"occupation numbers must be nonnegative, got {rho}")
        if sum(rho) != self.N:
            raise ValidationError(f"occupations {rho} do not sum to N={self.N}")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_multi_index(cls, idx: Sequence[int], l: int) -> "QuantizedMeasure":
        counts = [0] * l
        for i in idx:
            if not 0 <= i < l:
                raise ValidationError(f"site index {i} out of range for l={l}")
            counts[i] += 1
        return cls(len(idx), tuple(counts))

    @property
    def l(self) -> int:
        return len(self.rho)

    @property
    def lam(self) -> np.ndarray:
        return np.array(self.rho, dtype=float) / self.N

    @property
    def marginal(self) -> Marginal:
        return Marginal(self.lam, exact=tuple(Fraction(r, self.N) for r in self.rho))

    @property
    def multi_index(self) -> MultiIndex:
        return tuple(i for i, r in enumerate(self.rho) for _ in range(r))


def count_quantized(l: int, N: int) -> int:
    return math.comb(N + l - 1, l - 1)


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def _check_capacity(l: int, N: int, limit: int | None) -> int:
    if l < 1 or N < 1:
        raise ValidationError(f"need l >= 1 and N >= 1, got l={l}, N={N}")
    count = count_quantized(l, N)
    cap = DEFAULT_ENUMERATION_LIMIT if limit is None else min(limit, HARD_ENUMERATION_LIMIT)
    if count > cap:
        raise CapacityError(f"{count} quantized measures for l={l}, N={N} exceeds limit {cap}")
    return count


def enumerate_quantized(l: int, N: int, limit: int | None = None) -> list[QuantizedMeasure]:
    """All occupation vectors of ``N`` particles on ``l`` sites.

    The order is lexicographically decreasing in ``rho``, so ``(N, 0, ..., 0)``
    comes first and ``(0, ..., 0, N)`` last.  The order is stable and is what
    LP column indices refer to.
    """
    _check_capacity(l, N, limit)
    return [QuantizedMeasure(N, rho) for rho in _compositions(N, l)]


def occupation_array(l: int, N: int, limit: int | None = None) -> np.ndarray:
    """Same enumeration as :func:`enumerate_quantized`, as a (K, l) int array."""
    count = _check_capacity(l, N, limit)
    out = np.fromiter(itertools.chain.from_iterable(_compositions(N, l)), dtype=np.int64, count=count * l)
    return out.reshape(count, l)


def _canonical_index(idx: Sequence[int], l: int) -> MultiIndex:
    key = tuple(int(i) for i in idx)
    if any(not 0 <= i < l for i in key):
        raise ValidationError(f"multi-index {key} has sites outside range({l})")
    if any(a > b for a, b in zip(key, key[1:])):
        raise ValidationError(f"multi-index {key} is not nondecreasing")
    return key


@dataclass(frozen=True, eq=False)
class SymmetricPlan:
    """Symmetric probability on X^N stored by its weights on sorted atoms.

    ``entries[idx]`` is the weight of the symmetrized Dirac at ``idx``, i.e.
    the total mass of all rearrangements of ``idx``.
    """

    N: int
    l: int
    entries: Mapping[MultiIndex, float]
    renormalize: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.N < 1 or self.l < 1:
            raise ValidationError("plan needs N >= 1 and l >= 1")
        clean: dict[MultiIndex, float] = {}
        for idx, w in self.entries.items():
            key = _canonical_index(idx, self.l)
            if len(key) != self.N:
                raise ValidationError(f"multi-index {key} has length {len(key)}, expected N={self.N}")
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise ValidationError(f"plan weight {w!r} at {key} must be finite and nonnegative")
            if w > DROP_TOL:
                clean[key] = clean.get(key, 0.0) + w
        total = sum(clean.values())
        if self.renormalize:
            if total <= 0:
                raise ValidationError("cannot renormalize an empty plan")
            clean = {k: v / total for k, v in clean.items()}
        elif abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"plan weights sum to {total!r}, not 1")
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def __eq__(self, other):
        if not isinstance(other, SymmetricPlan):
            return NotImplemented
        return (self.N, self.l, self.entries) == (other.N, other.l, other.entries)

    __hash__ = None

    def isclose(self, other: "SymmetricPlan", tol: float = 1e-10) -> bool:
        if (self.N, self.l) != (other.N, other.l):
            return False
        keys = set(self.entries) | set(other.entries)
        return all(abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) <= tol for k in keys)

    @classmethod
    def dirac(cls, idx: Sequence[int], l: int) -> "SymmetricPlan":
        return cls(len(idx), l, {tuple(sorted(idx)): 1.0})

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "l": self.l,
            "entries": [{"idx": list(k), "w": w} for k, w in self.entries.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SymmetricPlan":
        try:
            return cls(int(data["N"]), int(data["l"]), {tuple(e["idx"]): e["w"] for e in data["entries"]})
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed plan: {exc}") from exc

    def dense(self) -> np.ndarray:
        """Full symmetric tensor of shape (l,)*N; weights spread evenly over rearrangements."""
        out = np.zeros((self.l,) * self.N)
        for idx, w in self.entries.items():
            perms = set(itertools.permutations(idx))
            for p in perms:
                out[p] = w / len(perms)
        return out


def symmetrize(weights: Mapping[Sequence[int], float], l: int | None = None) -> SymmetricPlan:
    """Apply the symmetrization operator to a weighted set of point masses."""
    if not weights:
        raise ValidationError("cannot symmetrize an empty measure")
    lengths = {len(k) for k in weights}
    if len(lengths) != 1:
        raise ValidationError("all index tuples must have the same length")
    N = lengths.pop()
    if l is None:
        l = 1 + max(max(k) for k in weights)
    merged: dict[MultiIndex, float] = {}
    for idx, w in weights.items():
        w = float(w)
        if w < 0 or not math.isfinite(w):
            raise ValidationError(f"negative or non-finite weight {w!r} at {tuple(idx)}")
        key = tuple(sorted(int(i) for i in idx))
        merged[key] = merged.get(key, 0.0) + w
    total = sum(merged.values())
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"weights sum to {total!r}, not 1")
    return SymmetricPlan(N, l, {k: v / total for k, v in merged.items()})


@dataclass(frozen=True, eq=False)
class PairMeasure:
    """Symmetric probability matrix on X x X."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError("pair measure must be a non-empty square matrix")
        if not np.all(np.isfinite(m)):
            raise ValidationError("pair measure entries must be finite")
        if np.max(np.abs(m - m.T)) > NORMALIZATION_TOL:
            raise ValidationError("pair measure must be symmetric")
        if m.min() < -NORMALIZATION_TOL:
            raise ValidationError(f"pair measure has negative entry {m.min()!r}")
        if abs(m.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"pair measure sums to {m.sum()!r}, not 1")
        m = np.clip(0.5 * (m + m.T), 0.0, None)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def l(self) -> int:
        return self.matrix.shape[0]

    def marginal(self) -> Marginal:
        return Marginal(self.matrix.sum(axis=1) / self.matrix.sum())

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PairMeasure":
        try:
            return cls(np.asarray(data["matrix"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed pair measure: {exc}") from exc


def _sub_multisets(rho: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
    if len(rho) == 1:
        if rho[0] >= k:
            yield (k,)
        return
    for first in range(min(rho[0], k), -1, -1):
        for rest in _sub_multisets(rho[1:], k - first):
            yield (first,) + rest


def marginal_k(plan: SymmetricPlan, k: int):
    """k-point marginal of a symmetric plan.

    Returns a :class:`Marginal` for ``k == 1``, a :class:`PairMeasure` for
    ``k == 2`` and a :class:`SymmetricPlan` on X^k otherwise.
    """
    N, l = plan.N, plan.l
    if not 1 <= k <= N:
        raise ValidationError(f"marginal order k={k} outside 1..{N}")
    if k == 1:
        out = np.zeros(l)
        for idx, w in plan.entries.items():
            for i in idx:
                out[i] += w
        return Marginal(out / N)
    if k == 2:
        mu = np.zeros((l, l))
        for idx, w in plan.entries.items():
            rho = np.bincount(idx, minlength=l).astype(float)
            pair = np.outer(rho, rho) - np.diag(rho)
            mu += w * pair
        return PairMeasure(mu / (N * (N - 1)))
    if k == N:
        return plan
    # sampling k of the N particles without replacement
    out: dict[MultiIndex, float] = {}
    denom = math.comb(N, k)
    for idx, w in plan.entries.items():
        rho = np.bincount(idx, minlength=l)
        for kappa in _sub_multisets(tuple(rho), k):
            p = math.prod(math.comb(int(r), c) for r, c in zip(rho, kappa)) / denom
            key = tuple(i for i, c in enumerate(kappa) for _ in range(c))
            out[key] = out.get(key, 0.0) + w * p
    return SymmetricPlan(k, l, out)


@dataclass(frozen=True, eq=False)
class SAEState:
    """Sparse average of extremal states.

    ``support`` is a sequence of ``(alpha, q)`` pairs; site ``nu`` of the
    ensemble of maps carries weight ``alpha`` and value distribution ``q``.
    ``maps[k, nu]`` is the site index of ``T_k(a_nu)``.  Weights may be
    :class:`fractions.Fraction` when produced by the exact LP mode.
    """

    N: int
    l: int
    support: tuple[tuple[Any, QuantizedMeasure], ...]
    maps: np.ndarray | None = None

    def __post_init__(self):
        support = tuple((a, q) for a, q in self.support)
        if not support:
            raise ValidationError("SAE state needs a non-empty support")
        if len(support) > self.l:
            raise ValidationError(f"SAE support has {len(support)} > l={self.l} elements")
        for a, q in support:
            if not isinstance(q, QuantizedMeasure):
                raise ValidationError(f"support element {q!r} is not a QuantizedMeasure")
            if q.N != self.N or q.l != self.l:
                raise ValidationError(f"support element {q.rho} does not match N={self.N}, l={self.l}")
            if a < 0:
                raise ValidationError(f"negative site weight {a!r}")
        total = sum(a for a, _ in support)
        if abs(float(total) - 1.0) > 1e-10:
            raise ValidationError(f"site weights sum to {float(total)!r}, not 1")
        object.__setattr__(self, "support", support)
        if self.maps is not None:
            maps = np.array(self.maps, dtype=np.int64)
            if maps.shape != (self.N, len(support)):
                raise ValidationError(f"maps must have shape {(self.N, len(support))}, got {maps.shape}")
            for nu, (_, q) in enumerate(support):
                counts = np.bincount(maps[:, nu], minlength=self.l)
                if counts.size != self.l or tuple(counts) != q.rho:
                    raise ValidationError(f"maps at site {nu} do not realize occupations {q.rho}")
            maps.flags.writeable = False
            object.__setattr__(self, "maps", maps)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([float(a) for a, _ in self.support])

    @property
    def is_exact(self) -> bool:
        return all(isinstance(a, Fraction) for a, _ in self.support)

    def marginal(self) -> Marginal:
        if self.is_exact:
            vals = [sum(a * Fraction(q.rho[i], self.N) for a, q in self.support) for i in range(self.l)]
            return Marginal.from_fractions(vals)
        lam = sum(float(a) * q.lam for a, q in self.support)
        return Marginal(lam / lam.sum())

    def plan(self) -> SymmetricPlan:
        entries: dict[MultiIndex, float] = {}
        for a, q in self.support:
            key = q.multi_index
            entries[key] = entries.get(key, 0.0) + float(a)
        return SymmetricPlan(self.N, self.l, entries)

    def with_canonical_maps(self) -> "SAEState":
        """Realize the maps by listing occupied sites in nondecreasing order."""
        maps = np.array([q.multi_index for _, q in self.support], dtype=np.int64).T
        return SAEState(self.N, self.l, self.support, maps)

    def to_dict(self) -> dict:
        support = []
        for a, q in self.support:
            item: dict[str, Any] = {"alpha": float(a), "rho": list(q.rho)}
            if isinstance(a, Fraction):
                item["alpha_exact"] = str(a)
            support.append(item)
        out: dict[str, Any] = {"N": self.N, "l": self.l, "support": support}
        if self.maps is not None:
            out["maps"] = self.maps.tolist()
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "SAEState":
        try:
            N, l = int(data["N"]), int(data["l"])
            support = []
            for item in data["support"]:
                a = Fraction(item["alpha_exact"]) if "alpha_exact" in item else float(item["alpha"])
                support.append((a, QuantizedMeasure(N, tuple(item["rho"]))))
            return cls(N, l, tuple(support), data.get("maps"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed SAE state: {exc}") from exc


def plan_from_maps(alphas: Sequence[float], maps: np.ndarray, l: int) -> SymmetricPlan:
    """Symmetrized plan of sum_nu alpha_nu delta_{T_1(a_nu)} x ... x delta_{T_N(a_nu)}."""
    maps = np.asarray(maps)
    weights: Counter = Counter()
    for nu, a in enumerate(alphas):
        weights[tuple(sorted(int(v) for v in maps[:, nu]))] += float(a)
    return SymmetricPlan(maps.shape[0], l, dict(weights))
