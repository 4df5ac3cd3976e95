"""Cost functions on finite state spaces and their JSON files."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .measures import MultiIndex

DUPLICATE_POINT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValidationError("point cloud must be a non-empty (l, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("point coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def l(self) -> int:
        return self.points.shape[0]

    @classmethod
    def load(cls, path) -> "PointCloud":
        data = _read_json(path)
        if not isinstance(data, Mapping) or "points" not in data:
            raise ValidationError(f"{path}: expected an object with a 'points' array")
        return cls(np.asarray(data["points"], dtype=float))


@dataclass(frozen=True, eq=False)
class PairwiseCost:
    """Pair cost ``c(a_i, a_j)``; the N-body cost sums it over all pairs of particles."""

    matrix: np.ndarray

    def __post_init__(self):
        c = np.array(self.matrix, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
            raise ValidationError("pairwise cost must be a non-empty square matrix")
        if np.any(np.isnan(c)):
            raise ValidationError("pairwise cost contains NaN")
        if np.any(c == -np.inf):
            raise ValidationError("pairwise cost may not contain -inf")
        if not np.array_equal(c, c.T):
            raise ValidationError("pairwise cost matrix must be symmetric")
        c.flags.writeable = False
        object.__setattr__(self, "matrix", c)

    @property
    def l(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class NBodyTable:
    """Symmetric N-body cost given by its value on each sorted multi-index.

    Missing multi-indices take ``default``; with ``default=None`` a lookup of
    a missing entry is an error.
    """

    l: int
    N: int
    entries: Mapping[MultiIndex, float]
    default: float | None = None

    def __post_init__(self):
        clean = {}
        for idx, v in self.entries.items():
            key = tuple(sorted(int(i) for i in idx))
            if len(key) != self.N or any(not 0 <= i < self.l for i in key):
                raise ValidationError(f"cost entry {tuple(idx)} does not fit N={self.N}, l={self.l}")
            v = float(v)
            if math.isnan(v) or v == -math.inf:
                raise ValidationError(f"cost entry at {key} is {v!r}")
            clean[key] = v
        object.__setattr__(self, "entries", clean)

    def __call__(self, idx: Sequence[int]) -> float:
        key = tuple(sorted(idx))
        if key in self.entries:
            return self.entries[key]
        if self.default is None:
            raise ValidationError(f"no cost entry for configuration {key}")
        return self.default

    symmetric = True


@dataclass(frozen=True, eq=False)
class NBodyCallable:
    """N-body cost ``fn(idx) -> float`` on index tuples of length ``N``.

    Set ``symmetric=True`` when ``fn`` is invariant under permuting its
    argument; otherwise costs of extreme plans average over rearrangements.
    """

    fn: Callable[[Sequence[int]], float]
    l: int
    N: int | None = None
    symmetric: bool = False
    pairwise: PairwiseCost | None = field(default=None, repr=False)

    def __call__(self, idx: Sequence[int]) -> float:
        v = float(self.fn(tuple(idx)))
        if math.isnan(v):
            raise ValidationError(f"cost evaluated to NaN at {tuple(idx)}")
        return v


CostSpec = PairwiseCost | NBodyTable | NBodyCallable


def _distances(points) -> tuple[np.ndarray, np.ndarray]:
    pts = points.points if isinstance(points, PointCloud) else PointCloud(points).points
    l = pts.shape[0]
    iu, ju = np.triu_indices(l, k=1)
    return np.linalg.norm(pts[iu] - pts[ju], axis=1), (iu, ju)


def _from_upper(l: int, diag: float, upper: np.ndarray, iu_ju) -> np.ndarray:
    c = np.full((l, l), float(diag))
    iu, ju = iu_ju
    c[iu, ju] = upper
    c[ju, iu] = upper
    return c


def coulomb_pairwise(points) -> PairwiseCost:
    """Coulomb repulsion ``1/|a_i - a_j|``; infinite for coincident particles."""
    pts = points if isinstance(points, PointCloud) else PointCloud(points)
    dist, iu_ju = _distances(pts)
    close = dist < DUPLICATE_POINT_TOL
    if np.any(close):
        warnings.warn(f"{int(close.sum())} pairs of coincident points get infinite Coulomb cost", stacklevel=2)
    with np.errstate(divide="ignore"):
        upper = np.where(close, np.inf, 1.0 / np.where(close, 1.0, dist))
    return PairwiseCost(_from_upper(pts.l, np.inf, upper, iu_ju))


def spring_pairwise(points, r0: float) -> PairwiseCost:
    """Springs of rest length ``r0``: ``(|a_i - a_j| - r0)**2``, diagonal ``r0**2``."""
    if not r0 >= 0:
        raise ValidationError(f"rest length must be nonnegative, got {r0!r}")
    pts = points if isinstance(points, PointCloud) else PointCloud(points)
    dist, iu_ju = _distances(pts)
    return PairwiseCost(_from_upper(pts.l, r0 * r0, (dist - r0) ** 2, iu_ju))


def discrete_metric_pairwise(l: int) -> PairwiseCost:
    if l < 1:
        raise ValidationError("l must be positive")
    return PairwiseCost(np.ones((l, l)) - np.eye(l))


def nbody_from_pairwise(c, N: int) -> NBodyCallable:
    """Lift a pair cost to ``c_N(x) = sum_{a<b} c(x_a, x_b)``."""
    pc = c if isinstance(c, PairwiseCost) else PairwiseCost(c)
    mat = pc.matrix
    pairs = [(a, b) for a in range(N) for b in range(a + 1, N)]

    def evaluate(idx):
        if len(idx) != N:
            raise ValidationError(f"expected {N} indices, got {len(idx)}")
        return math.fsum(mat[idx[a], idx[b]] for a, b in pairs)

    return NBodyCallable(evaluate, pc.l, N, symmetric=True, pairwise=pc)


def _encode(v: float):
    if v == math.inf:
        return "inf"
    return v


def _decode(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ValidationError(f"unknown cost token {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"cost entry {v!r} is not a number")
    return float(v)


def cost_to_dict(spec: CostSpec) -> dict:
    if isinstance(spec, PairwiseCost):
        return {"type": "pairwise", "matrix": [[_encode(float(v)) for v in row] for row in spec.matrix]}
    if isinstance(spec, NBodyTable):
        out = {
            "type": "nbody",
            "l": spec.l,
            "N": spec.N,
            "entries": [{"idx": list(k), "c": _encode(v)} for k, v in spec.entries.items()],
        }
        if spec.default is not None:
            out["default"] = _encode(spec.default)
        return out
    if isinstance(spec, NBodyCallable) and spec.pairwise is not None:
        return cost_to_dict(spec.pairwise)
    raise ValidationError("callable costs cannot be serialized")


def cost_from_dict(data: Mapping) -> CostSpec:
    if not isinstance(data, Mapping) or "type" not in data:
        raise ValidationError("cost must be an object with a 'type' field")
    kind = data["type"]
    if kind == "pairwise":
        rows = data.get("matrix")
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ValidationError("pairwise cost needs a 'matrix' list of rows")
        if len({len(r) for r in rows}) > 1:
            raise ValidationError("pairwise cost matrix rows differ in length")
        return PairwiseCost(np.array([[_decode(v) for v in r] for r in rows], dtype=float))
    if kind == "nbody":
        try:
            entries = {tuple(e["idx"]): _decode(e["c"]) for e in data["entries"]}
            l = int(data["l"]) if "l" in data else 1 + max(max(k) for k in entries)
            N = int(data["N"]) if "N" in data else len(next(iter(entries)))
        except (KeyError, TypeError, StopIteration) as exc:
            raise ValidationError(f"malformed nbody cost: {exc}") from exc
        default = _decode(data["default"]) if "default" in data else None
        return NBodyTable(l, N, entries, default)
    raise ValidationError(f"unknown cost type {kind!r}")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror or exc}") from exc


def load_cost(path) -> CostSpec:
    return cost_from_dict(_read_json(path))


def save_cost(spec: CostSpec, path) -> None:
    Path(path).write_text(json.dumps(cost_to_dict(spec), indent=2) + "\n")
