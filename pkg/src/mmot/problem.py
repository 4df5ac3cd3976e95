"""Problem files: one JSON document that every solver reads the same way."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .costs import (
    CostSpec,
    PointCloud,
    _read_json,
    cost_from_dict,
    cost_to_dict,
    coulomb_pairwise,
    discrete_metric_pairwise,
    spring_pairwise,
)
from .errors import ValidationError
from .measures import Marginal, StateSpace

METHODS = ("sae", "colgen", "oracle", "monge")
PRICINGS = ("enumerate", "local-search")


@dataclass
class SolverOptions:
    method: str = "sae"
    pricing: str = "enumerate"
    exact: bool = False
    seed: int = 0
    threads: int | None = None
    limit_columns: int | None = None
    limit_oracle: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.pricing not in PRICINGS:
            raise ValidationError(f"pricing must be one of {PRICINGS}, got {self.pricing!r}")

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "SolverOptions":
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown solver options {sorted(unknown)}")
        return cls(**data)


@dataclass
class ProblemFile:
    space: StateSpace
    marginal: Marginal
    N: int
    cost: CostSpec
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int) or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N!r}")
        if self.marginal.l != self.space.l:
            raise ValidationError(f"marginal has {self.marginal.l} sites, state space has {self.space.l}")
        if self.cost.l != self.space.l:
            raise ValidationError(f"cost is for {self.cost.l} sites, state space has {self.space.l}")
        if getattr(self.cost, "N", None) not in (None, self.N):
            raise ValidationError(f"N-body cost is for N={self.cost.N}, problem has N={self.N}")

    @classmethod
    def from_dict(cls, data: Mapping, base: Path | None = None) -> "ProblemFile":
        if not isinstance(data, Mapping):
            raise ValidationError("problem file must be a JSON object")
        for key in ("state_space", "N", "cost"):
            if key not in data:
                raise ValidationError(f"problem file is missing {key!r}")
        ss = data["state_space"]
        if not isinstance(ss, Mapping) or "l" not in ss:
            raise ValidationError("state_space must be an object with 'l'")
        points = PointCloud(ss["points"]) if ss.get("points") is not None else None
        space = StateSpace(int(ss["l"]), tuple(ss.get("labels", ())), None if points is None else points.points)
        if points is not None and points.l != space.l:
            raise ValidationError(f"{points.l} points given for l={space.l}")
        marginal = Marginal.from_dict(data.get("marginal", "uniform"), l=space.l)
        cost = _build_cost(data["cost"], points, space.l, base)
        return cls(space, marginal, data["N"], cost, SolverOptions.from_dict(data.get("options")))

    @classmethod
    def load(cls, path) -> "ProblemFile":
        path = Path(path)
        return cls.from_dict(_read_json(path), base=path.parent)

    def to_dict(self) -> dict[str, Any]:
        ss: dict[str, Any] = {"l": self.space.l, "labels": list(self.space.labels)}
        if self.space.coordinates is not None:
            ss["points"] = self.space.coordinates.tolist()
        return {
            "state_space": ss,
            "marginal": self.marginal.to_dict(),
            "N": self.N,
            "cost": cost_to_dict(self.cost),
            "options": dict(self.options.__dict__),
        }


def _build_cost(spec, points: PointCloud | None, l: int, base: Path | None) -> CostSpec:
    if not isinstance(spec, Mapping):
        raise ValidationError("cost must be an object")
    if "file" in spec:
        path = Path(spec["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        return cost_from_dict(_read_json(path))
    kind = spec.get("type")
    if kind in ("spring", "coulomb"):
        if points is None:
            raise ValidationError(f"{kind} cost needs state_space.points")
        if kind == "coulomb":
            return coulomb_pairwise(points)
        if "r0" not in spec:
            raise ValidationError("spring cost needs 'r0'")
        return spring_pairwise(points, float(spec["r0"]))
    if kind == "discrete_metric":
        return discrete_metric_pairwise(l)
    return cost_from_dict(spec)
