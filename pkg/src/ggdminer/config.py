"""Run configuration: one JSON file, overridable field by field."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .graph import NUMBER, STRING
from .simindex import DecisionBoundary


class ConfigError(ValueError):
    pass


def _default_boundaries():
    return {STRING: [2, 2], NUMBER: [0, 1]}


@dataclass
class RunConfig:
    tau: int = 1000
    epsilon: float = 0.7
    similarity_threshold: float = 0.5
    k: int = 2
    source_capacity: int = 7
    hops: int = 2
    k_g: int = 10
    name_similarity_threshold: float = 0.6
    # domain -> [upsilon, kappa]
    boundaries: dict = field(default_factory=_default_boundaries)
    max_constraints_per_set: int = 3
    max_mappings: int = 10
    discover_constraints: bool = True
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.tau < 1:
            raise ConfigError("tau must be >= 1")
        for name in ("epsilon", "similarity_threshold", "name_similarity_threshold"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        for name in ("k", "source_capacity", "k_g", "max_constraints_per_set", "max_mappings"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.hops < 0:
            raise ConfigError("hops must be >= 0")
        try:
            self.decision_boundaries()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad decision boundary: {exc}") from None

    def decision_boundaries(self) -> dict[str, DecisionBoundary]:
        out = {}
        for dom in (STRING, NUMBER):
            ups, kap = self.boundaries.get(dom, _default_boundaries()[dom])
            out[dom] = DecisionBoundary(dom, ups, kap)
        return out

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **overrides) -> "RunConfig":
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)
