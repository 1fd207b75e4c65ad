"""Run configuration and the config-level builders for predicates."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analogy import ThresholdPredicate
from .metric import as_point

__all__ = ["ConfigError", "RunConfig", "predicate_from_spec", "SIMULATE_DEFAULTS", "BENCH_DEFAULTS"]


class ConfigError(ValueError):
    pass


DEFAULT_GENERATOR = {
    "source": {"n": 500, "d": 2, "mean": [0.0, 0.0], "scale": 1.0},
    "target": {"n": 500, "d": 2, "mean": [0.0, 0.0], "scale": 1.0},
    # Two tight blobs; the separation puts delta near 2 (radii are about 0.8 each).
    "classes": [
        {"n": 100, "mean": [0.0, 0.0], "scale": 0.25},
        {"n": 100, "mean": [5.6, 0.0], "scale": 0.25},
    ],
}

# Model-data reproduction: identical-law domains, eps = 0.5, a jitter program of
# size 0.05 and the sliced estimator.
SIMULATE_DEFAULTS = {
    "estimator": "sliced",
    "epsilon": 0.5,
    "transformer": {"kind": "jitter", "bound": 0.05},
    "generator": DEFAULT_GENERATOR,
}

BENCH_DEFAULTS = {"sizes": [250, 500, 1000, 2000], "d": 16, "n_proj": [1000, 2000], "repeats": 5}


@dataclass
class RunConfig:
    p: float = 1.0
    alpha: float = 0.05
    beta: float = 0.05
    B: int = 1000
    n_proj: int = 1000
    estimator: str = "exact"
    # Class distances for delta; sliced values are lower bounds and bias delta down.
    delta_estimator: str = "exact"
    seed: int | None = None
    eps_method: str = "normal"
    x0: object = "barycenter"
    transformer: dict = field(default_factory=lambda: {"kind": "identity"})
    pair_budget: int = 10_000
    epsilon: float | None = None
    delta: float | None = None
    gamma: float | None = None
    semantics: str = "demonic"
    threads: int | None = None
    has_header: bool = False
    label_column: object = None
    classes_path: str | None = None
    classes_label_column: object = -1
    F: dict | None = None
    L: dict | None = None
    generator: dict | None = None
    bench: dict | None = None
    plot_data: str | None = None

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, data: dict, base: dict | None = None) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged = dict(base or {})
        merged.update(data)
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path, base: dict | None = None) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data, base)

    def replace(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self):
        def bad(msg):
            raise ConfigError(msg)

        if not (isinstance(self.p, (int, float)) and self.p >= 1 and math.isfinite(self.p)):
            bad("p must be a finite real >= 1")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0 < v < 1):
                bad(f"{name} must lie in (0, 1)")
        if not (isinstance(self.B, int) and self.B >= 2):
            bad("B must be an integer >= 2")
        if not (isinstance(self.n_proj, int) and self.n_proj >= 1):
            bad("n_proj must be an integer >= 1")
        if self.estimator not in ("exact", "sliced"):
            bad("estimator must be 'exact' or 'sliced'")
        if self.delta_estimator not in ("exact", "sliced"):
            bad("delta_estimator must be 'exact' or 'sliced'")
        if self.eps_method not in ("normal", "quantile"):
            bad("eps_method must be 'normal' or 'quantile'")
        if self.semantics not in ("demonic", "angelic", "both"):
            bad("semantics must be 'demonic', 'angelic' or 'both'")
        if self.seed is not None and not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            bad("seed must be an integer in [0, 2**64)")
        if not (isinstance(self.pair_budget, int) and self.pair_budget >= 1):
            bad("pair_budget must be an integer >= 1")
        if self.threads is not None and not (isinstance(self.threads, int) and self.threads >= 1):
            bad("threads must be an integer >= 1")
        for name in ("epsilon", "delta", "gamma"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and math.isfinite(v)):
                bad(f"{name} must be a finite real")
        if self.gamma is not None and self.gamma < 0:
            bad("gamma must be >= 0")
        if not (self.x0 == "barycenter" or isinstance(self.x0, list)):
            bad("x0 must be 'barycenter' or a list of coordinates")
        if not isinstance(self.transformer, dict) or "kind" not in self.transformer:
            bad("transformer must be an object with a 'kind' key")
        for name in ("F", "L"):
            spec = getattr(self, name)
            if spec is not None:
                predicate_from_spec(spec, name)

    def reference_point(self, sample: np.ndarray) -> np.ndarray:
        if self.x0 == "barycenter":
            return sample.mean(axis=0)
        x0 = as_point(self.x0, "x0")
        if x0.size != sample.shape[1]:
            raise ConfigError(f"x0 has {x0.size} coordinates, data has {sample.shape[1]}")
        return x0


def predicate_from_spec(spec: dict, name: str = "F") -> ThresholdPredicate:
    """Threshold predicate from config.

    Kinds: ``constant`` (value), ``linear`` (weights, bias: w.x + b),
    ``ball`` (center, radius: radius - |x - center|),
    ``outside_ball`` (center, radius: |x - center| - radius).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"predicate {name} must be an object with a 'kind' key")
    kind = spec["kind"]
    params = {k: v for k, v in spec.items() if k != "kind"}
    try:
        if kind == "constant":
            value = float(params.pop("value"))
            fn = lambda X: np.full(len(X), value)  # noqa: E731
        elif kind == "linear":
            w = as_point(params.pop("weights"), "weights")
            b = float(params.pop("bias", 0.0))
            fn = lambda X: X @ w + b  # noqa: E731
        elif kind in ("ball", "outside_ball"):
            c = as_point(params.pop("center"), "center")
            r = float(params.pop("radius"))
            sign = 1.0 if kind == "ball" else -1.0
            fn = lambda X: sign * (r - np.sqrt(((X - c) ** 2).sum(axis=1)))  # noqa: E731
        else:
            raise ConfigError(f"unknown predicate kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"predicate {name} ({kind}) is missing {exc}") from None
    if params:
        raise ConfigError(f"predicate {name} ({kind}) has unknown keys: {', '.join(sorted(params))}")
    return ThresholdPredicate(fn, name)
