"""Analogy verdict, empirical first-order checks and the regularity audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import streams
from .metric import as_point, as_sample, pairwise_distances

__all__ = [
    "AnalogyParameters",
    "AnalogyVerdict",
    "ThresholdPredicate",
    "FolReport",
    "RegularityReport",
    "check_analogy",
    "check_fol_statements",
    "audit_regularity",
    "barycenter",
    "distances_to",
    "seeded_pairs",
]


@dataclass(frozen=True)
class ThresholdPredicate:
    """Boolean property F(x) defined as ``score(x) >= 0``.

    ``score`` maps an ``(n, d)`` array to ``n`` reals.  Use
    :meth:`pointwise` to wrap a scalar function of a single point.
    """

    score: Callable[[np.ndarray], np.ndarray]
    name: str = "F"

    @classmethod
    def pointwise(cls, fn: Callable[[np.ndarray], float], name: str = "F") -> "ThresholdPredicate":
        return cls(lambda X: np.array([float(fn(x)) for x in X]), name)

    def scores(self, X) -> np.ndarray:
        X = as_sample(X)
        out = np.asarray(self.score(X), dtype=float).reshape(-1)
        if out.shape != (len(X),):
            raise ValueError(f"predicate {self.name!r} returned {out.shape} scores for {len(X)} points")
        return out

    def __call__(self, X) -> np.ndarray:
        return self.scores(X) >= 0


@dataclass(frozen=True)
class AnalogyParameters:
    epsilon: float
    eta: float
    gamma: float
    xi: float
    delta: float
    alpha: float = 0.05
    beta: float = 0.05

    def __post_init__(self):
        for name in ("eta", "gamma", "xi"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("alpha", "beta"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        for name in ("epsilon", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def scaled(self, c: float) -> "AnalogyParameters":
        return AnalogyParameters(
            self.epsilon * c, self.eta * c, self.gamma * c, self.xi * c, self.delta * c, self.alpha, self.beta
        )


@dataclass(frozen=True)
class AnalogyVerdict:
    threshold_eq46: float  # min(eps - eta, (delta - xi) / 2)
    threshold_table: float  # min(eps - eta, delta / 2 - xi)
    verified: bool
    violation_bound_eq49: float  # alpha + 2 beta
    violation_bound_eq51: float  # 2 beta
    margin: float
    status: str

    @property
    def threshold(self) -> float:
        return min(self.threshold_eq46, self.threshold_table)


def check_analogy(params: AnalogyParameters) -> AnalogyVerdict:
    """Decide gamma < min(eps - eta, (delta - xi)/2) on the conservative reading.

    Two readings of the delta term are in circulation, ``(delta - xi)/2`` and
    ``delta/2 - xi``; both are reported and the smaller one decides.
    """
    eps, eta, gamma, xi, delta = params.epsilon, params.eta, params.gamma, params.xi, params.delta
    t46 = min(eps - eta, (delta - xi) / 2)
    ttab = min(eps - eta, delta / 2 - xi)
    threshold = min(t46, ttab)
    margin = threshold - gamma
    if delta <= 0:
        verified, status = False, "not certifiable (classes not separable)"
    elif eps <= 0:
        verified, status = False, "not certifiable (epsilon must be positive)"
    else:
        verified = gamma < threshold
        status = "verified" if verified else "not verified"
    return AnalogyVerdict(
        threshold_eq46=t46,
        threshold_table=ttab,
        verified=verified,
        violation_bound_eq49=params.alpha + 2 * params.beta,
        violation_bound_eq51=2 * params.beta,
        margin=margin,
        status=status,
    )


def barycenter(sample) -> np.ndarray:
    return as_sample(sample).mean(axis=0)


def distances_to(sample, x0) -> np.ndarray:
    """d(x, x0) for every row; equals W_p between the two point masses."""
    X = as_sample(sample)
    x0 = as_point(x0, "x0")
    if x0.size != X.shape[1]:
        raise ValueError(f"dimension mismatch: x0 has {x0.size}, sample has {X.shape[1]}")
    return pairwise_distances(X, x0[None, :])[:, 0]


@dataclass(frozen=True)
class FolReport:
    stmt3_holds: bool
    stmt3_counterexamples: list[int]
    stmt4_witness: int | None  # index into the sample, first in input order
    in_ball: int
    n: int

    @property
    def stmt4_found(self) -> bool:
        # Absence of a witness in a finite sample is inconclusive, never a refutation.
        return self.stmt4_witness is not None


def check_fol_statements(sample, x0, eps: float, F: ThresholdPredicate, L: ThresholdPredicate) -> FolReport:
    """Evaluate the two theorem statements on a finite sample.

    Statement 3: every x with d(x, x0) <= eps has F(x) <-> L(x).
    Statement 4: some x with d(x, x0) > eps has F(x) and not L(x).
    """
    X = as_sample(sample)
    dist = distances_to(X, x0)
    f, g = F(X), L(X)
    inside = dist <= eps
    bad = np.flatnonzero(inside & (f != g))
    witnesses = np.flatnonzero(~inside & f & ~g)
    return FolReport(
        stmt3_holds=bad.size == 0,
        stmt3_counterexamples=bad.tolist(),
        stmt4_witness=int(witnesses[0]) if witnesses.size else None,
        in_ball=int(inside.sum()),
        n=len(X),
    )


@dataclass(frozen=True)
class RegularityReport:
    L_F: float
    L_L: float
    tau: float
    delta: float
    delta_cap: float
    margin_ok: bool
    satisfied: bool
    ball_size: int
    pairs_used: int
    notes: list[str] = field(default_factory=list)


def seeded_pairs(n: int, budget: int, seed: int) -> np.ndarray:
    """``budget`` index pairs drawn from stream (seed, PAIRS).

    Pairs are drawn one row at a time, so a larger budget extends the list of
    a smaller one.
    """
    if budget < 1:
        raise ValueError("pair_budget must be >= 1")
    g = streams.rng(seed, streams.PAIRS)
    return g.integers(n, size=(budget, 2))


def _lipschitz(scores: np.ndarray, X: np.ndarray, pairs: np.ndarray) -> float:
    a, b = X[pairs[:, 0]], X[pairs[:, 1]]
    diff = a - b
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    keep = dist > 1e-9
    if not keep.any():
        return 0.0
    ratios = np.abs(scores[pairs[keep, 0]] - scores[pairs[keep, 1]]) / dist[keep]
    return float(ratios.max())


def audit_regularity(
    sample,
    x0,
    delta: float,
    F: ThresholdPredicate,
    L: ThresholdPredicate,
    pair_budget: int = 10_000,
    seed: int = 0,
) -> RegularityReport:
    """Empirical audit of the threshold-function regularity condition.

    Lipschitz constants are maxima of difference quotients over seeded pairs
    and therefore lower bounds on the true constants.  ``tau`` is the
    smallest score magnitude seen inside the delta-ball around ``x0``.
    """
    if not delta > 0:
        raise ValueError("delta must be > 0")
    X = as_sample(sample)
    fF, fL = F.scores(X), L.scores(X)
    pairs = seeded_pairs(len(X), pair_budget, seed)
    L_F = _lipschitz(fF, X, pairs)
    L_L = _lipschitz(fL, X, pairs)
    notes = ["Lipschitz constants are empirical (lower bound)"]

    ball = distances_to(X, x0) <= delta
    if not ball.any():
        notes.append("delta-ball unpopulated")
        return RegularityReport(L_F, L_L, 0.0, delta, 0.0, False, False, 0, len(pairs), notes)

    tau = float(np.min(np.maximum(np.abs(fF[ball]), np.abs(fL[ball]))))
    caps = [tau / c if c > 0 else math.inf for c in (L_F, L_L)]
    delta_cap = min(caps)
    margin_ok = tau > 0
    satisfied = margin_ok and delta <= delta_cap
    return RegularityReport(L_F, L_L, tau, delta, delta_cap, margin_ok, satisfied, int(ball.sum()), len(pairs), notes)
