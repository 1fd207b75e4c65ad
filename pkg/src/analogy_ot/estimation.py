"""Bootstrap and quantile estimators for the analogy parameters.

The five parameters are

* ``epsilon`` - upper confidence bound on the domain distance,
* ``eta``     - safety correction on epsilon from the bootstrap spread,
* ``gamma``   - transformer stability (high quantile of displacements),
* ``xi``      - tail correction of the displacement distribution,
* ``delta``   - half the smallest gap between class measures.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import streams
from .metric import (
    as_sample,
    point_to_sample_distance,
    sliced_wasserstein,
    wasserstein_exact,
)

__all__ = [
    "BootstrapSummary",
    "ClassGeometry",
    "DeltaEstimate",
    "LabeledSample",
    "empirical_quantile",
    "normal_quantile",
    "bootstrap_wasserstein",
    "estimate_epsilon",
    "estimate_eta",
    "estimate_gamma",
    "estimate_xi",
    "displacements",
    "class_geometry",
    "estimate_delta",
    "convergence_rate",
    "distance",
]


@dataclass(frozen=True)
class LabeledSample:
    points: np.ndarray
    labels: np.ndarray  # dense ints 0..K-1
    label_names: tuple = ()

    def __post_init__(self):
        pts = as_sample(self.points, "points")
        labels = np.asarray(self.labels)
        if labels.shape != (len(pts),):
            raise ValueError("need exactly one label per point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels.astype(np.int64))

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def classes(self) -> list[np.ndarray]:
        return [self.points[self.labels == k] for k in range(self.n_classes)]


@dataclass(frozen=True)
class BootstrapSummary:
    replicates: np.ndarray  # sorted ascending
    mean: float
    sd: float
    observed: float | None = None  # W_p on the original samples, when known

    @property
    def B(self) -> int:
        return len(self.replicates)

    @classmethod
    def from_replicates(cls, values, observed: float | None = None) -> "BootstrapSummary":
        reps = np.sort(np.asarray(values, dtype=float))
        if reps.size < 2:
            raise ValueError("a bootstrap summary needs B >= 2 replicates")
        mean = math.fsum(reps) / reps.size
        # The fsum mean can land a hair outside [min, max] when all values are equal.
        mean = min(max(mean, reps[0]), reps[-1])
        sd = math.sqrt(math.fsum((reps - mean) ** 2) / (reps.size - 1))
        return cls(reps, mean, sd, observed)

    def quantile(self, q: float) -> float:
        return empirical_quantile(self.replicates, q)


@dataclass(frozen=True)
class ClassGeometry:
    distance_matrix: np.ndarray
    radii: np.ndarray

    @property
    def K(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    separable: bool
    pair: tuple[int, int]


# ---------------------------------------------------------------------------
# quantiles
# ---------------------------------------------------------------------------


def empirical_quantile(values, q: float) -> float:
    """Linear interpolation between order statistics (h = (n-1) q + 1)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile level must lie in [0, 1], got {q}")
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("empirical_quantile of an empty sequence")
    h = (v.size - 1) * q  # zero-based position
    lo = math.floor(h)
    hi = min(lo + 1, v.size - 1)
    frac = h - lo
    if frac == 0.0:
        return float(v[lo])
    return float(v[lo] + frac * (v[hi] - v[lo]))


# Acklam's rational approximation to the inverse normal CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(prob: float) -> float:
    if prob < _P_LOW:
        q = math.sqrt(-2 * math.log(prob))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1
        return num / den
    if prob > 1 - _P_LOW:
        return -_acklam(1 - prob)
    q = prob - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1
    return num / den


def normal_quantile(prob: float) -> float:
    """Inverse standard normal CDF.

    Acklam's approximation (relative error ~1e-9) followed by one Halley step
    against ``erfc``.  Evaluated on the lower half and mirrored, so
    ``normal_quantile(p) == -normal_quantile(1 - p)`` holds exactly whenever
    ``1 - p`` is itself exact.
    """
    if not 0.0 < prob < 1.0:
        raise ValueError(f"prob must lie in (0, 1), got {prob}")
    if prob == 0.5:
        return 0.0
    if prob > 0.5:
        return -normal_quantile(1.0 - prob)
    x = _acklam(prob)
    if x * x > 1400:  # exp(x^2/2) overflows; erfc is denormal there anyway
        return x
    e = 0.5 * math.erfc(-x / math.sqrt(2)) - prob
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------


def distance(X, Y, p: float = 1.0, estimator: str = "exact", n_proj: int = 1000, seed: int = 0) -> float:
    """W_p by the named estimator ('exact' or 'sliced')."""
    if estimator == "exact":
        return wasserstein_exact(X, Y, p)[0]
    if estimator == "sliced":
        return sliced_wasserstein(X, Y, p, n_proj=n_proj, seed=seed)
    raise ValueError(f"unknown estimator {estimator!r}; expected 'exact' or 'sliced'")


def bootstrap_wasserstein(
    X,
    Y,
    p: float = 1.0,
    B: int = 1000,
    seed: int = 0,
    estimator: str = "exact",
    n_proj: int = 1000,
    threads: int = 1,
) -> BootstrapSummary:
    """Nonparametric bootstrap of W_p(P_n, Q_m).

    Replicate ``b`` resamples X and Y independently with replacement, at
    their original sizes, from stream ``(seed, BOOTSTRAP, b)``.  The sliced
    estimator reuses one set of directions across replicates.  Replicates are
    stored sorted, so the summary does not depend on ``threads``.
    """
    X = as_sample(X, "X")
    Y = as_sample(Y, "Y")
    if B < 2:
        raise ValueError("B must be >= 2")
    n, m = len(X), len(Y)

    def replicate(b: int) -> float:
        g = streams.rng(seed, streams.BOOTSTRAP, b)
        ix = g.integers(n, size=n)
        iy = g.integers(m, size=m)
        return distance(X[ix], Y[iy], p, estimator, n_proj, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(replicate, range(B)))
    else:
        values = [replicate(b) for b in range(B)]
    observed = distance(X, Y, p, estimator, n_proj, seed)
    return BootstrapSummary.from_replicates(values, observed=observed)


def estimate_epsilon(summary: BootstrapSummary, alpha: float = 0.05, method: str = "normal") -> float:
    """Upper confidence bound on the domain distance.

    ``normal``: centre + z_{1-alpha} * sd, where the centre is the distance on
    the original samples when the summary carries it and the bootstrap mean
    otherwise.  ``quantile``: the (1 - alpha) empirical quantile of replicates.
    """
    _check_level(alpha, "alpha")
    if method == "normal":
        centre = summary.mean if summary.observed is None else summary.observed
        return centre + normal_quantile(1 - alpha) * summary.sd
    if method == "quantile":
        return empirical_quantile(summary.replicates, 1 - alpha)
    raise ValueError(f"unknown epsilon method {method!r}; expected 'normal' or 'quantile'")


def estimate_eta(summary: BootstrapSummary, alpha: float = 0.05) -> float:
    # two-sided z_{1 - alpha/2}: z_0.975 at alpha = 0.05
    _check_level(alpha, "alpha")
    return normal_quantile(1 - alpha / 2) * summary.sd


def _check_level(level: float, name: str):
    if not 0.0 < level < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {level}")


def _check_displacements(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("displacement sample is empty")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValueError("displacements must be finite and >= 0")
    return v


def displacements(X, Y) -> np.ndarray:
    """Row-wise d(x_i, y_i) for a sample and its image under a transformer."""
    X = as_sample(X, "X")
    Y = as_sample(Y, "Y")
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    diff = Y - X
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def estimate_gamma(disp, beta: float = 0.05) -> float:
    _check_level(beta, "beta")
    return empirical_quantile(_check_displacements(disp), 1 - beta)


def estimate_xi(disp) -> float:
    v = _check_displacements(disp)
    return empirical_quantile(v, 0.99) - empirical_quantile(v, 0.95)


# ---------------------------------------------------------------------------
# class geometry and delta
# ---------------------------------------------------------------------------


def class_geometry(
    data: LabeledSample, p: float = 1.0, estimator: str = "exact", n_proj: int = 1000, seed: int = 0
) -> ClassGeometry:
    """Pairwise class distances D_ij and class radii r_i.

    The radius is the largest point-to-class distance over observed members,
    the finite-sample stand-in for the supremum over the class.
    """
    classes = data.classes()
    K = len(classes)
    if K < 2:
        raise ValueError("class geometry needs at least two classes")
    for k, pts in enumerate(classes):
        if len(pts) == 0:
            raise ValueError(f"class {k} has no points")
    D = np.zeros((K, K))
    for i in range(K):
        for j in range(i + 1, K):
            D[i, j] = D[j, i] = distance(classes[i], classes[j], p, estimator, n_proj, seed)
    radii = np.array([max(point_to_sample_distance(x, pts, p) for x in pts) for pts in classes])
    return ClassGeometry(D, radii)


def estimate_delta(geom: ClassGeometry) -> DeltaEstimate:
    """delta = 1/2 min_{i != j} (D_ij - r_i - r_j), reported unclamped.

    Ties go to the lexicographically smallest pair.  A non-positive value
    means the classes overlap and no stability radius can be certified.
    """
    K = geom.K
    if K < 2:
        raise ValueError("need K >= 2 classes")
    best, pair = math.inf, (0, 1)
    for i in range(K):
        for j in range(i + 1, K):
            gap = geom.distance_matrix[i, j] - geom.radii[i] - geom.radii[j]
            if gap < best:
                best, pair = gap, (i, j)
    value = 0.5 * best
    return DeltaEstimate(float(value), bool(value > 0), pair)


def convergence_rate(n: float, d: float, p: float) -> float:
    """Expected rate of W_p(P_n, P) in dimension d."""
    if n < 1 or d <= 0 or p < 1:
        raise ValueError("need n >= 1, d > 0, p >= 1")
    if d < 2 * p:
        return n**-0.5
    if d == 2 * p:
        return n**-0.5 * math.sqrt(math.log(n))
    return n ** (-1.0 / d)
