"""Euclidean ground metric and the Wasserstein family over empirical samples.

Samples are ``(n, d)`` float arrays; every row carries mass ``1/n``.  Three
routes are offered:

* :func:`wasserstein_1d` - closed form through sorted values (quantile
  functions), exact for any pair of sizes;
* :func:`wasserstein_exact` - the discrete transport problem solved to
  optimality (assignment when ``n == m``, a network LP otherwise);
* :func:`sliced_wasserstein` - Monte Carlo average over random directions,
  always a lower bound of the exact value.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog

from . import streams

__all__ = [
    "MetricConfig",
    "TransportPlan",
    "SolverCapExceeded",
    "as_sample",
    "as_point",
    "ground_distance",
    "pairwise_distances",
    "wasserstein_1d",
    "wasserstein_exact",
    "sliced_wasserstein",
    "point_to_sample_distance",
    "projection_directions",
]

DEFAULT_MAX_ENTRIES = 4_000_000


class SolverCapExceeded(ValueError):
    """Raised when an exact problem would exceed the cost-matrix budget."""


@dataclass(frozen=True)
class MetricConfig:
    p: float = 1.0
    base: str = "euclidean"

    def __post_init__(self):
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError(f"p must be a finite real >= 1, got {self.p}")
        if self.base != "euclidean":
            raise ValueError(f"unsupported ground metric {self.base!r}; only 'euclidean' is available")

    @property
    def validated(self) -> bool:
        """Only p = 1 and p = 2 are covered by the test-suite."""
        return self.p in (1.0, 2.0)


@dataclass(frozen=True)
class TransportPlan:
    sources: np.ndarray  # int indices into X
    targets: np.ndarray  # int indices into Y
    mass: np.ndarray
    cost: float  # sum(mass * d(x_i, y_j) ** p) == W_p ** p
    shape: tuple[int, int]

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        np.add.at(out, (self.sources, self.targets), self.mass)
        return out


def as_point(x, name: str = "point") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates")
    return arr


def as_sample(X, name: str = "sample") -> np.ndarray:
    """Validate and return an ``(n, d)`` float array; 1-D input is a column."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n, d), got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if arr.shape[1] == 0:
        raise ValueError(f"{name} has zero dimensions")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def _check_dims(X: np.ndarray, Y: np.ndarray):
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")


def _check_p(p: float):
    if not (p >= 1 and math.isfinite(p)):
        raise ValueError(f"p must be a finite real >= 1, got {p}")


def ground_distance(a, b) -> float:
    a = as_point(a, "a")
    b = as_point(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return math.hypot(*(a - b))


def pairwise_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix computed from explicit differences.

    The ``|x|^2 + |y|^2 - 2 x.y`` shortcut is avoided on purpose: it loses the
    exact zero on coincident points and breaks symmetry in the last bits.
    """
    if X.shape[1] == 1:
        return np.abs(X[:, 0][:, None] - Y[:, 0][None, :])
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _cost_matrix(X, Y, p):
    D = pairwise_distances(X, Y)
    return D if p == 1 else D**p


def _root(value: float, p: float) -> float:
    value = max(value, 0.0)
    return value if p == 1 else value ** (1.0 / p)


# ---------------------------------------------------------------------------
# 1-D closed form
# ---------------------------------------------------------------------------


def _quantile_grid(n: int, m: int):
    """Interval lengths and quantile indices on the merged grid {i/n} U {j/m}.

    On each interval of the merged grid both empirical quantile functions are
    constant, so the integral of |F^-1 - G^-1|^p is a finite weighted sum.
    Breakpoints are handled in integer units of 1/(n*m) to keep them exact.
    """
    if n == m:
        return np.full(n, 1.0 / n), np.arange(n), np.arange(m)
    ticks = np.union1d(np.arange(n + 1) * m, np.arange(m + 1) * n)  # units of 1/(n m)
    left, right = ticks[:-1], ticks[1:]
    weights = (right - left) / (n * m)
    # index of the quantile in force on (left, right): floor(left * n / (n m))
    ix = left // m
    iy = left // n
    return weights, ix, iy


def wasserstein_1d(xs, ys, p: float = 1.0) -> float:
    xs = np.sort(np.asarray(xs, dtype=float).ravel())
    ys = np.sort(np.asarray(ys, dtype=float).ravel())
    if xs.size == 0 or ys.size == 0:
        raise ValueError("wasserstein_1d needs non-empty inputs")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("inputs contain NaN or Inf")
    _check_p(p)
    w, ix, iy = _quantile_grid(xs.size, ys.size)
    gaps = np.abs(xs[ix] - ys[iy])
    if p != 1:
        gaps = gaps**p
    return _root(float(np.sum(w * gaps)), p)


# ---------------------------------------------------------------------------
# exact discrete transport
# ---------------------------------------------------------------------------


def _assignment(C: np.ndarray, n: int) -> TransportPlan:
    rows, cols = linear_sum_assignment(C)
    cost = math.fsum(C[rows, cols]) / n
    return TransportPlan(rows, cols, np.full(n, 1.0 / n), cost, C.shape)


def _network_lp(C: np.ndarray) -> TransportPlan:
    """Transport LP in integer units: source supply m, sink demand n.

    Basic solutions of this network matrix are integral, so the simplex
    vertex returned by HiGHS is rounded to integers without loss and the
    plan is exactly feasible.
    """
    n, m = C.shape
    nm = n * m
    rows = np.concatenate([np.repeat(np.arange(n), m), n + np.tile(np.arange(m), n)])
    cols = np.concatenate([np.arange(nm), np.arange(nm)])
    A = sparse.csr_matrix((np.ones(2 * nm), (rows, cols)), shape=(n + m, nm))
    b = np.concatenate([np.full(n, float(m)), np.full(m, float(n))])
    scale = float(C.max()) or 1.0
    res = linprog(
        (C / scale).ravel(),
        A_eq=A,
        b_eq=b,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:  # pragma: no cover - the problem is always feasible
        raise RuntimeError(f"transport LP failed: {res.message}")
    flow = np.rint(res.x).astype(np.int64).reshape(n, m)
    if np.any(flow.sum(axis=1) != m) or np.any(flow.sum(axis=0) != n):  # pragma: no cover
        raise RuntimeError("transport LP returned a non-integral vertex")
    src, dst = np.nonzero(flow)
    units = flow[src, dst]
    cost = math.fsum((units * C[src, dst]).tolist()) / nm
    return TransportPlan(src, dst, units / nm, cost, (n, m))


def wasserstein_exact(X, Y, p: float = 1.0, *, max_entries: int = DEFAULT_MAX_ENTRIES):
    """Exact W_p between the uniform empirical measures of X and Y.

    Returns ``(value, plan)``.  For ``n == m`` the optimum is attained at a
    permutation, so the assignment solver is exact; otherwise the transport
    LP is solved to a vertex.
    """
    X = as_sample(X, "X")
    Y = as_sample(Y, "Y")
    _check_dims(X, Y)
    _check_p(p)
    n, m = len(X), len(Y)
    if n * m > max_entries:
        raise SolverCapExceeded(
            f"exact transport on {n}x{m} exceeds the cap of {max_entries} cost entries; "
            "use sliced_wasserstein for samples this large"
        )
    C = _cost_matrix(X, Y, p)
    if n == m:
        plan = _assignment(C, n)
    elif n == 1 or m == 1:
        src = np.zeros(m, dtype=int) if n == 1 else np.arange(n)
        dst = np.arange(m) if n == 1 else np.zeros(n, dtype=int)
        k = max(n, m)
        plan = TransportPlan(src, dst, np.full(k, 1.0 / k), math.fsum(C.ravel()) / k, (n, m))
    else:
        plan = _network_lp(C)
    return _root(plan.cost, p), plan


# ---------------------------------------------------------------------------
# sliced approximation
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def projection_directions(d: int, n_proj: int, seed: int) -> np.ndarray:
    """Unit directions, row k drawn from its own stream (seed, SLICED, k).

    Directions are normalised standard Gaussians, hence uniform on the sphere.
    A zero draw is redrawn from the same stream.
    """
    if n_proj < 1:
        raise ValueError("n_proj must be >= 1")
    out = np.empty((n_proj, d))
    for k in range(n_proj):
        g = streams.rng(seed, streams.SLICED, k)
        while True:
            v = g.standard_normal(d)
            norm = math.sqrt(math.fsum(v * v))
            if norm > 0:
                break
        out[k] = v / norm
    out.setflags(write=False)
    return out


def sliced_wasserstein(X, Y, p: float = 1.0, n_proj: int = 1000, seed: int = 0) -> float:
    X = as_sample(X, "X")
    Y = as_sample(Y, "Y")
    _check_dims(X, Y)
    _check_p(p)
    theta = projection_directions(X.shape[1], n_proj, seed)
    px = np.sort(X @ theta.T, axis=0)  # (n, n_proj)
    py = np.sort(Y @ theta.T, axis=0)
    w, ix, iy = _quantile_grid(len(X), len(Y))
    gaps = np.abs(px[ix] - py[iy])
    if p != 1:
        gaps = gaps**p
    per_direction = w @ gaps  # W_p^p of each projection
    return _root(float(np.sum(per_direction)) / n_proj, p)


def point_to_sample_distance(x, S, p: float = 1.0) -> float:
    """W_p between a point mass at x and the uniform measure on S.

    A point mass has a single coupling with any measure, so this is just the
    p-mean of the distances from x to the sample.
    """
    x = as_point(x, "x")
    S = as_sample(S, "S")
    if S.shape[1] != x.size:
        raise ValueError(f"dimension mismatch: {x.size} vs {S.shape[1]}")
    _check_p(p)
    dist = pairwise_distances(x[None, :], S)[0]
    if p != 1:
        dist = dist**p
    return _root(math.fsum(dist) / len(S), p)


def warn_if_unvalidated(p: float):
    if p not in (1, 2):
        warnings.warn(f"p={p} is accepted but unvalidated; only p in {{1, 2}} is tested", stacklevel=3)
