import math

import mpmath
import numpy as np
import pytest

from analogy_ot import streams
from analogy_ot.analogy import seeded_pairs
from analogy_ot.estimation import (
    BootstrapSummary,
    ClassGeometry,
    LabeledSample,
    bootstrap_wasserstein,
    class_geometry,
    convergence_rate,
    displacements,
    empirical_quantile,
    estimate_delta,
    estimate_epsilon,
    estimate_eta,
    estimate_gamma,
    estimate_xi,
    normal_quantile,
)
from analogy_ot.metric import wasserstein_exact


def z(prob):
    """Standard normal quantile by root-finding on the 60-digit CDF."""
    with mpmath.workdps(60):
        target = mpmath.mpf(prob)
        guess = normal_quantile(prob)
        return float(mpmath.findroot(lambda x: mpmath.ncdf(x) - target, guess))


@pytest.mark.parametrize(
    "values, q, expected",
    [([5], 0.0, 5), ([5], 0.37, 5), ([1, 2, 3, 4], 0.5, 2.5), ([1, 2, 3, 4], 1.0, 4), ([4, 1, 3, 2], 0.0, 1)],
)
def test_empirical_quantile_examples(values, q, expected):
    assert empirical_quantile(values, q) == expected


def test_empirical_quantile_matches_numpy_linear():
    g = np.random.default_rng(0)
    v = g.normal(size=37)
    for q in np.linspace(0, 1, 41):
        assert empirical_quantile(v, q) == pytest.approx(np.quantile(v, q, method="linear"), rel=1e-14, abs=1e-15)


def test_empirical_quantile_errors():
    with pytest.raises(ValueError):
        empirical_quantile([], 0.5)
    with pytest.raises(ValueError):
        empirical_quantile([1.0], 1.5)


def test_normal_quantile_against_high_precision():
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    for prob in [1e-300, 1e-20, 1e-8, 0.001, 0.01, 0.02425, 0.05, 0.2, 0.4999]:
        assert normal_quantile(prob) == pytest.approx(z(prob), rel=1e-13, abs=1e-15)
    # Above 0.5 the value is mirrored through 1 - prob, whose rounding limits accuracy.
    for prob in [0.6, 0.95, 0.975, 0.999999]:
        assert normal_quantile(prob) == pytest.approx(z(prob), rel=1e-10)


def test_normal_quantile_antisymmetry():
    for prob in np.linspace(0.001, 0.999, 101):
        assert abs(normal_quantile(prob) + normal_quantile(1 - prob)) <= 1e-12


def test_normal_quantile_domain():
    for bad in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            normal_quantile(bad)


def summary(mean, sd, observed=None):
    return BootstrapSummary(np.array([mean]), mean, sd, observed)


def test_epsilon_examples():
    assert estimate_epsilon(summary(0.08, 0.0), 0.01) == 0.08
    assert estimate_epsilon(summary(0.08, 0.02), 0.05) == pytest.approx(0.08 + z(0.95) * 0.02, rel=1e-14)
    assert estimate_epsilon(summary(0.08, 0.02), 0.05) == pytest.approx(0.11290, abs=5e-6)
    reps = BootstrapSummary.from_replicates(np.arange(1, 101, dtype=float))
    assert estimate_epsilon(reps, 0.05, "quantile") == pytest.approx(95.05, abs=1e-12)


def test_epsilon_centres_on_observed_when_present():
    s = summary(0.08, 0.02, observed=0.07)
    assert estimate_epsilon(s, 0.05) == pytest.approx(0.07 + z(0.95) * 0.02, rel=1e-14)
    with pytest.raises(ValueError):
        estimate_epsilon(s, 0.05, "median")


def test_eta_examples():
    assert estimate_eta(summary(1.0, 0.0)) == 0.0
    assert estimate_eta(summary(0.08, 0.021), 0.05) == pytest.approx(0.041159, abs=5e-7)
    etas = [estimate_eta(summary(0.08, 0.021), a) for a in (0.2, 0.1, 0.05, 0.01)]
    assert all(a < b for a, b in zip(etas, etas[1:]))


def test_gamma_examples():
    X = np.random.default_rng(1).normal(size=(50, 2))
    assert estimate_gamma(displacements(X, X)) == 0.0
    t = np.array([0.18, 0.24])
    for beta in (0.01, 0.05, 0.5):
        assert estimate_gamma(displacements(X, X + t), beta) == pytest.approx(0.3, abs=1e-12)
    # h = 99 * 0.95 = 94.05 -> 9.5 + 0.05 * (9.6 - 9.5)
    values = 0.1 * np.arange(1, 101)
    assert estimate_gamma(values, 0.05) == pytest.approx(9.505, abs=1e-12)


def test_gamma_rejects_negative_displacements():
    with pytest.raises(ValueError):
        estimate_gamma([0.1, -0.2])


def test_xi_examples():
    assert estimate_xi(np.full(20, 0.3)) == 0.0
    assert estimate_xi(np.arange(1, 101, dtype=float)) == pytest.approx(3.96, abs=1e-12)
    g = np.random.default_rng(3)
    for _ in range(50):
        assert estimate_xi(g.exponential(size=g.integers(1, 30))) >= 0


def test_bootstrap_degenerate_point():
    X = np.ones((10, 2))
    s = bootstrap_wasserstein(X, X, B=20, seed=0)
    assert s.mean == 0.0 and s.sd == 0.0 and s.observed == 0.0


def test_bootstrap_deterministic_and_thread_independent():
    g = np.random.default_rng(4)
    X, Y = g.normal(size=(30, 2)), g.normal(size=(25, 2))
    a = bootstrap_wasserstein(X, Y, B=40, seed=9)
    b = bootstrap_wasserstein(X, Y, B=40, seed=9, threads=4)
    np.testing.assert_array_equal(a.replicates, b.replicates)
    assert (a.mean, a.sd) == (b.mean, b.sd)
    c = bootstrap_wasserstein(X, Y, B=40, seed=10)
    assert not np.array_equal(a.replicates, c.replicates)


def test_bootstrap_replicate_oracle():
    g = np.random.default_rng(5)
    X, Y = g.normal(size=(12, 2)), g.normal(size=(15, 2))
    s = bootstrap_wasserstein(X, Y, p=2, B=10, seed=3)
    expected = []
    for b in range(10):
        r = streams.rng(3, streams.BOOTSTRAP, b)
        ix, iy = r.integers(12, size=12), r.integers(15, size=15)
        expected.append(wasserstein_exact(X[ix], Y[iy], 2)[0])
    np.testing.assert_allclose(s.replicates, np.sort(expected), rtol=1e-15)
    assert s.sd == pytest.approx(np.std(expected, ddof=1), rel=1e-12)
    assert s.observed == wasserstein_exact(X, Y, 2)[0]
    assert s.B == 10


def test_class_geometry_singletons():
    data = LabeledSample(np.array([[0.0, 0.0], [3.0, 4.0]]), np.array([0, 1]), ("a", "b"))
    geom = class_geometry(data)
    assert geom.distance_matrix[0, 1] == 5.0
    np.testing.assert_array_equal(geom.radii, [0.0, 0.0])
    est = estimate_delta(geom)
    assert est.value == 2.5 and est.separable and est.pair == (0, 1)


def test_class_geometry_duplicates_and_oracle():
    g = np.random.default_rng(6)
    pts = g.normal(size=(8, 2))
    dup = LabeledSample(np.vstack([pts, pts]), np.repeat([0, 1], 8), ("0", "1"))
    geom = class_geometry(dup)
    assert geom.distance_matrix[0, 1] == 0.0
    est = estimate_delta(geom)
    assert est.value <= 0 and not est.separable

    means = [(0, 0), (4, 0), (0, 5)]
    blobs = [g.normal(size=(10 + 3 * k, 2)) + m for k, m in enumerate(means)]
    data = LabeledSample(np.vstack(blobs), np.concatenate([np.full(len(b), k) for k, b in enumerate(blobs)]), ("0", "1", "2"))
    D = class_geometry(data).distance_matrix
    for i in range(3):
        for j in range(3):
            ref = 0.0 if i == j else wasserstein_exact(blobs[i], blobs[j])[0]
            assert D[i, j] == pytest.approx(ref, rel=1e-9, abs=0)


def test_delta_hand_arithmetic_and_ties():
    geom = ClassGeometry(np.array([[0.0, 4.0], [4.0, 0.0]]), np.array([1.0, 2.0]))
    assert estimate_delta(geom).value == 0.5
    tie = ClassGeometry(np.array([[0, 3, 3], [3, 0, 3], [3, 3, 0]], float), np.zeros(3))
    assert estimate_delta(tie).pair == (0, 1)


def test_convergence_rate_branches():
    assert convergence_rate(100, 1, 1) == 0.1
    assert convergence_rate(math.e**2, 2, 1) == pytest.approx(math.exp(-1) * math.sqrt(2), rel=1e-15)
    assert convergence_rate(10**6, 4, 1) == pytest.approx(10**-1.5, rel=1e-15)
    with pytest.raises(ValueError):
        convergence_rate(0, 1, 1)


def test_seeded_pairs_prefix_property():
    small = seeded_pairs(50, 100, seed=3)
    big = seeded_pairs(50, 400, seed=3)
    np.testing.assert_array_equal(small, big[:100])
