import math

import numpy as np
import pytest

from analogy_ot.analogy import (
    AnalogyParameters,
    ThresholdPredicate,
    audit_regularity,
    barycenter,
    check_analogy,
    check_fol_statements,
    distances_to,
)


def params(eps=0.5, eta=0.05, gamma=0.05, xi=0.01, delta=2.0):
    return AnalogyParameters(eps, eta, gamma, xi, delta)


def test_verdict_hand_example():
    v = check_analogy(params())
    # min(0.5 - 0.05, (2 - 0.01)/2) and min(0.5 - 0.05, 1 - 0.01)
    assert v.threshold_eq46 == pytest.approx(0.45, abs=1e-15)
    assert v.threshold_table == pytest.approx(0.45, abs=1e-15)
    assert v.verified and v.status == "verified"
    assert v.margin == pytest.approx(0.40, abs=1e-15)
    assert v.violation_bound_eq49 == pytest.approx(0.15)
    assert v.violation_bound_eq51 == pytest.approx(0.10)


def test_verdict_uses_smaller_threshold():
    # delta term binds: (delta - xi)/2 = 0.4, delta/2 - xi = 0.3
    v = check_analogy(params(eps=5.0, xi=0.2, delta=1.0, gamma=0.35))
    assert v.threshold_eq46 == pytest.approx(0.4)
    assert v.threshold_table == pytest.approx(0.3)
    assert not v.verified and v.margin < 0


def test_verdict_boundaries():
    assert check_analogy(params(gamma=0.0)).verified
    eps, eta = 0.5, 0.125
    assert not check_analogy(params(eps=eps, eta=eta, gamma=eps - eta)).verified
    v = check_analogy(params(delta=0.0))
    assert not v.verified and v.status == "not certifiable (classes not separable)"
    assert not check_analogy(params(delta=-1.0)).verified


def test_verdict_margin_sign_matches_verified():
    g = np.random.default_rng(0)
    for _ in range(500):
        eps, delta = g.uniform(0.01, 3, size=2)
        eta, xi, gamma = g.uniform(0, 1, size=3)
        v = check_analogy(params(eps, eta, gamma, xi, delta))
        assert v.verified == (v.margin > 0)


def test_verdict_monotone_and_scale_invariant():
    g = np.random.default_rng(1)
    for _ in range(300):
        p = params(*g.uniform(0.0, 2.0, size=5))
        base = check_analogy(p).verified
        bigger_gamma = AnalogyParameters(p.epsilon, p.eta, p.gamma + 0.1, p.xi, p.delta)
        assert not (check_analogy(bigger_gamma).verified and not base)
        bigger_eps = AnalogyParameters(p.epsilon + 0.1, p.eta, p.gamma, p.xi, p.delta + 0.1)
        assert not (base and not check_analogy(bigger_eps).verified)
        for c in (0.1, 7.0, 1e3):
            assert check_analogy(p.scaled(c)).verified == base


def test_corollary_consistency():
    # gamma >= min(eps, delta/2) can never verify, whatever eta and xi are.
    for eta in (0.0, 0.1):
        for xi in (0.0, 0.1):
            assert not check_analogy(params(eps=0.5, eta=eta, xi=xi, delta=2.0, gamma=0.5)).verified
            assert not check_analogy(params(eps=3.0, eta=eta, xi=xi, delta=2.0, gamma=1.0)).verified


def test_parameter_validation():
    with pytest.raises(ValueError):
        params(gamma=-0.1)
    with pytest.raises(ValueError):
        AnalogyParameters(0.5, 0.05, 0.05, 0.01, 2.0, alpha=1.0)
    with pytest.raises(ValueError):
        params(eps=math.inf)


def test_predicate_shape_is_checked():
    bad = ThresholdPredicate(lambda X: np.zeros(len(X) + 1))
    with pytest.raises(ValueError):
        bad(np.zeros((3, 2)))
    F = ThresholdPredicate.pointwise(lambda x: x[0])
    np.testing.assert_array_equal(F(np.array([[1.0], [-1.0], [0.0]])), [True, False, True])


def ring_sample():
    g = np.random.default_rng(2)
    return g.normal(size=(200, 2)) * 1.5


def test_fol_tautology():
    X = ring_sample()
    F = ThresholdPredicate(lambda X: X[:, 0] - 0.2)
    for eps in (0.1, 1.0, 100.0):
        rep = check_fol_statements(X, [0, 0], eps, F, F)
        assert rep.stmt3_holds and rep.stmt3_counterexamples == [] and not rep.stmt4_found


def test_fol_constructed_witness():
    X = ring_sample()
    x0, eps = np.zeros(2), 1.0
    F = ThresholdPredicate(lambda X: np.ones(len(X)))
    L = ThresholdPredicate(lambda X: eps - distances_to(X, x0))
    rep = check_fol_statements(X, x0, eps, F, L)
    assert rep.stmt3_holds
    outside = np.flatnonzero(distances_to(X, x0) > eps)
    assert rep.stmt4_witness == outside[0]


def test_fol_injected_counterexample():
    X = ring_sample()
    X[17] = [0.1, 0.1]
    x0, eps = np.zeros(2), 1.0
    F = ThresholdPredicate(lambda X: np.ones(len(X)))
    L = ThresholdPredicate(lambda X: np.where(np.all(X == [0.1, 0.1], axis=1), -1.0, 1.0))
    rep = check_fol_statements(X, x0, eps, F, L)
    assert not rep.stmt3_holds and rep.stmt3_counterexamples == [17]


def test_regularity_constant_scores():
    X = ring_sample()
    one = ThresholdPredicate(lambda X: np.ones(len(X)))
    rep = audit_regularity(X, [0, 0], 1.0, one, one, pair_budget=500)
    assert (rep.L_F, rep.L_L, rep.tau, rep.delta_cap) == (0.0, 0.0, 1.0, math.inf)
    assert rep.satisfied and "empirical (lower bound)" in rep.notes[0]


def test_regularity_linear_score_recovers_slope():
    X = np.random.default_rng(3).uniform(-1, 1, size=(50, 1))
    F = ThresholdPredicate(lambda X: 3 * X[:, 0])
    rep = audit_regularity(X, [0.0], 0.5, F, F, pair_budget=100)
    assert rep.L_F == pytest.approx(3.0, rel=1e-12)


def test_regularity_zero_margin_at_x0():
    X = np.vstack([[0.0, 0.0], ring_sample()])
    F = ThresholdPredicate(lambda X: X[:, 0])
    rep = audit_regularity(X, [0, 0], 1.0, F, F, pair_budget=200)
    assert rep.tau == 0.0 and not rep.satisfied and not rep.margin_ok


def test_regularity_unpopulated_ball():
    X = ring_sample() + 100
    one = ThresholdPredicate(lambda X: np.ones(len(X)))
    rep = audit_regularity(X, [0, 0], 1.0, one, one)
    assert not rep.satisfied and "delta-ball unpopulated" in rep.notes


def test_regularity_lipschitz_monotone_in_budget():
    X = ring_sample()
    F = ThresholdPredicate(lambda X: np.sin(3 * X[:, 0]) + X[:, 1] ** 2)
    values = [audit_regularity(X, [0, 0], 1.0, F, F, pair_budget=b, seed=4).L_F for b in (10, 100, 1000, 5000)]
    assert values == sorted(values)


def test_barycenter():
    np.testing.assert_allclose(barycenter([[0, 0], [2, 4]]), [1, 2])
