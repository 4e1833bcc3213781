import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssbe.theory_probe import (BarronPairSpec, ConstantOperator, FunctionClass, TwoLayerParams,
                               approximation_probe, chart_slope_bound, empirical_rademacher,
                               loglog_slope, path_norm, rademacher_bound, random_barron_spec,
                               residual_features, sphere_chart, tangential_features)

from conftest import central_diff


def test_path_norm_examples():
    assert path_norm(TwoLayerParams([2.0], [[1.0, 0.0]])) == 2
    assert path_norm(TwoLayerParams([1.0, -1.0], [[3.0, 4.0], [0.0, 0.0]])) == 125


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6), c=st.floats(-5, 5), m1=st.integers(1, 6), m2=st.integers(1, 6))
def test_path_norm_homogeneity_and_concat(seed, c, m1, m2):
    rng = np.random.default_rng(seed)
    p = TwoLayerParams(rng.normal(size=m1), rng.normal(size=(m1, 3)))
    q = TwoLayerParams(rng.normal(size=m2), rng.normal(size=(m2, 3)))
    assert np.isclose(path_norm(TwoLayerParams(c * p.a, p.w)), abs(c) * path_norm(p))
    assert path_norm(p.concat(q)) <= path_norm(p) + path_norm(q) + 1e-12
    # merging equal neurons: the function adds, the path norm is subadditive
    x = rng.normal(size=(4, 3))
    assert np.allclose(p.concat(q)(x), p(x) + q(x))


def test_invalid_params():
    with pytest.raises(ValueError):
        TwoLayerParams([], np.zeros((0, 2)))
    with pytest.raises(ValueError):
        TwoLayerParams([np.nan], [[1.0, 0.0]])


def test_residual_feature_matches_operator_fd():
    # the feature is (a_scale lap + b_hat . grad + c) applied to sigma(w . x)
    op = ConstantOperator(0.7, (0.3, -0.2), 1.1)
    w = np.array([[0.8, -1.3]])
    x = np.array([0.4, 0.1])

    def s(y):
        return max(w[0] @ y, 0) ** 3 / 6

    h = 1e-4
    lap = sum((s(x + h * e) - 2 * s(x) + s(x - h * e)) / h ** 2 for e in np.eye(2))
    grad = central_diff(s, x, 1e-6)
    expect = 0.7 * lap + np.dot([0.3, -0.2], grad) + 1.1 * s(x)
    assert np.isclose(residual_features(w, x[None], op)[0, 0], expect, rtol=1e-6)


def test_tangential_feature_fd():
    ch = sphere_chart(3)
    w = np.array([[0.5, -1.0, 2.0]])
    xp = np.array([[0.2, -0.3]])
    T = ch.tangent_vectors(xp).reshape(1, 2, 3)
    got = tangential_features(w, ch.point(xp), T)[0, :, 0]
    fd = central_diff(lambda y: max(w[0] @ ch.point(y[None])[0], 0) ** 3 / 6, xp[0], 1e-6)
    assert np.allclose(got, fd, atol=1e-8)


def test_sphere_chart_slope():
    assert np.isclose(chart_slope_bound(sphere_chart(2)), 1.0)
    assert np.isclose(chart_slope_bound(sphere_chart(4)), np.sqrt(3))


def test_bound_example():
    # 4 M Q d^2 / sqrt(n) = 16 / 16
    assert rademacher_bound("F_Q", 1, 256, 2, 1) == 1.0
    r = empirical_rademacher("F_Q", 1.0, 256, 2, trials=5, seed=0)
    assert r.estimate <= 0.25


def test_zero_class():
    for c in FunctionClass:
        assert empirical_rademacher(c, 0.0, 32, 2, trials=2).estimate == 0


def test_estimate_scales_linearly_in_q():
    a = empirical_rademacher("G_Q", 1.0, 64, 2, trials=3, seed=4)
    b = empirical_rademacher("G_Q", 2.5, 64, 2, trials=3, seed=4)
    assert np.isclose(b.estimate, 2.5 * a.estimate, rtol=1e-6)


def test_estimate_is_a_lower_bound_of_dense_search():
    # d = 2: the sup over the circle can be brute-forced on a fine angle grid
    r = empirical_rademacher("F_Q", 1.0, 128, 2, trials=1, restarts=4, seed=9)
    from ssbe.theory_probe import _probe_points
    rng = np.random.default_rng(np.random.SeedSequence(9).spawn(2)[0])
    X, _ = _probe_points(FunctionClass.F_Q, 128, 2, rng, None)
    tau = np.random.default_rng(np.random.SeedSequence(9).spawn(2)[1]).choice([-1.0, 1.0], size=128)
    th = np.linspace(0, 2 * np.pi, 200001)
    U = np.column_stack([np.cos(th), np.sin(th)])
    dense = np.max(np.abs(residual_features(U, X, ConstantOperator.uniform(1.0, 2)) @ tau)) / 128
    assert r.estimate <= dense + 1e-9
    assert r.estimate >= 0.99 * dense


@pytest.mark.parametrize("cls", list(FunctionClass))
def test_small_estimates_below_bound(cls):
    for d in (2, 3):
        r = empirical_rademacher(cls, 1.0, 100, d, trials=3, restarts=2, seed=1)
        assert 0 < r.estimate <= r.bound


def test_loglog_slope():
    n = np.array([10, 100, 1000])
    assert np.isclose(loglog_slope(n, 3 / np.sqrt(n)), -0.5)


def test_point_mass_zero_risk():
    spec = BarronPairSpec([1.3], [[0.5, -1.0]], [1.0])
    for m in (1, 7, 32):
        r = approximation_probe(spec, m, 200, 0, 5)
        assert r.mean_risk < 1e-28 and r.variance_reference < 1e-28


def test_degenerate_rho():
    with pytest.raises(ValueError):
        approximation_probe(BarronPairSpec([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5]), 4, 50)
    with pytest.raises(ValueError):
        BarronPairSpec([1.0], [[1.0, 0.0]], [0.5])


def test_mean_risk_tracks_variance_and_bound():
    spec = random_barron_spec(8, 3)
    r = approximation_probe(spec, 16, 400, 1, 400)
    assert abs(r.mean_risk - r.variance_reference) < 4 * r.std_error
    assert r.variance_reference <= r.theorem_bound
    assert spec.mean_path_norm() <= spec.barron_norm()
    assert r.path_norm_event_fraction >= 0.4


def test_risk_nonincreasing_in_m():
    spec = random_barron_spec(10, 5)
    risks = [approximation_probe(spec, m, 300, 2, 50).mean_risk for m in (2, 8, 32, 128)]
    assert all(a > b for a, b in zip(risks, risks[1:]))
