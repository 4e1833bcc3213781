import numpy as np
from hypothesis import given, settings, strategies as st

from ssbe.geometry import Domain, make_charts
from ssbe.sampling import make_samples, sample_charts, sample_interior, sample_times


def test_disk_containment_and_determinism():
    a = sample_interior(Domain.disk(), 1000, 3)
    assert np.all(np.sum(a * a, axis=1) < 1)
    assert np.array_equal(a, sample_interior(Domain.disk(), 1000, 3))


def test_disk_mean_near_origin():
    a = sample_interior(Domain.disk(), 100000, 3)
    assert np.all(np.abs(a.mean(axis=0)) < 0.02)


def test_disk_radial_law():
    # uniform on the disk means P(r <= s) = s^2
    r = np.linalg.norm(sample_interior(Domain.disk(), 50000, 8), axis=1)
    assert abs(np.mean(r <= 0.5) - 0.25) < 0.01


def test_chart_samples():
    cs = make_charts(Domain.disk())
    s = sample_charts(cs, 50, 0)
    assert len(s) == 4 and all(p.shape == (50, 1) for p in s)
    assert all(np.all(np.abs(p) <= np.sqrt(2) / 2) for p in s)
    s2 = sample_charts(make_charts(Domain.box(2)), 500, 0)
    assert sum(len(p) for p in s2) == 2000
    assert all(np.array_equal(x, y) for x, y in zip(s, sample_charts(cs, 50, 0)))


def test_distinct_seeds_differ():
    a = sample_interior(Domain.box(2), 10, 1)
    b = sample_interior(Domain.box(2), 10, 2)
    assert not np.array_equal(a, b)


def test_parabolic_sample_set():
    dom = Domain.box(2)
    cs = make_charts(dom)
    s = make_samples(dom, cs, 100, 20, 4, horizon=1.0, n_initial=30, n_time=5)
    assert s.interior.shape == (100, 3)
    assert np.all((s.interior[:, 2] >= 0) & (s.interior[:, 2] <= 1))
    assert s.initial.shape == (30, 2)
    assert len(s.time_values) == 5 and np.all((s.time_values >= 0) & (s.time_values <= 1))
    assert all(len(t) == 20 for t in s.chart_times)
    assert s.n_boundary == 80


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 63 - 1), d=st.integers(2, 6), h=st.floats(0.1, 3.0))
def test_box_containment(seed, d, h):
    pts = sample_interior(Domain.box(d, h), 50, seed)
    assert np.all(np.abs(pts) <= h)
    for c, p in zip(make_charts(Domain.box(d, h)), sample_charts(make_charts(Domain.box(d, h)), 5, seed)):
        assert np.all(np.abs(p) <= c.kappa)


def test_times_in_range():
    t = sample_times(200, 2.5, 0)
    assert np.all((t >= 0) & (t <= 2.5))
