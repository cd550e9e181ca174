import math

import numpy as np
import pytest
from scipy import integrate

from onticlab.quantum import Setting
from onticlab.sphere import (
    Cap,
    Estimate,
    OntPoint,
    RngStream,
    arc_overlap,
    azimuthal_cap_fraction,
    cap_overlap_fraction,
    sample_mu_given_tau,
    sample_uniform,
)

from oracles import closed_form_overlap

N = 1_000_000


def random_axis(gen):
    v = gen.normal(size=3)
    return v / np.linalg.norm(v)


def test_ontpoint_vector_convention():
    gen = np.random.default_rng(1)
    mu, tau = gen.uniform(0, 2 * np.pi, 50), gen.uniform(0, np.pi, 50)
    v = OntPoint(mu, tau).vector
    expected = np.sin(tau)[:, None] * np.stack([np.cos(mu), 0 * mu, np.sin(mu)], 1) + np.cos(tau)[:, None] * [0, 1, 0]
    np.testing.assert_allclose(v, expected, atol=1e-12)
    for alpha in (0.0, 1.0, np.pi / 2, 4.0):
        s = Setting.in_plane(alpha)
        np.testing.assert_allclose(v @ s.array, np.sin(tau) * np.cos(mu - alpha), atol=1e-12)
    back = OntPoint.from_vector(v)
    np.testing.assert_allclose(back.tau, tau, atol=1e-10)


def test_uniform_sampling_moments(rng):
    lam = sample_uniform(rng, N)
    v = lam.vector
    np.testing.assert_allclose(v.mean(axis=0), 0.0, atol=5e-3)
    for w in (0.2, 0.7, 1.3):
        inside = np.abs(lam.tau - np.pi / 2) <= w
        est = Estimate.from_samples(inside, rng.seed)
        assert est.compatible(np.sin(w), 3.0)
    for h in (0.4, 1.5, 2.6):
        est = Estimate.from_samples(Cap((0, 0, 1), h).contains(v), rng.seed)
        assert est.compatible((1 - np.cos(h)) / 2, 3.0)


def test_sampling_is_deterministic():
    a = sample_uniform(RngStream(99, 3), 1000)
    b = sample_uniform(RngStream(99, 3), 1000)
    c = sample_uniform(RngStream(99, 4), 1000)
    assert np.array_equal(a.mu, b.mu) and np.array_equal(a.tau, b.tau)
    assert not np.array_equal(a.mu, c.mu)
    s1, s2 = RngStream(5), RngStream(5)
    assert np.array_equal(sample_uniform(s1.child(2), 10).mu, sample_uniform(s2.child(2), 10).mu)


def test_mu_given_tau(rng):
    lam = sample_mu_given_tau(rng, np.pi / 2, N)
    assert Estimate.from_samples(np.cos(lam.mu), rng.seed).compatible(0.0, 3.0)
    np.testing.assert_allclose(sample_mu_given_tau(rng, 0.0, 100).vector, [[0, 1, 0]] * 100, atol=1e-15)
    np.testing.assert_allclose(sample_mu_given_tau(rng, np.pi / 3, 1000).vector[:, 1], 0.5, atol=1e-12)


def test_azimuthal_cap_fraction_examples(rng):
    for tau in (0.1, 1.0, np.pi / 2, 3.0):
        assert azimuthal_cap_fraction(Cap((1, 0, 0), np.pi / 2), tau) == pytest.approx(0.5, abs=1e-15)
    assert azimuthal_cap_fraction(Cap((1, 0, 0), np.pi / 3), np.pi / 2) == pytest.approx(1 / 3, abs=1e-15)
    assert azimuthal_cap_fraction(Cap((1, 0, 0), np.pi / 4), np.pi / 6) == 0.0
    # Monte Carlo over mu for the pi/3 case
    cap = Cap((np.cos(0.8), 0, np.sin(0.8)), np.pi / 3)
    lam = sample_mu_given_tau(rng, np.pi / 2, 200_000)
    assert Estimate.from_samples(cap.contains(lam.vector), rng.seed).compatible(1 / 3, 4.0)


def test_azimuthal_fraction_limits():
    assert azimuthal_cap_fraction(Cap((1, 0, 0), 2.5), 0.0) == 1.0
    assert azimuthal_cap_fraction(Cap((1, 0, 0), 0.5), 0.0) == 0.0
    # cos h < 0 and sin(tau) < -cos h: whole circle inside
    assert azimuthal_cap_fraction(Cap((0, 0, 1), 2.5), 0.3) == 1.0
    with pytest.raises(ValueError):
        azimuthal_cap_fraction(Cap((0, 1, 0), 1.0), 0.3)


def test_band_and_area_views_agree():
    gen = np.random.default_rng(11)
    for _ in range(100):
        h = gen.uniform(0, np.pi)
        alpha = gen.uniform(0, 2 * np.pi)
        cap = Cap((np.cos(alpha), 0, np.sin(alpha)), h)
        edges = sorted({abs(np.pi / 2 - h), np.pi - abs(np.pi / 2 - h)})
        pts = [0.0, *edges, np.pi]
        total = sum(
            integrate.quad(lambda t: float(azimuthal_cap_fraction(cap, t)) * np.sin(t) / 2, lo, hi, epsabs=1e-13)[0]
            for lo, hi in zip(pts[:-1], pts[1:])
        )
        assert total == pytest.approx((1 - np.cos(h)) / 2, abs=1e-8)


def test_arc_overlap_basic():
    assert arc_overlap(0.5, 0.5, 0.0) == pytest.approx(1.0)
    assert arc_overlap(0.5, 0.5, 2.0) == 0.0
    assert arc_overlap(np.pi, 0.3, 1.0) == pytest.approx(0.6)
    # wraps around the circle
    assert arc_overlap(2.0, 2.0, np.pi) == pytest.approx(2 * (4.0 - np.pi))


def test_cap_overlap_examples():
    for h in (0.3, 1.2, 2.9):
        cap = Cap((0, 0, 1), h)
        assert cap_overlap_fraction(cap, cap) == pytest.approx((1 - np.cos(h)) / 2, abs=1e-12)
    assert cap_overlap_fraction(Cap((0, 0, 1), 1.0), Cap((0, 0, -1), 2.0)) == pytest.approx(0.0, abs=1e-14)
    assert cap_overlap_fraction(Cap((1, 0, 0), np.pi / 2), Cap((0, 0, 1), np.pi / 2)) == pytest.approx(0.25, abs=1e-12)
    # hemispheres: fraction (pi - w) / 2pi
    for w in (0.1, 1.0, 2.5):
        c2 = Cap((np.cos(w), 0, np.sin(w)), np.pi / 2)
        assert cap_overlap_fraction(Cap((1, 0, 0), np.pi / 2), c2) == pytest.approx((np.pi - w) / (2 * np.pi), abs=1e-12)


def test_cap_overlap_orthogonal_hemispheres_mc():
    v = sample_uniform(RngStream(4242), 10_000_000).vector
    both = Cap((1, 0, 0), np.pi / 2).contains(v) & Cap((0, 0, 1), np.pi / 2).contains(v)
    assert Estimate.from_samples(both, 4242).compatible(0.25, 4.0)


def test_cap_overlap_matches_closed_form():
    gen = np.random.default_rng(5)
    for _ in range(300):
        h1, h2 = gen.uniform(0, np.pi, 2)
        a1, a2 = random_axis(gen), random_axis(gen)
        d = math.atan2(np.linalg.norm(np.cross(a1, a2)), a1 @ a2)
        assert cap_overlap_fraction(Cap(a1, h1), Cap(a2, h2)) == pytest.approx(closed_form_overlap(h1, h2, d), abs=1e-11)


def test_cap_overlap_matches_monte_carlo():
    n = 10_000_000
    v = sample_uniform(RngStream(777), n).vector
    gen = np.random.default_rng(9)
    for _ in range(50):
        c1 = Cap(random_axis(gen), gen.uniform(0, np.pi))
        c2 = Cap(random_axis(gen), gen.uniform(0, np.pi))
        est = Estimate.from_samples(c1.contains(v) & c2.contains(v), 777)
        assert est.compatible(cap_overlap_fraction(c1, c2), 4.0)


def test_cap_overlap_monotone_in_separation():
    for h1, h2 in [(0.4, 1.1), (1.5, 2.2), (2.8, 0.3)]:
        vals = [
            cap_overlap_fraction(Cap((1, 0, 0), h1), Cap((np.cos(w), 0, np.sin(w)), h2)) for w in np.linspace(0, np.pi, 40)
        ]
        assert np.all(np.diff(vals) <= 1e-13)
