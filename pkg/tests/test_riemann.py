import math

import numpy as np
import pytest

from wandering_lab.disk_geometry import hyp_dist
from wandering_lab.riemann import (
    DomainError,
    RiemannMapNumeric,
    annulus_modulus,
    band_chart,
    cached_riemann_map,
    hyperbolic_distance_in_domain,
    is_simple_polyline,
    riemann_map,
)


def circle(rho, n, center=0):
    t = 2 * np.pi * np.arange(n) / n
    return center + rho * np.exp(1j * t)


def ellipse(a, b, n):
    t = 2 * np.pi * np.arange(n) / n
    return a * np.cos(t) + 1j * b * np.sin(t)


def test_circle_is_scaling():
    rm = riemann_map(circle(0.7, 512))
    z = np.array([0.1, 0.3j, -0.5 + 0.2j, 0.0])
    assert np.max(np.abs(rm.forward(z) - z / 0.7)) < rm.accuracy
    assert rm.accuracy < 1e-4 and not rm.degraded


def test_equipotential_circle_of_square_map():
    rm = riemann_map(circle(4.0, 512))
    assert abs(rm.forward(1 + 1j) - (1 + 1j) / 4) < 1e-6


def test_normalisation_and_inverse():
    rm = riemann_map(ellipse(1.2, 0.8, 512))
    assert abs(rm.forward(0)) < rm.accuracy
    d0 = rm.derivative_at_zero()
    assert abs(math.atan2(d0.imag, d0.real)) < 1e-3
    w = 0.8 * np.exp(1j * np.linspace(0, 6, 17)) * np.linspace(0.1, 1, 17)
    assert np.max(np.abs(rm.forward(rm.inverse(w)) - w)) < 2 * rm.accuracy


def test_ellipse_self_convergence():
    ref = riemann_map(ellipse(1.2, 0.8, 2048))
    rm = riemann_map(ellipse(1.2, 0.8, 512))
    cr = 1 / abs(rm.derivative_at_zero())
    cr_ref = 1 / abs(ref.derivative_at_zero())
    assert abs(cr - cr_ref) < 1e-3
    z = np.array([0.3, -0.4j, 0.5 + 0.2j])
    doubled = riemann_map(ellipse(1.2, 0.8, 1024))
    assert np.max(np.abs(doubled.forward(z) - rm.forward(z))) < rm.accuracy


def test_cross_ratio_preserved_on_offcenter_disk():
    # the map of an off-centre disk is a Moebius map, so cross-ratios are invariant
    rm = riemann_map(circle(1.0, 1024, center=0.3))
    rng = np.random.default_rng(3)

    def cr(p):
        return (p[0] - p[2]) * (p[1] - p[3]) / ((p[0] - p[3]) * (p[1] - p[2]))

    for _ in range(20):
        th = np.sort(rng.uniform(0, 2 * np.pi, 4))
        z = 0.3 + rng.uniform(0.2, 0.9) * np.exp(1j * th)
        w = rm.forward(z)
        assert abs(abs(cr(w)) - abs(cr(z))) < 10 * rm.accuracy


def test_hyperbolic_distance_in_domain():
    rho = 2.0
    rm = riemann_map(circle(rho, 512))
    z, w = 0.4 + 0.2j, -0.9j
    assert hyperbolic_distance_in_domain(rm, z, w) == pytest.approx(hyp_dist(z / rho, w / rho), abs=1e-5)
    assert hyperbolic_distance_in_domain(rm, z, z) == 0.0
    with pytest.raises(ValueError):
        hyperbolic_distance_in_domain(rm, 0, 3.0)


def test_schwarz_pick_monotone_in_nested_domains():
    small = riemann_map(ellipse(1.2, 0.8, 512))
    big = riemann_map(ellipse(1.5, 1.1, 512))
    rng = np.random.default_rng(11)
    for _ in range(20):
        z, w = 0.5 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
        assert hyperbolic_distance_in_domain(big, z, w) <= hyperbolic_distance_in_domain(small, z, w) + 1e-9


def test_rejections():
    with pytest.raises(DomainError):
        riemann_map(circle(1.0, 64, center=3.0))
    figure8 = np.concatenate([circle(1, 32, 1.0), circle(1, 32, -1.0)[::-1]])
    assert not is_simple_polyline(figure8)
    assert is_simple_polyline(circle(1.0, 32))
    with pytest.raises(DomainError):
        riemann_map(np.array([1, 2j, -1, 0.5j, 0.2, 1j, -0.5, -1j]))


def test_cache_round_trip(tmp_path):
    b = ellipse(1.1, 0.9, 256)
    rm = cached_riemann_map(b, 1e-3, tmp_path)
    again = cached_riemann_map(b, 1e-3, tmp_path)
    assert len(list(tmp_path.iterdir())) == 1
    z = np.array([0.2 + 0.1j, -0.3])
    assert np.allclose(rm.forward(z), again.forward(z), atol=0, rtol=0)
    assert isinstance(again, RiemannMapNumeric)


def test_annulus_modulus_round():
    for r, R in ((0.3, 0.8), (0.5, 0.6)):
        m = annulus_modulus(circle(r, 128), circle(R, 128))
        assert m == pytest.approx(math.log(R / r) / (2 * math.pi), abs=1e-12)


def test_band_chart_maps_to_round_annulus():
    inner = circle(0.4, 256)
    outer = ellipse(1.0, 0.8, 256)
    ch = band_chart(inner, outer)
    assert ch.residual < 1e-6
    assert np.allclose(np.abs(ch(inner)), 1.0, atol=1e-6)
    assert np.allclose(np.abs(ch(outer)), math.exp(1 / ch.beta), rtol=1e-6)
    assert 0 < ch.modulus < math.log(1.0 / 0.4) / (2 * math.pi)
