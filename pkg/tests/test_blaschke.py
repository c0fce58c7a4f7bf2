import json
import math

import numpy as np
import pytest

from wandering_lab.blaschke import (
    BlaschkeProduct,
    RootFindingError,
    annulus_modulus_bounds,
    critical_points,
    evaluate,
    multiplier,
    preimage_domain,
    preimages,
    random_normalized,
)
from wandering_lab.disk_geometry import (
    hyp_convex_hull_contains,
    schwarz_preimage_radius,
    uniform_schwarz_bound,
)


def test_construction_rules():
    with pytest.raises(ValueError):
        BlaschkeProduct((0, 1.0))
    with pytest.raises(ValueError):
        BlaschkeProduct((0.1, 0.2))  # normalised needs zeros[0] = 0
    with pytest.raises(ValueError):
        BlaschkeProduct((0,), phase=1.1)
    b = BlaschkeProduct((0.1, 0.2), normalized=False)
    assert b.degree == 2
    with pytest.raises(ValueError):
        multiplier(b)


def test_eval_examples():
    assert evaluate(BlaschkeProduct.power(2), 0.3j) == pytest.approx(-0.09, abs=1e-16)
    b = BlaschkeProduct((0, 0.6))
    assert abs(evaluate(b, 0.6)) < 1e-16
    assert evaluate(b, 0.9) == pytest.approx(0.9 * 0.3 / (1 - 0.54), abs=1e-15)
    with pytest.raises(ValueError):
        evaluate(b, 1.01)


def test_boundary_preservation(rng):
    for _ in range(50):
        b = random_normalized(rng, 6, 0.97)
        t = rng.uniform(0, 2 * np.pi, 64)
        assert np.max(np.abs(np.abs(b(np.exp(1j * t))) - 1)) < 1e-12
        z = 0.99 * np.sqrt(rng.uniform(0, 1, 64)) * np.exp(1j * t)
        assert np.all(np.abs(b(z)) < 1)


def test_multiplier_examples(rng):
    assert multiplier(BlaschkeProduct.power(4)) == 0
    a = 0.3 - 0.2j
    assert multiplier(BlaschkeProduct((0, a))) == pytest.approx(-a)
    assert multiplier(BlaschkeProduct((0, 0.5, 0.4j))) == pytest.approx(0.2j, abs=1e-16)
    h = 1e-5
    for _ in range(20):
        b = random_normalized(rng)
        fd = (b(h) - b(-h) + 1j * (b(-1j * h) - b(1j * h))) / (4 * h)
        assert abs(fd - multiplier(b)) < 1e-10
        assert abs(b.derivative(0.0) - multiplier(b)) < 1e-14


def test_multiplier_bound_by_zero_radius(rng):
    for _ in range(200):
        r = rng.uniform(0.2, 0.95)
        b = random_normalized(rng, 6, r * 0.999)
        assert abs(multiplier(b)) < r ** (b.degree - 1)


def test_critical_point_examples():
    assert np.allclose(critical_points(BlaschkeProduct.power(2)), [0])
    assert np.allclose(critical_points(BlaschkeProduct.power(4)), [0, 0, 0], atol=1e-5)
    a = 0.6
    # numerator of b' for z(z-a)/(1-az): a z^2 - 2 z + a
    c = (1 - math.sqrt(1 - a * a)) / a
    (got,) = critical_points(BlaschkeProduct((0, a)))
    assert abs(got - c) < 1e-14


def test_critical_points_in_hull(rng):
    for _ in range(500):
        b = random_normalized(rng, 6, 0.95)
        cps = critical_points(b)
        assert len(cps) == b.degree - 1
        for c in cps:
            assert abs(c) < 1
            assert abs(b.derivative(c)) < 1e-8
            assert hyp_convex_hull_contains(b.zeros, c, 1e-6)


def test_preimage_examples(rng):
    got = sorted(preimages(BlaschkeProduct.power(2), 0.25), key=lambda z: z.real)
    assert np.allclose(got, [-0.5, 0.5], atol=1e-15)
    for _ in range(20):
        b = random_normalized(rng)
        pre = preimages(b, 0)
        for a in b.zeros:
            assert min(abs(np.array(pre) - a)) < 1e-7
    b = BlaschkeProduct((0, 0.6))
    for z in preimages(b, 0.1):
        assert abs(b(z) - 0.1) < 1e-10
    with pytest.raises(ValueError):
        preimages(b, 1.0)


def test_preimage_residuals_and_composition(rng):
    for _ in range(50):
        b1, b2 = random_normalized(rng, 4), random_normalized(rng, 4)
        w = 0.8 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        first = preimages(b2, w)
        assert all(abs(b2(z) - w) < 1e-10 for z in first)
        second = [z for u in first for z in preimages(b1, u)]
        assert len(second) == b1.degree * b2.degree


def test_uniform_schwarz_property(rng):
    for _ in range(1000):
        g = random_normalized(rng, 5, 0.98)
        r = rng.uniform(0.05, 0.95)
        z = r * np.sqrt(rng.uniform(0, 1, 8)) * np.exp(2j * np.pi * rng.uniform(0, 1, 8))
        c = uniform_schwarz_bound(abs(multiplier(g)), r)
        assert np.all(np.abs(g(z)) <= c * np.abs(z) + 1e-12)


def test_preimage_domain_power_maps():
    for d in (2, 3, 5):
        r = 0.4
        dom = preimage_domain(BlaschkeProduct.power(d), r, 256)
        assert np.allclose(np.abs(dom.boundary), r ** (1 / d), atol=1e-12)
        assert dom.winding == 1
        lo, hi = annulus_modulus_bounds(BlaschkeProduct.power(d), r)
        assert dom.annulus_modulus() == pytest.approx(hi, abs=1e-8)
        assert lo <= hi


def test_preimage_domain_random(rng):
    for _ in range(30):
        r = rng.uniform(0.3, 0.9)
        b = random_normalized(rng, 5, r * 0.95)
        dom = preimage_domain(b, r, 128 * b.degree)
        assert dom.tolerance < 1e-12
        assert dom.contains_disk_radius >= schwarz_preimage_radius(r) - 1e-6


def test_preimage_domain_rejects_hypothesis_violation():
    b = BlaschkeProduct((0, 0.7))
    with pytest.raises(ValueError):
        preimage_domain(b, 0.5, 128)
    with pytest.raises(ValueError):
        annulus_modulus_bounds(b, 0.5)


def test_modulus_bounds_examples():
    lo, hi = annulus_modulus_bounds(BlaschkeProduct((0, 0.1)), 0.5)
    assert lo == pytest.approx(math.log(4 / 3) / (4 * math.pi), abs=1e-15)
    assert hi == pytest.approx(math.log(4) / (8 * math.pi), abs=1e-15)
    lo, hi = annulus_modulus_bounds(BlaschkeProduct.power(3), 1 - 1e-9)
    assert lo < 1e-9 and hi < 1e-9


def test_modulus_within_bounds(rng):
    for _ in range(10):
        r = rng.uniform(0.3, 0.8)
        b = random_normalized(rng, 4, r * 0.9)
        dom = preimage_domain(b, r, 256 * b.degree)
        lo, hi = annulus_modulus_bounds(b, r)
        m = dom.annulus_modulus()
        assert lo - 1e-6 <= m <= hi + 1e-6


def test_json_round_trip(rng):
    b = random_normalized(rng)
    text = json.dumps(b.to_dict())
    back = BlaschkeProduct.from_dict(json.loads(text))
    assert back == b
    assert set(json.loads(text)) == {"phase_re", "phase_im", "zeros"}
