import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wandering_lab.disk_geometry import (
    DiskPoint,
    MoebiusDiskAuto,
    hyp_convex_hull_contains,
    hyp_dist,
    hyp_dist_array,
    hyp_dist_to_hull,
    schwarz_preimage_radius,
    uniform_schwarz_bound,
)

disk = st.builds(
    lambda r, t: r * complex(math.cos(t), math.sin(t)),
    st.floats(0, 0.98), st.floats(0, 2 * math.pi),
)


def test_diskpoint_rejects_boundary():
    with pytest.raises(ValueError):
        DiskPoint(1.0)
    with pytest.raises(ValueError):
        DiskPoint(complex("nan"))
    assert DiskPoint(0.5j).value == 0.5j


def test_hyp_dist_examples():
    assert hyp_dist(0, 0) == 0.0
    assert hyp_dist(0, 0.5) == pytest.approx(math.log(3), abs=1e-15)
    T = MoebiusDiskAuto(0.2 - 0.4j, np.exp(0.7j))
    z, w = 0.3j, 0.3j + 0.1
    assert hyp_dist(T(z), T(w)) == pytest.approx(hyp_dist(z, w), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(disk, disk, disk)
def test_metric_axioms(z, w, u):
    dzw = hyp_dist(z, w)
    assert dzw >= 0
    assert dzw == pytest.approx(hyp_dist(w, z), abs=1e-12)
    assert dzw <= hyp_dist(z, u) + hyp_dist(u, w) + 1e-12


@settings(max_examples=200, deadline=None)
@given(disk, disk, disk, st.floats(0, 2 * math.pi))
def test_moebius_invariance(z, w, a, theta):
    T = MoebiusDiskAuto(a, complex(math.cos(theta), math.sin(theta)))
    assert hyp_dist(T(z), T(w)) == pytest.approx(hyp_dist(z, w), abs=1e-12, rel=1e-10)
    Ti = T.inverse()
    assert abs(Ti(T(z)) - z) < 1e-12


def test_hyp_dist_array_matches_scalar(rng):
    z = 0.9 * rng.uniform(-1, 1, 20) * np.exp(1j * rng.uniform(0, 6, 20))
    w = 0.9 * rng.uniform(-1, 1, 20) * np.exp(1j * rng.uniform(0, 6, 20))
    ref = [hyp_dist(a, b) for a, b in zip(z, w)]
    assert np.allclose(hyp_dist_array(z, w), ref, atol=1e-13)


def test_schwarz_bound_examples():
    for r in (0.1, 0.5, 0.9):
        assert uniform_schwarz_bound(0, r) == pytest.approx(r)
        assert uniform_schwarz_bound(r, r) == pytest.approx(2 * r / (1 + r * r))
    assert uniform_schwarz_bound(0.5, 0.5) == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ValueError):
        uniform_schwarz_bound(1.0, 0.5)
    with pytest.raises(ValueError):
        uniform_schwarz_bound(0.5, 0.0)


def test_preimage_radius_examples():
    assert schwarz_preimage_radius(0.5) == pytest.approx(math.sqrt(1 / 3), abs=1e-15)
    assert schwarz_preimage_radius(2 / 3) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert schwarz_preimage_radius(1 - 1e-12) == pytest.approx(1.0, abs=1e-11)
    for r in (0.01, 0.3, 0.99):
        assert r < schwarz_preimage_radius(r) < 1
    with pytest.raises(ValueError):
        schwarz_preimage_radius(1.0)


def test_hull_examples():
    assert hyp_convex_hull_contains([0], 0, 1e-9)
    assert hyp_convex_hull_contains([-0.5, 0.5], 0, 1e-9)
    a = 0.6
    c = (1 - math.sqrt(1 - a * a)) / a  # root of a z^2 - 2z + a inside the disk
    assert hyp_convex_hull_contains([0, a], c, 1e-6)
    with pytest.raises(ValueError):
        hyp_convex_hull_contains([], 0, 1e-9)


def test_hull_exclusion_and_distance():
    # a point off the real segment [0, 0.6] is at positive distance
    assert not hyp_convex_hull_contains([0, 0.6], 0.3j, 1e-6)
    # distance from a point to a singleton hull equals the point distance
    assert hyp_dist_to_hull([0.2], -0.4j) == pytest.approx(hyp_dist(0.2, -0.4j), abs=1e-12)
    # distance to a geodesic through 0 along the real axis from i*y is log((1+y)/(1-y))
    y = 0.5
    assert hyp_dist_to_hull([-0.9, 0.9], 1j * y) == pytest.approx(math.log(3), abs=1e-12)
    # collinear points do not contain a point off their geodesic
    assert not hyp_convex_hull_contains([-0.5, 0, 0.5], 0.1j, 1e-6)
    # triangle containing the origin
    tri = [0.5, 0.5 * np.exp(2j * np.pi / 3), 0.5 * np.exp(4j * np.pi / 3)]
    assert hyp_convex_hull_contains(tri, 0.05 + 0.05j, 1e-12)
