import math

import numpy as np
import pytest

from wandering_lab.blaschke import BlaschkeProduct, evaluate
from wandering_lab.blaschke_seq import BlaschkeSequence
from wandering_lab.qc_numerics import (CircleMapSamples, GridMap, RoundAnnulus, annulus_interpolate,
                                       beurling_ahlfors_extend, build_gluing_maps,
                                       estimate_dilatation, gluing_radius, quasisymmetry_constant,
                                       twist_dilatation)


def cartesian(f, h=0.02, lo=-1.0, hi=1.0):
    x = np.arange(lo, hi + h / 2, h)
    X, Y = np.meshgrid(x, x)
    return GridMap("cartesian", x, x, f(X + 1j * Y))


def test_identity_has_K_one():
    rep = estimate_dilatation(cartesian(lambda z: z))
    assert abs(rep.K_max - 1) < 1e-6
    assert rep.orientation_violations == 0


def test_affine_map_K_three():
    rep = estimate_dilatation(cartesian(lambda z: z + 0.5 * np.conj(z)))
    assert abs(rep.K_max - 3) < 1e-2
    assert np.allclose(rep.mu_field[1:-1, 1:-1], 0.5)


def test_square_on_annulus_is_conformal():
    s = np.linspace(math.log(0.5), math.log(0.9), 40)
    t = 2 * np.pi * np.arange(256) / 256
    z = np.exp(s[None, :] + 1j * t[:, None])
    rep = estimate_dilatation(GridMap("logpolar", s, t, z ** 2))
    assert abs(rep.K_max - 1) < 1e-3


def test_orientation_reversal_detected():
    rep = estimate_dilatation(cartesian(np.conj))
    assert rep.orientation_violations > 0
    assert rep.K_max == math.inf


def test_dilatation_second_order_on_nonlinear_map():
    # affine maps are differenced exactly, so use a cubic perturbation
    errs = []
    for h in (0.04, 0.02):
        g = cartesian(lambda z: z + 0.1 * np.conj(z) ** 3, h)
        rep = estimate_dilatation(g)
        z = g.nodes()[1:-1, 1:-1]
        m = (0.3 * np.abs(z) ** 2).max()
        errs.append(abs(rep.K_max - (1 + m) / (1 - m)))
    assert errs[0] / errs[1] >= 3


def test_undefined_nodes_are_skipped():
    g = cartesian(lambda z: z + 0.2 * np.conj(z))
    g.values[10:20, 10:20] = np.nan
    rep = estimate_dilatation(g)
    assert abs(rep.K_max - 1.5) < 1e-9
    assert np.isnan(rep.mu_field[15, 15])


def test_quasisymmetry_identity_and_ellipse():
    ident = CircleMapSamples.from_function(lambda z: z, 1.0, 512)
    assert abs(quasisymmetry_constant(ident) - 1) < 1e-9
    ell = CircleMapSamples.from_function(lambda z: z + 0.3 * np.conj(z), 1.0, 1024)
    assert 1.5 <= quasisymmetry_constant(ell) <= 1.9


def test_quasisymmetry_rejects_coincident_images():
    t = 2 * np.pi * np.arange(64) / 64
    img = np.exp(1j * t)
    img[5] = img[4]
    with pytest.raises(ValueError):
        quasisymmetry_constant(CircleMapSamples(1.0, t, img))


def test_circle_samples_validate_angles():
    with pytest.raises(ValueError):
        CircleMapSamples(1.0, [0.0, 2.0, 1.0], [1, 2, 3])


def test_beurling_ahlfors_identity_and_scaling():
    x = np.linspace(-1, 1, 21)
    y = np.linspace(0.1, 1, 10)
    g = beurling_ahlfors_extend(lambda q: q, x, y)
    assert np.abs(g.values - g.nodes()).max() < 1e-12
    g2 = beurling_ahlfors_extend(lambda q: 2 * q, x, y)
    assert abs(estimate_dilatation(g2).K_max - 1) < 1e-9


def test_beurling_ahlfors_refinement_stable():
    Ks = []
    for n in (65, 129):
        x = np.linspace(0, 2 * np.pi, n)
        y = np.linspace(0.05, 1.0, n // 2)
        g = beurling_ahlfors_extend(lambda q: q + 0.2 * np.sin(q), x, y, n_quad=256)
        Ks.append(estimate_dilatation(g).K_max)
    assert abs(Ks[1] - Ks[0]) / Ks[1] < 0.05


def test_beurling_ahlfors_sampled_lift_matches_callable():
    xs = np.linspace(0, 2 * np.pi, 2049)[:-1]
    f = lambda q: q + 0.2 * np.sin(q)  # noqa: E731
    x = np.linspace(0, 2 * np.pi, 33)
    y = np.linspace(0.1, 0.5, 5)
    a = beurling_ahlfors_extend(f, x, y)
    b = beurling_ahlfors_extend((xs, f(xs)), x, y, period=2 * np.pi)
    assert np.abs(a.values - b.values).max() < 1e-5


def test_beurling_ahlfors_rejects_non_monotone():
    xs = np.linspace(0, 1, 10)
    with pytest.raises(ValueError):
        beurling_ahlfors_extend((xs, np.sin(5 * xs)), xs, [0.1, 0.2])


def test_annulus_twist_dilatation():
    alpha, r_in, r_out = 0.8, 0.5, 0.9
    t = 2 * np.pi * np.arange(256) / 256
    inner = CircleMapSamples(r_in, t, r_in * np.exp(1j * (t + alpha)))
    outer = CircleMapSamples(r_out, t, r_out * np.exp(1j * t))
    g = annulus_interpolate(inner, outer, RoundAnnulus(r_in, r_out, 40, 256))
    assert np.array_equal(g.values[:, 0], inner.images)
    assert np.array_equal(g.values[:, -1], outer.images)
    K = estimate_dilatation(g).K_max
    exact = twist_dilatation(alpha, r_in, r_out)
    assert abs(K - exact) / exact < 0.02


def test_annulus_interpolate_rejects_wrong_winding():
    t = 2 * np.pi * np.arange(64) / 64
    inner = CircleMapSamples(0.5, t, 0.5 * np.exp(2j * t))
    outer = CircleMapSamples(0.9, t, 0.9 * np.exp(1j * t))
    with pytest.raises(ValueError):
        annulus_interpolate(inner, outer, RoundAnnulus(0.5, 0.9, 8, 64))


def test_grid_map_raster_roundtrip(tmp_path):
    g = cartesian(lambda z: z * z, 0.1)
    g.values[0, 0] = np.nan
    g.save_raster(tmp_path / "g.bin")
    back = GridMap.load_raster(tmp_path / "g.bin")
    assert back.kind == g.kind
    assert np.array_equal(back.values, g.values, equal_nan=True)
    g.to_csv(tmp_path / "g.csv")
    assert (tmp_path / "g.csv").read_text().count("\n") == g.values.size + 1


def test_gluing_self_is_identity():
    seq = BlaschkeSequence.power(2)
    grids, rep, gm = build_gluing_maps(seq, 0.5, 2, 2, n_boundary=128, n_t=64)
    z = 0.8 * np.exp(1j * np.linspace(0, 6, 20))
    assert np.abs(gm.evaluate(0, z) - z).max() < 1e-12
    assert max(rep.K_max) < 1 + 1e-6


def test_gluing_functional_equation_and_identity_zone():
    b = BlaschkeProduct((0j, 0.3))
    seq = BlaschkeSequence.constant(b)
    grids, rep, gm = build_gluing_maps(seq, 0.6, 2, 2, n_boundary=256, n_t=128)
    assert max(rep.residuals) < 1e-10
    assert max(rep.identity_deviation) == 0
    # continuity across S_{r_0}
    rn = gm.rn(0)
    t = np.linspace(0, 2 * np.pi, 50)
    lo = gm.evaluate(0, (rn - 1e-9) * np.exp(1j * t))
    hi = gm.evaluate(0, (rn + 1e-9) * np.exp(1j * t))
    assert np.abs(lo - hi).max() < 1e-6
    # on S_{r_0} the map is the boundary branch of b~^{-1}(z^2)
    w = gm.evaluate(0, rn * np.exp(1j * t))
    assert np.abs(evaluate(b, w) - (rn * np.exp(1j * t)) ** 2).max() < 1e-10


def test_gluing_requires_critical_values_inside():
    seq = BlaschkeSequence.constant(BlaschkeProduct((0j, 0.3)))
    with pytest.raises(ValueError):
        build_gluing_maps(seq, 0.5, 1, 1)


def test_gluing_radius_admissible():
    b = BlaschkeProduct((0j, 0.3))
    r = gluing_radius([b])
    assert 0.3 < r * r < 0.36
