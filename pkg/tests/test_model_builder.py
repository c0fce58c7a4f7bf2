import math

import numpy as np
import pytest

from wandering_lab.blaschke_seq import certify_uniform_hyperbolicity
from wandering_lab.disk_geometry import hyp_dist
from wandering_lab.model_builder import (PolynomialModel, build_model, coexistence_experiment,
                                         critical_distance_profile, rabbit_figure_data,
                                         rabbit_fixture, rabbit_lambda, semiconjugacy_residual,
                                         sequence_from_model_spec, template_check, template_G,
                                         template_G_prime, template_g, template_g_prime,
                                         template_orbit_probe, template_point, template_q)
from wandering_lab.poly_dynamics import Polynomial, external_ray_point, green_value

HALF = Polynomial((0, 0.5, 1))


@pytest.fixture(scope="module")
def half_model():
    return build_model(HALF, 4.0, 8)


def test_power_map_model_is_power_map():
    m = build_model(Polynomial((0, 0, 1)), 2.0, 3)
    for b in m.blaschke:
        assert b.degree == 2
        assert max(abs(a) for a in b.zeros) < 1e-9
    assert max(m.residuals) < 1e-3


def test_half_model_zeros_and_residuals(half_model):
    assert max(half_model.residuals) < 1e-2
    for n, b in enumerate(half_model.blaschke):
        assert b.degree == 2 and b.zeros[0] == 0
        expected = complex(half_model.maps[n](np.array([-0.5]))[0])
        assert abs(b.zeros[1] - expected) < 1e-12


def test_half_model_uniformly_hyperbolic(half_model):
    prof = critical_distance_profile(half_model)
    assert all(b <= a + 0.02 for a, b in zip(prof, prof[1:]))
    assert all(p <= prof[0] + 1e-12 for p in prof)
    # strictly nested domains: strict decrease while the value is resolvable
    assert prof[1] < prof[0] and prof[2] < prof[1]
    cert = certify_uniform_hyperbolicity(half_model.sequence(), 7)
    assert cert.uniformly_hyperbolic
    c0 = max(hyp_dist(0, c) for c in half_model.blaschke[0].critical_points())
    assert cert.C_est <= c0 + 0.05
    assert abs(prof[0] - c0) < 1e-3


def test_model_rejects_bad_input():
    with pytest.raises(ValueError):
        build_model(Polynomial((0.1, 0.5, 1)), 4.0, 2)
    with pytest.raises(ValueError):
        build_model(HALF, 1.0, 2)


def test_model_rotation_fingerprints_agree():
    a = build_model(HALF, 4.0, 2)
    b = build_model(HALF, 4.0, 2, n_samples=1024)
    for fa, fb in zip(a.fingerprints(), b.fingerprints()):
        assert np.allclose(fa["abs_zeros"], fb["abs_zeros"], atol=1e-3)
        assert abs(fa["abs_multiplier"] - fb["abs_multiplier"]) < 1e-3


def test_manifest_roundtrip(tmp_path):
    m = build_model(HALF, 4.0, 2)
    path = m.save_manifest(tmp_path)
    back = PolynomialModel.load_manifest(path)
    assert back.blaschke == m.blaschke
    z = np.array([0.3 + 0.1j])
    assert np.allclose(back.maps[1](z), m.maps[1](z))


def test_sequence_from_model_spec():
    seq = sequence_from_model_spec("lambda:0.5;R=4;n=2")
    assert len(seq) == 2 and seq[0].degree == 2


def test_template_identities():
    for d in (2, 3, 4):
        assert abs(template_G(-1.0, d) + 1) < 1e-14
        assert abs(template_G_prime(-1.0, d)) < 1e-14
        assert template_G(0.0, d) == 0 and template_G_prime(0.0, d) == 0
        for k in (1, 2, 4):
            zk = template_point(k)
            assert abs(template_g(zk, d) - template_point(2 * k)) < 1e-12
            assert abs(template_g_prime(zk, d)) < 1e-10


def test_template_derivatives_match_differences():
    for d in (2, 3):
        w = 0.3 - 0.7j
        h = 1e-6
        fd = (template_g(w + h, d) - template_g(w - h, d)) / (2 * h)
        assert abs(fd - template_g_prime(w, d)) < 1e-6
        z = -0.4 + 0.2j
        fd = (template_G(z + h, d) - template_G(z - h, d)) / (2 * h)
        assert abs(fd - template_G_prime(z, d)) < 1e-6
        q = (template_q(z + h, d) - template_q(z - h, d)) / (2 * h)
        assert abs(q - (2 / z) * ((1 + z) ** (d - 1) - 1)) < 1e-6


def test_semiconjugacy_including_extreme_magnitudes():
    rng = np.random.default_rng(5)
    w = 10 * np.sqrt(rng.uniform(0, 1, 500)) * np.exp(2j * np.pi * rng.uniform(0, 1, 500))
    for d in (2, 3):
        assert semiconjugacy_residual(w, d).max() < 1e-10
    small = np.array([0.2 + 0.3j, -1 + 2j])
    assert np.allclose(np.exp(template_g(small, 2)), template_G(np.exp(small), 2), rtol=1e-13)


def test_template_check_report():
    rep = template_check(2)
    assert rep["g_zk_residual"] < 1e-10 and rep["semiconjugacy_residual"] < 1e-10


def test_template_orbit_probe():
    tr = template_orbit_probe(2, template_point(1), 6)
    for k, w in enumerate(tr.points[1:], start=1):
        assert abs(w - template_point(2 ** k)) < 1e-9
    near = template_orbit_probe(2, template_point(1) + 0.1, 30)
    assert near.in_basin and near.overflow
    # exp of the trace follows G
    m = min(len(near.points), len(near.exp_points))
    assert np.allclose(np.exp(near.points[:4]), near.exp_points[:4], rtol=1e-9)
    assert m >= 4


def test_rabbit_fixture():
    lam = rabbit_lambda()
    P = rabbit_fixture()
    alpha = lam / 2
    c = complex(-0.123, 0.745)
    assert abs(alpha * alpha + c - alpha) < 1e-14
    assert abs(P.derivative(0) - lam) < 1e-15
    data = rabbit_figure_data(32)
    assert data["green"].shape == (32, 32)


def test_rabbit_external_ray_bends():
    # rays of a complex multiplier are not radial: a plain radial predictor stalls
    P = rabbit_fixture()
    z = external_ray_point(P, math.log(2), 0.0)
    assert abs(green_value(P, z) - math.log(2)) < 1e-10


@pytest.mark.slow
def test_coexistence_verdicts():
    res = coexistence_experiment(0.5, 8, n_max=2, raster=64)
    assert res.report["verdicts"] == ["discrete-evidence", "indiscrete-evidence"]
    assert res.report["schema"] == "wandering-lab/v1"
    with pytest.raises(ValueError):
        coexistence_experiment(0.5, 4, n_max=1, z2_level=0.0)
