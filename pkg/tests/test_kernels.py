import subprocess
import sys

import numpy as np
import pytest

from wandering_lab import kernels

BACKENDS = kernels.available_backends()


def test_fallback_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_pure_env_selects_fallback():
    code = "import wandering_lab.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"WANDERING_LAB_PURE": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("name", BACKENDS)
def test_green_escape_power_map(name):
    k = kernels.get_backend(name)
    z = np.array([2.0, 0.5, 3j, 1.0 + 1.0j])
    g, it, esc = k.green_escape(np.array([0, 0, 1], dtype=complex), z, 200, 1e10)
    with np.errstate(divide="ignore"):
        expect = np.where(np.abs(z) > 1, np.log(np.abs(z)), 0.0)
    assert np.allclose(g, expect, atol=1e-12)
    assert list(esc) == [True, False, True, True]


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
def test_backends_agree():
    py, cy = kernels.get_backend("python"), kernels.get_backend("cython")
    rng = np.random.default_rng(1)
    zs = rng.uniform(-2, 2, (40, 50)) + 1j * rng.uniform(-2, 2, (40, 50))
    coeffs = np.array([0, 0.5, 1], dtype=complex)
    a, b = py.green_escape(coeffs, zs, 300, 1e8), cy.green_escape(coeffs, zs, 300, 1e8)
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])
    assert np.allclose(a[0], b[0], rtol=1e-13, atol=0)
    zeros = np.array([0, 0.3, -0.2 + 0.5j])
    w = 0.9 * np.exp(2j * np.pi * rng.uniform(0, 1, 1000))
    assert np.allclose(py.blaschke_eval(zeros, 1j, w), cy.blaschke_eval(zeros, 1j, w),
                       rtol=1e-14, atol=1e-15)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_benchmark_script_runs():
    root = __file__.rsplit("/tests/", 1)[0]
    out = subprocess.run([sys.executable, f"{root}/benchmarks/bench_kernels.py", "--size", "32",
                          "--repeat", "1"], capture_output=True, text=True, check=True)
    assert "green_escape" in out.stdout
