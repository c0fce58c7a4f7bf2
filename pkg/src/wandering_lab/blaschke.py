"""Finite Blaschke products of the unit disk, normalised to fix 0.

A product is stored by its zero list and unimodular phase,

    b(z) = phase * prod_k (z - a_k) / (1 - conj(a_k) z),

with ``a_0 = 0`` for the normalised family. Root finding (critical points,
preimages) goes through companion-matrix eigenvalues followed by Newton
polishing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .disk_geometry import schwarz_preimage_radius


class RootFindingError(ArithmeticError):
    """Polynomial root finding produced an unusable root set."""

    def __init__(self, message, coefficients=None):
        super().__init__(message)
        self.coefficients = None if coefficients is None else np.asarray(coefficients)


class ContinuationError(ArithmeticError):
    """Newton continuation lost track of a branch."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class BlaschkeProduct:
    zeros: tuple
    phase: complex = 1 + 0j
    normalized: bool = True

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        if len(zs) < 1:
            raise ValueError("a Blaschke product needs at least one zero")
        for a in zs:
            if not abs(a) < 1.0:
                raise ValueError(f"zero {a!r} is not inside the unit disk")
        ph = complex(self.phase)
        if abs(abs(ph) - 1.0) > 1e-12:
            raise ValueError(f"phase must be unimodular, |phase| = {abs(ph)!r}")
        if self.normalized:
            if abs(zs[0]) > 1e-14:
                raise ValueError("normalised products need zeros[0] = 0")
            zs = (0j,) + zs[1:]
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "phase", ph / abs(ph))

    # construction helpers -------------------------------------------------
    @classmethod
    def power(cls, d: int) -> "BlaschkeProduct":
        """``z -> z^d``."""
        return cls((0j,) * d)

    @classmethod
    def from_nonzero(cls, nonzero: Sequence[complex], phase: complex = 1) -> "BlaschkeProduct":
        """Normalised product ``phase * z * prod (z - a)/(1 - conj(a) z)``."""
        return cls((0j,) + tuple(nonzero), phase)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def zeros_array(self) -> np.ndarray:
        return np.array(self.zeros, dtype=complex)

    # evaluation -----------------------------------------------------------
    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z):
        """Complex derivative ``b'(z)`` by the product rule (no division by ``b``)."""
        z = np.asarray(z, dtype=complex)
        a = self.zeros_array
        num = z[..., None] - a
        den = 1.0 - np.conj(a) * z[..., None]
        f = num / den
        fp = (1.0 - np.abs(a) ** 2) / den ** 2
        total = np.zeros(z.shape, dtype=complex)
        for k in range(len(a)):
            others = np.prod(np.delete(f, k, axis=-1), axis=-1) if len(a) > 1 else 1.0
            total = total + fp[..., k] * others
        out = self.phase * total
        return complex(out) if out.ndim == 0 else out

    def multiplier(self) -> complex:
        return multiplier(self)

    def critical_points(self) -> list:
        return critical_points(self)

    def preimages(self, w: complex) -> list:
        return preimages(self, w)

    # polynomial form ------------------------------------------------------
    def numerator_denominator(self):
        """Ascending coefficients of ``phase * prod(z - a)`` and ``prod(1 - conj(a) z)``."""
        a = self.zeros_array
        num = self.phase * npoly.polyfromroots(a) if len(a) else np.array([self.phase])
        den = np.array([1.0 + 0j])
        for ak in a:
            if ak != 0:
                den = npoly.polymul(den, [1.0, -np.conj(ak)])
        return np.asarray(num, dtype=complex), np.asarray(den, dtype=complex)

    # serialisation --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "phase_re": self.phase.real,
            "phase_im": self.phase.imag,
            "zeros": [[a.real, a.imag] for a in self.zeros],
        }

    @classmethod
    def from_dict(cls, data: dict, normalized: Optional[bool] = None) -> "BlaschkeProduct":
        zeros = tuple(complex(re, im) for re, im in data["zeros"])
        phase = complex(data.get("phase_re", 1.0), data.get("phase_im", 0.0))
        if normalized is None:
            normalized = bool(zeros) and abs(zeros[0]) <= 1e-14
        return cls(zeros, phase, normalized)


def evaluate(b: BlaschkeProduct, z):
    """Evaluate ``b`` at ``z`` (scalar or array) with ``|z| <= 1``."""
    scalar = np.isscalar(z)
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz) > 1.0 + 1e-12):
        raise ValueError("Blaschke products are evaluated on the closed unit disk only")
    out = kernels.blaschke_eval(b.zeros_array, b.phase, zz.reshape(-1)).reshape(zz.shape)
    return complex(out) if scalar or out.ndim == 0 else out


def multiplier(b: BlaschkeProduct) -> complex:
    """``b'(0) = phase * (-1)^(d-1) * prod_{k>=1} a_k`` for a normalised product."""
    if not b.normalized:
        raise ValueError("multiplier is defined for products normalised to fix 0")
    nz = b.zeros[1:]
    prod = 1 + 0j
    for a in nz:
        prod *= -a
    return b.phase * prod


def _roots_ascending(coeffs: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    scale = np.max(np.abs(c))
    # drop numerically vanishing leading terms
    while len(c) > 1 and abs(c[-1]) <= 1e-14 * scale:
        c = c[:-1]
    if len(c) <= 1:
        return np.array([], dtype=complex)
    try:
        return np.roots(c[::-1])
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"eigenvalue solver failed: {exc}", c) from exc


def critical_points(b: BlaschkeProduct) -> list:
    """The ``d - 1`` critical points of ``b`` inside the disk, with multiplicity."""
    d = b.degree
    if d < 2:
        raise ValueError("critical points need degree >= 2")
    num, den = b.numerator_denominator()
    crit_poly = npoly.polysub(npoly.polymul(npoly.polyder(num), den),
                              npoly.polymul(num, npoly.polyder(den)))
    roots = _roots_ascending(crit_poly)
    roots = roots[np.argsort(np.abs(roots), kind="stable")]
    inside = roots[: d - 1]
    if len(inside) < d - 1 or np.any(np.abs(inside) >= 1.0):
        raise RootFindingError(
            f"expected {d - 1} critical points inside the disk, found "
            f"{int(np.sum(np.abs(roots) < 1))}", crit_poly)
    dpoly = npoly.polyder(crit_poly)
    out = []
    for c in inside:
        fp = npoly.polyval(c, dpoly)
        if abs(fp) > 1e-8:
            cn = c - npoly.polyval(c, crit_poly) / fp
            if abs(npoly.polyval(cn, crit_poly)) <= abs(npoly.polyval(c, crit_poly)) and abs(cn) < 1:
                c = cn
        out.append(complex(c))
    return out


def _newton_polish(b: BlaschkeProduct, z: complex, w: complex, steps: int = 3) -> complex:
    for _ in range(steps):
        fp = b.derivative(z)
        if fp == 0:
            break
        dz = (evaluate(b, z) - w) / fp
        z = z - dz
        if abs(z) > 1:
            z = z / abs(z) * (1 - 1e-16)
        if abs(dz) < 1e-17:
            break
    return complex(z)


def preimages(b: BlaschkeProduct, w: complex) -> list:
    """All ``d`` solutions of ``b(z) = w`` in the disk, for ``|w| < 1``."""
    w = complex(w)
    if not abs(w) < 1:
        raise ValueError("preimages need |w| < 1")
    num, den = b.numerator_denominator()
    poly = npoly.polysub(num, w * den)
    roots = _roots_ascending(poly)
    kept = []
    for z in roots:
        if abs(z) < 1 - 1e-10:
            kept.append(z)
        elif abs(z) < 1 + 1e-10:
            # classify near-circle roots by residual rather than modulus
            zz = z / abs(z) * min(abs(z), 1.0)
            if abs(evaluate(b, zz) - w) < 1e-8:
                kept.append(zz)
    if len(kept) != b.degree:
        raise RootFindingError(
            f"found {len(kept)} preimages of {w!r} in the disk, expected {b.degree}", poly)
    return [_newton_polish(b, z, w) for z in kept]


@dataclass
class PreimageDomain:
    """``D_r = b^{-1}(D_r)`` traced as a closed polyline."""

    b: BlaschkeProduct
    r: float
    boundary: np.ndarray
    contains_disk_radius: float
    tolerance: float
    winding: int = 1
    meta: dict = field(default_factory=dict)

    def annulus_modulus(self, terms: int = 48) -> float:
        """Modulus of ``A^r = D_r minus closed D_r`` via the conformal band chart."""
        from .riemann import annulus_modulus

        n = len(self.boundary)
        t = 2 * np.pi * np.arange(n) / n
        inner = self.r * np.exp(1j * t)
        return annulus_modulus(inner, self.boundary, terms=terms)


def winding_number(poly: np.ndarray, center: complex = 0j) -> int:
    """Winding number of a closed polyline about ``center``."""
    p = np.asarray(poly, dtype=complex) - center
    ang = np.angle(np.roll(p, -1) / p)
    return int(round(ang.sum() / (2 * np.pi)))


def _check_hypothesis(b: BlaschkeProduct, r: float):
    if not (0 < r < 1):
        raise ValueError(f"r must lie in (0, 1), got {r}")
    m = max(abs(a) for a in b.zeros)
    if not m < r:
        raise ValueError(f"every zero must satisfy |a| < r; max |a| = {m} >= r = {r}")


def _value_and_derivative(zeros, phase, z):
    """Scalar ``(b(z), b'(z))`` by the running product rule; no numpy overhead."""
    val, der = phase, 0j
    for a in zeros:
        den = 1.0 - a.conjugate() * z
        u = (z - a) / den
        der = der * u + val * (1.0 - (a.real * a.real + a.imag * a.imag)) / (den * den)
        val = val * u
    return val, der


def _continue_preimage(b, z0, w_of_t, t0, t1, max_halvings=30):
    """Follow the branch of ``b^{-1}(w(t))`` through ``z0`` from ``t0`` to ``t1``."""
    zeros, phase = tuple(complex(a) for a in b.zeros), complex(b.phase)
    z, t = z0, t0
    h = t1 - t0
    halvings = 0
    while t < t1 - 1e-15 * max(1.0, abs(t1)):
        h = min(h, t1 - t)
        target = w_of_t(t + h)
        zn = z
        ok = False
        for _ in range(12):
            f, fp = _value_and_derivative(zeros, phase, zn)
            if fp == 0:
                break
            dz = (f - target) / fp
            zn = zn - dz
            if not abs(zn) < 1:
                break
            if abs(dz) < 1e-15:
                ok = True
                break
        if (ok and abs(_value_and_derivative(zeros, phase, zn)[0] - target) < 1e-12
                and abs(zn - z) < 0.25):
            z, t = zn, t + h
            halvings = max(0, halvings - 1)
            h = h * 1.5
        else:
            h *= 0.5
            halvings += 1
            if halvings > max_halvings:
                raise ContinuationError(f"continuation failed near t = {t!r}", location=t)
    return z


def _refined_min_modulus(b, boundary, w_of_t, total, levels=2, sub=32) -> float:
    """Minimum of ``|z|`` on the traced curve, not just at its vertices.

    The vertex minimum overestimates the curve minimum by a sagitta-sized
    amount, so the curve is re-traced ``sub`` times finer around the best
    vertex, ``levels`` times over.
    """
    n = len(boundary)
    k = int(np.argmin(np.abs(boundary)))
    z0, t0, h = boundary[(k - 1) % n], (k - 1) * total / n, total / n
    best = float(abs(boundary[k]))
    for _ in range(levels):
        ts = t0 + 2 * h * np.arange(sub + 1) / sub
        pts = [z0]
        for j in range(sub):
            pts.append(_continue_preimage(b, pts[-1], w_of_t, ts[j], ts[j + 1]))
        mods = np.abs(pts)
        j = int(np.argmin(mods[1:-1])) + 1
        best = min(best, float(mods[j]))
        z0, t0, h = pts[j - 1], ts[j - 1], 2 * h / sub
    return best


def preimage_domain(b: BlaschkeProduct, r: float, n_samples: int = 512) -> PreimageDomain:
    """Trace ``b^{-1}(S_r)`` by angular continuation.

    The boundary is a degree-``d`` cover of ``S_r``, so the image angle runs
    over ``[0, 2 pi d)``; ``n_samples`` points are returned, equally spaced
    in that image angle.
    """
    _check_hypothesis(b, r)
    d = b.degree
    if n_samples < 4 * d:
        raise ValueError("n_samples too small for the degree")
    seeds = preimages(b, r)
    z = min(seeds, key=lambda s: (abs(cmath.phase(s)), -abs(s)))
    total = 2 * np.pi * d
    ts = total * np.arange(n_samples + 1) / n_samples
    w_of_t = lambda t: r * cmath.exp(1j * t)  # noqa: E731
    pts = [z]
    for k in range(n_samples):
        z = _continue_preimage(b, z, w_of_t, ts[k], ts[k + 1])
        pts.append(z)
    if abs(pts[-1] - pts[0]) > 1e-8:
        raise ContinuationError("traced preimage curve does not close up", location=total)
    boundary = np.array(pts[:-1], dtype=complex)
    wind = winding_number(boundary)
    if wind != 1:
        raise ContinuationError(f"traced boundary winds {wind} times around 0")
    tol = float(np.max(np.abs(np.abs(evaluate(b, boundary)) - r)))
    rmin = _refined_min_modulus(b, boundary, w_of_t, total)
    if not rmin > r:
        raise ContinuationError("closed disk D_r is not inside the traced domain")
    return PreimageDomain(b=b, r=r, boundary=boundary, contains_disk_radius=rmin,
                          tolerance=tol, winding=wind,
                          meta={"schwarz_radius": schwarz_preimage_radius(r)})


def annulus_modulus_bounds(b: BlaschkeProduct, r: float) -> tuple:
    """Lower and upper bounds on ``Mod(A^r)``.

    ``lo = log(1/(r(2-r))) / (4 pi)`` and ``hi = (d-1)/(2 pi d) log(1/r)``.
    """
    _check_hypothesis(b, r)
    d = b.degree
    lo = math.log(1.0 / (r * (2.0 - r))) / (4.0 * math.pi)
    hi = (d - 1) / (2.0 * math.pi * d) * math.log(1.0 / r)
    return lo, hi


def random_normalized(rng: np.random.Generator, max_degree: int = 5, radius: float = 0.95,
                      min_degree: int = 2) -> BlaschkeProduct:
    """Random normalised product with nonzero zeros uniform (by area) in ``D_radius``."""
    d = int(rng.integers(min_degree, max_degree + 1))
    rho = radius * np.sqrt(rng.uniform(0, 1, size=d - 1))
    theta = rng.uniform(0, 2 * np.pi, size=d - 1)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return BlaschkeProduct.from_nonzero(rho * np.exp(1j * theta), phase)
