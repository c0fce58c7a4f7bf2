"""Numerical conformal maps: Jordan domains onto the disk, annuli onto round annuli.

The simply connected case uses the geodesic zipper algorithm. Each boundary
vertex is "unzipped" onto the real line by an elementary slit map of the
upper half-plane. The resulting chain is followed by a Cayley map that
sends the chosen interior point to 0 and a rotation making the derivative
there positive. Every link of the chain has an explicit inverse, so the
inverse map is evaluated exactly in closed form.

The doubly connected case (annulus modulus, band chart) fits the harmonic
measure of the outer boundary by a least-squares Laurent series plus a
logarithmic term.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .disk_geometry import hyp_dist


class DomainError(ValueError):
    """Boundary data does not describe a usable Jordan domain."""


# ---------------------------------------------------------------------------
# polyline helpers
# ---------------------------------------------------------------------------

def winding_number(poly, point: complex = 0j) -> int:
    p = np.asarray(poly, dtype=complex) - point
    ang = np.angle(np.roll(p, -1) / p)
    return int(round(float(ang.sum()) / (2 * np.pi)))


def inside_polyline(poly, points) -> np.ndarray:
    """Vectorised winding-number membership test for a closed polyline."""
    p = np.asarray(poly, dtype=complex)
    q = np.atleast_1d(np.asarray(points, dtype=complex))
    rel = p[None, :] - q[:, None]
    ang = np.angle(np.roll(rel, -1, axis=1) / rel).sum(axis=1)
    return np.abs(ang) > np.pi


def is_simple_polyline(poly) -> bool:
    """True when no two non-adjacent edges of the closed polyline intersect."""
    p = np.asarray(poly, dtype=complex)
    n = len(p)
    if n < 3:
        return False
    p = p / np.max(np.abs(p))
    a, b = p, np.roll(p, -1)
    d = b - a

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        di = d[i]
        o1 = cross(di, a[j] - a[i])
        o2 = cross(di, b[j] - a[i])
        o3 = cross(d[j], a[i] - a[j])
        o4 = cross(d[j], b[i] - a[j])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        if np.any(hit):
            return False
    return True


# ---------------------------------------------------------------------------
# zipper links
# ---------------------------------------------------------------------------

def _slit_map(z, a):
    """Map the upper half-plane minus the geodesic arc ``[0, a]`` onto itself.

    ``Z = z / (1 - z/b)`` straightens the arc onto ``[0, ic]`` and
    ``Z sqrt(1 + c^2/Z^2)`` opens that segment; the branch is the one
    asymptotic to ``Z`` at infinity, which is also correct on the real axis.
    """
    b = abs(a) ** 2 / a.real if a.real != 0 else math.inf
    c = abs(a) ** 2 / a.imag
    Z = z if math.isinf(b) else z / (1.0 - z / b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = Z * np.sqrt(1.0 + (c / Z) ** 2)
    out = np.where(Z == 0, c + 0j, out)
    return out


def _slit_map_tail(t, a):
    """Image of a boundary point sitting at ``t`` (possibly infinity)."""
    if t is None:
        b = abs(a) ** 2 / a.real if a.real != 0 else math.inf
        if math.isinf(b):
            return None
        c = abs(a) ** 2 / a.imag
        return complex(-b * math.sqrt(1.0 + (c / b) ** 2))
    return complex(_slit_map(np.array([t]), a)[0])


def _slit_inverse(w, a):
    b = abs(a) ** 2 / a.real if a.real != 0 else math.inf
    c = abs(a) ** 2 / a.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        Z = w * np.sqrt(1.0 - (c / w) ** 2)
    Z = np.where(w == 0, 1j * c, Z)
    return Z if math.isinf(b) else Z / (1.0 + Z / b)


@dataclass
class RiemannMapNumeric:
    """Conformal map of a Jordan domain onto the disk, ``0 -> 0``, ``psi'(0) > 0``."""

    boundary: np.ndarray
    scale: float
    z0: complex
    z1: complex
    slits: np.ndarray
    zeta0: complex
    sign: int
    w0: complex
    rotation: complex
    accuracy: float = math.nan
    degraded: bool = False
    meta: dict = field(default_factory=dict)

    # -- raw chain --------------------------------------------------------
    def _to_half_plane(self, z):
        u = np.asarray(z, dtype=complex) / self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1j * np.sqrt((u - self.z1) / (u - self.z0))
        for a in self.slits:
            w = _slit_map(w, a)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = w / (1.0 - w / self.zeta0)
        return self.sign * y * y

    def _from_half_plane(self, h):
        h = np.asarray(h, dtype=complex)
        if self.sign > 0:
            y = np.sqrt(h)
        else:
            y = -np.sqrt(-h)
        w = y / (1.0 + y / self.zeta0)
        for a in self.slits[::-1]:
            w = _slit_inverse(w, a)
        s2 = -w * w
        u = (s2 * self.z0 - self.z1) / (s2 - 1.0)
        return u * self.scale

    # -- public -----------------------------------------------------------
    def forward(self, z):
        """Evaluate ``psi`` (domain to disk)."""
        scalar = np.ndim(z) == 0
        h = self._to_half_plane(np.atleast_1d(z))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.rotation * (h - self.w0) / (h - np.conj(self.w0))
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    __call__ = forward

    def inverse(self, w):
        """Evaluate ``psi^{-1}`` (disk to domain) by inverting each link."""
        scalar = np.ndim(w) == 0
        u = np.atleast_1d(np.asarray(w, dtype=complex)) / self.rotation
        h = (self.w0 - u * np.conj(self.w0)) / (1.0 - u)
        out = self._from_half_plane(h)
        return complex(out[0]) if scalar else out.reshape(np.shape(w))

    def derivative_at_zero(self, h: float = 1e-4) -> complex:
        s = h * self.scale
        return (self.forward(s) - self.forward(-s)) / (2 * s)

    def contains(self, z) -> np.ndarray:
        return inside_polyline(self.boundary, z)

    def measure_accuracy(self) -> float:
        mid = 0.5 * (self.boundary + np.roll(self.boundary, -1))
        dev = np.max(np.abs(np.abs(self.forward(mid)) - 1.0))
        return float(dev + abs(self.forward(0j)))

    # -- persistence ------------------------------------------------------
    def save(self, path) -> None:
        np.savez(
            path,
            boundary=self.boundary,
            slits=self.slits,
            params=np.array([self.z0, self.z1, self.zeta0, self.w0, self.rotation,
                             self.scale, self.sign, self.accuracy, float(self.degraded)],
                            dtype=complex),
        )

    @classmethod
    def load(cls, path) -> "RiemannMapNumeric":
        with np.load(path) as f:
            z0, z1, zeta0, w0, rot, scale, sign, acc, deg = f["params"]
            return cls(boundary=f["boundary"], scale=scale.real, z0=complex(z0), z1=complex(z1),
                       slits=f["slits"], zeta0=complex(zeta0), sign=int(sign.real),
                       w0=complex(w0), rotation=complex(rot), accuracy=acc.real,
                       degraded=bool(deg.real))


def _zip(boundary: np.ndarray, scale: float) -> RiemannMapNumeric:
    u = boundary / scale
    n = len(u)
    z0, z1 = u[0], u[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = 1j * np.sqrt((u[2:] - z1) / (u[2:] - z0))
    tail = None  # image of z0, starts at infinity
    slits = np.empty(n - 2, dtype=complex)
    for k in range(n - 2):
        a = w[k]
        if not a.imag > 0:
            a = complex(a.real, max(a.imag, 1e-300))
        slits[k] = a
        w[k + 1:] = _slit_map(w[k + 1:], a)
        tail = _slit_map_tail(tail, a)
    if tail is None or not np.isfinite(tail):
        raise DomainError("zipper lost the base vertex at infinity")
    zeta0 = complex(tail.real, 0.0)
    rm = RiemannMapNumeric(boundary=boundary, scale=scale, z0=complex(z0), z1=complex(z1),
                           slits=slits, zeta0=zeta0, sign=1, w0=0j, rotation=1 + 0j)
    h0 = complex(rm._to_half_plane(np.array([0j]))[0])
    if h0.imag < 0:
        rm.sign = -1
        h0 = -h0
    rm.w0 = h0
    d0 = rm.derivative_at_zero()
    rm.rotation = abs(d0) / d0
    return rm


def riemann_map(boundary, accuracy: float = 1e-4, refine: Optional[Callable[[int], np.ndarray]] = None,
                max_refinements: int = 3) -> RiemannMapNumeric:
    """Conformal map of the domain bounded by ``boundary`` onto the unit disk.

    ``boundary`` is a closed polyline (first point not repeated) around 0.
    If the measured accuracy misses ``accuracy`` and ``refine`` is given,
    ``refine(n)`` is called for a boundary with ``2n`` samples, up to
    ``max_refinements`` times; the best map is returned with ``degraded`` set
    when the target is still not met.
    """
    pts = np.asarray(boundary, dtype=complex)
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(pts) < 8:
        raise DomainError("need at least 8 boundary samples")
    if not np.all(np.isfinite(pts)):
        raise DomainError("boundary contains non-finite samples")
    wind = winding_number(pts)
    if wind == -1:
        pts = pts[::-1].copy()
    elif wind != 1:
        raise DomainError(f"boundary winds {wind} times around 0; 0 must be inside")
    if not is_simple_polyline(pts):
        raise DomainError("boundary polyline is not simple")
    rm = _zip(pts, float(np.max(np.abs(pts))))
    rm.accuracy = rm.measure_accuracy()
    tries = 0
    while rm.accuracy > accuracy and refine is not None and tries < max_refinements:
        tries += 1
        finer = riemann_map(refine(2 * len(rm.boundary)), accuracy, None)
        if finer.accuracy < rm.accuracy:
            rm = finer
        else:
            break
    rm.degraded = bool(rm.accuracy > accuracy)
    rm.meta["refinements"] = tries
    return rm


def boundary_key(boundary, accuracy: float) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(np.asarray(boundary, dtype=complex)).tobytes())
    h.update(repr(float(accuracy)).encode())
    return h.hexdigest()


def cached_riemann_map(boundary, accuracy: float, cache_dir, **kwargs) -> RiemannMapNumeric:
    """:func:`riemann_map` memoised on disk under a content hash of the inputs."""
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, boundary_key(boundary, accuracy) + ".npz")
    if os.path.exists(path):
        return RiemannMapNumeric.load(path)
    rm = riemann_map(boundary, accuracy, **kwargs)
    rm.save(path)
    return rm


def hyperbolic_distance_in_domain(rm: RiemannMapNumeric, z: complex, w: complex) -> float:
    """Hyperbolic distance in the mapped domain (disk normalisation transported by ``psi``)."""
    inside = rm.contains(np.array([z, w]))
    if not np.all(inside):
        raise ValueError("both points must lie inside the domain")
    if z == w:
        return 0.0
    fz, fw = rm.forward(np.array([z, w]))
    return hyp_dist(complex(fz), complex(fw))


# ---------------------------------------------------------------------------
# annuli
# ---------------------------------------------------------------------------

@dataclass
class BandChart:
    """Conformal chart ``Psi(z) = z exp(h(z)/beta)`` of an annulus onto ``1 < |w| < exp(1/beta)``."""

    beta: float
    a0: float
    c: np.ndarray  # coefficients of (z/r_out)^k, k = 1..K
    d: np.ndarray  # coefficients of (r_in/z)^k
    r_in: float
    r_out: float
    residual: float

    @property
    def modulus(self) -> float:
        return 1.0 / (2.0 * math.pi * self.beta)

    def h(self, z):
        z = np.asarray(z, dtype=complex)
        K = len(self.c)
        out = np.full(z.shape, complex(self.a0))
        po = np.ones(z.shape, dtype=complex)
        pi = np.ones(z.shape, dtype=complex)
        uo, ui = z / self.r_out, self.r_in / z
        for k in range(K):
            po = po * uo
            pi = pi * ui
            out = out + self.c[k] * po + self.d[k] * pi
        return out

    def harmonic(self, z):
        """The fitted harmonic measure ``u`` (0 on the inner curve, 1 on the outer)."""
        z = np.asarray(z, dtype=complex)
        return self.beta * np.log(np.abs(z)) + self.h(z).real

    def log_chart(self, z):
        """``log Psi(z)``; the real part runs over ``[0, 1/beta]``."""
        z = np.asarray(z, dtype=complex)
        return np.log(z) + self.h(z) / self.beta

    def __call__(self, z):
        return np.exp(self.log_chart(z))


def band_chart(inner, outer, terms: int = 48) -> BandChart:
    """Least-squares harmonic measure of the annulus between two curves around 0."""
    inner = np.asarray(inner, dtype=complex)
    outer = np.asarray(outer, dtype=complex)
    if winding_number(inner) == 0 or winding_number(outer) == 0:
        raise DomainError("both boundary curves must wind around 0")
    r_in = float(np.max(np.abs(inner)))
    r_out = float(np.min(np.abs(outer)))
    if not r_in < float(np.max(np.abs(outer))):
        raise DomainError("inner curve must lie inside the outer curve")
    K = int(terms)
    z = np.concatenate([inner, outer])
    rhs = np.concatenate([np.zeros(len(inner)), np.ones(len(outer))])
    cols = [np.ones(len(z)), np.log(np.abs(z))]
    uo, ui = z / r_out, r_in / z
    po = np.ones(len(z), dtype=complex)
    pi = np.ones(len(z), dtype=complex)
    for _ in range(K):
        po = po * uo
        pi = pi * ui
        cols += [po.real, -po.imag, pi.real, -pi.imag]
    A = np.column_stack(cols)
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    sol, *_ = np.linalg.lstsq(A / norms, rhs, rcond=None)
    sol = sol / norms
    resid = float(np.max(np.abs(A @ sol - rhs)))
    a0, beta = sol[0], sol[1]
    rest = sol[2:].reshape(K, 4)
    c = rest[:, 0] + 1j * rest[:, 1]
    d = rest[:, 2] + 1j * rest[:, 3]
    if not beta > 0:
        raise DomainError("fitted harmonic measure has no positive flux")
    return BandChart(beta=float(beta), a0=float(a0), c=c, d=d, r_in=r_in, r_out=r_out,
                     residual=resid)


def annulus_modulus(inner, outer, terms: int = 48) -> float:
    """Modulus ``(1/2 pi) log(R/r)`` of the round annulus conformally equivalent to the region."""
    return band_chart(inner, outer, terms).modulus
