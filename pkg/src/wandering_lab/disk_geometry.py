"""Hyperbolic geometry of the unit disk.

All distances use the metric of density ``2 / (1 - |z|^2)``, so that
``hyp_dist(0, z) = log((1 + |z|) / (1 - |z|))``. Every hyperbolic distance in
the package goes through :func:`hyp_dist`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Union

import numpy as np


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk. Moduli ``>= 1`` are rejected, never clamped."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (abs(v) < 1.0) or not cmath.isfinite(v):
            raise ValueError(f"DiskPoint requires |value| < 1, got {v!r}")
        object.__setattr__(self, "value", v)

    def __complex__(self):
        return self.value


PointLike = Union[DiskPoint, complex, float]

# largest float below 1; keeps atanh finite for points rounding onto the circle
_T_MAX = 1.0 - 2.0 ** -53


def as_disk_value(z: PointLike) -> complex:
    """Validate ``z`` and return it as a plain complex number."""
    if isinstance(z, DiskPoint):
        return z.value
    return DiskPoint(complex(z)).value


@dataclass(frozen=True)
class MoebiusDiskAuto:
    """The disk automorphism ``z -> phase * (z - a) / (1 - conj(a) z)``."""

    a: complex = 0j
    phase: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "a", as_disk_value(self.a))
        ph = complex(self.phase)
        if abs(abs(ph) - 1.0) > 1e-12:
            raise ValueError(f"phase must have modulus 1, got |phase|={abs(ph)}")
        object.__setattr__(self, "phase", ph / abs(ph))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex) if not np.isscalar(z) else complex(z)
        return self.phase * (z - self.a) / (1 - np.conj(self.a) * z)

    def inverse(self) -> "MoebiusDiskAuto":
        # w = p (z - a)/(1 - a* z)  =>  z = conj(p) (w + p a)/(1 + conj(p a) w)
        pa = self.phase * self.a
        return MoebiusDiskAuto(a=-pa, phase=self.phase.conjugate())


def pseudo_dist(z: complex, w: complex) -> float:
    """Pseudo-hyperbolic distance ``|z - w| / |1 - conj(z) w|``."""
    return abs(z - w) / abs(1 - z.conjugate() * w)


def hyp_dist(z: PointLike, w: PointLike) -> float:
    """Hyperbolic distance in the unit disk, ``log((1+t)/(1-t))`` with ``t`` pseudo-hyperbolic."""
    z, w = as_disk_value(z), as_disk_value(w)
    t = pseudo_dist(z, w)
    return 2.0 * math.atanh(min(t, _T_MAX)) if t > 0 else 0.0


def hyp_dist_array(z, w) -> np.ndarray:
    """Vectorised :func:`hyp_dist` without per-point validation."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    t = np.abs(z - w) / np.abs(1 - np.conj(z) * w)
    return 2.0 * np.arctanh(np.minimum(t, _T_MAX))


def uniform_schwarz_bound(rho: float, r: float) -> float:
    """Constant ``c = (rho + r) / (1 + r rho)`` with ``|g(z)| <= c|z|`` on ``|z| <= r``.

    Valid for every analytic self-map ``g`` of the disk with ``g(0) = 0`` and
    ``|g'(0)| = rho``. ``rho = 0`` is allowed (e.g. ``g(z) = z^2``).
    """
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0, 1), got {r}")
    return (rho + r) / (1.0 + r * rho)


def schwarz_preimage_radius(r: float) -> float:
    """Radius ``R = sqrt(r / (2 - r))`` of a disk contained in ``g^{-1}(closed D_r)``."""
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0, 1), got {r}")
    return math.sqrt(r / (2.0 - r))


def _to_klein(z: np.ndarray) -> np.ndarray:
    return 2.0 * z / (1.0 + np.abs(z) ** 2)


def _segment_distance(p: complex, q: complex) -> float:
    """Euclidean distance from the origin to the segment ``[p, q]``."""
    d = q - p
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return abs(p)
    t = -(p.real * d.real + p.imag * d.imag) / L2
    t = min(1.0, max(0.0, t))
    return abs(p + t * d)


def _origin_in_hull(pts: np.ndarray) -> bool:
    """Origin inside the Euclidean convex hull of ``pts`` (supporting lines through pairs)."""
    n = len(pts)
    if n < 3:
        return False
    for i, j in combinations(range(n), 2):
        d = pts[j] - pts[i]
        if d == 0:
            continue
        side = np.imag(np.conj(d) * (pts - pts[i]))
        scale = abs(d) * max(1.0, float(np.max(np.abs(pts))))
        tol = 1e-14 * scale
        s0 = (np.conj(d) * (0 - pts[i])).imag
        if np.all(side >= -tol) and s0 < -tol:
            return False
        if np.all(side <= tol) and s0 > tol:
            return False
    return True


def hyp_dist_to_hull(hull_points: Iterable[PointLike], query: PointLike) -> float:
    """Hyperbolic distance from ``query`` to the hyperbolic convex hull of ``hull_points``.

    The query is moved to the origin by a disk automorphism. In the Klein
    model geodesics are chords, the hull is a Euclidean polygon, and
    hyperbolic balls about the origin are Euclidean disks, so the nearest
    hull point is the Euclidean-nearest one. Its Klein modulus ``k`` gives
    the distance ``atanh(k)`` in this normalisation.
    """
    pts = [as_disk_value(p) for p in hull_points]
    if not pts:
        raise ValueError("hull_points must be nonempty")
    q = as_disk_value(query)
    moved = (np.asarray(pts) - q) / (1 - np.conj(q) * np.asarray(pts))
    k = _to_klein(moved)
    if _origin_in_hull(k):
        return 0.0
    if len(k) == 1:
        e = abs(k[0])
    else:
        e = min(_segment_distance(k[i], k[j]) for i, j in combinations(range(len(k)), 2))
    return float(math.atanh(min(e, _T_MAX)))


def hyp_convex_hull_contains(hull_points: Iterable[PointLike], query: PointLike, tol: float) -> bool:
    """True iff ``query`` is within hyperbolic distance ``tol`` of the hull of ``hull_points``."""
    return hyp_dist_to_hull(hull_points, query) <= tol
