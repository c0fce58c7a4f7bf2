"""Polynomial dynamics: Green's function, Böttcher coordinate, equipotentials,
grand orbits, discreteness evidence and holomorphic motions of grand orbits.

Coefficients are stored in ascending order, ``P(z) = c_0 + c_1 z + ... + c_d z^d``.
Near infinity ``P(z) = c_d z^d (1 + eps(z))`` with
``eps(z) = sum_{k<d} (c_k/c_d) z^(k-d)``. The Böttcher coordinate is evaluated
as the convergent product

    beta(z) = c_d^(1/(d-1)) z prod_{k>=0} (1 + eps(P^k z))^(1/d^(k+1)),

valid on ``|z| >= escape_radius``. Points closer in are reached by pulling
back along ``P``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels

TWO_PI = 2.0 * math.pi


class ContinuationError(ArithmeticError):
    """Path following lost its branch or failed to converge."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Polynomial of degree ``d >= 2`` with ascending complex coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        if len(c) < 3:
            raise ValueError("degree must be at least 2")
        if c[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def lambda_quadratic(cls, lam: complex) -> "Polynomial":
        """``lambda z + z^2``."""
        return cls((0, lam, 1))

    @classmethod
    def parse(cls, spec: str) -> "Polynomial":
        """``"c0,c1,...,cd"`` (ascending) or a preset ``lambda:<l>``, ``c:<c>``, ``power:<d>``."""
        spec = spec.strip()
        kind, sep, arg = spec.partition(":")
        if sep:
            if kind == "lambda":
                return cls.lambda_quadratic(complex(arg.replace(" ", "")))
            if kind == "c":
                return cls((complex(arg.replace(" ", "")), 0, 1))
            if kind == "power":
                d = int(arg)
                return cls((0,) * d + (1,))
            raise ValueError(f"unknown polynomial preset {kind!r}")
        return cls(tuple(complex(t.strip().replace(" ", "")) for t in spec.split(",")))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    @property
    def fixes_zero(self) -> bool:
        return self.coeffs[0] == 0

    def __call__(self, z):
        acc = np.full(np.shape(z), self.coeffs[-1], dtype=complex) if np.ndim(z) else self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc

    def derivative(self, z):
        d = self.degree
        acc = np.full(np.shape(z), d * self.coeffs[-1], dtype=complex) if np.ndim(z) else d * self.coeffs[-1]
        for k in range(d - 1, 0, -1):
            acc = acc * z + k * self.coeffs[k]
        return acc

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def iterate_with_log_derivative(self, z, n: int):
        """``P^n(z)`` and ``d log P^n / dz``, propagated without forming ``(P^n)'``."""
        z = np.asarray(z, dtype=complex)
        rho = 1.0 / z
        for _ in range(n):
            pz = self(z)
            rho = self.derivative(z) * z * rho / pz
            z = pz
        return z, rho

    def iterate_with_derivative(self, z, n: int):
        z = np.asarray(z, dtype=complex)
        dz = np.ones_like(z)
        for _ in range(n):
            dz = dz * self.derivative(z)
            z = self(z)
        return z, dz

    def critical_points(self) -> np.ndarray:
        d = self.degree
        dc = np.array([k * self.coeffs[k] for k in range(1, d + 1)], dtype=complex)
        return np.roots(dc[::-1]) if d > 2 else np.array([-dc[0] / dc[1]])

    def fixed_points(self) -> np.ndarray:
        c = self.array.copy()
        c[1] -= 1
        return np.roots(c[::-1])

    def roots(self) -> np.ndarray:
        return np.roots(self.array[::-1])

    def preimages(self, t) -> np.ndarray:
        """All solutions of ``P(w) = t`` for each entry of ``t``; shape ``t.shape + (d,)``."""
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        shape = t.shape
        t = t.ravel()
        d, a = self.degree, self.leading
        c = self.array
        if d == 2:
            c0 = c[0] - t
            b = c[1]
            disc = np.sqrt(b * b - 4 * a * c0)
            sgn = np.where((np.conj(b) * disc).real >= 0, 1.0, -1.0)
            q = -0.5 * (b + sgn * disc)
            with np.errstate(divide="ignore", invalid="ignore"):
                r1 = q / a
                r2 = np.where(q != 0, c0 / q, -b / a - r1)
            w = np.stack([r1, r2], axis=-1)
        else:
            comp = np.zeros((len(t), d, d), dtype=complex)
            comp[:, 1:, :-1] = np.eye(d - 1)
            comp[:, :, -1] = -(c[:-1] / a)[None, :]
            comp[:, 0, -1] = -(c[0] - t) / a
            w = np.linalg.eigvals(comp)
        # one Newton polish
        fp = self.derivative(w)
        ok = np.abs(fp) > 1e-14
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(ok, (self(w) - t[:, None]) / np.where(ok, fp, 1), 0)
        w = w - step
        return w.reshape(shape + (d,))

    def to_dict(self) -> dict:
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs]}


# ---------------------------------------------------------------------------
# Green's function and Böttcher coordinate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BottcherData:
    """Escape radius (``|P(z)| >= 2|z|`` and ``|eps| < 1`` beyond it), iteration cap, bailout."""

    P: Polynomial
    escape_radius: float
    max_iter: int
    bailout: float
    log_lead: complex  # log(c_d)/(d-1), principal branch

    @property
    def valid_level(self) -> float:
        """Green level above which the level curve lies in ``|z| >= 2 * escape_radius``."""
        return math.log(4.0 * self.escape_radius) + self.log_lead.real


def bottcher_data(P: Polynomial, max_iter: int = 2000) -> BottcherData:
    s = sum(abs(c) for c in P.coeffs[:-1])
    a = abs(P.leading)
    esc = max(1.0, (2.0 + s) / a)
    bailout = max(1e12, 1e12 * s / a, 1e3 * esc)
    return BottcherData(P=P, escape_radius=esc, max_iter=max_iter, bailout=bailout,
                        log_lead=complex(np.log(complex(P.leading))) / (P.degree - 1))


def green_field(P: Polynomial, zs, max_iter: int = 2000, bailout: Optional[float] = None,
                threads: int = 1):
    """Green's function on an array: ``(G, iterations, escaped)``.

    Points that do not escape within ``max_iter`` get ``G = 0`` exactly and
    ``escaped = False``; ``iterations`` then equals ``max_iter``.
    """
    bd = bottcher_data(P, max_iter)
    bail = bd.bailout if bailout is None else bailout
    zs = np.asarray(zs, dtype=complex)
    coeffs = P.array
    if threads <= 1 or zs.size < 4096:
        return kernels.green_escape(coeffs, zs, max_iter, bail)
    flat = zs.ravel()
    chunks = np.array_split(flat, threads * 4)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(lambda c: kernels.green_escape(coeffs, c, max_iter, bail), chunks))
    g = np.concatenate([p[0] for p in parts]).reshape(zs.shape)
    it = np.concatenate([p[1] for p in parts]).reshape(zs.shape)
    esc = np.concatenate([p[2] for p in parts]).reshape(zs.shape)
    return g, it, esc


def green_values(P: Polynomial, zs, max_iter: int = 2000) -> np.ndarray:
    return green_field(P, zs, max_iter)[0]


def green_value(P: Polynomial, z: complex, max_iter: int = 2000) -> float:
    """``G(z) = lim d^-k log+ |P^k(z)|``; exactly 0 when no escape within ``max_iter``."""
    return float(green_field(P, np.array([complex(z)]), max_iter)[0][0])


def _eps(P: Polynomial, z):
    d, a = P.degree, P.leading
    u = 1.0 / z
    e = np.zeros_like(z)
    de = np.zeros_like(z)
    for m in range(d):
        cm = P.coeffs[m] / a
        if cm == 0:
            continue
        p = u ** (d - m)
        e = e + cm * p
        de = de - cm * (d - m) * p * u
    return e, de


def log_bottcher(P: Polynomial, z, data: Optional[BottcherData] = None):
    """``log beta(z)`` and its derivative, for ``|z| >= escape_radius`` (NaN elsewhere)."""
    bd = data or bottcher_data(P)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = P.degree
    valid = np.abs(z) >= bd.escape_radius * (1 - 1e-12)
    zk = np.where(valid, z, bd.escape_radius * 2 + 0j)
    logb = np.log(zk) + bd.log_lead
    dlog = 1.0 / zk
    rho = 1.0 / zk
    weight = 1.0 / d
    active = np.ones(z.shape, dtype=bool)
    for _ in range(400):
        e, de = _eps(P, zk)
        e = np.where(active, e, 0)
        de = np.where(active, de, 0)
        logb = logb + weight * np.log1p(e)
        dlog = dlog + weight * de * zk * rho / (1.0 + e)
        active = active & (np.abs(e) > 1e-18)
        if not active.any():
            break
        pz = np.where(active, P(np.where(active, zk, 0)), zk)
        rho = np.where(active, P.derivative(zk) * zk * rho / np.where(active, pz, 1), rho)
        zk = pz
        weight /= d
    logb = np.where(valid, logb, np.nan)
    dlog = np.where(valid, dlog, np.nan)
    return logb, dlog


def bottcher(P: Polynomial, z, data: Optional[BottcherData] = None):
    """Böttcher coordinate ``beta`` (tangent to ``c_d^(1/(d-1)) z`` at infinity)."""
    scalar = np.ndim(z) == 0
    out = np.exp(log_bottcher(P, z, data)[0])
    return complex(out[0]) if scalar else out


def _wrap(x):
    im = np.mod(np.imag(x) + math.pi, TWO_PI) - math.pi
    return np.real(x) + 1j * im


class _BottcherInverter:
    """Solve ``beta(z) = exp(level + i theta)`` by Newton plus pullback along ``P``."""

    def __init__(self, P: Polynomial, data: Optional[BottcherData] = None):
        self.P = P
        self.bd = data or bottcher_data(P)
        self.d = P.degree

    def pull_depth(self, level: float) -> int:
        if level <= 0:
            raise ValueError("Green level must be positive")
        j = 0
        while self.d ** j * level < self.bd.valid_level:
            j += 1
        return j

    def top(self, logw: complex, seed: Optional[complex] = None) -> complex:
        z = complex(np.exp(logw - self.bd.log_lead)) if seed is None else seed
        for _ in range(60):
            lb, dl = log_bottcher(self.P, z, self.bd)
            diff = complex(_wrap(lb[0] - logw))
            step = diff / complex(dl[0])
            z = z - step
            if abs(step) <= 1e-15 * abs(z):
                return z
        if abs(diff) < 1e-12:
            return z
        raise ContinuationError(f"Böttcher inversion did not converge at log w = {logw}")

    def pull(self, j: int, T: complex, seed: complex):
        """Newton on ``log P^j(z) = log T`` from ``seed``; returns (z, converged)."""
        if j == 0:
            return T, True
        logT = complex(np.log(T))
        z = complex(seed)
        for it in range(30):
            zj, rho = self.P.iterate_with_log_derivative(np.array([z]), j)
            diff = complex(_wrap(np.log(zj[0]) - logT))
            step = diff / complex(rho[0])
            z = z - step
            if not np.isfinite(z):
                return z, False
            if abs(step) <= 1e-14 * max(abs(z), 1e-300):
                return z, it < 12
        return z, False

    def point(self, level, theta, seed, top_seed=None):
        j = self.pull_depth(level)
        logw = self.d ** j * complex(level, theta)
        T = self.top(logw, top_seed)
        z, ok = self.pull(j, T, seed)
        return z, T, ok

    def dlog(self, level: float, z: complex, T: complex) -> complex:
        """``(log beta)'(z)`` through ``log beta(z) = log beta(P^j z) / d^j``."""
        j = self.pull_depth(level)
        dl = complex(log_bottcher(self.P, T, self.bd)[1][0])
        if j == 0:
            return dl
        _, rho = self.P.iterate_with_log_derivative(np.array([complex(z)]), j)
        return dl * T * complex(rho[0]) / self.d ** j

    def ray_point(self, level: float, theta: float = 0.0) -> complex:
        """Point with Green value ``level`` on the external ray of angle ``theta``."""
        start = max(level, self.bd.valid_level)
        z = self.top(complex(start, theta))
        T = z
        ell = start
        step = 0.5 * ell
        while ell > level * (1 + 1e-15):
            nxt = max(level, ell - step)
            # tangent predictor in log z: d(log z)/d(level) = 1 / (z (log beta)'(z))
            dlz = (nxt - ell) / (z * self.dlog(ell, z, T))
            pred = z * np.exp(dlz)
            zn, Tn, ok = self.point(nxt, theta, pred)
            if (ok and abs(dlz) <= 0.5
                    and abs(zn - pred) <= 0.25 * abs(zn - z) + 1e-9 * abs(zn)):
                z, T, ell = zn, Tn, nxt
                step = min(step * 1.5, 0.5 * ell)
            else:
                step *= 0.5
                if step < 1e-12 * level:
                    raise ContinuationError("external ray descent stalled", location=ell)
        return z


def external_ray_point(P: Polynomial, level: float, theta: float = 0.0) -> complex:
    """The point with Green value ``level`` on the external ray of angle ``theta``."""
    return _BottcherInverter(P).ray_point(level, theta)


def bottcher_inverse(P: Polynomial, w: complex) -> complex:
    """``beta^{-1}(w)`` for ``log|w|`` above every critical Green value."""
    inv = _BottcherInverter(P)
    lw = complex(np.log(complex(w)))
    return inv.ray_point(lw.real, lw.imag)


def choose_R(P: Polynomial, safety: float = 2.0, max_iter: int = 2000) -> float:
    """``safety * exp(max G(critical points))``, never below ``safety``."""
    if not safety > 1:
        raise ValueError("safety must exceed 1")
    gmax = float(np.max(green_values(P, P.critical_points(), max_iter)))
    return max(safety, safety * math.exp(gmax))


@dataclass
class EquipotentialDomain:
    P: Polynomial
    R: float
    n: int
    level: float
    boundary: np.ndarray
    angles: np.ndarray
    green_residual: float

    def contains(self, z) -> np.ndarray:
        from .riemann import inside_polyline
        return inside_polyline(self.boundary, z)


def equipotential_curve(P: Polynomial, R: float, n: int, n_samples: int = 512,
                        tol: float = 1e-6) -> EquipotentialDomain:
    """The level curve ``G = d^n log R``, sampled at equally spaced external angles."""
    if not R > 1:
        raise ValueError("R must exceed 1")
    inv = _BottcherInverter(P)
    d = P.degree
    level = d ** n * math.log(R)
    crit_g = float(np.max(green_values(P, P.critical_points())))
    if not level > crit_g:
        raise ValueError(f"level {level} is not above the critical Green value {crit_g}")
    z = inv.ray_point(level, 0.0)
    j = inv.pull_depth(level)
    T = inv.top(d ** j * complex(level, 0.0))
    h_grid = TWO_PI / n_samples
    out = np.empty(n_samples, dtype=complex)
    out[0] = z
    theta, h = 0.0, h_grid
    k = 1
    halvings = 0
    while k <= n_samples:
        target = k * h_grid
        h = min(h, target - theta)
        pred = z * np.exp(1j * h / (z * inv.dlog(level, z, T)))
        tpred = T * np.exp(1j * d ** j * h)
        try:
            zn, Tn, ok = inv.point(level, theta + h, pred, tpred)
        except ContinuationError:
            ok = False
        if ok and abs(zn - pred) <= 0.25 * abs(zn - z) + 1e-10 * abs(zn):
            z, T, theta = zn, Tn, theta + h
            h = min(2 * h, h_grid)
            halvings = 0
            if abs(theta - target) <= 1e-14:
                theta = target
                if k < n_samples:
                    out[k] = z
                k += 1
        else:
            h *= 0.5
            halvings += 1
            if halvings > 40:
                raise ContinuationError(f"equipotential continuation failed near angle {theta}",
                                        location=theta)
    if abs(z - out[0]) > 1e-8 * abs(out[0]):
        raise ContinuationError("equipotential curve does not close up", location=TWO_PI)
    g = green_values(P, out)
    resid = float(np.max(np.abs(g - level)))
    if resid > tol:
        raise ContinuationError(f"Green residual {resid} above tolerance {tol}")
    from .riemann import inside_polyline
    if not np.all(inside_polyline(out, P.roots())):
        raise ContinuationError("equipotential curve does not surround every root of P")
    return EquipotentialDomain(P=P, R=R, n=n, level=level, boundary=out,
                               angles=TWO_PI * np.arange(n_samples) / n_samples,
                               green_residual=resid)


# ---------------------------------------------------------------------------
# grand orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Bounded clipping region: ``disk`` (center, radius) or ``box`` (x0, x1, y0, y1)."""

    kind: str
    params: tuple

    @classmethod
    def disk(cls, center: complex = 0j, radius: float = 1.0) -> "Region":
        return cls("disk", (complex(center), float(radius)))

    @classmethod
    def box(cls, x0, x1, y0, y1) -> "Region":
        return cls("box", (float(x0), float(x1), float(y0), float(y1)))

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            c, r = self.params
            return np.abs(z - c) <= r
        x0, x1, y0, y1 = self.params
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)

    def to_dict(self) -> dict:
        if self.kind == "disk":
            c, r = self.params
            return {"kind": "disk", "center": [c.real, c.imag], "radius": r}
        return {"kind": "box", "bounds": list(self.params)}


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    """Indices of first occurrences under a spatial hash with cell size ``tol``."""
    if len(points) == 0:
        return np.array([], dtype=int)
    keys = np.stack([np.round(points.real / tol), np.round(points.imag / tol)], axis=1)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return np.sort(idx)


@dataclass
class GrandOrbitSample:
    """Points ``w`` with ``P^m(w) = P^n(base)``, stored with their ``(n, m)``."""

    base: complex
    points: np.ndarray
    n: np.ndarray
    m: np.ndarray
    region: Region
    truncated: bool = False
    rejected: int = 0

    def __len__(self):
        return len(self.points)

    def residuals(self, P: Polynomial) -> np.ndarray:
        out = np.empty(len(self.points))
        for i, (w, n, m) in enumerate(zip(self.points, self.n, self.m)):
            out[i] = abs(P.iterate(complex(w), int(m)) - P.iterate(self.base, int(n)))
        return out

    def to_jsonl(self) -> str:
        lines = [json.dumps({"re": float(w.real), "im": float(w.imag), "n": int(n), "m": int(m)})
                 for w, n, m in zip(self.points, self.n, self.m)]
        return "\n".join(lines) + ("\n" if lines else "")


def _forward_orbit(P: Polynomial, z: complex, n: int, cap: float = 1e100) -> list:
    orbit = [complex(z)]
    for _ in range(n):
        nxt = complex(P(orbit[-1]))
        if not np.isfinite(nxt) or abs(nxt) > cap:
            break
        orbit.append(nxt)
    return orbit


def _residual_ok(P: Polynomial, w: np.ndarray, m: int, target: complex, tol: float) -> np.ndarray:
    v = w.copy()
    for _ in range(m):
        v = P(v)
    return np.abs(v - target) <= tol * max(1.0, abs(target))


def grand_orbit_sample(P: Polynomial, z: complex, forward_n: int, backward_m: int,
                       region: Region, cap: int = 10 ** 6, dedup_tol: float = 1e-9,
                       check_tol: float = 1e-8) -> GrandOrbitSample:
    """Backward trees of depth ``backward_m`` over ``P^k(z)``, ``k <= forward_n``, clipped to ``region``."""
    orbit = _forward_orbit(P, z, forward_n)
    pts, ns, ms = [], [], []
    total = 0
    truncated = False
    rejected = 0
    for k, root in enumerate(orbit):
        level = np.array([root])
        for m in range(backward_m + 1):
            if m > 0:
                level = P.preimages(level).ravel()
                level = level[_dedup(level, dedup_tol)]
            total += len(level)
            if total > cap:
                truncated = True
                break
            keep = region.contains(level)
            if keep.any():
                cand = level[keep]
                ok = _residual_ok(P, cand, m, root, check_tol)
                rejected += int((~ok).sum())
                pts.append(cand[ok])
                ns.append(np.full(int(ok.sum()), k))
                ms.append(np.full(int(ok.sum()), m))
        if truncated:
            break
    if pts:
        allp = np.concatenate(pts)
        alln = np.concatenate(ns)
        allm = np.concatenate(ms)
        idx = _dedup(allp, dedup_tol)
        allp, alln, allm = allp[idx], alln[idx], allm[idx]
    else:
        allp = np.array([], dtype=complex)
        alln = allm = np.array([], dtype=int)
    return GrandOrbitSample(base=complex(z), points=allp, n=alln, m=allm, region=region,
                            truncated=truncated, rejected=rejected)


def critical_markers(P: Polynomial, forward: int, backward: int, cap: int = 200000) -> np.ndarray:
    """Finite-depth stand-in for the closure of singular and periodic grand orbits.

    Forward critical orbits, their backward trees, and the fixed points of ``P``.
    """
    out = [P.fixed_points()]
    for c in P.critical_points():
        orbit = _forward_orbit(P, c, forward)
        level = np.array(orbit, dtype=complex)
        out.append(level)
        for _ in range(backward):
            level = P.preimages(level).ravel()
            level = level[_dedup(level, 1e-9)]
            if len(level) > cap:
                break
            out.append(level)
    allp = np.concatenate(out)
    return allp[_dedup(allp, 1e-9)]


def _nearest_other(points: np.ndarray, queries: np.ndarray, exclude_self: bool = True) -> np.ndarray:
    if len(points) == 0 or len(queries) == 0:
        return np.full(len(queries), np.inf)
    out = np.empty(len(queries))
    for s in range(0, len(queries), 512):
        q = queries[s:s + 512]
        dist = np.abs(q[:, None] - points[None, :])
        if exclude_self:
            dist[dist < 1e-12] = np.inf
        out[s:s + 512] = dist.min(axis=1)
    return out


@dataclass
class DiscretenessReport:
    probe: complex
    depths: list
    min_pairwise: list
    nn_median: list
    counts: list
    sub_region: Region
    nearest_marker: float
    level_clustering: dict
    verdict: str

    def to_dict(self) -> dict:
        def f(x):
            return None if not np.isfinite(x) else float(x)
        return {
            "probe": [self.probe.real, self.probe.imag],
            "depths": list(self.depths),
            "min_pairwise": [f(x) for x in self.min_pairwise],
            "nn_median": [f(x) for x in self.nn_median],
            "counts": list(self.counts),
            "sub_region": self.sub_region.to_dict(),
            "nearest_marker": float(self.nearest_marker),
            "level_clustering": self.level_clustering,
            "verdict": self.verdict,
        }


def koenigs(P: Polynomial, z, tol: float = 1e-13, max_iter: int = 10000):
    """Kœnigs coordinate at the attracting fixed point 0: ``lim lambda^-n P^n(z)``."""
    if not P.fixes_zero:
        raise ValueError("Kœnigs coordinate needs P(0) = 0")
    lam = P.coeffs[1]
    if not 0 < abs(lam) < 1:
        raise ValueError("0 must be attracting and not superattracting")
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    scale = np.ones(z.shape, dtype=complex)
    for _ in range(max_iter):
        small = np.abs(z) < tol
        if small.all():
            break
        z = np.where(small, z, P(z))
        scale = np.where(small, scale, scale * lam)
        if np.any(np.abs(z) > 1e6):
            raise ValueError("point is not in the basin of 0")
    return z / scale


def koenigs_inverse(P: Polynomial, u: complex, small: float = 1e-13) -> complex:
    """Branch of ``kappa^{-1}`` through 0, by pulling back ``lambda^N u`` along ``P``."""
    lam = P.coeffs[1]
    N = 0
    v = complex(u)
    while abs(v) > small:
        v *= lam
        N += 1
    z = v
    for _ in range(N):
        cand = P.preimages(np.array([z]))[0]
        z = complex(cand[np.argmin(np.abs(cand - z / lam))])
    return z


def _clustering(P: Polynomial, z: complex, pts: np.ndarray) -> dict:
    g0 = green_value(P, z)
    if g0 > 0:
        g = green_values(P, pts)
        g = g[g > 0]
        e = np.log2(g / g0)
        frac = float(np.mean(np.abs(e - np.round(e)) < 1e-6)) if len(e) else float("nan")
        return {"kind": "green", "levels": sorted(set(int(v) for v in np.round(e))),
                "on_grid_fraction": frac}
    if P.fixes_zero and 0 < abs(P.coeffs[1]) < 1:
        try:
            k0 = abs(koenigs(P, z)[0])
            kk = np.abs(koenigs(P, pts))
        except ValueError:
            return {"kind": "none"}
        e = np.log(kk / k0) / math.log(abs(P.coeffs[1]))
        frac = float(np.mean(np.abs(e - np.round(e)) < 1e-6)) if len(e) else float("nan")
        return {"kind": "koenigs", "levels": sorted(set(int(v) for v in np.round(e))),
                "on_grid_fraction": frac}
    return {"kind": "none"}


def discreteness_diagnostic(P: Polynomial, z: complex, region: Region, depth: int,
                            markers: Optional[np.ndarray] = None,
                            marker_margin: float = 1e-6) -> DiscretenessReport:
    """Evidence for discreteness of the grand orbit of ``z`` near ``z``.

    The sub-region is the disk about ``z`` of half the distance to the nearest
    marker. For each depth ``D`` the grand orbit with ``n, m <= D`` is sampled;
    the minimum and median nearest-neighbour distances of sample points in the
    sub-region (to any other sample point) are recorded.
    """
    if depth < 2:
        raise ValueError("depth must be at least 2")
    z = complex(z)
    if markers is None:
        markers = critical_markers(P, depth, depth)
    dm = float(np.min(np.abs(markers - z)))
    if dm < marker_margin:
        nearest = complex(markers[np.argmin(np.abs(markers - z))])
        raise ValueError(f"probe {z} lies within {marker_margin} of the marker {nearest}")
    sub = Region.disk(z, 0.5 * dm)
    depths = list(range(1, depth + 1))
    mins, meds, counts = [], [], []
    last_inside = np.array([z])
    for D in depths:
        s = grand_orbit_sample(P, z, D, D, region)
        inside = s.points[sub.contains(s.points)]
        nn = _nearest_other(s.points, inside)
        counts.append(int(len(inside)))
        mins.append(float(nn.min()) if len(nn) else math.inf)
        meds.append(float(np.median(nn)) if len(nn) else math.inf)
        last_inside = inside
    half = max(1, depth // 2) - 1
    m_half, m_full = meds[half], meds[-1]
    p_half, p_full = mins[half], mins[-1]
    shrink = m_half / m_full if m_full > 0 else math.inf
    if np.isfinite(m_full) and shrink >= 4.0:
        verdict = "indiscrete-evidence"
    elif (not np.isfinite(p_half) and not np.isfinite(p_full)) or p_full >= 0.5 * p_half:
        verdict = "discrete-evidence"
    else:
        verdict = "inconclusive"
    return DiscretenessReport(probe=z, depths=depths, min_pairwise=mins, nn_median=meds,
                              counts=counts, sub_region=sub, nearest_marker=dm,
                              level_clustering=_clustering(P, z, last_inside), verdict=verdict)


# ---------------------------------------------------------------------------
# holomorphic motions of grand orbits
# ---------------------------------------------------------------------------

def _segment_point_distance(a: complex, b: complex, pts: np.ndarray) -> float:
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return float(np.min(np.abs(pts - a)))
    t = np.clip(((pts - a) * np.conj(d)).real / L2, 0, 1)
    return float(np.min(np.abs(pts - (a + t * d))))


def holomorphic_motion_transport(P: Polynomial, lambda0: complex, path, z: complex, n: int, m: int,
                                 markers: Optional[np.ndarray] = None, margin: float = 1e-4,
                                 min_step: float = 1e-12, h0: float = 0.05) -> complex:
    """Continue the solution ``w`` of ``P^n(w) = P^m(lambda)`` from ``(lambda0, z)`` along ``path``."""
    lambda0 = complex(lambda0)
    pre = abs(complex(P.iterate(complex(z), n)) - complex(P.iterate(lambda0, m)))
    if pre > 1e-8:
        raise ValueError(f"P^n(z) - P^m(lambda0) = {pre:.3g} violates the orbit relation")
    path = [complex(p) for p in np.atleast_1d(np.asarray(path, dtype=complex))]
    if not path or abs(path[0] - lambda0) > 1e-15:
        path = [lambda0] + path
    if markers is None:
        # branch points: parameters whose m-th image is a critical value of P^n
        cv = []
        for c in P.critical_points():
            cv.extend(_forward_orbit(P, c, n)[1:] if n > 0 else [])
        level = np.array(cv, dtype=complex)
        for _ in range(m):
            level = P.preimages(level).ravel() if len(level) else level
        markers = level
    markers = np.asarray(markers, dtype=complex)
    if len(markers):
        for a, b in zip(path[:-1], path[1:]):
            if _segment_point_distance(a, b, markers) < margin:
                raise ValueError("path passes within the marker margin of a branch point")
    w = complex(z)
    for a, b in zip(path[:-1], path[1:]):
        tau, h = 0.0, h0
        while tau < 1.0:
            h = min(h, 1.0 - tau)
            lam = a + (tau + h) * (b - a)
            target = complex(P.iterate(lam, m))
            wn = w
            ok = False
            for it in range(8):
                val, der = P.iterate_with_derivative(np.array([wn]), n)
                if der[0] == 0:
                    break
                step = complex((val[0] - target) / der[0])
                wn -= step
                if abs(step) <= 1e-15 * max(1.0, abs(wn)):
                    ok = True
                    break
            if ok:
                w, tau = wn, tau + h
                h *= 1.5
            else:
                h *= 0.5
                if h < min_step:
                    raise ContinuationError(
                        f"branch tracking failed at lambda = {a + tau * (b - a)}", location=tau)
    final = abs(complex(P.iterate(w, n)) - complex(P.iterate(path[-1], m)))
    if final > 1e-8:
        raise ContinuationError(f"transport residual {final:.3g} too large", location=1.0)
    return w


# ---------------------------------------------------------------------------
# rasters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneGrid:
    """Pixel-centre grid ``x0..x1`` by ``y0..y1``; row 0 is the top (``y1``)."""

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    def points(self) -> np.ndarray:
        xs = self.x0 + (np.arange(self.nx) + 0.5) * (self.x1 - self.x0) / self.nx
        ys = self.y1 - (np.arange(self.ny) + 0.5) * (self.y1 - self.y0) / self.ny
        return xs[None, :] + 1j * ys[:, None]

    @property
    def spacing(self) -> float:
        return max((self.x1 - self.x0) / self.nx, (self.y1 - self.y0) / self.ny)


def julia_field(P: Polynomial, grid: PlaneGrid, max_iter: int = 500, threads: int = 1):
    """Per-pixel ``(G, iterations, escaped)`` on ``grid``."""
    return green_field(P, grid.points(), max_iter, threads=threads)
