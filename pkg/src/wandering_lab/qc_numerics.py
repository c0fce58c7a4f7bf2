"""Numerical quasiconformal toolkit.

Quasisymmetry constants of sampled circle maps, the averaged-integral
(Beurling–Ahlfors) extension of increasing maps of the line, Beltrami
coefficients of sampled maps by central differences, log-polar interpolation
between boundary maps of round annuli, and the gluing maps ``h_n`` between a
power-map sequence ``z^{d_n}`` and a uniformly hyperbolic Blaschke sequence.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .blaschke import (BlaschkeProduct, ContinuationError, _continue_preimage, critical_points,
                       evaluate, preimages)

TWO_PI = 2.0 * math.pi


class BranchAmbiguityError(ArithmeticError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass
class CircleMapSamples:
    """Samples ``t -> image`` of an orientation-preserving map from ``S_{source_radius}``."""

    source_radius: float
    angles: np.ndarray
    images: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.images = np.asarray(self.images, dtype=complex)
        if self.angles.shape != self.images.shape or self.angles.ndim != 1:
            raise ValueError("angles and images must be 1-d arrays of equal length")
        if np.any(np.diff(self.angles) <= 0) or self.angles[0] < 0 or self.angles[-1] >= TWO_PI:
            raise ValueError("angles must increase strictly within [0, 2 pi)")
        if not np.all(np.isfinite(self.images)):
            raise ValueError("images must be finite")

    @classmethod
    def from_function(cls, f: Callable, radius: float = 1.0, n: int = 256) -> "CircleMapSamples":
        t = TWO_PI * np.arange(n) / n
        return cls(radius, t, f(radius * np.exp(1j * t)))

    @property
    def sources(self) -> np.ndarray:
        return self.source_radius * np.exp(1j * self.angles)

    def winding(self, center: complex = 0j) -> int:
        p = self.images - center
        return int(round(float(np.angle(np.roll(p, -1) / p).sum()) / TWO_PI))

    def log_offset(self) -> np.ndarray:
        """Continuous ``log(image) - log(source)`` along the samples (periodic for winding 1)."""
        lam = np.log(self.images / self.sources)
        im = np.unwrap(lam.imag)
        return lam.real + 1j * im


@dataclass
class GridMap:
    """A planar map sampled on a structured mesh.

    ``kind`` is ``"cartesian"`` (axes ``x``, ``y``) or ``"logpolar"``
    (axes ``s = log rho``, ``t``; the ``t`` axis is periodic). ``values`` has
    shape ``(len(v), len(u))``. NaN marks nodes where the map is undefined.
    """

    kind: str
    u: np.ndarray
    v: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.kind not in ("cartesian", "logpolar"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.values.shape != (len(self.v), len(self.u)):
            raise ValueError("values must have shape (len(v), len(u))")
        for ax in (self.u, self.v):
            if len(ax) > 2 and np.ptp(np.diff(ax)) > 1e-9 * max(1.0, abs(ax[-1] - ax[0])):
                raise ValueError("mesh spacing must be uniform per axis")

    @property
    def periodic(self) -> bool:
        return self.kind == "logpolar"

    def nodes(self) -> np.ndarray:
        U, V = np.meshgrid(self.u, self.v)
        if self.kind == "cartesian":
            return U + 1j * V
        return np.exp(U + 1j * V)

    @property
    def defined_fraction(self) -> float:
        return float(np.mean(np.isfinite(self.values)))

    # serialisation --------------------------------------------------------
    MAGIC = b"WLGRID1\n"

    def save_raster(self, path) -> None:
        header = {"kind": self.kind, "nu": len(self.u), "nv": len(self.v), "meta": self.meta}
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(self.u.astype("<f8").tobytes())
            fh.write(self.v.astype("<f8").tobytes())
            fh.write(self.values.real.astype("<f8").tobytes())
            fh.write(self.values.imag.astype("<f8").tobytes())

    @classmethod
    def load_raster(cls, path) -> "GridMap":
        with open(path, "rb") as fh:
            if fh.readline() != cls.MAGIC:
                raise ValueError("not a grid-map raster")
            header = json.loads(fh.readline())
            nu, nv = header["nu"], header["nv"]
            u = np.frombuffer(fh.read(8 * nu), "<f8")
            v = np.frombuffer(fh.read(8 * nv), "<f8")
            re = np.frombuffer(fh.read(8 * nu * nv), "<f8").reshape(nv, nu)
            im = np.frombuffer(fh.read(8 * nu * nv), "<f8").reshape(nv, nu)
        return cls(header["kind"], u.copy(), v.copy(), re + 1j * im, header.get("meta", {}))

    def to_csv(self, path) -> None:
        z = self.nodes().ravel()
        w = self.values.ravel()
        buf = io.StringIO()
        buf.write("node_re,node_im,value_re,value_im\n")
        for a, b in zip(z, w):
            buf.write(f"{a.real!r},{a.imag!r},{b.real!r},{b.imag!r}\n")
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


@dataclass
class DilatationReport:
    mu_field: np.ndarray
    K_max: float
    K_quantiles: dict
    orientation_violations: int
    excluded: int
    n_nodes: int

    @property
    def mu_max(self) -> float:
        m = np.abs(self.mu_field)
        m = m[np.isfinite(m)]
        return float(m.max()) if m.size else 0.0

    def to_dict(self) -> dict:
        return {
            "K_max": self.K_max if np.isfinite(self.K_max) else None,
            "mu_max": self.mu_max,
            "K_quantiles": self.K_quantiles,
            "orientation_violations": self.orientation_violations,
            "excluded": self.excluded,
            "n_nodes": self.n_nodes,
        }


# ---------------------------------------------------------------------------
# quasisymmetry
# ---------------------------------------------------------------------------

def quasisymmetry_constant(samples: CircleMapSamples, tie_tol: float = 1e-12) -> float:
    """Largest ``|f(x1)-f(x2)| / |f(x2)-f(x3)|`` over sampled triples with ``|x1-x2| <= |x2-x3|``.

    For fixed ``x2`` the admissible ``x1`` for a given ``x3`` are the samples
    no farther from ``x2`` than ``x3``, so one sort per ``x2`` and a running
    maximum suffice. Distances equal up to ``tie_tol`` count as admissible.
    """
    n = len(samples.angles)
    if n < 16:
        raise ValueError("need at least 16 samples")
    x = samples.sources
    f = samples.images
    src = np.abs(x[:, None] - x[None, :])
    img = np.abs(f[:, None] - f[None, :])
    off = ~np.eye(n, dtype=bool)
    if np.any(img[off] == 0):
        raise ValueError("coincident images: the sampled map is not injective")
    best = 1.0
    scale = tie_tol * samples.source_radius
    for i in range(n):
        ds = np.delete(src[i], i)
        di = np.delete(img[i], i)
        order = np.argsort(ds, kind="stable")
        ds, di = ds[order], di[order]
        run = np.maximum.accumulate(di)
        # extend each prefix over ties with later entries
        grp_end = np.searchsorted(ds, ds + scale, side="right") - 1
        num = run[grp_end]
        best = max(best, float(np.max(num / di)))
    return best


# ---------------------------------------------------------------------------
# Beurling–Ahlfors extension
# ---------------------------------------------------------------------------

def beurling_ahlfors_extend(boundary, x, y, n_quad: int = 64,
                            period: Optional[float] = None) -> GridMap:
    """Extend an increasing map of the line to the upper half-plane.

    ``F(x+iy) = (alpha + beta)/2 + i (alpha - beta)`` with
    ``alpha = int_0^1 f(x+ty) dt`` and ``beta = int_0^1 f(x-ty) dt`` by the
    composite trapezoid rule; identity boundary values extend to the identity.

    ``boundary`` is a callable or a pair ``(xs, fs)`` of samples, which is
    interpolated linearly; with ``period`` set the samples describe one period
    of a circle lift ``f(x + period) = f(x) + period``.
    """
    if callable(boundary):
        f = boundary
        probe = np.linspace(np.min(x) - np.max(y), np.max(x) + np.max(y), 4097)
        if np.any(np.diff(f(probe)) <= 0):
            raise ValueError("boundary map must be strictly increasing")
    else:
        xs, fs = (np.asarray(a, dtype=float) for a in boundary)
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(fs) <= 0):
            raise ValueError("boundary samples must be strictly increasing")
        if period is not None:
            g = fs - xs

            def f(q):
                return q + np.interp(q, xs, g, period=period)
        else:
            def f(q):
                return np.interp(q, xs, fs)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("the mesh must lie in the open upper half-plane")
    t = np.linspace(0.0, 1.0, n_quad + 1)
    wts = np.full(n_quad + 1, 1.0 / n_quad)
    wts[0] = wts[-1] = 0.5 / n_quad
    X, Y = np.meshgrid(x, y)
    alpha = np.tensordot(f(X[..., None] + t * Y[..., None]), wts, axes=([-1], [0]))
    beta = np.tensordot(f(X[..., None] - t * Y[..., None]), wts, axes=([-1], [0]))
    vals = 0.5 * (alpha + beta) + 1j * (alpha - beta)
    return GridMap("cartesian", x, y, vals, meta={"construction": "beurling-ahlfors"})


# ---------------------------------------------------------------------------
# dilatation
# ---------------------------------------------------------------------------

def _K(mu_abs):
    with np.errstate(divide="ignore"):
        return (1 + mu_abs) / (1 - mu_abs)


def estimate_dilatation(grid: GridMap, fz_floor: float = 1e-12) -> DilatationReport:
    """Beltrami coefficient by central differences on interior nodes.

    On log-polar grids the differences of ``log f`` are taken in ``w = s + i t``
    (the image must avoid 0) and the coefficient is transported to the ``z``
    plane by the factor ``z/conj(z)``.
    """
    F = grid.values
    nv, nu = F.shape
    if nu < 3 or nv < 3:
        raise ValueError("grid too small: need at least 3 x 3 nodes")
    hu = grid.u[1] - grid.u[0]
    hv = grid.v[1] - grid.v[0]
    if grid.periodic:
        # log F has the same Beltrami coefficient and is linear for z^k and
        # log twists, so differencing neighbour ratios removes most of the
        # truncation error on log-polar meshes
        with np.errstate(divide="ignore", invalid="ignore"):
            Fv = np.log(np.roll(F, -1, axis=0) / np.roll(F, 1, axis=0)) / (2 * hv)
            Fu = np.full_like(F, np.nan)
            Fu[:, 1:-1] = np.log(F[:, 2:] / F[:, :-2]) / (2 * hu)
    else:
        Fu = np.full_like(F, np.nan)
        Fv = np.full_like(F, np.nan)
        Fu[1:-1, 1:-1] = (F[1:-1, 2:] - F[1:-1, :-2]) / (2 * hu)
        Fv[1:-1, 1:-1] = (F[2:, 1:-1] - F[:-2, 1:-1]) / (2 * hv)
    fz = 0.5 * (Fu - 1j * Fv)
    fzb = 0.5 * (Fu + 1j * Fv)
    valid = np.isfinite(fz) & np.isfinite(fzb)
    # |f_z| ~ 0 with |f_zbar| large is a reversal, not a degenerate node
    small = valid & (np.abs(fz) < fz_floor) & (np.abs(fzb) < fz_floor)
    flipped = valid & (np.abs(fz) < fz_floor) & ~small
    use = valid & ~small & ~flipped
    mu = np.full(F.shape, np.nan + 0j)
    mu[use] = fzb[use] / fz[use]
    mu[flipped] = np.inf
    if grid.periodic:
        z = grid.nodes()
        mu[use] = mu[use] * z[use] / np.conj(z[use])
    mabs = np.abs(mu[use])
    viol = int(np.sum(mabs >= 1)) + int(flipped.sum())
    if mabs.size == 0:
        K_max, q = (math.inf if viol else 1.0), {}
    else:
        K_max = float(_K(mabs.max())) if viol == 0 else math.inf
        Ks = _K(np.minimum(mabs, 1 - 1e-16))
        q = {str(p): float(np.quantile(Ks, p)) for p in (0.5, 0.9, 0.99)}
    return DilatationReport(mu_field=mu, K_max=K_max, K_quantiles=q,
                            orientation_violations=viol, excluded=int(small.sum()),
                            n_nodes=int(use.sum()))


# ---------------------------------------------------------------------------
# annulus interpolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundAnnulus:
    """Domain annulus ``r_in <= |z| <= r_out`` meshed with ``n_s`` radial and ``n_t`` angular nodes."""

    r_in: float
    r_out: float
    n_s: int = 32
    n_t: int = 256

    def axes(self):
        s = np.linspace(math.log(self.r_in), math.log(self.r_out), self.n_s)
        t = TWO_PI * np.arange(self.n_t) / self.n_t
        return s, t


def _resample(samples: CircleMapSamples, t: np.ndarray) -> np.ndarray:
    lam = samples.log_offset()
    if samples.winding() != 1:
        raise ValueError("boundary image must wind once around 0")
    if len(samples.angles) == len(t) and np.allclose(samples.angles, t, atol=1e-14):
        return lam
    re = np.interp(t, samples.angles, lam.real, period=TWO_PI)
    im = np.interp(t, samples.angles, lam.imag, period=TWO_PI)
    return re + 1j * im


def annulus_interpolate(inner: CircleMapSamples, outer: CircleMapSamples,
                        domain: RoundAnnulus) -> GridMap:
    """Radial interpolation between two boundary maps in log-polar coordinates.

    With ``lam = (s - s_in)/(s_out - s_in)`` the image is
    ``exp(s + i t + (1 - lam) L_in(t) + lam L_out(t))``, where ``L`` is the
    lifted ``log(image/source)`` of each boundary map. Boundary values are
    reproduced exactly at sample angles.
    """
    if not (abs(inner.source_radius - domain.r_in) < 1e-12 * domain.r_in
            and abs(outer.source_radius - domain.r_out) < 1e-12 * domain.r_out):
        raise ValueError("sample radii must match the domain annulus")
    s, t = domain.axes()
    L_in = _resample(inner, t)
    L_out = _resample(outer, t)
    # the inner image must lie inside the outer one along every ray
    if np.any(L_in.real + s[0] >= L_out.real + s[-1]):
        raise ValueError("boundary image curves intersect")
    lam = (s - s[0]) / (s[-1] - s[0])
    logv = (s[None, :] + 1j * t[:, None]) + (1 - lam)[None, :] * L_in[:, None] + lam[None, :] * L_out[:, None]
    vals = np.exp(logv)
    if len(inner.angles) == len(t) and np.allclose(inner.angles, t, atol=1e-14):
        vals[:, 0] = inner.images
    if len(outer.angles) == len(t) and np.allclose(outer.angles, t, atol=1e-14):
        vals[:, -1] = outer.images
    return GridMap("logpolar", s, t, vals, meta={"construction": "annulus-interpolation"})


def twist_dilatation(alpha: float, r_in: float, r_out: float) -> float:
    """Exact ``K`` of the logarithmic twist ``z -> z exp(i alpha (1 - lam))``."""
    k = abs(alpha) / math.log(r_out / r_in)
    m = k / math.sqrt(4 + k * k)
    return (1 + m) / (1 - m)


# ---------------------------------------------------------------------------
# gluing maps
# ---------------------------------------------------------------------------

def gluing_radius(maps: Sequence[BlaschkeProduct], margin: float = 1.02) -> float:
    """A radius ``r`` with every zero, critical point and critical value inside ``D_{r^2}``."""
    m = 0.0
    for b in maps:
        m = max(m, max(abs(a) for a in b.zeros))
        for c in critical_points(b):
            m = max(m, abs(c), abs(evaluate(b, c)))
    r = math.sqrt(max(m, 1e-6)) * margin
    if not r < 1:
        raise ValueError("no admissible radius: a critical value is too close to the circle")
    return r


class _BranchData:
    """The branch ``psi_n`` of ``bt^{-1}(zeta^d)`` on ``S_{r_n}`` and its Laurent expansion."""

    def __init__(self, bt: BlaschkeProduct, r: float, n_samples: int):
        d = bt.degree
        self.bt, self.d = bt, d
        self.rn = r ** (1.0 / d)
        seeds = np.array(preimages(bt, r), dtype=complex)
        args = np.abs(np.angle(seeds))
        order = np.argsort(args)
        if len(order) > 1 and args[order[1]] - args[order[0]] < 1e-9:
            raise BranchAmbiguityError("two base preimages are equally close to the positive axis",
                                       location=0.0)
        w = complex(seeds[order[0]])
        t = TWO_PI * np.arange(n_samples + 1) / n_samples
        w_of_t = lambda s: r * complex(math.cos(d * s), math.sin(d * s))  # noqa: E731
        vals = [w]
        for k in range(n_samples):
            w = _continue_preimage(bt, w, w_of_t, t[k], t[k + 1])
            vals.append(w)
        if abs(vals[-1] - vals[0]) > 1e-9:
            raise ContinuationError("boundary lift does not close up", location=TWO_PI)
        psi = np.array(vals[:-1])
        zeta = self.rn * np.exp(1j * t[:-1])
        lam = np.log(psi / zeta)
        lam = lam.real + 1j * np.unwrap(lam.imag)
        if abs(lam[-1] - lam[0]) > 1.0:
            raise ContinuationError("boundary correspondence has nonzero winding")
        self.angles = t[:-1]
        self.psi = psi
        coef = np.fft.fft(lam) / n_samples
        k = np.fft.fftfreq(n_samples, 1.0 / n_samples).astype(int)
        keep = np.abs(coef) > 1e-15 * max(1.0, np.abs(coef).max())
        keep &= np.abs(k) < n_samples // 2
        self.k = k[keep]
        self.c = coef[keep]

    def Lambda(self, zeta):
        """``log(psi(zeta)/zeta)`` from the truncated Laurent series."""
        u = np.asarray(zeta, dtype=complex) / self.rn
        out = np.zeros(u.shape, dtype=complex)
        logu = np.log(u)
        for kk, cc in zip(self.k, self.c):
            out += cc * np.exp(kk * logu)
        return out

    def Lambda_on_circle(self, t):
        out = np.zeros(np.shape(t), dtype=complex)
        for kk, cc in zip(self.k, self.c):
            out += cc * np.exp(1j * kk * t)
        return out


def _polish(bt: BlaschkeProduct, w, target, iters: int = 8):
    w = w.copy()
    for _ in range(iters):
        ok = np.abs(w) < 1
        ws = np.where(ok, w, 0)
        step = (evaluate(bt, ws) - target) / bt.derivative(ws)
        w = np.where(ok, w - step, np.nan)
        if np.nanmax(np.abs(step), initial=0) < 1e-16:
            break
    return w


@dataclass
class GluingReport:
    r: float
    n_max: int
    lift_depth: int
    residuals: list
    identity_deviation: list
    reports: list
    interp_reports: list
    coverage: list

    @property
    def K_max(self) -> list:
        return [rep.K_max for rep in self.reports]

    def to_dict(self) -> dict:
        return {
            "r": self.r, "n_max": self.n_max, "lift_depth": self.lift_depth,
            "residuals": self.residuals, "identity_deviation": self.identity_deviation,
            "K_max": [k if np.isfinite(k) else None for k in self.K_max],
            "K_max_interpolation": [rep.K_max for rep in self.interp_reports],
            "coverage": self.coverage,
            "dilatation": [rep.to_dict() for rep in self.reports],
        }


class GluingMaps:
    """Maps ``h_n`` with ``h_n = id`` on ``D_r`` and ``bt_n o h_n = h_{n+1} o z^{d_n}`` on ``C_n``.

    Reference maps are ``b_n(z) = z^{d_n}`` with ``d_n = deg bt_n``. Values in
    ``C_n`` need ``lift_depth`` generations of lifting; points beyond are NaN.
    """

    def __init__(self, seq, r: float, n_max: int, lift_depth: int = 3, n_boundary: int = 512):
        self.seq, self.r, self.n_max, self.lift_depth = seq, float(r), int(n_max), int(lift_depth)
        top = n_max + lift_depth
        maps = [seq[n] for n in range(top + 1)]
        for n, b in enumerate(maps):
            worst = max([abs(a) for a in b.zeros]
                        + [max(abs(c), abs(evaluate(b, c))) for c in critical_points(b)])
            if not worst < r * r:
                raise ValueError(f"b~_{n} has a zero, critical point or critical value of modulus "
                                 f"{worst:.6g} outside D_(r^2) = D_{r * r:.6g}")
        self.maps = maps
        self.branch = [_BranchData(b, self.r, n_boundary) for b in maps]

    def degree(self, n: int) -> int:
        return self.maps[n].degree

    def rn(self, n: int) -> float:
        return self.branch[n].rn

    def covered_radius(self, n: int) -> float:
        e = 1.0
        for j in range(n, n + self.lift_depth + 1):
            e /= self.degree(j)
        return self.r ** e

    def log_ratio(self, n: int, z, depth: Optional[int] = None):
        """``log(h_n(z)/z)``, NaN where undefined."""
        if depth is None:
            depth = self.lift_depth
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, np.nan + 0j)
        a = np.abs(z)
        br = self.branch[n]
        rn = br.rn
        inner = a <= self.r
        out[inner] = 0.0
        ann = (a > self.r) & (a <= rn)
        if ann.any():
            za = z[ann]
            lam = (np.log(np.abs(za)) - math.log(self.r)) / (math.log(rn) - math.log(self.r))
            out[ann] = lam * br.Lambda_on_circle(np.angle(za))
        outer = (a > rn) & (a < 1)
        if outer.any() and depth > 0 and n + 1 < len(self.maps):
            zc = z[outer]
            d = br.d
            L1 = self.log_ratio(n + 1, zc ** d, depth - 1)
            fin = np.isfinite(L1)
            res = np.full(zc.shape, np.nan + 0j)
            if fin.any():
                zf = zc[fin]
                zeta = zf * np.exp(L1[fin] / d)
                pred = br.Lambda(zeta)
                w = zeta * np.exp(pred)
                w = _polish(self.maps[n], w, zeta ** d)
                lr = np.log(w / zf)
                guess = L1[fin] / d + pred
                lr = lr + 2j * np.pi * np.round((guess - lr).imag / TWO_PI)
                res[fin] = lr
            out[outer] = res
        return out

    def evaluate(self, n: int, z, depth: Optional[int] = None):
        z = np.asarray(z, dtype=complex)
        return z * np.exp(self.log_ratio(n, z, depth))

    def grid(self, n: int, n_t: int = 256) -> GridMap:
        s0 = math.log(self.r)
        s1 = math.log(self.covered_radius(n))
        ds = TWO_PI / n_t
        n_s = max(5, int(math.ceil((s1 - s0) / ds)) + 1)
        s = np.linspace(s0, s1, n_s)
        t = TWO_PI * np.arange(n_t) / n_t
        z = np.exp(s[None, :] + 1j * t[:, None])
        vals = self.evaluate(n, z)
        # the outermost column is the coverage limit: keep it only where defined
        return GridMap("logpolar", s, t, vals, meta={"construction": "gluing", "n": n})

    def interpolation_grid(self, n: int, n_t: int = 256) -> GridMap:
        """Step (3) alone: interpolation on ``A_n`` between the identity and ``psi_n``."""
        br = self.branch[n]
        t = TWO_PI * np.arange(n_t) / n_t
        inner = CircleMapSamples(self.r, t, self.r * np.exp(1j * t))
        outer_vals = br.rn * np.exp(1j * t) * np.exp(br.Lambda_on_circle(t))
        outer = CircleMapSamples(br.rn, t, outer_vals)
        ds = TWO_PI / n_t
        n_s = max(5, int(math.ceil((math.log(br.rn / self.r)) / ds)) + 1)
        return annulus_interpolate(inner, outer, RoundAnnulus(self.r, br.rn, n_s, n_t))


def build_gluing_maps(seq, r: float, n_max: int, lift_depth: int = 3, n_boundary: int = 512,
                      n_t: int = 256, n_test: int = 400, seed: int = 0):
    """Construct ``h_0 .. h_{n_max}`` and validate them.

    Returns ``(grids, report, maps)``: the sampled ``h_n`` as log-polar
    :class:`GridMap` objects, a :class:`GluingReport` with functional-equation
    residuals, identity-zone deviations and dilatation reports, and the
    :class:`GluingMaps` evaluator itself.
    """
    gm = GluingMaps(seq, r, n_max, lift_depth, n_boundary)
    rng = np.random.default_rng(seed)
    grids, reports, ireps, resid, ident, cover = [], [], [], [], [], []
    for n in range(n_max + 1):
        g = gm.grid(n, n_t)
        grids.append(g)
        reports.append(estimate_dilatation(g))
        ireps.append(estimate_dilatation(gm.interpolation_grid(n, n_t)))
        # functional equation on covered points of C_n
        rn = gm.rn(n)
        rho = rng.uniform(rn, gm.covered_radius(n), n_test)
        z = rho * np.exp(TWO_PI * 1j * rng.uniform(0, 1, n_test))
        hz = gm.evaluate(n, z)
        ok = np.isfinite(hz)
        lhs = evaluate(gm.maps[n], hz[ok])
        rhs = gm.evaluate(n + 1, z[ok] ** gm.degree(n))
        both = np.isfinite(rhs)
        resid.append(float(np.max(np.abs(lhs[both] - rhs[both]))) if both.any() else math.nan)
        zi = r * np.sqrt(rng.uniform(0, 1, n_test)) * np.exp(TWO_PI * 1j * rng.uniform(0, 1, n_test))
        ident.append(float(np.max(np.abs(gm.evaluate(n, zi) - zi))))
        cr = gm.covered_radius(n)
        cover.append(float((cr ** 2 - rn ** 2) / (1 - rn ** 2)))
    report = GluingReport(r=r, n_max=n_max, lift_depth=lift_depth, residuals=resid,
                          identity_deviation=ident, reports=reports, interp_reports=ireps,
                          coverage=cover)
    return grids, report, gm
