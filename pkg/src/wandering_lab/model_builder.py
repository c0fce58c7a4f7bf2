"""Blaschke models of polynomials on equipotential domains, and the template maps.

For ``P`` with ``P(0) = 0`` and an admissible radius ``R``, the domains
``D_n = {G < d^n log R}`` are mapped to the disk by ``psi_n`` (``psi_n(0) = 0``,
``psi_n'(0) > 0``) and ``b_n = psi_{n+1} o P o psi_n^{-1}`` is recorded by its
zeros ``psi_n(P^{-1}(0))`` and a fitted phase. The three-map composition is
kept only as a residual oracle.
"""

from __future__ import annotations

import cmath
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Optional

import numpy as np

from .blaschke import BlaschkeProduct, critical_points
from .blaschke_seq import BlaschkeSequence
from .disk_geometry import hyp_dist
from .poly_dynamics import (DiscretenessReport, EquipotentialDomain, PlaneGrid, Polynomial, Region,
                            choose_R, discreteness_diagnostic, equipotential_curve,
                            external_ray_point, grand_orbit_sample, green_value, green_values,
                            julia_field, koenigs, koenigs_inverse)
from .riemann import RiemannMapNumeric, boundary_key, riemann_map

SCHEMA = "wandering-lab/v1"


class ModelError(ArithmeticError):
    pass


def _test_points(n: int = 64, radius: float = 0.9) -> np.ndarray:
    """Deterministic test set in ``D_radius``: four rings of ``n/4`` points, staggered."""
    per = n // 4
    rings = radius * np.arange(1, 5) / 4
    pts = [r * np.exp(2j * np.pi * (np.arange(per) + 0.5 * (i % 2)) / per)
           for i, r in enumerate(rings)]
    return np.concatenate(pts)


@dataclass
class PolynomialModel:
    P: Polynomial
    R: float
    n_max: int
    accuracy: float
    domains: list
    maps: list
    blaschke: list
    residuals: list
    warnings: list = field(default_factory=list)

    @property
    def degree(self) -> int:
        return self.P.degree

    def sequence(self) -> BlaschkeSequence:
        return BlaschkeSequence.from_list(self.blaschke, name=f"model:{self.P.coeffs}")

    def conjugacy_residual(self, n: int, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        direct = self.maps[n + 1](self.P(self.maps[n].inverse(z)))
        return np.abs(direct - self.blaschke[n](z))

    def fingerprints(self) -> list:
        """Rotation-invariant data per ``n``: sorted ``|zeros|`` and ``|b_n'(0)|``."""
        return [{"abs_zeros": sorted(abs(a) for a in b.zeros), "abs_multiplier": abs(b.multiplier())}
                for b in self.blaschke]

    def summary(self) -> dict:
        return {
            "P": self.P.to_dict(),
            "R": self.R,
            "n_max": self.n_max,
            "accuracy": self.accuracy,
            "riemann_accuracy": [m.accuracy for m in self.maps],
            "residuals": self.residuals,
            "blaschke": [b.to_dict() for b in self.blaschke],
            "critical_points": [[[c.real, c.imag] for c in critical_points(b)] for b in self.blaschke],
            "warnings": list(self.warnings),
        }

    def save_manifest(self, directory) -> str:
        """Write ``model.json`` plus one ``.npz`` per Riemann map under ``directory``."""
        os.makedirs(directory, exist_ok=True)
        files = []
        for m in self.maps:
            name = boundary_key(m.boundary, self.accuracy) + ".npz"
            path = os.path.join(directory, name)
            if not os.path.exists(path):
                m.save(path)
            files.append(name)
        doc = {"schema": SCHEMA, "kind": "polynomial-model", **self.summary(), "riemann_maps": files}
        out = os.path.join(directory, "model.json")
        with open(out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return out

    @classmethod
    def load_manifest(cls, path) -> "PolynomialModel":
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("schema") != SCHEMA:
            raise ValueError("unsupported manifest schema")
        base = os.path.dirname(path)
        P = Polynomial(tuple(complex(a, b) for a, b in doc["P"]["coeffs"]))
        maps = [RiemannMapNumeric.load(os.path.join(base, f)) for f in doc["riemann_maps"]]
        bl = [BlaschkeProduct.from_dict(d) for d in doc["blaschke"]]
        return cls(P=P, R=doc["R"], n_max=doc["n_max"], accuracy=doc["accuracy"], domains=[],
                   maps=maps, blaschke=bl, residuals=doc["residuals"],
                   warnings=doc.get("warnings", []))


def _domain_and_map(P, R, n, n_samples, accuracy):
    dom = equipotential_curve(P, R, n, n_samples)
    rm = riemann_map(dom.boundary, accuracy,
                     refine=lambda m: equipotential_curve(P, R, n, m).boundary)
    return dom, rm


def build_model(P: Polynomial, R: Optional[float] = None, n_max: int = 4, accuracy: float = 1e-3,
                n_samples: int = 512, threads: int = 1) -> PolynomialModel:
    """Blaschke sequence ``b_0 .. b_{n_max-1}`` of ``P`` on ``D_0 .. D_{n_max}``."""
    if not P.fixes_zero:
        raise ValueError("P(0) must be 0; conjugate the fixed point to 0 first")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if R is None:
        R = choose_R(P)
    crit_g = float(np.max(green_values(P, P.critical_points())))
    if not (R > 1 and math.log(R) > crit_g):
        raise ValueError(f"R = {R} is not admissible: log R must exceed the critical Green value "
                         f"{crit_g:.6g}")
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            built = list(ex.map(lambda n: _domain_and_map(P, R, n, n_samples, accuracy),
                                range(n_max + 1)))
    else:
        built = [_domain_and_map(P, R, n, n_samples, accuracy) for n in range(n_max + 1)]
    domains = [b[0] for b in built]
    maps = [b[1] for b in built]
    notes = []
    for n, m in enumerate(maps):
        if m.degraded:
            msg = f"psi_{n} accuracy {m.accuracy:.3g} misses the target {accuracy:.3g}"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    roots = P.roots()
    tests = _test_points()
    blaschke, residuals = [], []
    for n in range(n_max):
        zeros = [complex(maps[n](r)) if abs(r) > 0 else 0j for r in roots]
        zeros.sort(key=lambda a: (abs(a) > 0, abs(a), cmath.phase(a)))
        zeros[0] = 0j
        if not all(abs(a) < 1 for a in zeros):
            raise ModelError(f"a zero of b_{n} left the disk")
        core = BlaschkeProduct(tuple(zeros))
        zstar = 0.5 + 0j
        if min(abs(zstar - a) for a in zeros) < 0.1:
            zstar = 0.5j
        target = complex(maps[n + 1](P(maps[n].inverse(np.array([zstar])))[0]))
        phase = target / complex(core(zstar))
        if abs(abs(phase) - 1) > 10 * accuracy:
            raise ModelError(f"fitted phase of b_{n} has modulus {abs(phase):.6g}")
        b = BlaschkeProduct(tuple(zeros), phase / abs(phase))
        direct = maps[n + 1](P(maps[n].inverse(tests)))
        res = float(np.max(np.abs(direct - b(tests))))
        if res > 10 * accuracy:
            raise ModelError(f"conjugacy residual {res:.3g} of b_{n} exceeds 10 x accuracy")
        blaschke.append(b)
        residuals.append(res)
    return PolynomialModel(P=P, R=float(R), n_max=n_max, accuracy=accuracy, domains=domains,
                           maps=maps, blaschke=blaschke, residuals=residuals, warnings=notes)


def critical_distance_profile(model: PolynomialModel) -> list:
    """``max_c hyp_dist(0, psi_n(c))`` over critical points ``c`` of ``P``, for ``n <= n_max``."""
    crit = model.P.critical_points()
    return [float(max(hyp_dist(0, complex(m(np.array([c]))[0])) for c in crit)) for m in model.maps]


# ---------------------------------------------------------------------------
# template functions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _template_coeffs(d: int):
    if d < 2:
        raise ValueError("d must be at least 2")
    coef = np.array([0.0] + [2.0 * comb(d - 1, j) / j for j in range(1, d)])
    c = float(np.polynomial.polynomial.polyval(-1.0, coef))
    return coef, c


def template_q(z, d: int):
    """``q(z) = 2 sum_{j=1}^{d-1} C(d-1, j) z^j / j``."""
    coef, _ = _template_coeffs(d)
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), coef)


def template_G(z, d: int):
    """``G(z) = -z^2 exp(q(z) - q(-1))``; superattracting fixed points at 0 and -1."""
    _, c = _template_coeffs(d)
    z = np.asarray(z, dtype=complex)
    return -z * z * np.exp(template_q(z, d) - c)


def template_G_prime(z, d: int):
    _, c = _template_coeffs(d)
    z = np.asarray(z, dtype=complex)
    return -2 * z * (1 + z) ** (d - 1) * np.exp(template_q(z, d) - c)


def template_g(w, d: int):
    """``g(w) = 2w + q(e^w) - q(-1) + pi i``, a lift of ``G`` under ``exp``."""
    _, c = _template_coeffs(d)
    w = np.asarray(w, dtype=complex)
    return 2 * w + template_q(np.exp(w), d) - c + 1j * math.pi


def template_g_prime(w, d: int):
    return 2 * (1 + np.exp(np.asarray(w, dtype=complex))) ** (d - 1)


def template_point(k: int) -> complex:
    """``z_k = (2k - 1) pi i``."""
    return complex(0.0, (2 * k - 1) * math.pi)


def semiconjugacy_residual(w, d: int) -> np.ndarray:
    """``|exp(g(w)) - G(exp(w))|`` relative to ``|G(exp(w))| (1 + |g(w)|)``.

    Both sides reach ``exp(e^{(d-1) Re w})`` in size, so the comparison is made
    relative to magnitude and to the conditioning of ``exp`` at ``g(w)``.
    Where either side leaves the normal floating range the two logarithms
    are compared instead.
    """
    _, c = _template_coeffs(d)
    w = np.asarray(w, dtype=complex)
    gw = template_g(w, d)
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = np.exp(gw)
        ez = np.exp(w)
        rhs = template_G(ez, d)
        rel = np.abs(lhs - rhs) / np.abs(rhs)
    bad = ~np.isfinite(rel) | (np.abs(gw.real) > 700)
    if np.any(bad):
        ez_b = ez[bad]
        log_rhs = np.log(-ez_b * ez_b) + template_q(ez_b, d) - c
        delta = gw[bad] - log_rhs
        delta = delta.real + 1j * (np.mod(delta.imag + math.pi, 2 * math.pi) - math.pi)
        rel = rel.copy()
        rel[bad] = np.abs(np.expm1(delta))
    return rel / (1 + np.abs(gw))


@dataclass
class TemplateTrace:
    w0: complex
    points: np.ndarray
    exp_points: np.ndarray
    basin_distance: np.ndarray
    overflow: bool
    in_basin: bool

    def to_dict(self) -> dict:
        return {
            "w0": [self.w0.real, self.w0.imag],
            "points": [[w.real, w.imag] for w in self.points],
            "basin_distance": [float(x) for x in self.basin_distance],
            "overflow": self.overflow,
            "in_basin": self.in_basin,
        }


def template_orbit_probe(d: int, w0: complex, n: int, guard: float = 1e6) -> TemplateTrace:
    """Iterate ``g`` from ``w0`` and follow ``exp`` of the trace under ``G``.

    ``basin_distance[k] = |G^k(e^{w0}) + 1|`` measures convergence to the
    superattracting fixed point ``-1``; iteration stops once ``|w| > guard``.
    """
    pts = [complex(w0)]
    overflow = False
    for _ in range(n):
        w = complex(template_g(pts[-1], d))
        if not np.isfinite(w) or abs(w) > guard:
            overflow = True
            break
        pts.append(w)
    pts = np.array(pts)
    u = [complex(np.exp(w0))]
    for _ in range(len(pts) - 1):
        nxt = complex(template_G(u[-1], d))
        if not np.isfinite(nxt):
            break
        u.append(nxt)
    u = np.array(u)
    dist = np.abs(u + 1)
    in_basin = bool(len(dist) > 1 and dist[-1] < 1e-8)
    return TemplateTrace(w0=complex(w0), points=pts, exp_points=u, basin_distance=dist,
                         overflow=overflow, in_basin=in_basin)


def template_check(d: int, ks=(1, 2, 4), n_random: int = 100, radius: float = 10.0,
                   seed: int = 0) -> dict:
    """Residuals of ``g(z_k) = z_{2k}``, ``g'(z_k) = 0`` and of the semiconjugacy."""
    zk = np.array([template_point(k) for k in ks])
    z2k = np.array([template_point(2 * k) for k in ks])
    rng = np.random.default_rng(seed)
    w = radius * np.sqrt(rng.uniform(0, 1, n_random)) * np.exp(2j * np.pi * rng.uniform(0, 1, n_random))
    return {
        "schema": SCHEMA,
        "d": d,
        "k": list(ks),
        "g_zk_residual": float(np.max(np.abs(template_g(zk, d) - z2k))),
        "g_prime_zk": float(np.max(np.abs(template_g_prime(zk, d)))),
        "G_fixed_residual": float(abs(template_G(-1.0, d) + 1) + abs(template_G_prime(-1.0, d))),
        "semiconjugacy_residual": float(np.max(semiconjugacy_residual(w, d))),
        "n_random": n_random,
        "seed": seed,
    }


# ---------------------------------------------------------------------------
# coexistence experiment
# ---------------------------------------------------------------------------

def rabbit_lambda(c: complex = complex(-0.123, 0.745)) -> complex:
    """Multiplier ``2 alpha`` at the fixed point ``alpha = (1 - sqrt(1 - 4c))/2`` of ``z^2 + c``.

    For the rabbit parameter this fixed point is repelling (``|2 alpha| > 1``);
    the fixture is used for pictures only.
    """
    alpha = (1 - cmath.sqrt(1 - 4 * c)) / 2
    return 2 * alpha


def rabbit_fixture() -> Polynomial:
    """``z^2 + c`` conjugated so that the fixed point ``alpha`` sits at 0."""
    return Polynomial.lambda_quadratic(rabbit_lambda())


def koenigs_probe(P: Polynomial, distance: float = 1.0) -> complex:
    """Point on the positive Kœnigs ray at hyperbolic distance ``distance`` inside the
    linearisation disk ``|kappa| < |kappa(c)|`` bounded by the critical value level."""
    crit = P.critical_points()
    kc = float(np.min(np.abs(koenigs(P, crit))))
    return koenigs_inverse(P, math.tanh(distance / 2) * kc)


@dataclass
class CoexistenceResult:
    report: dict
    figures: dict


def coexistence_experiment(lam: complex = 0.5, depth: int = 8, accuracy: float = 1e-3,
                           R: Optional[float] = None, n_max: int = 4, z2_level: Optional[float] = None,
                           raster: int = 256, threads: int = 1) -> CoexistenceResult:
    """Grand-orbit discreteness at one probe in the basin of 0 and one in ``D_0`` near the Julia set.

    The report carries both verdicts, read as ``(z1, z2)``; inconclusive
    verdicts are reported as such.
    """
    lam = complex(lam)
    if not 0 < abs(lam) < 1:
        raise ValueError("need 0 < |lambda| < 1")
    P = Polynomial.lambda_quadratic(lam)
    if R is None:
        R = 4.0 if lam == 0.5 else choose_R(P)
    model = build_model(P, R, n_max, accuracy, threads=threads)
    if z2_level is None:
        z2_level = math.log(R) / 2
    if not 0 < z2_level < math.log(R):
        raise ValueError(f"probe z2 needs 0 < G(z2) < log R, got {z2_level}")
    z1 = koenigs_probe(P, 1.0)
    z2 = external_ray_point(P, z2_level, 0.0)
    region = Region.disk(0j, R)

    def run(z):
        return discreteness_diagnostic(P, z, region, depth)

    if threads > 1:
        with ThreadPoolExecutor(2) as ex:
            r1, r2 = ex.map(run, (z1, z2))
    else:
        r1, r2 = run(z1), run(z2)
    profile = critical_distance_profile(model)
    report = {
        "schema": SCHEMA,
        "kind": "coexistence",
        "lambda": [lam.real, lam.imag],
        "R": R,
        "depth": depth,
        "probes": {
            "z1": {"point": [z1.real, z1.imag], "green": green_value(P, z1), **r1.to_dict()},
            "z2": {"point": [z2.real, z2.imag], "green": green_value(P, z2), **r2.to_dict()},
        },
        "verdicts": [r1.verdict, r2.verdict],
        "model": model.summary(),
        "critical_distance_profile": profile,
    }
    figures = coexistence_figures(model, [r1, r2], region, depth, raster, threads)
    return CoexistenceResult(report=report, figures=figures)


def coexistence_figures(model: PolynomialModel, reports: list, region: Region, depth: int,
                        raster: int = 256, threads: int = 1) -> dict:
    P = model.P
    ext = 1.1 * float(np.max(np.abs(model.domains[1].boundary))) if len(model.domains) > 1 else 4.0
    grid = PlaneGrid(-ext, ext, -ext, ext, raster, raster)
    g, _, _ = julia_field(P, grid, threads=threads)
    scatter = {}
    for name, rep in zip(("z1", "z2"), reports):
        s = grand_orbit_sample(P, rep.probe, depth, depth, region)
        scatter[name] = s
    return {
        "grid": grid,
        "green": g,
        "boundaries": [d.boundary for d in model.domains[:2]],
        "scatter": scatter,
        "blaschke": [(np.array(b.zeros), np.array(critical_points(b))) for b in model.blaschke],
    }


def rabbit_figure_data(raster: int = 256, threads: int = 1) -> dict:
    """Green raster of the rabbit fixture and its first two equipotential boundaries."""
    P = rabbit_fixture()
    R = choose_R(P)
    doms = [equipotential_curve(P, R, n) for n in range(2)]
    ext = 1.1 * float(np.max(np.abs(doms[1].boundary)))
    grid = PlaneGrid(-ext, ext, -ext, ext, raster, raster)
    g, _, _ = julia_field(P, grid, threads=threads)
    return {"P": P, "R": R, "grid": grid, "green": g, "boundaries": [d.boundary for d in doms]}


def sequence_from_model_spec(spec: str) -> BlaschkeSequence:
    """``<polynomial>[;R=<R>][;n=<n_max>]`` with the polynomial in :meth:`Polynomial.parse` form."""
    parts = [p.strip() for p in spec.split(";")]
    P = Polynomial.parse(parts[0])
    opts = dict(p.split("=", 1) for p in parts[1:] if p)
    R = float(opts["R"]) if "R" in opts else None
    n = int(opts.get("n", 4))
    return build_model(P, R, n).sequence()


__all__ = [
    "PolynomialModel", "ModelError", "build_model", "critical_distance_profile", "template_q",
    "template_G", "template_G_prime", "template_g", "template_g_prime", "template_point",
    "semiconjugacy_residual", "template_orbit_probe", "template_check", "TemplateTrace",
    "coexistence_experiment", "CoexistenceResult", "rabbit_lambda", "rabbit_fixture",
    "koenigs_probe", "rabbit_figure_data", "sequence_from_model_spec", "EquipotentialDomain",
    "DiscretenessReport",
]
