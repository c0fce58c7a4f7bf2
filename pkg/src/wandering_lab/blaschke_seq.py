"""Non-autonomous iteration of normalised Blaschke sequences.

A sequence is an index-deterministic provider ``n -> b_n``. The forward
compositions are ``B_n = b_{n-1} o ... o b_0`` with ``B_0 = id``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .blaschke import BlaschkeProduct, critical_points, evaluate, multiplier, random_normalized
from .disk_geometry import as_disk_value, hyp_dist


class BlaschkeSequence:
    """Bounded-degree sequence of normalised Blaschke products.

    ``provider`` must be pure: the same index always yields the same map.
    Results are memoised. ``length`` limits finite sequences (for example
    those extracted from a polynomial model).
    """

    def __init__(self, provider: Callable[[int], BlaschkeProduct], degree_bound: int,
                 declared_radius: Optional[float] = None, name: str = "",
                 length: Optional[int] = None):
        if degree_bound < 2:
            raise ValueError("degree_bound must be at least 2")
        if declared_radius is not None and not (0 < declared_radius < 1):
            raise ValueError("declared_radius must lie in (0, 1)")
        self.provider = provider
        self.degree_bound = int(degree_bound)
        self.declared_radius = declared_radius
        self.name = name
        self.length = length
        self._cache: dict = {}

    def __getitem__(self, n: int) -> BlaschkeProduct:
        n = int(n)
        if n < 0 or (self.length is not None and n >= self.length):
            raise IndexError(f"sequence index {n} out of range")
        b = self._cache.get(n)
        if b is None:
            b = self.provider(n)
            if not isinstance(b, BlaschkeProduct) or not b.normalized:
                raise TypeError(f"b_{n} is not a normalised BlaschkeProduct")
            if not 2 <= b.degree <= self.degree_bound:
                raise ValueError(f"deg b_{n} = {b.degree} outside [2, {self.degree_bound}]")
            self._cache[n] = b
        return b

    def __len__(self):
        if self.length is None:
            raise TypeError("infinite sequence has no length")
        return self.length

    def horizon(self, n_max: int) -> int:
        """Largest usable index not exceeding ``n_max``."""
        return n_max if self.length is None else min(n_max, self.length - 1)

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, b: BlaschkeProduct, name: str = "") -> "BlaschkeSequence":
        return cls(lambda n: b, max(2, b.degree), name=name or "constant")

    @classmethod
    def power(cls, d: int) -> "BlaschkeSequence":
        return cls.constant(BlaschkeProduct.power(d), name=f"power:{d}")

    @classmethod
    def from_list(cls, maps: Sequence[BlaschkeProduct], name: str = "") -> "BlaschkeSequence":
        maps = list(maps)
        return cls(lambda n: maps[n], max(b.degree for b in maps), name=name, length=len(maps))


@dataclass
class OrbitTrace:
    start: complex
    points: np.ndarray
    annulus_hits: list = field(default_factory=list)


def compose_orbit(seq: BlaschkeSequence, z, n: int, r: Optional[float] = None) -> OrbitTrace:
    """``B_0(z), ..., B_n(z)``; with ``r`` given, also the indices where ``B_k(z)`` is in ``A_k``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = as_disk_value(z)
    pts = np.empty(n + 1, dtype=complex)
    pts[0] = z
    hits = []
    for k in range(n):
        w = evaluate(seq[k], pts[k])
        if r is not None and abs(pts[k]) > r and abs(w) < r:
            hits.append(k)
        pts[k + 1] = w
    return OrbitTrace(start=z, points=pts, annulus_hits=hits)


def _check_radius(seq: BlaschkeSequence, r: float, n_max: int):
    if not (0 < r < 1):
        raise ValueError(f"r must lie in (0, 1), got {r}")
    for k in range(seq.horizon(n_max) + 1):
        m = max(abs(a) for a in seq[k].zeros)
        if not m < r:
            raise ValueError(f"b_{k} has a zero of modulus {m} >= r = {r}")


def annulus_entry_indices(seq: BlaschkeSequence, z, r: float, n_max: int) -> list:
    """Indices ``n <= n_max`` with ``B_n(z)`` in ``A_n = b_n^{-1}(D_r)`` minus the closed disk ``D_r``."""
    _check_radius(seq, r, n_max)
    w = as_disk_value(z)
    out = []
    for n in range(seq.horizon(n_max) + 1):
        nxt = evaluate(seq[n], w)
        if abs(w) > r and abs(nxt) < r:
            out.append(n)
        w = nxt
    return out


@dataclass
class HyperbolicityCertificate:
    r_est: float
    s_est: float
    C_est: float
    verdict: str
    uniformly_hyperbolic: bool
    horizon: int
    margin: float
    witnesses: dict
    caveat: str = ("finite-horizon evidence only: uniform hyperbolicity is a statement "
                   "about all indices")

    def to_dict(self) -> dict:
        return {
            "r_est": self.r_est, "s_est": self.s_est, "C_est": self.C_est,
            "verdict": self.verdict, "uniformly_hyperbolic": self.uniformly_hyperbolic,
            "horizon": self.horizon, "margin": self.margin,
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
            "caveat": self.caveat,
        }


def certify_uniform_hyperbolicity(seq: BlaschkeSequence, n_max: int,
                                  margin: float = 1e-3) -> HyperbolicityCertificate:
    """Sup of zero moduli, critical moduli and critical distances from 0 over ``n <= n_max``.

    The orbit used for the critical-distance condition is the fixed orbit at 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    top = seq.horizon(n_max)
    r_est = s_est = C_est = 0.0
    wit = {"r": (0, 0), "s": (0, 0), "C": (0, 0)}
    for n in range(top + 1):
        b = seq[n]
        for k, a in enumerate(b.zeros):
            if abs(a) > r_est:
                r_est, wit["r"] = abs(a), (n, k)
        for k, c in enumerate(critical_points(b)):
            if abs(c) > s_est:
                s_est, wit["s"] = abs(c), (n, k)
            dist = hyp_dist(0, c)
            if dist > C_est:
                C_est, wit["C"] = dist, (n, k)
    ok = r_est < 1.0 - margin
    verdict = (f"uniformly hyperbolic up to n_max={top}" if ok
               else f"not uniformly hyperbolic (zero modulus {r_est:.6g} within {margin:g} of 1)")
    return HyperbolicityCertificate(r_est=r_est, s_est=s_est, C_est=C_est, verdict=verdict,
                                    uniformly_hyperbolic=ok, horizon=top, margin=margin,
                                    witnesses=wit)


def contraction_average(seq: BlaschkeSequence, n: int) -> float:
    """``(1/n) sum_{k=1}^{n} |b_k'(0)|``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return float(sum(abs(multiplier(seq[k])) for k in range(1, n + 1)) / n)


@dataclass
class RateFit:
    rate: float
    slope: float
    window: tuple
    truncated: bool
    distances: np.ndarray


def measure_contraction_rate(seq: BlaschkeSequence, z, z2, n_max: int) -> RateFit:
    """Fit ``d(B_n z, B_n z2) ~ c^n`` by least squares on the tail half of the trace."""
    z, z2 = as_disk_value(z), as_disk_value(z2)
    if z == z2:
        raise ValueError("the two starting points must differ")
    n_max = seq.horizon(n_max)
    a = compose_orbit(seq, z, n_max).points
    b = compose_orbit(seq, z2, n_max).points
    dist = np.array([hyp_dist(complex(p), complex(q)) for p, q in zip(a, b)])
    good = dist > 1e-300
    stop = int(np.argmin(good)) if not good.all() else len(dist)
    truncated = stop < len(dist)
    if stop < 2:
        raise ValueError("distances underflow before a rate can be fitted")
    lo = stop // 2
    if stop - lo < 2:
        lo = stop - 2
    n = np.arange(lo, stop)
    slope = float(np.polyfit(n, np.log(dist[lo:stop]), 1)[0])
    return RateFit(rate=math.exp(slope), slope=slope, window=(lo, stop - 1),
                   truncated=truncated, distances=dist)


# ---------------------------------------------------------------------------
# fixtures and presets
# ---------------------------------------------------------------------------

def default_contracting_schedule(n: int) -> float:
    """``a_n = 1 - 2/n^2``: ``a_2 = 1/2`` and ``a_n`` increases to 1."""
    return 1.0 - 2.0 / (n * n)


def power_schedule(p: float) -> Callable[[int], float]:
    """``a_n = 1 - (1/2)(2/n)^p``, the family through ``a_2 = 1/2``."""
    return lambda n: 1.0 - 0.5 * (2.0 / n) ** p


def contracting_fixture(a_schedule: Optional[Callable[[int], float]] = None) -> BlaschkeSequence:
    """Alternating ``z^2`` (odd ``n``) and ``z (z + a_n)/(1 + a_n z)`` (even ``n >= 2``).

    Index 0 is also ``z^2``; the alternating pattern proper starts at ``n = 1``.
    """
    a = a_schedule or default_contracting_schedule
    if abs(a(2) - 0.5) > 1e-15:
        raise ValueError("the schedule must satisfy a_2 = 1/2")

    def provider(n: int) -> BlaschkeProduct:
        if n == 0 or n % 2 == 1:
            return BlaschkeProduct.power(2)
        an = float(a(n))
        if not (0.0 < an < 1.0):
            raise ValueError(f"a_{n} = {an} leaves (0, 1)")
        if n >= 4 and an < float(a(n - 2)):
            raise ValueError(f"schedule decreases at n = {n}")
        return BlaschkeProduct((0j, -an))

    return BlaschkeSequence(provider, 2, name="contracting")


# interface names kept for callers of the published API
prop54_fixture = contracting_fixture
default_prop54_schedule = default_contracting_schedule


def random_uniform_sequence(seed: int, degree_bound: int = 5, r: float = 0.9) -> BlaschkeSequence:
    """Uniformly hyperbolic sequence with all zeros in ``D_r``, reproducible per index."""
    def provider(n: int) -> BlaschkeProduct:
        rng = np.random.default_rng([seed, n])
        return random_normalized(rng, degree_bound, r)

    return BlaschkeSequence(provider, degree_bound, declared_radius=r, name=f"random:{seed}")


def _parse_complex_list(text: str) -> list:
    return [complex(tok.strip().replace(" ", "")) for tok in text.split(",") if tok.strip()]


def sequence_from_preset(spec: str) -> BlaschkeSequence:
    """Build a sequence from a preset name.

    ``power:d``, ``constant-zero-list:a1,a2,...`` (zeros besides the one at 0),
    ``contracting`` or ``contracting:p`` (schedule ``1 - (1/2)(2/n)^p``;
    ``prop54`` is accepted as an alias),
    ``random:seed`` (uniform random products of degree at most 5),
    ``model:<polynomial>`` (built through :mod:`wandering_lab.model_builder`).
    """
    kind, _, arg = spec.partition(":")
    if kind == "power":
        return BlaschkeSequence.power(int(arg or 2))
    if kind == "constant-zero-list":
        b = BlaschkeProduct.from_nonzero(_parse_complex_list(arg))
        return BlaschkeSequence.constant(b, name=spec)
    if kind in ("contracting", "prop54"):
        if arg in ("", "default"):
            return contracting_fixture()
        return contracting_fixture(power_schedule(float(arg)))
    if kind == "random":
        return random_uniform_sequence(int(arg or 0))
    if kind == "model":
        from .model_builder import sequence_from_model_spec
        return sequence_from_model_spec(arg)
    raise ValueError(f"unknown sequence preset {spec!r}")
