"""Command-line front end: ``wandering-lab <subcommand> [options]``.

Exit codes: 0 success, 2 failed precondition or validation, 64 usage error.
Reports are JSON (schema ``wandering-lab/v1``) written to ``<out>/report.json``
or to standard output when no output directory is set. ``WANDERING_LAB_OUT``
overrides the default output directory. ``--config FILE`` reads a flat
``key = value`` file whose entries are overridden by explicit flags.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys

import numpy as np

from . import __version__
from .blaschke import (BlaschkeProduct, annulus_modulus_bounds, critical_points, evaluate,
                       preimage_domain, random_normalized)
from .blaschke_seq import (certify_uniform_hyperbolicity, contraction_average,
                           measure_contraction_rate, sequence_from_preset)
from .disk_geometry import hyp_dist, schwarz_preimage_radius, uniform_schwarz_bound
from .model_builder import (build_model, coexistence_experiment, critical_distance_profile,
                            template_check)
from .poly_dynamics import (PlaneGrid, Polynomial, Region, bottcher, bottcher_data,
                            discreteness_diagnostic, equipotential_curve, external_ray_point,
                            grand_orbit_sample, green_value, holomorphic_motion_transport,
                            julia_field)
from .qc_numerics import build_gluing_maps, gluing_radius
from .render import (colorize_green, dumps_report, ensure_dir, mark_points, read_points_csv,
                     write_p6, write_points_csv)
from .riemann import riemann_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 2, 64
OUT_ENV = "WANDERING_LAB_OUT"
_META_KEYS = {"config", "save_config", "out", "command", "handler", "threads"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def cplx(text: str) -> complex:
    return complex(str(text).replace(" ", "").replace("i", "j"))


def cplx_list(text: str) -> list:
    return [cplx(t) for t in str(text).split(",") if t.strip()]


def _poly(text: str) -> Polynomial:
    return Polynomial.parse(str(text).replace("i", "j"))


def region_arg(text: str) -> Region:
    kind, _, rest = str(text).partition(":")
    vals = [float(v) for v in rest.split(",")]
    if kind == "disk" and len(vals) == 3:
        return Region.disk(complex(vals[0], vals[1]), vals[2])
    if kind == "box" and len(vals) == 4:
        return Region.box(*vals)
    raise argparse.ArgumentTypeError("region must be disk:cx,cy,r or box:x0,x1,y0,y1")


def extent_arg(text: str) -> tuple:
    vals = [float(v) for v in str(text).split(",")]
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("extent must be x0,x1,y0,y1")
    return tuple(vals)


def _bool(text) -> bool:
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _pts(z) -> list:
    return [[float(w.real), float(w.imag)] for w in np.atleast_1d(np.asarray(z, dtype=complex))]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_schwarz_check(a, out):
    rng = np.random.default_rng(a.seed)
    radii = (0.3, 0.6, 0.9)
    violations, worst, checked = 0, -math.inf, 0
    for _ in range(a.trials):
        b = random_normalized(rng, a.max_degree, 0.95)
        rho = abs(b.multiplier())
        for r in radii:
            z = r * np.sqrt(rng.uniform(0, 1, a.points)) * np.exp(2j * np.pi * rng.uniform(0, 1, a.points))
            c = uniform_schwarz_bound(rho, r)
            excess = np.abs(evaluate(b, z)) - c * np.abs(z)
            violations += int(np.sum(excess > 1e-12))
            worst = max(worst, float(excess.max()))
            checked += a.points
    return {"command": "schwarz-check", "trials": a.trials, "seed": a.seed, "radii": list(radii),
            "points_checked": checked, "violations": violations, "max_excess": worst}


def cmd_blaschke_info(a, out):
    b = BlaschkeProduct.from_nonzero(cplx_list(a.zeros), cplx(a.phase))
    crit = critical_points(b)
    rep = {"command": "blaschke-info", "degree": b.degree, "zeros": _pts(b.zeros),
           "phase": _pts(b.phase)[0], "multiplier": _pts(b.multiplier())[0],
           "critical_points": _pts(crit), "critical_values": _pts([evaluate(b, c) for c in crit]),
           "critical_distances": [hyp_dist(0, c) for c in crit]}
    if a.r is not None:
        dom = preimage_domain(b, a.r)
        lo, hi = annulus_modulus_bounds(b, a.r)
        rep.update({"r": a.r, "preimage_min_modulus": float(np.min(np.abs(dom.boundary))),
                    "schwarz_radius": schwarz_preimage_radius(a.r),
                    "modulus_bounds": [lo, hi], "modulus_estimate": dom.annulus_modulus()})
        if out:
            write_points_csv(os.path.join(out, "preimage_boundary.csv"), dom.boundary)
    return rep


def cmd_seq_certify(a, out):
    seq = sequence_from_preset(a.preset)
    cert = certify_uniform_hyperbolicity(seq, a.n_max, a.margin)
    top = seq.horizon(a.n_max)
    return {"command": "seq-certify", "preset": a.preset, "certificate": cert.to_dict(),
            "contraction_average": contraction_average(seq, top)}


def cmd_seq_rate(a, out):
    seq = sequence_from_preset(a.preset)
    fit = measure_contraction_rate(seq, cplx(a.z), cplx(a.z2), a.n_max)
    return {"command": "seq-rate", "preset": a.preset, "rate": fit.rate, "slope": fit.slope,
            "window": list(fit.window), "truncated": fit.truncated,
            "distances": [float(x) for x in fit.distances]}


def cmd_glue(a, out):
    if a.zeros:
        from .blaschke_seq import BlaschkeSequence
        seq = BlaschkeSequence.constant(BlaschkeProduct.from_nonzero(cplx_list(a.zeros)))
    else:
        seq = sequence_from_preset(a.preset)
    r = a.r if a.r is not None else gluing_radius([seq[n] for n in range(a.n_max + a.lift_depth + 1)])
    grids, rep, _ = build_gluing_maps(seq, r, a.n_max, a.lift_depth, a.n_boundary, a.n_t)
    if out:
        for n, g in enumerate(grids):
            g.save_raster(os.path.join(out, f"h_{n}.wlgrid"))
    return {"command": "glue", **rep.to_dict()}


def cmd_bottcher(a, out):
    P = _poly(a.poly)
    bd = bottcher_data(P)
    rep = {"command": "bottcher", "P": P.to_dict(), "escape_radius": bd.escape_radius,
           "valid_level": bd.valid_level}
    if a.z is not None:
        z = cplx(a.z)
        rep["z"] = _pts(z)[0]
        rep["green"] = green_value(P, z)
        if abs(z) >= bd.escape_radius:
            rep["bottcher"] = _pts(bottcher(P, z))[0]
    if a.level is not None:
        w = external_ray_point(P, a.level, a.theta)
        rep["ray_point"] = _pts(w)[0]
        rep["ray_point_green"] = green_value(P, w)
    return rep


def cmd_equipotential(a, out):
    P = _poly(a.poly)
    dom = equipotential_curve(P, a.R, a.n, a.samples)
    if out:
        write_points_csv(os.path.join(out, "boundary.csv"), dom.boundary, {"angle": dom.angles})
    return {"command": "equipotential", "P": P.to_dict(), "R": a.R, "n": a.n, "level": dom.level,
            "samples": len(dom.boundary), "green_residual": dom.green_residual,
            "max_modulus": float(np.max(np.abs(dom.boundary)))}


def cmd_riemann_map(a, out):
    if a.boundary:
        pts = read_points_csv(a.boundary)
        source = {"boundary_file": os.path.basename(a.boundary)}
    else:
        P = _poly(a.poly)
        pts = equipotential_curve(P, a.R, a.n, a.samples).boundary
        source = {"P": P.to_dict(), "R": a.R, "n": a.n}
    rm = riemann_map(pts, a.accuracy)
    if out:
        rm.save(os.path.join(out, "riemann_map.npz"))
    probe = np.array([0.25, 0.5j, -0.75])
    z = rm.inverse(probe)
    return {"command": "riemann-map", **source, "accuracy": rm.accuracy, "degraded": rm.degraded,
            "derivative_at_zero": _pts(rm.derivative_at_zero())[0],
            "roundtrip_error": float(np.max(np.abs(rm.forward(z) - probe)))}


def cmd_model_build(a, out):
    P = _poly(a.poly)
    model = build_model(P, a.R, a.n_max, a.accuracy, a.samples, threads=a.threads)
    cert = certify_uniform_hyperbolicity(model.sequence(), a.n_max - 1) if a.n_max > 1 else None
    rep = {"command": "model-build", **model.summary(),
           "critical_distance_profile": critical_distance_profile(model),
           "fingerprints": model.fingerprints()}
    if cert is not None:
        rep["certificate"] = cert.to_dict()
    if out:
        model.save_manifest(os.path.join(out, "model"))
    return rep


def cmd_grand_orbit(a, out):
    P = _poly(a.poly)
    s = grand_orbit_sample(P, cplx(a.z), a.forward, a.backward, a.region, cap=a.cap)
    if out:
        with open(os.path.join(out, "grand_orbit.jsonl"), "w") as fh:
            fh.write(s.to_jsonl())
        write_points_csv(os.path.join(out, "grand_orbit.csv"), s.points, {"n": s.n, "m": s.m})
    res = s.residuals(P) if len(s) else np.zeros(0)
    return {"command": "grand-orbit", "P": P.to_dict(), "z": _pts(cplx(a.z))[0],
            "forward": a.forward, "backward": a.backward, "region": a.region.to_dict(),
            "count": len(s), "truncated": s.truncated, "rejected": s.rejected,
            "max_residual": float(res.max()) if len(res) else 0.0}


def cmd_discreteness(a, out):
    P = _poly(a.poly)
    rep = discreteness_diagnostic(P, cplx(a.z), a.region, a.depth)
    return {"command": "discreteness", "P": P.to_dict(), **rep.to_dict()}


def cmd_transport(a, out):
    P = _poly(a.poly)
    l0, l1 = cplx(a.lambda0), cplx(a.lambda1)
    path = l0 + (l1 - l0) * np.linspace(0, 1, a.steps + 1)
    w = holomorphic_motion_transport(P, l0, path, cplx(a.z), a.n, a.m)
    resid = abs(complex(P.iterate(w, a.n)) - complex(P.iterate(l1, a.m)))
    return {"command": "transport", "P": P.to_dict(), "lambda0": _pts(l0)[0],
            "lambda1": _pts(l1)[0], "z": _pts(cplx(a.z))[0], "n": a.n, "m": a.m,
            "w": _pts(w)[0], "relation_residual": resid}


def cmd_template_check(a, out):
    rep = template_check(a.d, n_random=a.samples, seed=a.seed)
    rep.pop("schema", None)
    return {"command": "template-check", **rep}


def cmd_coexistence(a, out):
    res = coexistence_experiment(cplx(a.lam), a.depth, a.accuracy, a.R, a.n_max,
                                 raster=a.raster, threads=a.threads)
    rep = dict(res.report)
    rep.pop("schema", None)
    if out:
        fig = res.figures
        g = fig["grid"]
        rgb = colorize_green(fig["green"])
        for bd in fig["boundaries"]:
            rgb = mark_points(rgb, g, bd, (255, 255, 255))
        rgb = mark_points(rgb, g, fig["scatter"]["z1"].points, (80, 255, 80))
        rgb = mark_points(rgb, g, fig["scatter"]["z2"].points, (255, 60, 60))
        write_p6(os.path.join(out, "coexistence.ppm"), rgb)
        for name, s in fig["scatter"].items():
            write_points_csv(os.path.join(out, f"scatter_{name}.csv"), s.points,
                             {"n": s.n, "m": s.m})
        for k, bd in enumerate(fig["boundaries"]):
            write_points_csv(os.path.join(out, f"boundary_D{k}.csv"), bd)
        pts, idx, kind = [], [], []
        for n, (zs, cs) in enumerate(fig["blaschke"]):
            for z in zs:
                pts.append(z), idx.append(n), kind.append(0)
            for c in cs:
                pts.append(c), idx.append(n), kind.append(1)
        write_points_csv(os.path.join(out, "blaschke_points.csv"), pts,
                         {"n": np.array(idx), "critical": np.array(kind)})
        rep["figures"] = (["coexistence.ppm", "blaschke_points.csv"]
                          + [f"scatter_{name}.csv" for name in fig["scatter"]]
                          + [f"boundary_D{k}.csv" for k in range(len(fig["boundaries"]))])
    return {"command": "coexistence", **rep}


def cmd_render_julia(a, out):
    P = _poly(a.poly)
    x0, x1, y0, y1 = a.extent
    grid = PlaneGrid(x0, x1, y0, y1, a.width, a.height)
    g, it, esc = julia_field(P, grid, a.max_iter, threads=a.threads)
    rgb = colorize_green(g, esc)
    if out:
        write_p6(os.path.join(out, "julia.ppm"), rgb)
    return {"command": "render-julia", "P": P.to_dict(), "extent": list(a.extent),
            "width": a.width, "height": a.height, "max_iter": a.max_iter,
            "escaped_fraction": float(np.mean(esc)),
            "raster_sha256": hashlib.sha256(rgb.tobytes()).hexdigest()}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or stdout)")
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--save-config", default=None, help="write the effective config to this file")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=0)
    return p


def build_parser():
    parser = _Parser(prog="wandering-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wandering-lab {__version__}")
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = _common()
    table = {}

    def add(name, handler, help_text):
        sp = subs.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(handler=handler)
        table[name] = sp
        return sp

    sp = add("schwarz-check", cmd_schwarz_check, "uniform Schwarz bound on random products")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--max-degree", type=int, default=5)
    sp.add_argument("--points", type=int, default=20)

    sp = add("blaschke-info", cmd_blaschke_info, "zeros, multiplier, critical data of a product")
    sp.add_argument("--zeros", required=True, help="nonzero zeros, comma separated")
    sp.add_argument("--phase", default="1")
    sp.add_argument("--r", type=float, default=None)

    sp = add("seq-certify", cmd_seq_certify, "uniform hyperbolicity certificate")
    sp.add_argument("--preset", default="contracting")
    sp.add_argument("--n-max", type=int, default=200)
    sp.add_argument("--margin", type=float, default=1e-3)

    sp = add("seq-rate", cmd_seq_rate, "contraction rate of paired orbits")
    sp.add_argument("--preset", default="contracting")
    sp.add_argument("--z", default="0.5")
    sp.add_argument("--z2", default="-0.3+0.2j")
    sp.add_argument("--n-max", type=int, default=60)

    sp = add("glue", cmd_glue, "gluing maps against the power sequence")
    sp.add_argument("--zeros", default="0.3", help="nonzero zeros of a constant sequence")
    sp.add_argument("--preset", default=None)
    sp.add_argument("--r", type=float, default=None)
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--lift-depth", type=int, default=3)
    sp.add_argument("--n-boundary", type=int, default=512)
    sp.add_argument("--n-t", type=int, default=256)

    sp = add("bottcher", cmd_bottcher, "Green function, Böttcher coordinate, ray points")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--z", default=None)
    sp.add_argument("--level", type=float, default=None)
    sp.add_argument("--theta", type=float, default=0.0)

    sp = add("equipotential", cmd_equipotential, "sample the boundary of D_n")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--R", type=float, default=4.0)
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--samples", type=int, default=512)

    sp = add("riemann-map", cmd_riemann_map, "zipper map of D_n or a boundary file")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--R", type=float, default=4.0)
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--samples", type=int, default=512)
    sp.add_argument("--boundary", default=None, help="CSV with re,im columns")
    sp.add_argument("--accuracy", type=float, default=1e-3)

    sp = add("model-build", cmd_model_build, "Blaschke model of a polynomial")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--R", type=float, default=4.0)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--accuracy", type=float, default=1e-3)
    sp.add_argument("--samples", type=int, default=512)

    sp = add("grand-orbit", cmd_grand_orbit, "sample a grand orbit in a region")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--z", default="0.1")
    sp.add_argument("--forward", type=int, default=4)
    sp.add_argument("--backward", type=int, default=6)
    sp.add_argument("--region", type=region_arg, default=Region.disk(0j, 4.0))
    sp.add_argument("--cap", type=int, default=10 ** 6)

    sp = add("discreteness", cmd_discreteness, "grand-orbit discreteness diagnostic")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--z", default="0.1")
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--region", type=region_arg, default=Region.disk(0j, 4.0))

    sp = add("transport", cmd_transport, "holomorphic motion of a grand-orbit point")
    sp.add_argument("--poly", default="power:2")
    sp.add_argument("--lambda0", default="0.25")
    sp.add_argument("--lambda1", default="0.1111111111111111")
    sp.add_argument("--z", default="-0.5")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--m", type=int, default=0)
    sp.add_argument("--steps", type=int, default=16)

    sp = add("template-check", cmd_template_check, "identities of the template maps")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--samples", type=int, default=100)

    sp = add("coexistence", cmd_coexistence, "discrete and indiscrete grand orbits together")
    sp.add_argument("--lambda", dest="lam", default="0.5")
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--accuracy", type=float, default=1e-3)
    sp.add_argument("--R", type=float, default=None)
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--raster", type=int, default=400)

    sp = add("render-julia", cmd_render_julia, "Green-function raster as a P6 pixmap")
    sp.add_argument("--poly", default="lambda:0.5")
    sp.add_argument("--extent", type=extent_arg, default=(-2.0, 2.0, -2.0, 2.0))
    sp.add_argument("--width", type=int, default=512)
    sp.add_argument("--height", type=int, default=512)
    sp.add_argument("--max-iter", type=int, default=500)
    return parser, table


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    return cfg


def _config_value(v) -> str:
    if isinstance(v, Region):
        kind, p = v.kind, v.params
        if kind == "disk":
            return f"disk:{p[0].real!r},{p[0].imag!r},{p[1]!r}"
        return "box:" + ",".join(repr(float(x)) for x in p)
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


def _key(action) -> str:
    longs = [o for o in action.option_strings if o.startswith("--")]
    return longs[0][2:].replace("-", "_") if longs else action.dest


def _config_names(sub) -> dict:
    """Config keys accepted by a subparser: option names (``n_max``) and dests."""
    names = {}
    for act in sub._actions:
        names[act.dest] = act
        names[_key(act)] = act
    return names


def save_config(args, sub, path) -> None:
    keys = {act.dest: _key(act) for act in sub._actions}
    items = {keys.get(k, k): v for k, v in vars(args).items()
             if k not in _META_KEYS and v is not None}
    with open(path, "w") as fh:
        fh.write(f"command = {args.command}\n")
        for k in sorted(items):
            fh.write(f"{k} = {_config_value(items[k])}\n")


def _parse(argv):
    parser, table = build_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    cfg = load_config(known.config) if known.config else {}
    cmd = next((t for t in argv if not t.startswith("-") and t in table), None)
    if cmd is None and "command" in cfg:
        cmd = cfg["command"]
        argv = [cmd] + list(argv)
    cfg.pop("command", None)
    if cmd is not None and cfg:
        sub = table.get(cmd)
        if sub is None:
            raise UsageError(f"unknown subcommand {cmd!r}")
        actions = _config_names(sub)
        defaults = {}
        for k, v in cfg.items():
            act = actions.get(k)
            if act is None or act.dest in ("help", "config"):
                raise UsageError(f"unknown config key {k!r} for {cmd}")
            defaults[act.dest] = _bool(v) if isinstance(act, argparse._StoreTrueAction) else v
        sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage())
    return args, table[args.command]


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, sub = _parse(argv)
    except UsageError as exc:
        stderr.write(str(exc).rstrip() + "\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    out = args.out or os.environ.get(OUT_ENV) or None
    try:
        if out:
            ensure_dir(out)
        if args.save_config:
            save_config(args, sub, args.save_config)
        report = args.handler(args, out)
    except (ValueError, ArithmeticError, OSError) as exc:
        stderr.write(f"wandering-lab {args.command}: error: {exc}\n")
        return EXIT_FAIL
    text = dumps_report(report)
    if out:
        with open(os.path.join(out, "report.json"), "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
