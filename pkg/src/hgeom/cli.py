"""``hgeom`` command-line driver.

Subcommands::

    verify        identity suite + closed-form comparisons at seeded samples
    sweep         reduced-flow height drops against the quadrature formulas
    flow          export an ambient eta-flow trajectory
    sphere-report per-sample curvature table on a gauge sphere

Exit codes: 0 success, 1 numerical threshold failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import core, flow, gauge_oracle, surface
from .catalog import build_surface
from .core import Point
from .cylindrical import CylindricalSurface, GaugeProfile, profile_kl
from .errors import (AxisError, CharacteristicPointError, ConservationError, DriftError,
                     HGeomError, StepSizeError)
from .reporting import write_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CONFIG_SCHEMA = 1
SEED_MAX = 2 ** 64 - 1

# pass thresholds used by ``verify``
THRESHOLDS = {
    "exact": 1e-8,
    "fd": 1e-5,
    "oracle": 1e-8,
    "structure": 1e-9,
    "umbilic": 1e-8,
    "gauge-profile": 1e-10,
}


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# parameter resolution: defaults < config file < flags

COMMON_DEFAULTS = {"seed": 0, "out": "-", "format": "csv", "threads": None}
SURFACE_DEFAULTS = {"surface": "gauge-ball", "n": 1, "R": None, "t0": None, "a": None,
                    "b": None, "terms": None, "anchor_t": None, "anchor": None, "sign": 1}
DEFAULTS = {
    "verify": {**COMMON_DEFAULTS, **SURFACE_DEFAULTS, "samples": 200, "c": None},
    "sweep": {**COMMON_DEFAULTS, "n": 1, "c": None, "phi0": None, "theta0": 0.0,
              "cycles": 10, "max_s": 1e4, "r_init": None},
    "flow": {**COMMON_DEFAULTS, **SURFACE_DEFAULTS, "start": None, "c": None,
             "max_s": 50.0, "max_step": 1e-2, "pole_tol": 1e-4},
    "sphere-report": {**COMMON_DEFAULTS, "R": 1.0, "t0": 0.0, "n": 1, "samples": 100},
}


def load_config(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"config needs \"schema\": {CONFIG_SCHEMA}")
    out = {}
    for key, val in doc.items():
        if key == "schema":
            continue
        if key == "command":
            if val != command:
                raise ConfigError(f"config is for command {val!r}, not {command!r}")
            continue
        name = key.replace("-", "_")
        if name not in DEFAULTS[command]:
            raise ConfigError(f"unknown config key {key!r} for {command}")
        out[name] = val
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        cfg.update(load_config(args.config, command))
    for key in DEFAULTS[command]:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _float(cfg, key, positive=False):
    val = cfg[key]
    if val is None:
        return None
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {val!r}") from None
    if not math.isfinite(val) or (positive and val <= 0):
        raise ConfigError(f"{key} must be {'positive and ' if positive else ''}finite")
    return val


def _int(cfg, key, lo=None, hi=None):
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, str)):
        raise ConfigError(f"{key} must be an integer, got {val!r}")
    try:
        val = int(val)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {val!r}") from None
    if (lo is not None and val < lo) or (hi is not None and val > hi):
        raise ConfigError(f"{key} must lie in [{lo}, {hi}]")
    return val


def _float_list(val, key):
    if isinstance(val, str):
        val = [v for v in val.split(",") if v.strip()]
    if not isinstance(val, (list, tuple)) or not val:
        raise ConfigError(f"{key} must be a non-empty comma-separated list")
    try:
        out = [float(v) for v in val]
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must contain numbers only") from None
    if not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{key} must be finite")
    return out


def common_settings(cfg) -> dict:
    fmt = cfg["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    threads = cfg["threads"]
    if threads is None:
        threads = os.environ.get("HGEOM_THREADS", "1")
    cfg = dict(cfg, threads=threads)
    return {"seed": _int(cfg, "seed", 0, SEED_MAX), "out": str(cfg["out"]), "format": fmt,
            "threads": _int(cfg, "threads", 1, 256)}


def surface_from_config(cfg):
    terms = cfg["terms"]
    if isinstance(terms, str):
        try:
            terms = json.loads(terms)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"terms is not valid JSON: {exc}") from None
    anchor = cfg["anchor"]
    if anchor is not None:
        anchor = _float_list(anchor, "anchor")
    params = {"R": _float(cfg, "R"), "t0": _float(cfg, "t0"), "a": _float(cfg, "a"),
              "b": _float(cfg, "b"), "terms": terms, "anchor_t": _float(cfg, "anchor_t"),
              "anchor": anchor}
    sign = _int(cfg, "sign", -1, 1)
    if sign == 0:
        raise ConfigError("sign must be +1 or -1")
    try:
        return build_surface(str(cfg["surface"]), params, _int(cfg, "n", 1, core.MAX_DIM), sign)
    except (HGeomError, ValueError) as exc:
        raise ConfigError(f"invalid surface: {exc}") from None


def parallel_map(fn, items, threads):
    """Ordered map; results come back in input order for any thread count."""
    items = list(items)
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# verify

VERIFY_CHECKS = (
    [(name, "exact") for name in surface.EXACT_CHECKS]
    + [(name, "fd") for name in surface.FD_CHECKS]
    + [("mean_curvature_routes", "structure"), ("shape_symmetry", "structure"),
       ("shape_trace", "structure"),
       ("frame_oracle", "oracle"), ("mean_curvature_oracle", "oracle"),
       ("shape_oracle", "oracle"), ("phi_h", "structure"), ("phi_v_constant", "oracle"),
       ("umbilic_residual", "umbilic"), ("profile_kl", "oracle"),
       ("gauge_profile_l_3k", "gauge-profile")]
)


def _verify_sample(spec, sphere, c, seed, i):
    """Residuals at sample i, or None if the sample is unusable."""
    if sphere is not None:
        p = gauge_oracle.sphere_point(sphere, seed, i)
    else:
        d = surface.sample_rng(seed, i).standard_normal(2 * spec.n + 1)
        p = surface.ray_point(spec, d / np.linalg.norm(d))
    try:
        geom = surface.analyze(spec, p)
        rep = surface.identity_suite(spec, p, c)
    except CharacteristicPointError:
        return None
    out = dict(rep.residuals)
    n = spec.n
    h_tan, h_full = geom.mean_curvature_pair()
    out["mean_curvature_routes"] = abs(h_tan - h_full) / (1.0 + abs(h_tan))
    m = geom.shape_matrix()
    out["shape_symmetry"] = float(np.max(np.abs(m - m.T)))
    out["shape_trace"] = abs(np.trace(m) / (2 * n - 1) - h_tan) / (1.0 + abs(h_tan))
    if n >= 2:
        out["umbilic_residual"] = rep.umbilic_residual

    if sphere is not None:
        fr, orc = geom.frame, gauge_oracle.sphere_frame(sphere, p)
        out["frame_oracle"] = max(abs(fr.p_h_norm - orc.p_h_norm), abs(fr.nu_t - orc.nu_t),
                                  float(np.max(np.abs(fr.nu_h - orc.nu_h))),
                                  float(np.max(np.abs(fr.eta - orc.eta))))
        k = orc.r / sphere.R ** 2
        out["mean_curvature_oracle"] = abs(h_tan - sphere.curvature_constant * orc.r)
        out["shape_oracle"] = float(np.max(np.abs(m - np.diag([3.0 * k] + [k] * (2 * n - 2)))))
        phih, phiv = surface.darboux_invariants(spec, p, c, geom=geom)
        out["phi_h"] = abs(phih)
        out["phi_v_constant"] = abs(phiv - sphere.phi_v_constant)

    if isinstance(spec, CylindricalSurface):
        try:
            k, l = profile_kl(spec.profile, p)
        except AxisError:
            return out
        fit = surface.umbilic_fit(m)
        out["profile_kl"] = abs(l - fit.l) if n == 1 else max(abs(l - fit.l), abs(k - fit.k))
        if isinstance(spec.profile, GaugeProfile):
            out["gauge_profile_l_3k"] = abs(l - 3.0 * k)
    return out


def cmd_verify(cfg) -> int:
    common = common_settings(cfg)
    spec = surface_from_config(cfg)
    samples = _int(cfg, "samples", 1, 10 ** 7)
    c = _float(cfg, "c")
    sphere = None
    if spec.kind == "gauge-ball":
        sphere = gauge_oracle.SphereSpec(spec.R, spec.t0, spec.n)
        if c is None:
            c = sphere.curvature_constant
    seed = common["seed"]

    try:
        results = parallel_map(lambda i: _verify_sample(spec, sphere, c, seed, i),
                               range(samples), common["threads"])
    except HGeomError as exc:
        print(f"hgeom verify: sampling failed: {exc}", file=sys.stderr)
        return EXIT_FAIL

    rows, failed = [], False
    for name, category in VERIFY_CHECKS:
        vals = [r[name] for r in results if r is not None and name in r]
        if not vals:
            continue
        worst = max(vals)
        thr = THRESHOLDS[category]
        ok = bool(np.isfinite(worst) and worst < thr)
        failed |= not ok
        rows.append([name, category, len(vals), worst, thr, "pass" if ok else "fail"])
    unusable = sum(r is None for r in results)
    header = ["check", "category", "samples", "max_residual", "threshold", "status"]
    write_table(common["out"], common["format"], header, rows, command="verify",
                surface=spec.kind, n=spec.n, seed=seed, characteristic_samples=unusable,
                status="fail" if failed else "pass")
    print(f"hgeom verify: {len(rows)} checks, {unusable} characteristic samples, "
          f"{'FAIL' if failed else 'pass'}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# --------------------------------------------------------------------------
# sweep

SWEEP_TOL_FORMULA = 1e-6
SWEEP_TOL_TRAVERSAL = 1e-8
SWEEP_TOL_SPREAD = 1e-8
NEGATIVE_PHI0_MAX_S = 100.0


def _sweep_row(n, c, phi0, theta0, opts_kw):
    if phi0 == 0:
        _, rep = flow.reduced_flow(n, c, 0.0, theta0, opts=flow.ReducedFlowOptions(**opts_kw))
        measured = rep.traversal_dt
        formula = flow.traversal_drop_closed_form(n, c)
        diff = abs(measured - formula)
        ok = diff < SWEEP_TOL_TRAVERSAL
        return [phi0, measured, formula, diff, None, 0, rep.classification, "pass" if ok else "fail"]
    if phi0 < 0:
        kw = dict(opts_kw, max_s=min(opts_kw["max_s"], NEGATIVE_PHI0_MAX_S))
        if kw.get("r_init") is None:
            kw["r_init"] = 1.0
        traj, rep = flow.reduced_flow(n, c, phi0, theta0, opts=flow.ReducedFlowOptions(**kw))
        ok = float(np.max(traj.t_prime())) <= 2.0 * phi0 + 1e-12
        return [phi0, None, None, None, None, len(rep.drops), rep.classification,
                "pass" if ok else "fail"]
    _, rep = flow.reduced_flow(n, c, phi0, theta0, opts=flow.ReducedFlowOptions(**opts_kw))
    dts = rep.dts
    formula = flow.drop_formula(n, c, phi0, theta0)
    if dts.size == 0:
        return [phi0, None, formula, None, None, 0, rep.classification, "fail"]
    measured = float(dts[0])
    diff = float(np.max(np.abs(dts - formula)))
    spread = float(np.max(np.abs(np.diff(dts)) / np.abs(dts[:-1]))) if dts.size > 1 else 0.0
    ok = diff < SWEEP_TOL_FORMULA and spread < SWEEP_TOL_SPREAD
    return [phi0, measured, formula, diff, spread, int(dts.size), rep.classification,
            "pass" if ok else "fail"]


def cmd_sweep(cfg) -> int:
    common = common_settings(cfg)
    n = _int(cfg, "n", 1, core.MAX_DIM)
    if cfg["c"] is None:
        raise ConfigError("sweep needs --c")
    c = _float(cfg, "c", positive=True)
    if cfg["phi0"] is None:
        raise ConfigError("sweep needs --phi0")
    phis = _float_list(cfg["phi0"], "phi0")
    theta0 = _float(cfg, "theta0")
    opts_kw = {"cycles": _int(cfg, "cycles", 2, 10 ** 4), "max_s": _float(cfg, "max_s", True),
               "r_init": _float(cfg, "r_init", True)}
    try:
        rows = parallel_map(lambda ph: _sweep_row(n, c, ph, theta0, opts_kw), phis,
                            common["threads"])
    except (HGeomError, ValueError) as exc:
        print(f"hgeom sweep: {exc}", file=sys.stderr)
        return EXIT_FAIL
    failed = any(r[-1] != "pass" for r in rows)
    header = ["phi0", "dt_measured", "dt_formula", "abs_diff", "cycle_spread", "cycles",
              "classification", "status"]
    write_table(common["out"], common["format"], header, rows, command="sweep", n=n, c=c,
                status="fail" if failed else "pass")
    return EXIT_FAIL if failed else EXIT_OK


# --------------------------------------------------------------------------
# flow

def cmd_flow(cfg) -> int:
    common = common_settings(cfg)
    spec = surface_from_config(cfg)
    if cfg["start"] is None:
        raise ConfigError("flow needs --start")
    start = _float_list(cfg["start"], "start")
    if len(start) != 2 * spec.n + 1:
        raise ConfigError(f"--start needs {2 * spec.n + 1} values for n={spec.n}")
    opts = flow.AmbientFlowOptions(max_s=_float(cfg, "max_s", True),
                                   max_step=_float(cfg, "max_step", True),
                                   pole_tol=_float(cfg, "pole_tol", True), c=_float(cfg, "c"))
    try:
        traj = flow.ambient_flow(spec, Point.from_array(start), opts)
    except (DriftError, ConservationError, StepSizeError) as exc:
        print(f"hgeom flow: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except HGeomError as exc:
        raise ConfigError(f"invalid start point: {exc}") from None
    write_table(common["out"], common["format"], traj.header(), traj.rows(), command="flow",
                termination=traj.termination)
    print(f"hgeom flow: {traj.s.size} points, termination {traj.termination}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# sphere-report

SPHERE_REPORT_TOL = 1e-8

SPHERE_COLUMNS = ("H", "k", "l", "l_over_k", "phi_h", "phi_v", "p_h_norm", "nu_t")


def _sphere_row(sphere, gb, seed, i):
    p = gauge_oracle.sphere_point(sphere, seed, i)
    geom = surface.analyze(gb, p)
    orc = gauge_oracle.sphere_frame(sphere, p)
    m = geom.shape_matrix()
    l = float(m[0, 0])
    n = sphere.n
    k = float((np.trace(m) - l) / (2 * n - 2)) if n > 1 else float("nan")
    h = geom.mean_curvature_pair()[0]
    phih, phiv = surface.darboux_invariants(gb, p, geom=geom)
    k0 = orc.r / sphere.R ** 2
    computed = [h, k, l, l / k if n > 1 else float("nan"), phih, phiv,
                geom.frame.p_h_norm, geom.frame.nu_t]
    closed = [sphere.curvature_constant * orc.r, k0 if n > 1 else float("nan"), 3.0 * k0,
              3.0 if n > 1 else float("nan"), 0.0, sphere.phi_v_constant, orc.p_h_norm, orc.nu_t]
    row = [i, p.t, orc.r]
    for a, b in zip(computed, closed):
        row.extend([a, b, abs(a - b) if np.isfinite(b) else None])
    return row


def cmd_sphere_report(cfg) -> int:
    common = common_settings(cfg)
    try:
        sphere = gauge_oracle.SphereSpec(_float(cfg, "R", True), _float(cfg, "t0"),
                                         _int(cfg, "n", 1, core.MAX_DIM))
    except HGeomError as exc:
        raise ConfigError(str(exc)) from None
    gb = surface.GaugeBall(sphere.R, sphere.t0, sphere.n)
    samples = _int(cfg, "samples", 1, 10 ** 7)
    seed = common["seed"]
    rows = parallel_map(lambda i: _sphere_row(sphere, gb, seed, i), range(samples),
                        common["threads"])
    header = ["sample", "t", "r"]
    for name in SPHERE_COLUMNS:
        header.extend([name, f"{name}_closed", f"{name}_diff"])
    diffs = [v for row in rows for v in row[5::3] if v is not None]
    worst = max(diffs) if diffs else 0.0
    failed = not worst < SPHERE_REPORT_TOL
    write_table(common["out"], common["format"], header, rows, command="sphere-report",
                status="fail" if failed else "pass")
    print(f"hgeom sphere-report: max diff {worst:.3e}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (schema 1); flags override it")
    common.add_argument("--seed", type=int, help="global seed (default 0)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--threads", type=int,
                        help="worker threads (default: $HGEOM_THREADS or 1)")

    surf = argparse.ArgumentParser(add_help=False)
    surf.add_argument("--surface", help="gauge-ball | profile:<gauge|ellipsoid|poly> | custom-polynomial")
    surf.add_argument("--n", type=int, help="Heisenberg dimension n (default 1)")
    surf.add_argument("--R", type=float, help="gauge radius")
    surf.add_argument("--t0", type=float, help="gauge centre height")
    surf.add_argument("--a", type=float, help="ellipsoidal profile parameter a")
    surf.add_argument("--b", type=float, help="ellipsoidal profile parameter b")
    surf.add_argument("--terms", help="polynomial terms as JSON")
    surf.add_argument("--anchor-t", dest="anchor_t", type=float, help="interior height for poly profiles")
    surf.add_argument("--anchor", help="interior point for custom polynomials, comma-separated")
    surf.add_argument("--sign", type=int, help="orientation sign of the unit normal (+1/-1)")

    parser = argparse.ArgumentParser(prog="hgeom", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common, surf], help="identity suite and oracles")
    p.add_argument("--samples", type=int, help="number of seeded samples (default 200)")
    p.add_argument("--c", type=float, help="curvature constant for H = c|xi^H| checks")

    p = sub.add_parser("sweep", parents=[common], help="reduced-flow drop sweep")
    p.add_argument("--n", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--phi0", help="comma-separated list of phi0 values")
    p.add_argument("--theta0", type=float, help="initial angle (default 0)")
    p.add_argument("--cycles", type=int, help="number of 2pi cycles to measure (default 10)")
    p.add_argument("--max-s", dest="max_s", type=float)
    p.add_argument("--r-init", dest="r_init", type=float,
                   help="initial radius guess when two branches exist")

    p = sub.add_parser("flow", parents=[common, surf], help="ambient eta-flow trajectory")
    p.add_argument("--start", help="start point as 2n+1 comma-separated values")
    p.add_argument("--c", type=float)
    p.add_argument("--max-s", dest="max_s", type=float)
    p.add_argument("--max-step", dest="max_step", type=float)
    p.add_argument("--pole-tol", dest="pole_tol", type=float)

    p = sub.add_parser("sphere-report", parents=[common], help="gauge-sphere curvature table")
    p.add_argument("--R", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    return parser


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "flow": cmd_flow,
            "sphere-report": cmd_sphere_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"hgeom {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
