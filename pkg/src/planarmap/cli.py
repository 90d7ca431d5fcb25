"""Command-line front end.

Subcommands: analyze, critical, valence-map, cluster, lift, bloch-check,
trace, examples.  Artifacts are written to --out as CSV/JSON (always
byte-identical for identical flags) and SVG.  Exit codes: 0 success, 1
structured analysis failure, 2 usage or configuration error; failures are
reported as one-line JSON on stderr.

--threads is accepted for interface stability; every stage is vectorized
internally, so results never depend on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .asymptote import DEFAULT_ESCAPE_RADII, TraceConfig, trace_asymptote
from .bloch import check_conditions
from .cluster import ClusterError, cluster_samples, sequence_to_cluster
from .critical import (PolylineSet, Window, critical_contours,
                       image_of_critical)
from .expr import DomainFault, ParseError
from .field import (PlanarMap, builtin, builtin_names, evaluate_grid,
                    planar_map, wirtinger_grid)
from .lift import lift_all, preimages
from .paths import PathError, PolyPath
from .plots import (plot_polyline_set, plot_trace_wplane, plot_trace_zplane,
                    plot_valence_heatmap)
from .serialize import (SCHEMA_VERSION, certificate_payload, jsonable,
                        polyline_set_rows, report_payload, write_csv,
                        write_json)
from .valence import valence_map

__all__ = ["main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse errors through JSON reporting
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Flag parsing helpers

def _parse_window(text: str, grid: int) -> Window:
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"window must be x0:x1:y0:y1, got {text!r}")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts)
        return Window(x0, x1, y0, y1, grid, grid)
    except ValueError as e:
        raise UsageError(f"bad window {text!r}: {e}") from None


def _parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"point must be a,b, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"bad point {text!r}") from None

def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None
    if not vals:
        raise UsageError("empty number list")
    return vals


def _parse_vertices(text: str, minimum: int = 2) -> np.ndarray:
    pts = [_parse_point(p) for p in text.split(";") if p.strip()]
    if len(pts) < minimum:
        raise UsageError(f"need at least {minimum} ;-separated vertices")
    return np.asarray(pts, dtype=float)


def _resolve_map(args) -> PlanarMap:
    if args.u or args.v:
        if not (args.u and args.v):
            raise UsageError("--u and --v must be given together")
        try:
            return planar_map(args.u, args.v, name="user")
        except (ParseError, DomainFault) as e:
            raise UsageError(f"bad expression: {e}") from None
    if not args.map:
        raise UsageError("no map: use --map NAME|FILE.json or --u/--v")
    if args.map in builtin_names():
        return builtin(args.map)
    if os.path.exists(args.map):
        try:
            with open(args.map, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
            return planar_map(spec["u"], spec["v"],
                              name=str(spec.get("name", "user")))
        except (OSError, json.JSONDecodeError, KeyError, TypeError,
                ParseError, DomainFault) as e:
            raise UsageError(f"bad map file {args.map!r}: {e}") from None
    raise UsageError(
        f"unknown map {args.map!r}; builtins: {', '.join(builtin_names())}")


def _window_arg(args, attr: str, default: str, grid: int) -> Window:
    text = getattr(args, attr, None) or default
    return _parse_window(text, grid)


def _out_dir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _fail(kind: str, message: str, code: int, extra: dict | None = None) -> int:
    err = {"kind": kind, "message": message}
    if extra:
        err.update(extra)
    payload = {"schema_version": SCHEMA_VERSION, "error": err}
    print(json.dumps(jsonable(payload), sort_keys=True), file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# Subcommands

def cmd_analyze(args) -> int:
    m = _resolve_map(args)
    grid = args.grid or 5
    win = _window_arg(args, "window", "-2:2:-2:2", grid)
    X, Y = np.meshgrid(win.xs, win.ys, indexing="ij")
    x, y = X.ravel(), Y.ravel()
    u, v, ux, uy, vx, vy = wirtinger_grid(m, x, y)
    fz = np.hypot(0.5 * (ux + vy), 0.5 * (vx - uy))
    fzb = np.hypot(0.5 * (ux - vy), 0.5 * (vx + uy))
    jac = ux * vy - uy * vx
    # harmonicity residual: FD Laplacian assembled from exact AD gradients
    h = 1e-5 * max(1.0, win.xmax - win.xmin)
    _, _, uxp, _, vxp, _ = wirtinger_grid(m, x + h, y)
    _, _, uxm, _, vxm, _ = wirtinger_grid(m, x - h, y)
    _, _, _, uyp, _, vyp = wirtinger_grid(m, x, y + h)
    _, _, _, uym, _, vym = wirtinger_grid(m, x, y - h)
    lap_u = (uxp - uxm) / (2 * h) + (uyp - uym) / (2 * h)
    lap_v = (vxp - vxm) / (2 * h) + (vyp - vym) / (2 * h)
    checks = [
        {"z": [x[i], y[i]], "f": [u[i], v[i]],
         "fz_abs": fz[i], "fzbar_abs": fzb[i], "jacobian": jac[i],
         "laplacian_u": lap_u[i], "laplacian_v": lap_v[i]}
        for i in range(len(x))
    ]
    write_json(os.path.join(_out_dir(args), "analyze.json"), {
        "map": m.name,
        "window": jsonable(win),
        "max_abs_laplacian_u": float(np.max(np.abs(lap_u))),
        "max_abs_laplacian_v": float(np.max(np.abs(lap_v))),
        "spot_checks": checks,
    })
    return 0


def cmd_critical(args) -> int:
    m = _resolve_map(args)
    grid = args.grid or 400
    zwin = _window_arg(args, "window", "-4:4:-4:4", grid)
    contours = critical_contours(m, zwin)
    fs = image_of_critical(m, contours)
    out = _out_dir(args)
    write_csv(os.path.join(out, "S.csv"), ("polyline-id", "x", "y"),
              polyline_set_rows(contours))
    write_csv(os.path.join(out, "fS.csv"), ("polyline-id", "x", "y"),
              polyline_set_rows(fs))
    plot_polyline_set(contours, zwin, os.path.join(out, "S.svg"),
                      title=f"critical set: {m.name}")
    wwin = (_parse_window(args.wwindow, grid) if args.wwindow
            else _image_window(fs, zwin))
    plot_polyline_set(fs, wwin, os.path.join(out, "fS.svg"),
                      title=f"critical image: {m.name}", color="tab:red")
    return 0


def _image_window(ps: PolylineSet, fallback: Window) -> Window:
    pts = [pl.points for pl in ps.polylines]
    if len(ps.cloud):
        pts.append(ps.cloud)
    if not pts:
        return fallback
    allp = np.vstack(pts)
    finite = allp[np.all(np.isfinite(allp), axis=1)]
    if not len(finite):
        return fallback
    lo = finite.min(axis=0)
    hi = finite.max(axis=0)
    pad = 0.05 * max(hi[0] - lo[0], hi[1] - lo[1], 1e-6)
    return Window(lo[0] - pad, hi[0] + pad, lo[1] - pad, hi[1] + pad,
                  fallback.nx, fallback.ny)


def cmd_valence_map(args) -> int:
    m = _resolve_map(args)
    grid = args.grid or 100
    wwin = _window_arg(args, "wwindow", "-4:4:-4:4", grid)
    zwin = _window_arg(args, "window", "-6:6:-6:6", max(grid, 64))
    vg = valence_map(m, wwin, zwin, args.tol, seed=args.seed)
    cx, cy = vg.cell_centers()
    rows = []
    for i in range(wwin.nx):
        for j in range(wwin.ny):
            rows.append((i, j, float(cx[i]), float(cy[j]),
                         int(vg.valence[i, j]), bool(vg.boundary[i, j])))
    out = _out_dir(args)
    write_csv(os.path.join(out, "valence.csv"),
              ("i", "j", "cx", "cy", "count", "boundary"), rows)
    plot_valence_heatmap(vg, os.path.join(out, "valence.svg"),
                         title=f"valence: {m.name}")
    return 0


def cmd_cluster(args) -> int:
    m = _resolve_map(args)
    grid = args.grid or 400
    wwin = _window_arg(args, "wwindow", "-4:4:-4:4", grid)
    radii = args.radii or (10.0, 100.0, 1000.0)
    ps = cluster_samples(m, radii, wwin)
    out = _out_dir(args)
    write_csv(os.path.join(out, "cluster.csv"), ("polyline-id", "x", "y"),
              polyline_set_rows(ps))
    plot_polyline_set(ps, wwin, os.path.join(out, "cluster.svg"),
                      title=f"cluster estimate: {m.name}", color="tab:purple")
    return 0


def cmd_lift(args) -> int:
    m = _resolve_map(args)
    if not args.gamma:
        raise UsageError("lift needs --gamma x1,y1;x2,y2;...")
    gamma = PolyPath(_parse_vertices(args.gamma))
    grid = args.grid or 64
    zwin = _window_arg(args, "window", "-8:8:-8:8", grid)
    lifts = lift_all(m, gamma, zwin, args.tol, seed=args.seed)
    out = _out_dir(args)
    rows = []
    for k, lf in enumerate(lifts):
        if lf.lifted is None:
            continue
        for x, y in lf.lifted.vertices:
            rows.append((k, float(x), float(y)))
    write_csv(os.path.join(out, "lift.csv"), ("lift-id", "x", "y"), rows)
    write_json(os.path.join(out, "lift.json"), {
        "map": m.name,
        "gamma": jsonable(gamma.vertices),
        "lifts": [{
            "status": lf.status,
            "max_residual": jsonable(lf.max_residual),
            "n_vertices": 0 if lf.lifted is None else len(lf.lifted),
            "start": jsonable(lf.start),
            "end": jsonable(lf.end),
            "min_separation_from_others": jsonable(lf.min_separation_from_others),
        } for lf in lifts],
    })
    return 0


def cmd_bloch_check(args) -> int:
    m = _resolve_map(args)
    if not args.points:
        raise UsageError("bloch-check needs --points x1,y1;x2,y2;...")
    seq = _parse_vertices(args.points, minimum=1)
    rho = args.rho if args.rho is not None else 0.5 * math.log(2.0)
    if rho <= 0:
        raise UsageError("--rho must be positive")
    grid = args.grid or 400
    zwin = _window_arg(args, "window", "-6:6:-6:6", grid)
    cert = check_conditions(m, seq, rho, zwin)
    payload = certificate_payload(cert)
    payload["map"] = m.name
    write_json(os.path.join(_out_dir(args), "certificate.json"), payload)
    if not cert.passed:
        return _fail("certificate-failed",
                     "one or more quasiregular-sequence conditions failed", 1,
                     {"violations": jsonable(cert.violations)})
    return 0


def cmd_trace(args) -> int:
    m = _resolve_map(args)
    if not args.w0:
        raise UsageError("trace needs --w0 a,b")
    w0 = _parse_point(args.w0)
    grid = args.grid or 400
    zwin = _window_arg(args, "window", "-16:16:-16:16", grid)
    wwin = _parse_window(args.wwindow, 256) if args.wwindow else None
    radii = args.radii or DEFAULT_ESCAPE_RADII
    cfg = TraceConfig(zwindow=zwin, wwindow=wwin, eps=args.eps, tol=args.tol,
                      escape_radii=tuple(radii), n_points=12, r_start=4.0,
                      seed=args.seed)
    report = trace_asymptote(m, w0, cfg)
    out = _out_dir(args)
    endcut_csv = lift_csv = None
    if report.end_cut is not None:
        endcut_csv = "endcut.csv"
        write_csv(os.path.join(out, endcut_csv), ("x", "y"),
                  [(float(x), float(y)) for x, y in report.end_cut.vertices])
    if report.chosen_lift is not None and report.chosen_lift.lifted is not None:
        lift_csv = "lift.csv"
        write_csv(os.path.join(out, lift_csv), ("x", "y"),
                  [(float(x), float(y))
                   for x, y in report.chosen_lift.lifted.vertices])
    payload = report_payload(report, endcut_csv, lift_csv)
    payload["map"] = m.name
    write_json(os.path.join(out, "report.json"), payload)
    wplane_win = wwin or Window(w0[0] - 2 * args.eps, w0[0] + 2 * args.eps,
                                w0[1] - 2 * args.eps, w0[1] + 2 * args.eps,
                                64, 64)
    plot_trace_wplane(report, wplane_win, os.path.join(out, "endcut.svg"))
    plot_trace_zplane(report, os.path.join(out, "lift.svg"))
    if report.verdict != "asymptotic-evidence":
        return _fail(report.verdict, "; ".join(report.precondition_findings)
                     or report.verdict, 1,
                     {"report": "report.json"})
    return 0


# ---------------------------------------------------------------------------
# Regression corpus

def _run_ex1(out: str) -> tuple[bool, dict]:
    m = builtin("ex1-nono")
    zwin = Window(-4.0, 4.0, -4.0, 4.0, 400, 400)
    contours = critical_contours(m, zwin)
    write_csv(os.path.join(out, "ex1-S.csv"), ("polyline-id", "x", "y"),
              polyline_set_rows(contours))
    tol = 2.0 * zwin.cell_diagonal
    analytic = _ex1_analytic_set(zwin)
    d_contour = [float(np.max(analytic.distance_to(pl.points)))
                 for pl in contours.polylines]
    samples = np.vstack([pl.points for pl in analytic.polylines])
    d_analytic = float(np.max(contours.distance_to(samples)))
    hausdorff_ok = bool(contours.polylines) and \
        max(d_contour) <= tol and d_analytic <= tol
    vwin = Window(-6.0, 6.0, -6.0, 6.0, 64, 64)
    roots2 = preimages(m, (2.0, 0.0), vwin, 1e-8)
    rootsm2 = preimages(m, (-2.0, 0.0), vwin, 1e-8)
    val_ok = (len(roots2) == 1 and len(rootsm2) == 0
              and math.hypot(roots2[0][0] - math.log(2.0), roots2[0][1]) <= 1e-6)
    detail = {"hausdorff_contour_to_curve": max(d_contour, default=math.inf),
              "hausdorff_curve_to_contour": d_analytic,
              "tolerance": tol, "valence_2_0": len(roots2),
              "valence_m2_0": len(rootsm2)}
    return hausdorff_ok and val_ok, detail


def _ex1_analytic_set(zwin: Window) -> PolylineSet:
    """Branches of x = -y tan y inside the window, split at poles of tan."""
    from .critical import Polyline
    polylines = []
    edges = [-1.5 * math.pi, -0.5 * math.pi, 0.5 * math.pi, 1.5 * math.pi]
    for lo, hi in zip(edges[:-1], edges[1:]):
        # dense in y: near the window edge dx/dy ~ 12, so the x-gap between
        # consecutive samples must stay below a grid cell
        ys = np.linspace(lo + 5e-4, hi - 5e-4, 3000)
        xs = -ys * np.tan(ys)
        keep = (xs >= zwin.xmin) & (xs <= zwin.xmax) & \
               (ys >= zwin.ymin) & (ys <= zwin.ymax)
        runs = np.flatnonzero(np.diff(np.concatenate(([0], keep.view(np.int8), [0]))))
        for a, b in zip(runs[::2], runs[1::2]):
            if b - a >= 2:
                polylines.append(Polyline(np.column_stack((xs[a:b], ys[a:b])),
                                          source="analytic"))
    return PolylineSet(polylines)


def _run_ex2(out: str) -> tuple[bool, dict]:
    m = builtin("ex2-bloch")
    cks = [(4 * k + 3) * math.pi / 2 for k in range(1, 6)]
    seq = np.array([[math.log(c), c] for c in cks])
    zwin = Window(-1.0, 6.0, 0.0, 40.0, 280, 280)
    cert = check_conditions(m, seq, 0.5 * math.log(2.0), zwin)
    write_json(os.path.join(out, "ex2-certificate.json"),
               certificate_payload(cert))
    from .field import jacobian_grid
    jac = jacobian_grid(m, seq[:, 0], seq[:, 1])
    rel = float(np.max(np.abs(jac - np.square(cks)) / np.square(cks)))
    ok = cert.passed and cert.M <= 0.5 + 1e-6 and rel <= 1e-9
    return ok, {"pass": cert.passed, "M": cert.M, "K": cert.K,
                "j_ratio_sup": cert.j_ratio_sup, "jacobian_rel_err": rel}


def _run_ex3(out: str) -> tuple[bool, dict]:
    m = builtin("ex3-zplusre")
    w0 = (0.0, 0.5 * math.pi)
    seq = sequence_to_cluster(m, w0, 4, r_start=2.0, growth=2.0)
    pts = np.asarray(seq)
    u, v = evaluate_grid(m, pts[:, 0], pts[:, 1])
    miss = np.hypot(u - w0[0], v - w0[1])
    write_csv(os.path.join(out, "ex3-sequence.csv"),
              ("n", "x", "y", "image-gap"),
              [(i + 1, p[0], p[1], float(g))
               for i, (p, g) in enumerate(zip(pts, miss))])
    contours = critical_contours(m, Window(-4.0, 4.0, -4.0, 4.0, 300, 300))
    fs = image_of_critical(m, contours)
    fs_gap = float(fs.distance_to(np.array([w0]))[0])
    ok = bool(np.all(np.diff(miss) < 0)) and miss[-1] <= 1e-3 and fs_gap > 0.1
    return ok, {"image_gaps": [float(g) for g in miss],
                "critical_image_distance": fs_gap}


def _trace_row(name: str, w0, zwin: Window, out: str, tag: str) -> tuple[bool, dict]:
    m = builtin(name)
    cfg = TraceConfig(zwindow=zwin, eps=0.5, escape_radii=(2.0, 4.0, 8.0, 16.0),
                      n_points=10, r_start=2.0, growth=2.0, max_stages=3,
                      run_scan=False, seed=0)
    report = trace_asymptote(m, w0, cfg)
    lift_csv = None
    if report.chosen_lift is not None and report.chosen_lift.lifted is not None:
        lift_csv = f"{tag}-lift.csv"
        write_csv(os.path.join(out, lift_csv), ("x", "y"),
                  [(float(x), float(y))
                   for x, y in report.chosen_lift.lifted.vertices])
    write_json(os.path.join(out, f"{tag}-report.json"),
               report_payload(report, None, lift_csv))
    final_mod = report.diagnostics.get("final_z_modulus", 0.0)
    ok = report.verdict == "asymptotic-evidence" and final_mod > 16.0
    return ok, {"verdict": report.verdict, "final_z_modulus": final_mod,
                "escape_radii": jsonable(report.escape_radii)}


def _run_ex6(out: str) -> tuple[bool, dict]:
    m = builtin("ex6-imexp")
    wwin = Window(0.3, 4.0, 0.3, 3.0 * math.pi - 0.3, 40, 40)
    zwin = Window(-4.0, 4.0, -4.0, 4.0, 64, 64)
    vg = valence_map(m, wwin, zwin, 1e-8)
    cx, cy = vg.cell_centers()
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    expected = np.where(CX * np.sin(CY) > 0.0, 2, 0)
    line_gap = np.minimum(np.abs(CY - np.pi), np.abs(CY - 2 * np.pi))
    away = line_gap > wwin.cell_height
    agree = float(np.mean(vg.valence[away] == expected[away]))
    rows = [(i, j, float(cx[i]), float(cy[j]), int(vg.valence[i, j]))
            for i in range(wwin.nx) for j in range(wwin.ny)]
    write_csv(os.path.join(out, "ex6-valence.csv"),
              ("i", "j", "cx", "cy", "count"), rows)
    contours = critical_contours(m, Window(-3.0, 3.0, -3.0, 3.0, 300, 300))
    fs = image_of_critical(m, contours)
    write_csv(os.path.join(out, "ex6-fS.csv"), ("polyline-id", "x", "y"),
              polyline_set_rows(fs))
    pts = [pl.points for pl in fs.polylines]
    if len(fs.cloud):
        pts.append(fs.cloud)
    gap = 0.0
    for arr in pts:
        k = np.round(arr[:, 1] / np.pi)
        gap = max(gap, float(np.max(np.hypot(arr[:, 0], arr[:, 1] - k * np.pi))))
    ok = agree >= 0.90 and bool(pts) and gap <= 2e-2
    return ok, {"sign_rule_agreement": agree, "critical_image_gap": gap}


_EXAMPLE_ROWS = (
    ("ex1-nono", "critical set and valence spot checks",
     lambda out: _run_ex1(out)),
    ("ex2-bloch", "quasiregular sequence certificate",
     lambda out: _run_ex2(out)),
    ("ex3-zplusre", "cluster approach on the half-line",
     lambda out: _run_ex3(out)),
    ("ex4-cubic", "asymptote pipeline at (1,0)",
     lambda out: _trace_row("ex4-cubic", (1.0, 0.0),
                            Window(-32.0, 32.0, -32.0, 32.0, 256, 256),
                            out, "ex4")),
    ("ex5-quadline", "asymptote pipeline at (3,0)",
     lambda out: _trace_row("ex5-quadline", (3.0, 0.0),
                            Window(-256.0, 256.0, -256.0, 256.0, 256, 256),
                            out, "ex5")),
    ("ex6-imexp", "valence strips and critical image",
     lambda out: _run_ex6(out)),
)


def cmd_examples(args) -> int:
    out = _out_dir(args)
    rows = []
    details = {}
    all_ok = True
    for name, label, fn in _EXAMPLE_ROWS:
        try:
            ok, detail = fn(out)
        except (ClusterError, PathError, DomainFault) as e:
            ok, detail = False, {"error": str(e)}
        rows.append((name, label, ok))
        details[name] = detail
        all_ok &= ok
        print(f"{name:14s} {label:42s} {'PASS' if ok else 'FAIL'}")
    write_csv(os.path.join(out, "examples.csv"),
              ("example", "check", "pass"), rows)
    write_json(os.path.join(out, "examples.json"), {
        "rows": [{"example": n, "check": c, "pass": bool(p)}
                 for n, c, p in rows],
        "details": details,
    })
    if not all_ok:
        return _fail("examples-failed",
                     "one or more regression rows failed", 1)
    return 0


# ---------------------------------------------------------------------------

_HANDLERS = {
    "analyze": cmd_analyze,
    "critical": cmd_critical,
    "valence-map": cmd_valence_map,
    "cluster": cmd_cluster,
    "lift": cmd_lift,
    "bloch-check": cmd_bloch_check,
    "trace": cmd_trace,
    "examples": cmd_examples,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="planarmap",
                     description="planar harmonic map analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "map summary with derivative spot checks"),
        ("critical", "critical set contours and their image"),
        ("valence-map", "cellwise valence heat map"),
        ("cluster", "cluster-set point cloud at large radii"),
        ("lift", "path lifting through the map"),
        ("bloch-check", "quasiregular sequence certificate"),
        ("trace", "asymptotic value evidence pipeline"),
        ("examples", "run the built-in regression corpus"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--map", help="builtin name or map-definition JSON file")
        p.add_argument("--u", help="inline expression for the first component")
        p.add_argument("--v", help="inline expression for the second component")
        p.add_argument("--window", help="domain window x0:x1:y0:y1")
        p.add_argument("--wwindow", help="image window x0:x1:y0:y1")
        p.add_argument("--grid", type=int, help="grid side (per-command default)")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="root-finding tolerance")
        p.add_argument("--rho", type=float, help="ball radius for bloch-check")
        p.add_argument("--w0", help="target value a,b")
        p.add_argument("--radii", type=_parse_floats,
                       help="comma-separated radius schedule")
        p.add_argument("--eps", type=float, default=0.5,
                       help="target ball radius for trace")
        p.add_argument("--gamma", help="image path vertices x1,y1;x2,y2;...")
        p.add_argument("--points", help="sequence points x1,y1;x2,y2;...")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for compatibility; results are identical "
                            "for any value")
        p.add_argument("--seed", type=int, default=0, help="jitter seed")
    return parser


_VALUE_FLAGS = {
    "--map", "--u", "--v", "--window", "--wwindow", "--grid", "--tol",
    "--rho", "--w0", "--radii", "--eps", "--gamma", "--points", "--out",
    "--threads", "--seed",
}


def _merge_dash_values(argv: list) -> list:
    # argparse mistakes values like -4:4:-4:4 for option strings; fold
    # them into --flag=value form.
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok in _VALUE_FLAGS and nxt is not None
                and nxt.startswith("-") and nxt not in _VALUE_FLAGS):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_merge_dash_values(list(argv)))
        if args.tol <= 0:
            raise UsageError("--tol must be positive")
        return _HANDLERS[args.command](args)
    except UsageError as e:
        return _fail("usage", str(e), 2)
    except ValueError as e:
        return _fail("usage", str(e), 2)
    except ClusterError as e:
        return _fail(e.reason, str(e), 1)
    except PathError as e:
        return _fail(e.reason, str(e), 1)
    except DomainFault as e:
        return _fail("domain-fault", str(e), 1)
    except OSError as e:
        return _fail("io", str(e), 2)


if __name__ == "__main__":
    sys.exit(main())
