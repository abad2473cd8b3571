"""Command-line front end: every computation as a subcommand with tabular output.

Outputs are CSV (one header row, 17 significant digits, locale independent)
or JSON (same columns).  The effective configuration is echoed to a sidecar
file "<output>.config" next to each output for provenance.  Exit codes:
0 success, 2 argument error, 3 numerical failure (a machine-readable JSON
error record is printed on standard error).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

import numpy as np

from . import bands as bands_mod
from . import cluster as cluster_mod
from . import lightlines as ll
from .errors import PinnedPlateError
from .green import bloch_ratio, free_green, quasiperiodic_green
from .lattice import Lattice, bz_path, symmetry_points
from .latsum import SumConfig

FMT = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FMT % value
    return str(value)


def _write_table(path: str, columns, rows, fmt: str):
    if path == "-":
        out = sys.stdout
        close = False
    else:
        out = open(path, "w", newline="")
        close = True
    try:
        if fmt == "csv":
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        else:
            json.dump({"columns": list(columns),
                       "rows": [[_fmt(v) for v in row] for row in rows]},
                      out, indent=0)
            out.write("\n")
    finally:
        if close:
            out.close()


def _write_sidecar(path: str, effective: dict):
    if path == "-":
        return
    with open(path + ".config", "w") as fh:
        for key in sorted(effective):
            fh.write(f"{key}={effective[key]}\n")


def _read_config_file(path: str, known: set) -> dict:
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SystemExit(f"config line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in known:
                print(f"error: unknown config key {key!r}", file=sys.stderr)
                raise SystemExit(2)
            cfg[key] = value.strip()
    return cfg


def _parse_rho_sq(text: str) -> Fraction:
    return Fraction(text)


def _lattice_from(args) -> Lattice:
    if args.family == "triangular":
        return Lattice.triangular(args.d)
    if args.rho_sq is not None:
        return Lattice.rectangular(args.dx, args.dx * float(np.sqrt(float(Fraction(args.rho_sq))))) \
            if args.dy is None else Lattice.rectangular(args.dx, args.dy)
    return Lattice.rectangular(args.dx, args.dy if args.dy is not None else args.dx)


def _sum_config(args) -> SumConfig:
    return SumConfig(zeta_length=args.zeta,
                     zeta_angle=args.zeta_angle,
                     spectral_cutoff=args.cutoff,
                     multipole_max=args.multipole_max,
                     pole_guard=args.pole_guard)


def _add_common(p: argparse.ArgumentParser, cutoff_default=None):
    p.add_argument("--config", help="key=value config file (flags take precedence)")
    p.add_argument("--family", choices=["rectangular", "triangular"],
                   default="rectangular")
    p.add_argument("--dx", type=float, default=1.0)
    p.add_argument("--dy", type=float, default=None)
    p.add_argument("--d", type=float, default=1.0, help="triangular spacing")
    p.add_argument("--rho-sq", dest="rho_sq", default=None,
                   help="squared aspect ratio (rational, e.g. 3 or 9/4)")
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--zeta-angle", dest="zeta_angle", type=float, default=0.4)
    p.add_argument("--cutoff", type=int, default=cutoff_default)
    p.add_argument("--multipole-max", dest="multipole_max", type=int, default=12)
    p.add_argument("--pole-guard", dest="pole_guard", type=float, default=1e-6)
    p.add_argument("--output", "-o", default="-", help="output path ('-' = stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _effective(args, extra=None) -> dict:
    skip = {"config", "func"}
    eff = {k: v for k, v in sorted(vars(args).items())
           if k not in skip and v is not None}
    eff.update(extra or {})
    return eff


# ----------------------------------------------------------------- commands

def _cmd_bands(args):
    lattice = _lattice_from(args)
    cfg = _sum_config(args)
    pts = symmetry_points(lattice) if lattice.family.value == "rectangular" else None
    names = args.path.split(",")
    try:
        waypoints = [pts[name] for name in names]
    except (KeyError, TypeError):
        print(f"error: unknown symmetry point in path {args.path!r}", file=sys.stderr)
        return 2
    params, points = bz_path(lattice, waypoints, args.samples)
    leg_edges = np.cumsum([0.0] + [np.linalg.norm(b.position - a.position)
                                   for a, b in zip(waypoints[:-1], waypoints[1:])])
    band_points, lights = bands_mod.band_diagram(
        params, points, lattice, (args.kmin, args.kmax), cfg)
    rows = []
    for bp in band_points:
        leg = int(np.searchsorted(leg_edges[1:-1], bp.path_param, side="right"))
        rows.append((leg, bp.path_param, bp.k0[0], bp.k0[1],
                     bp.band_index, bp.k, bp.classification))
    for (s, k0, h1, h2, k) in lights:
        leg = int(np.searchsorted(leg_edges[1:-1], s, side="right"))
        rows.append((leg, s, k0[0], k0[1], -1, k, f"LL:{h1},{h2}"))
    rows.sort(key=lambda r: (r[1], r[4], r[5]))
    columns = ("leg", "path_param", "k0x", "k0y", "band_index", "k", "classification")
    _write_table(args.output, columns, rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _surface_from(args, lattice, cfg):
    dx, dy = lattice.periods
    kx1 = args.kx1 if args.kx1 is not None else np.pi / dx
    ky1 = args.ky1 if args.ky1 is not None else np.pi / dy
    xs = np.linspace(args.kx0, kx1, args.nx)
    ys = np.linspace(args.ky0, ky1, args.ny)
    return bands_mod.band_surface(lattice, xs, ys, (args.kmin, args.kmax), cfg)


def _add_surface_args(p):
    p.add_argument("--nx", type=int, default=32)
    p.add_argument("--ny", type=int, default=32)
    p.add_argument("--kx0", type=float, default=0.0)
    p.add_argument("--kx1", type=float, default=None)
    p.add_argument("--ky0", type=float, default=0.0)
    p.add_argument("--ky1", type=float, default=None)
    p.add_argument("--kmin", type=float, required=True)
    p.add_argument("--kmax", type=float, required=True)


def _cmd_surface(args):
    lattice = _lattice_from(args)
    surf = _surface_from(args, lattice, _sum_config(args))
    rows = []
    for i in range(len(surf.k0x)):
        for j in range(len(surf.k0y)):
            for b in range(surf.sheets.shape[0]):
                k = surf.sheets[b, i, j]
                if np.isfinite(k):
                    rows.append((i, j, surf.k0x[i], surf.k0y[j], b, k))
    columns = ("i", "j", "k0x", "k0y", "band_index", "k")
    _write_table(args.output, columns, rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _cmd_contours(args):
    lattice = _lattice_from(args)
    surf = _surface_from(args, lattice, _sum_config(args))
    rows = []
    for level in (float(v) for v in args.levels.split(",")):
        contour = bands_mod.isofrequency(surf, level)
        for pid, poly in enumerate(contour.polylines):
            for vid, (x, y) in enumerate(poly):
                rows.append((level, pid, vid, x, y))
    columns = ("level", "polyline_id", "vertex_index", "k0x", "k0y")
    _write_table(args.output, columns, rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _cmd_dos(args):
    lattice = _lattice_from(args)
    surf = _surface_from(args, lattice, _sum_config(args))
    rows = []
    for level in (float(v) for v in args.levels.split(",")):
        rows.append((level, bands_mod.dos_numeric(surf, level,
                                                  symmetry_factor=args.symmetry_factor)))
    _write_table(args.output, ("k", "dos"), rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _cmd_triples(args):
    rho_sq = _parse_rho_sq(args.rho_sq) if args.rho_sq is not None else Fraction(1)
    triples = ll.enumerate_triples(rho_sq, args.kmax, args.index_bound)
    rows = []
    for tp in triples:
        sextet = ";".join(f"{n},{m}" for n, m in tp.sextet)
        rows.append((sextet, tp.kappa_x_str, tp.kappa_y_str, tp.k_str,
                     tp.multiplicity, tp.in_bz))
    columns = ("sextet", "kappa_x", "kappa_y", "k", "multiplicity", "in_bz")
    _write_table(args.output, columns, rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _cmd_cones(args):
    if args.point in ("first", "second"):
        dirac = ll.triangular_dirac_point(1 if args.point == "first" else 2, args.d)
        fits = ll.cone_fit(dirac)
    else:
        sextet = [tuple(int(v) for v in pair.split(","))
                  for pair in args.point.split(";")]
        rho_sq = _parse_rho_sq(args.rho_sq) if args.rho_sq is not None else Fraction(1)
        tp = ll.triple_intersection(sextet, rho_sq)
        lattice = _lattice_from(args)
        fits = ll.cone_fit(tp, lattice)
    rows = [(f"{i + 1}-{f.role}", f.alpha, f.beta, f.c, f.gamma)
            for i, f in enumerate(fits)]
    columns = ("branch", "alpha", "beta", "c", "gamma")
    _write_table(args.output, columns, rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _cmd_cluster(args):
    lattice = _lattice_from(args)
    geometry = cluster_mod.ClusterGeometry.rectangular(lattice, args.half_width)
    solution = cluster_mod.solve_cluster(geometry, args.k)
    idx = geometry.indices
    rows = []
    for (m, n), (x, y), a in zip(idx, geometry.pins, solution.coefficients):
        rows.append((m, n, x, y, a.real, a.imag, abs(a)))
    columns = ("m", "n", "x", "y", "re_a", "im_a", "abs_a")
    _write_table(args.output, columns, rows, args.format)

    direction, aniso = cluster_mod.localization_metric(solution)
    if args.output != "-":
        span = (args.half_width + 0.5)
        xg = np.linspace(-span * lattice.d_x, span * lattice.d_x, args.grid_n)
        yg = np.linspace(-span * lattice.d_y, span * lattice.d_y, args.grid_n)
        w = cluster_mod.field_map(solution, xg, yg)
        frows = [(x, y, w[i, j].real, w[i, j].imag, abs(w[i, j]))
                 for i, x in enumerate(xg) for j, y in enumerate(yg)]
        _write_table(args.output + "_field.csv",
                     ("x", "y", "re_w", "im_w", "abs_w"), frows, "csv")
        _write_table(args.output + "_localization.csv",
                     ("direction_deg", "anisotropy"),
                     [(cluster_mod.direction_degrees(direction), aniso)], "csv")
    _write_sidecar(args.output, _effective(args,
                   {"direction_deg": _fmt(cluster_mod.direction_degrees(direction)),
                    "anisotropy": _fmt(aniso)}))
    return 0


def _cmd_greens(args):
    lattice = _lattice_from(args)
    cfg = _sum_config(args)
    k0 = np.array([args.k0x, args.k0y])
    rows = []
    for pair in args.points.split(";"):
        x, y = (float(v) for v in pair.split(","))
        if args.kernel == "free":
            g = free_green(float(np.hypot(x, y)), args.k)
        else:
            g = quasiperiodic_green(np.array([x, y]), args.k, k0, lattice, cfg)
        rows.append((x, y, g.real, g.imag))
    _write_table(args.output, ("x", "y", "re", "im"), rows, args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def _cmd_filter(args):
    lattice = _lattice_from(args)
    cfg = _sum_config(args)
    eta, passed = bloch_ratio(args.k, np.array([args.k0x, args.k0y]), lattice, cfg)
    _write_table(args.output, ("k", "re_eta", "im_eta", "passed"),
                 [(args.k, eta.real, eta.imag, passed)], args.format)
    _write_sidecar(args.output, _effective(args))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinnedplate",
        description="Bloch dispersion, Dirac points, DOS and trapped modes for "
                    "point-pinned plates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="band diagram along a symmetry path")
    _add_common(p, cutoff_default=64)
    p.add_argument("--path", default="G,X,M,Y,G")
    p.add_argument("--samples", type=int, default=25, help="samples per leg")
    p.add_argument("--kmin", type=float, default=0.5)
    p.add_argument("--kmax", type=float, default=10.0)
    p.set_defaults(func=_cmd_bands)

    p = sub.add_parser("surface", help="band surface over a zone window")
    _add_common(p, cutoff_default=16)
    _add_surface_args(p)
    p.set_defaults(func=_cmd_surface)

    p = sub.add_parser("contours", help="isofrequency contours at given levels")
    _add_common(p, cutoff_default=16)
    _add_surface_args(p)
    p.add_argument("--levels", required=True, help="comma-separated k levels")
    p.set_defaults(func=_cmd_contours)

    p = sub.add_parser("dos", help="numeric density of states on a k ladder")
    _add_common(p, cutoff_default=16)
    _add_surface_args(p)
    p.add_argument("--levels", required=True, help="comma-separated k levels")
    p.add_argument("--symmetry-factor", dest="symmetry_factor", type=float,
                   default=1.0)
    p.set_defaults(func=_cmd_dos)

    p = sub.add_parser("triples", help="triple-intersection catalogue")
    _add_common(p)
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--index-bound", dest="index_bound", type=int, default=4)
    p.set_defaults(func=_cmd_triples)

    p = sub.add_parser("cones", help="cone fits and DOS coefficients")
    _add_common(p)
    p.add_argument("--point", default="first",
                   help="'first', 'second', or a sextet 'n,m;n',m';n'',m'''")
    p.set_defaults(func=_cmd_cones)

    p = sub.add_parser("cluster", help="finite pinned cluster response")
    _add_common(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--half-width", dest="half_width", type=int, default=7)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=61)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("greens", help="point evaluations of G or g")
    _add_common(p, cutoff_default=128)
    p.add_argument("--kernel", choices=["free", "quasiperiodic"],
                   default="quasiperiodic")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--k0x", type=float, default=0.0)
    p.add_argument("--k0y", type=float, default=0.0)
    p.add_argument("--points", required=True, help="'x,y;x,y;...'")
    p.set_defaults(func=_cmd_greens)

    p = sub.add_parser("filter", help="Bloch-ratio filter at a candidate root")
    _add_common(p, cutoff_default=128)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--k0x", type=float, default=0.0)
    p.add_argument("--k0y", type=float, default=0.0)
    p.set_defaults(func=_cmd_filter)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        known = {k for k in vars(args) if k not in ("config", "func", "command")}
        file_cfg = _read_config_file(args.config, known)
        cli_tokens = argv if argv is not None else sys.argv[1:]
        explicit = {t.split("=")[0].lstrip("-").replace("-", "_")
                    for t in cli_tokens if t.startswith("--")}
        for key, value in file_cfg.items():
            if key in explicit:
                continue
            current = getattr(args, key)
            if isinstance(current, bool):
                setattr(args, key, value.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(args, key, int(value))
            elif isinstance(current, float):
                setattr(args, key, float(value))
            else:
                setattr(args, key, value)
    try:
        return args.func(args)
    except PinnedPlateError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 3
    except (ValueError, OverflowError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
