"""Command-line front end.

Every run is fully determined by its flags; numbers are printed with nine
significant digits so outputs diff cleanly across platforms.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import capacity as cap
from . import placement, sphere
from .channel import ChannelMatrix, RotmanParams, build_channel, steering_matrix
from .exceptions import SatcapError
from .geometry import ArrayAlignment, ArrayConfig, Direction, direction_cosine

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2
SIG_DIGITS = 9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _csv_cell(x):
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def _flatten(results: dict) -> list[tuple[str, object]]:
    rows = []
    for key, value in results.items():
        if isinstance(value, (list, tuple)):
            rows += [(f"{key}_{i + 1}", v) for i, v in enumerate(value)]
        else:
            rows.append((key, value))
    return rows


def render(params: dict, results, fmt: str) -> str:
    """Serialize results: a dict becomes statistic/value rows, a list of dicts a table."""
    if fmt == "json":
        return json.dumps({"params": _fmt(params), "results": _fmt(results)}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(results, dict):
        writer.writerow(["statistic", "value"])
        for key, value in _flatten(results):
            writer.writerow([key, _csv_cell(value)])
    else:
        header = list(results[0].keys()) if results else []
        writer.writerow(header)
        for row in results:
            writer.writerow([_csv_cell(row[h]) for h in header])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _angle_in(args, value):
    return value if args.radians else math.radians(value)


def _angle_out(args, value):
    return value if args.radians else math.degrees(value)


def _seed(text):
    seed = int(text)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return seed


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _array_config(args, n_elements=None) -> ArrayConfig:
    return ArrayConfig.from_kd(n_elements or args.nrx, args.kd, ArrayAlignment.coerce(args.alignment))


def _common(p, array=True, mc=False):
    if array:
        p.add_argument("--ntx", type=_positive_int, default=4, help="number of satellites")
        p.add_argument("--nrx", type=_positive_int, default=4, help="number of array elements")
        p.add_argument("--kd", type=float, default=math.pi, help="k*d in radians (>= pi)")
        p.add_argument("--alignment", choices=["x", "y", "z"], default="y")
    p.add_argument("--snr", type=float, default=10.0, help="linear P/sigma^2")
    if mc:
        p.add_argument("--samples", type=_positive_int, default=10_000)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--jobs", type=_positive_int, default=1)


def _global(p):
    p.add_argument("--format", choices=["csv", "json"], default="csv", dest="output_format")
    p.add_argument("--output", default=None, help="write to this path instead of stdout")
    units = p.add_mutually_exclusive_group()
    units.add_argument("--radians", action="store_true", help="angles in radians")
    units.add_argument("--degrees", action="store_false", dest="radians", help="angles in degrees (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="satcap", description="Satellite MIMO capacity and placement toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("capacity", help="capacity of a given constellation")
    _common(p)
    p.add_argument("--theta", type=float, nargs="+", help="polar angles per satellite")
    p.add_argument("--phi", type=float, nargs="+", help="azimuths per satellite")
    p.add_argument("--nu", type=float, nargs="+", help="direction cosines per satellite")
    _global(p)

    p = sub.add_parser("optimal", help="capacity-maximizing placement")
    _common(p)
    p.add_argument("--mu0", type=float, default=None, help="grid offset in radians")
    p.add_argument("--theta", type=float, default=None, help="common polar angle for realization")
    p.add_argument("--indices", type=int, nargs="+", default=None, help="grid subset (n_T < n_R)")
    _global(p)

    for name, text in (("average", "Monte Carlo mean capacity"), ("outage", "empirical outage curve")):
        p = sub.add_parser(name, help=text)
        _common(p, mc=True)
        if name == "outage":
            p.add_argument("--thresholds", type=float, nargs="+", default=None)
        _global(p)

    p = sub.add_parser("sphere", help="spherical packing / covering")
    ssub = p.add_subparsers(dest="sphere_command", parser_class=_Parser)
    ssub.required = True
    q = ssub.add_parser("table", help="tabulated d_N with recomputed coverage")
    _global(q)
    q = ssub.add_parser("pack", help="solve the Tammes problem")
    q.add_argument("--n", type=_positive_int, required=True)
    q.add_argument("--restarts", type=_positive_int, default=20)
    q.add_argument("--iters", type=_positive_int, default=400)
    q.add_argument("--seed", type=_seed, default=0)
    q.add_argument("--jobs", type=_positive_int, default=1)
    _global(q)
    q = ssub.add_parser("cover", help="covering radius of a packing solution")
    q.add_argument("--n", type=_positive_int, required=True)
    q.add_argument("--restarts", type=_positive_int, default=20)
    q.add_argument("--seed", type=_seed, default=0)
    q.add_argument("--grid", type=_positive_int, default=sphere.DEFAULT_GRID)
    _global(q)
    q = ssub.add_parser("compare", help="hemisphere capacity vs. maximum capacity")
    q.add_argument("--n", type=_positive_int, nargs="+", required=True)
    q.add_argument("--nrx", type=_positive_int, default=4)
    q.add_argument("--kd", type=float, default=math.pi)
    q.add_argument("--alignment", choices=["x", "y", "z"], default="y")
    q.add_argument("--snr", type=float, default=10.0)
    q.add_argument("--restarts", type=_positive_int, default=20)
    q.add_argument("--seed", type=_seed, default=0)
    _global(q)

    p = sub.add_parser("rotman", help="Rotman lens average capacity")
    _common(p, array=False, mc=True)
    p.add_argument("--ntx", type=_positive_int, default=4, help="beam ports")
    p.add_argument("--nrx", type=_positive_int, default=4, help="array ports")
    p.add_argument("--kd", type=float, default=math.pi)
    p.add_argument("--w0", type=float, default=0.0, help="common path length, wavelengths")
    p.add_argument("--delays", type=float, nargs="+", default=None, help="F_m+V_m per port, wavelengths")
    p.add_argument("--no-ttd", action="store_false", dest="ttd")
    p.add_argument("--thresholds", type=float, nargs="+", default=())
    _global(p)

    p = sub.add_parser("errata", help="recomputed values that disagree with the printed ones")
    p.add_argument("--snr", type=float, default=10.0)
    _global(p)
    return parser


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_capacity(args):
    cfg = _array_config(args)
    if args.nu is not None:
        nus = np.asarray(args.nu, dtype=float)
        h = ChannelMatrix(steering_matrix(nus, cfg.n_elements, cfg.kd))
    else:
        if args.theta is None:
            raise UsageError("capacity: give --nu or --theta/--phi")
        phis = args.phi if args.phi is not None else [0.0] * len(args.theta)
        if len(phis) != len(args.theta):
            raise UsageError("capacity: --theta and --phi lengths differ")
        sats = [Direction(_angle_in(args, t), _angle_in(args, f)) for t, f in zip(args.theta, phis)]
        nus = np.array([direction_cosine(cfg.alignment, s) for s in sats])
        h = build_channel(cfg, sats)
    w = cap.gram(h)
    c = cap.capacity(h, args.snr)
    return {
        "nu": list(nus),
        "eigenvalues": list(cap.gram_eigenvalues(w)),
        "capacity": c,
        "bound": cap.capacity_upper_bound(min(h.n_t, h.n_r), args.snr),
        "offdiag": placement.off_diagonal_norm(w),
    }


def _cmd_optimal(args):
    cfg = _array_config(args)
    opt = placement.optimal_nus(args.ntx, args.nrx, args.kd, args.mu0, args.indices)
    if args.theta is None:
        fixed = 0.0 if cfg.alignment is ArrayAlignment.X else math.pi / 2
    else:
        fixed = _angle_in(args, args.theta)
    sats = placement.realize_constellation(opt, cfg.alignment, fixed)
    h = build_channel(cfg, sats)
    return {
        "case": opt.case.value,
        "mu0": opt.mu0,
        "nu": list(opt.nus),
        "theta": [_angle_out(args, s.theta) for s in sats],
        "phi": [_angle_out(args, s.phi) for s in sats],
        "capacity": cap.capacity(h, args.snr),
        "bound": cap.capacity_upper_bound(min(args.ntx, args.nrx), args.snr),
        "offdiag": placement.off_diagonal_norm(cap.gram(h)),
    }


def _cmd_average(args):
    cfg = _array_config(args)
    stats = cap.monte_carlo(cfg, args.ntx, args.snr, args.samples, (), args.seed, args.jobs)
    out = stats.to_dict()
    del out["outage"]
    out["bound"] = cap.capacity_upper_bound(min(args.ntx, args.nrx), args.snr)
    return out


def _cmd_outage(args):
    cfg = _array_config(args)
    bound = cap.capacity_upper_bound(min(args.ntx, args.nrx), args.snr)
    thresholds = args.thresholds
    if thresholds is None:
        thresholds = list(np.linspace(0.0, bound, 21))
    stats = cap.monte_carlo(cfg, args.ntx, args.snr, args.samples, thresholds, args.seed, args.jobs)
    return [{"threshold": t, "probability": p} for t, p in stats.outage]


def _cmd_sphere_table(args):
    rows = []
    for mode in (sphere.CoverageMode.PACKING, sphere.CoverageMode.COVERING):
        for n in sorted(sphere.PACKING_TABLE):
            rep = sphere.coverage_report(n, mode)
            rows.append(
                {
                    "mode": mode.value,
                    "N": n,
                    "d_N": sphere.known_table(n, mode),
                    "cap_radius": rep.cap_radius_deg,
                    "coverage": rep.coverage_percentage,
                    "printed_coverage": sphere.known_coverage(n, mode),
                }
            )
    return rows


def _cmd_sphere_pack(args):
    code = sphere.solve_packing(args.n, args.seed, args.restarts, args.iters, args.jobs)
    rows = [{"x": x, "y": y, "z": z} for x, y, z in code.points]
    if args.output_format == "json":
        return {
            "n": args.n,
            "min_angle": _angle_out(args, math.radians(sphere.min_pairwise_angle(code))),
            "points": code.points.tolist(),
        }
    return rows


def _cmd_sphere_cover(args):
    code = sphere.solve_packing(args.n, args.seed, args.restarts)
    radius = sphere.covering_radius(code, args.grid)
    out = {
        "n": args.n,
        "min_angle": _angle_out(args, math.radians(sphere.min_pairwise_angle(code))),
        "covering_radius": _angle_out(args, math.radians(radius)),
        "coverage": sphere.coverage_percentage(args.n, radius),
    }
    if args.n in sphere.COVERING_TABLE:
        out["table_radius"] = _angle_out(args, math.radians(sphere.known_table(args.n, "covering")))
    return out


def _cmd_sphere_compare(args):
    cfg = _array_config(args)
    rows = []
    for n in args.n:
        code = sphere.solve_packing(n, args.seed, args.restarts)
        n_vis = sphere.visible_points(code, [0.0, 0.0, 1.0]).shape[0]
        rows.append(
            {
                "N": n,
                "visible": n_vis,
                "max_capacity": cap.capacity_upper_bound(min(max(n_vis, 1), cfg.n_elements), args.snr),
                "hemisphere_capacity": sphere.hemisphere_capacity(code, [0.0, 0.0, 1.0], cfg, args.snr),
            }
        )
    return rows


def _cmd_rotman(args):
    k = 2.0 * math.pi
    delays = tuple(args.delays) if args.delays else ()
    params = RotmanParams(args.ntx, args.nrx, args.kd / k, k, args.w0, delays, args.ttd)
    stats = cap.rotman_monte_carlo(params, args.snr, args.samples, args.thresholds, args.seed, args.jobs)
    out = stats.to_dict()
    out["bound"] = cap.capacity_upper_bound(min(args.ntx, args.nrx), args.snr)
    if not args.thresholds:
        del out["outage"]
    else:
        out["outage"] = [p for _, p in stats.outage]
    return out


def _cmd_errata(args):
    n = 4
    optimum = cap.capacity_upper_bound(n, args.snr)
    return [
        {
            "item": "capacity_bound_n4",
            "printed": cap.printed_bound(n, args.snr),
            "recomputed": optimum,
            "note": "log2(n+snr) is exceeded by the equal-eigenvalue optimum n*log2(1+snr/n)",
        },
        {
            "item": "packing_coverage_N4",
            "printed": sphere.known_coverage(4, "packing"),
            "recomputed": sphere.coverage_report(4, "packing").coverage_percentage,
            "note": "4 caps of radius d_N/2 cover 0.8453 of the sphere",
        },
    ]


_DISPATCH = {
    "capacity": _cmd_capacity,
    "optimal": _cmd_optimal,
    "average": _cmd_average,
    "outage": _cmd_outage,
    "rotman": _cmd_rotman,
    "errata": _cmd_errata,
}
_SPHERE = {
    "table": _cmd_sphere_table,
    "pack": _cmd_sphere_pack,
    "cover": _cmd_sphere_cover,
    "compare": _cmd_sphere_compare,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv`` and execute one subcommand; return the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=stderr)
        print(exc, file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    handler = _SPHERE[args.sphere_command] if args.command == "sphere" else _DISPATCH[args.command]
    params = {k: v for k, v in vars(args).items() if k not in ("output",)}
    try:
        results = handler(args)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=stderr)
        print(exc, file=stderr)
        return EXIT_USAGE
    except (SatcapError, ValueError) as exc:
        print(f"satcap: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_COMPUTE
    text = render(params, results, args.output_format)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
