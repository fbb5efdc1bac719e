"""Command-line entry point: ``csiregion {lookup,rates,region,optimize}``.

Exit codes: 0 success, 2 configuration or validation error, 3 numeric
failure. Logging verbosity comes from ``CSIREGION_LOG``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import DL_MODES, RunConfig, load_config
from .errors import InvalidArgument, NumericFailure, UnusableLink
from .region import (LookupTable, OperatingParams, RateRegion, build_lookup, evaluate_operating_point,
                     optimized_catalog, point_dict, region_csv, region_json, scenario_grids, sweep,
                     weighted_optimum)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("csiregion")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors map to the configuration exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--seed", type=_u64, default=None, help="RNG seed (default 0)")
    common.add_argument("--samples", type=_positive_int, default=None, help="channel realizations (default 200)")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--velocity-kmh", type=float, dest="velocity_kmh")
    common.add_argument("--feedback", choices=("redundant", "successive"))
    common.add_argument("--dl-mode", choices=DL_MODES, dest="dl_mode")
    common.add_argument("--threads", type=_positive_int, default=None)
    common.add_argument("--lookup", type=Path, help="reuse a lookup table written by `lookup`")

    parser = _Parser(prog="csiregion", description="Joint UL/DL rate regions under imperfect CSI.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("lookup", parents=[common], help="build and write the CSI lookup table")
    rates = sub.add_parser("rates", parents=[common], help="evaluate a single operating point")
    rates.add_argument("--rho-ul", type=float, dest="rho_ul", help="UL pilot density (default: smallest)")
    rates.add_argument("--rho-dl", type=float, dest="rho_dl", help="DL pilot density (default: smallest)")
    rates.add_argument("--n-b", type=float, dest="n_b", default=0.0, help="feedback bits")
    sub.add_parser("region", parents=[common], help="sweep, Pareto frontier, hull and CSV")
    opt = sub.add_parser("optimize", parents=[common], help="weighted optimum for each --weight")
    opt.add_argument("--weight", type=float, action="append", dest="weights",
                     help="UL weight w in [0, 1]; repeatable (default 0.5)")
    return parser


def _setup_logging() -> None:
    level = os.environ.get("CSIREGION_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _resolve_config(args) -> RunConfig:
    run = load_config(args.config) if args.config else RunConfig()
    sys_changes = {k: getattr(args, a) for k, a in (("velocity_kmh", "velocity_kmh"),
                                                    ("feedback_mode", "feedback"), ("dl_mode", "dl_mode"))
                   if getattr(args, a) is not None}
    system = run.system.with_(**sys_changes) if sys_changes else run.system
    changes = {k: getattr(args, k) for k in ("seed", "samples", "threads") if getattr(args, k) is not None}
    return replace(run, system=system, **changes)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _lookup_for(run: RunConfig, args):
    cfg = run.system
    catalog = optimized_catalog(cfg.geometry, cfg.profile(), cfg.budget.sigma2_p, run.max_density)
    if args.lookup is not None:
        table = LookupTable.load(args.lookup)
        for axis, want in (("v_kmh", cfg.velocity_kmh), ("tau_max_us", cfg.tau_max_us)):
            if not any(abs(x - want) <= 1e-9 * max(1.0, want) for x in getattr(table.grids, axis)):
                raise InvalidArgument(f"lookup table has no {axis} node at {want:g}")
        if not set(run.n_b_grid) <= set(table.grids.n_b):
            raise InvalidArgument("lookup table does not cover the configured N_b grid")
        ul_ids, dl_ids = table.pattern_ids(cfg.velocity_kmh, cfg.tau_max_us)
        by_id = {p.id: p for p in catalog}
        missing = [i for i in ul_ids + dl_ids if i not in by_id]
        if missing or ul_ids != dl_ids:
            raise InvalidArgument("lookup table was built for a different pilot catalog")
        catalog = [by_id[i] for i in ul_ids]
    else:
        table = build_lookup(cfg, scenario_grids(cfg, catalog, run.n_b_grid), catalog)
    return catalog, table


def _cmd_lookup(run: RunConfig, args) -> None:
    _, table = _lookup_for(replace(run), argparse.Namespace(lookup=None))
    _emit(table.to_json() + "\n", args.out)


def _cmd_rates(run: RunConfig, args) -> None:
    cfg = run.system
    catalog, table = _lookup_for(run, args)

    def pick(rho):
        if rho is None:
            return catalog[0]
        return min(catalog, key=lambda p: (abs(p.density - rho), p.density))

    ul, dl = pick(args.rho_ul), pick(args.rho_dl)
    params = OperatingParams(ul.id, dl.id, ul.density, dl.density, float(args.n_b), cfg.dl_mode,
                             cfg.feedback_mode)
    point = evaluate_operating_point(cfg, params, table, run.samples, run.seed)
    if args.format == "csv":
        text = region_csv(RateRegion.from_points([point]))
    else:
        text = json.dumps(point_dict(point), indent=1) + "\n"
    _emit(text, args.out)


def _region(run: RunConfig, args) -> RateRegion:
    catalog, table = _lookup_for(run, args)
    points = sweep(run.system, catalog, run.n_b_grid, run.samples, run.seed, lookup=table,
                   threads=run.threads)
    return RateRegion.from_points(points)


def _cmd_region(run: RunConfig, args) -> None:
    region = _region(run, args)
    _emit(region_json(region) + "\n" if args.format == "json" else region_csv(region), args.out)


def _cmd_optimize(run: RunConfig, args) -> None:
    weights = args.weights or [0.5]
    for w in weights:
        if not 0 <= w <= 1:
            raise InvalidArgument(f"weight {w} outside [0, 1]")
    region = _region(run, args)
    best = [(w, weighted_optimum(region.points, w)) for w in weights]
    if args.format == "csv":
        lines = ["weight,ul_pattern,dl_pattern,rho_ul,rho_dl,n_b,dl_mode,net_ul,net_dl"]
        for w, p in best:
            a = p.params
            lines.append(f"{w!r},{a.ul_pattern},{a.dl_pattern},{a.rho_ul!r},{a.rho_dl!r},{a.n_b!r},"
                         f"{a.dl_mode},{p.net_ul!r},{p.net_dl!r}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps([{"weight": w, **point_dict(p)} for w, p in best], indent=1) + "\n"
    _emit(text, args.out)


COMMANDS = {"lookup": _cmd_lookup, "rates": _cmd_rates, "region": _cmd_region, "optimize": _cmd_optimize}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) or usage error (2)
        return int(exc.code or 0)
    _setup_logging()
    if args.format is None:
        args.format = "json" if args.command in ("lookup", "rates") else "csv"
    try:
        cfg = _resolve_config(args)
        COMMANDS[args.command](cfg, args)
    except InvalidArgument as exc:
        print(f"csiregion: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, UnusableLink, ArithmeticError) as exc:
        print(f"csiregion: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"csiregion: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())
