"""Command-line entry point: run, list and export measurement scenarios.

Exit codes: 0 on success, 2 for configuration problems (unreadable or
invalid config files, unknown scenario names), 3 for numerical failures
(aliasing guard, non-converging fits, out-of-range scans).
"""

from __future__ import annotations

import argparse
import difflib
import os
import sys
from dataclasses import replace
from pathlib import Path

from .detection import NoiseModel
from .errors import BiphotonError, ConfigError
from .scenarios import (
    BUILTIN_SCENARIOS,
    builtin_config,
    export_scenario,
    list_scenarios,
    load_config,
    run_scenario,
)

OUTPUT_DIR_ENV = "BIPHOTON_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _resolve_config(target: str):
    path = Path(target)
    if path.exists():
        return load_config(path)
    if target in BUILTIN_SCENARIOS:
        return builtin_config(target)
    hint = ""
    close = difflib.get_close_matches(target, BUILTIN_SCENARIOS, n=1)
    if close:
        hint = f"; did you mean {close[0]!r}?"
    raise ConfigError(
        f"{target!r} is neither a readable config file nor a built-in scenario{hint}"
    )


def _cmd_run(args) -> int:
    cfg = _resolve_config(args.target)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.grid is not None:
        cfg = replace(cfg, grid_n=args.grid)
    if args.noiseless:
        cfg = replace(cfg, noise=NoiseModel.NOISELESS)
    out_root = args.out or os.environ.get(OUTPUT_DIR_ENV) or "biphoton-out"
    out_dir = Path(out_root) / cfg.name
    result = run_scenario(cfg, out_dir)
    for f in result.files:
        print(f)
    if result.witness is not None:
        verdict = "violated" if result.witness.violated else "satisfied"
        print(f"witness product = {result.witness.product:.6e} "
              f"(bound {result.witness.bound}) -> {verdict}")
    if result.ghost is not None:
        period = "n/a" if result.ghost.period is None else f"{result.ghost.period:.4f} mm"
        print(f"visibility = {result.ghost.visibility:.4f}, period = {period}")
    return EXIT_OK


def _cmd_list(_args) -> int:
    print(list_scenarios())
    return EXIT_OK


def _cmd_export(args) -> int:
    path = export_scenario(args.name, args.path)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biphoton",
        description="Entangled-photon aberration-cancellation scenario runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a built-in scenario or a config file")
    run_p.add_argument("target", help="built-in scenario name or path to a config file")
    run_p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./biphoton-out)")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.add_argument("--grid", type=int, help="override the grid point count per axis")
    run_p.add_argument("--noiseless", action="store_true",
                       help="disable Poisson shot noise (expected rates only)")
    run_p.set_defaults(func=_cmd_run)

    list_p = sub.add_parser("list", help="list the built-in scenarios")
    list_p.set_defaults(func=_cmd_list)

    export_p = sub.add_parser("export", help="write a built-in scenario's config file")
    export_p.add_argument("name", help="built-in scenario name")
    export_p.add_argument("path", help="destination file")
    export_p.set_defaults(func=_cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BiphotonError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
