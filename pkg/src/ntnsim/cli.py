"""Command line front end: one subcommand per scenario, CSV out.

Exit codes: 0 on success, 2 for configuration problems, 3 for a scenario
that started but failed.  Values resolve as CLI flag > --override > config
file > built-in default.  Wall time goes to the console only, never into
the CSV, so identical runs produce identical files.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .adhoc import sweep_latency
from .cellfree import simulate_ee_cdf
from .config import (
    SCENARIOS,
    ConfigError,
    RunSpec,
    apply_override,
    build_run,
    echo_metadata,
    load_config_file,
    parse_override,
)
from .coverage import sweep_coverage
from .harness import ResultTable
from .iab import simulate as simulate_iab

DEFAULT_TRIALS = {"adhoc": 2000, "cellfree-energy": 15, "coverage": 10_000, "iab": 1}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntnsim",
        description="Monte Carlo performance studies of aerial/satellite networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="scenario")
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--seed", type=int, help="base RNG seed (default 0)")
        p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dotted config override, e.g. radio.rf_frequency_ghz=2.5",
        )
    return parser


def _resolve(args: argparse.Namespace) -> RunSpec:
    mapping = load_config_file(args.config) if args.config else {}
    for text in args.override:
        key, value = parse_override(text)
        apply_override(mapping, key, value)
    return build_run(args.scenario, mapping, trials=args.trials, seed=args.seed)


def _stamp(table: ResultTable, spec: RunSpec) -> ResultTable:
    merged = {"version": f"ntnsim {__version__}"}
    merged.update(echo_metadata(spec))
    merged.update(table.metadata)
    table.metadata = merged
    return table


def _nodes_path(out: str) -> Path:
    path = Path(out)
    return path.with_name(path.stem + "_nodes" + (path.suffix or ".csv"))


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    trials = spec.trials if spec.trials is not None else DEFAULT_TRIALS[spec.scenario]

    started = time.perf_counter()
    try:
        if spec.scenario == "adhoc":
            tables = [(args.out, sweep_latency(spec.config, trials=trials, seed=spec.seed, workers=args.workers))]
        elif spec.scenario == "cellfree-energy":
            tables = [(args.out, simulate_ee_cdf(spec.config, trials=trials, seed=spec.seed, workers=args.workers))]
        elif spec.scenario == "coverage":
            tables = [(args.out, sweep_coverage(spec.config, trials=trials, seed=spec.seed, workers=args.workers))]
        else:
            heatmap, nodes = simulate_iab(spec.config, seed=spec.seed)
            tables = [(args.out, heatmap), (str(_nodes_path(args.out)), nodes)]
    except Exception as exc:  # noqa: BLE001 - scenario failures map to one exit code
        print(f"scenario error: {exc}", file=sys.stderr)
        return 3
    elapsed = time.perf_counter() - started

    for path, table in tables:
        _stamp(table, spec).write_csv(path)
        print(f"wrote {path} ({len(table.rows)} rows)")
    print(f"{spec.scenario} finished in {elapsed:.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
