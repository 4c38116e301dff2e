"""Command-line interface: ``powerladder {run,ensemble,compare,examples}``.

Exit codes: 0 success, 2 configuration or usage error, 3 data error,
4 runtime error. Every failure prints one diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import fourtech, scenario
from .errors import ConfigError, DataError, PowerLadderError, SimulationError
from .techdata import default_data_dir

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
DATA_ENV = "FTT_DATA_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _data_dir(args) -> Path:
    if args.data:
        return Path(args.data)
    if os.environ.get(DATA_ENV):
        return Path(os.environ[DATA_ENV])
    return default_data_dir()


def _config(args):
    """Read the config; bare names are also looked up in the data directory."""
    path = Path(args.config)
    if not path.exists() and not path.is_absolute():
        candidate = _data_dir(args) / path
        if candidate.exists():
            path = candidate
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return scenario.read_config(path, overrides)


def _progress(quiet):
    if quiet:
        return None
    return lambda line: print(line, file=sys.stderr, flush=True)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    config = _config(args)
    registry, resources = scenario.load_data(config, _data_dir(args))
    out = _out_dir(args)
    try:
        output = scenario.run(config, registry, resources, progress=_progress(args.quiet))
    except SimulationError as exc:
        if exc.partial is not None:
            scenario.write_csv(exc.partial, out / config.csv_name)
            scenario.write_json(scenario.summary_dict(exc.partial, config),
                                out / config.summary_name)
        raise
    scenario.write_csv(output, out / config.csv_name)
    scenario.write_json(scenario.summary_dict(output, config), out / config.summary_name)
    return EXIT_OK


def cmd_ensemble(args) -> int:
    config = _config(args)
    registry, resources = scenario.load_data(config, _data_dir(args))
    out = _out_dir(args)
    summary = scenario.run_ensemble(config, args.samples, registry, resources,
                                    workers=args.workers)
    scenario.write_json(scenario.ensemble_dict(summary, config), out / config.summary_name)
    if not args.quiet:
        print(f"{summary.members - summary.failures}/{summary.members} members completed",
              file=sys.stderr)
    return EXIT_OK


def _series_file(directory: Path, name: str) -> Path:
    if not directory.is_dir():
        raise ConfigError(f"output directory {directory} does not exist")
    path = directory / name
    if not path.is_file():
        raise ConfigError(f"{path}: no series table")
    return path


def cmd_compare(args) -> int:
    a_dir, b_dir = Path(args.first), Path(args.second)
    a = scenario.read_csv(_series_file(a_dir, args.csv_name))
    b = scenario.read_csv(_series_file(b_dir, args.csv_name))
    diff = scenario.compare_series(a, b)
    out = _out_dir(args)
    years, techs = diff["years"], diff["tech_ids"]
    columns = scenario.CSV_COLUMNS[2:]
    with open(out / "difference.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "tech_id"] + columns)
        for k, year in enumerate(years):
            for i, tech in enumerate(techs):
                writer.writerow([repr(float(year)), tech]
                                + [repr(float(diff[c][k, i])) for c in columns])
    with open(out / "totals.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "emissions_first", "emissions_second", "emissions_delta",
                         "investment_delta"])
        for k, year in enumerate(years):
            ea = float(np.sum(a["emissions_rate"][k]))
            eb = float(np.sum(b["emissions_rate"][k]))
            writer.writerow([repr(float(year)), repr(ea), repr(eb), repr(eb - ea),
                             repr(float(np.sum(diff["investment"][k])))])
    lines = [f"generation peak years: {a_dir} vs {b_dir}"]
    for i, tech in enumerate(techs):
        ya = years[int(np.argmax(a["generation_GWh"][:, i]))]
        yb = years[int(np.argmax(b["generation_GWh"][:, i]))]
        lines.append(f"{tech:<20} {ya:9.2f} {yb:9.2f}")
    (out / "peaks.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_examples(args) -> int:
    fourtech.write_examples(_out_dir(args), horizon=args.horizon, dt=args.dt)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="powerladder", description="Power-sector technology transition simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_args(p):
        p.add_argument("--config", required=True, help="scenario config (.cfg)")
        p.add_argument("--data", help=f"data directory (default ${DATA_ENV} or packaged data)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key, e.g. horizon.end=2050 (repeatable)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--quiet", action="store_true", help="no progress on stderr")

    p = sub.add_parser("run", help="run one scenario")
    scenario_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ensemble", help="Monte-Carlo ensemble over resource curves")
    scenario_args(p)
    p.add_argument("--samples", type=int, default=100, help="ensemble members")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("compare", help="difference tables of two run outputs")
    p.add_argument("first", help="first output directory")
    p.add_argument("second", help="second output directory")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--csv-name", default="series.csv", help="series file inside each directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("examples", help="four-technology share trajectories")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--horizon", type=float, default=fourtech.DEFAULT_HORIZON)
    p.add_argument("--dt", type=float, default=fourtech.DEFAULT_DT)
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "samples", 1) < 1:
        print("powerladder: error: --samples must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        code, error = EXIT_CONFIG, exc
    except DataError as exc:
        code, error = EXIT_DATA, exc
    except (PowerLadderError, OSError, ValueError) as exc:
        code, error = EXIT_RUNTIME, exc
    message = " ".join(str(error).split())
    print(f"powerladder: error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
