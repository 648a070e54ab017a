"""
Command-line front end.

    risjam run --config power_sweep.toml --out results/
    risjam validate --config power_sweep.toml
    risjam sweep-list --config power_sweep.toml
    risjam report --db results/trials.sqlite
"""

import argparse
import csv
import json
import logging
import os
import sys
import typing as t
from datetime import datetime, timezone
from pathlib import Path

from risjam.__version__ import __version__
from risjam.config import ConfigError, apply_overrides, load_config, snapshot
from risjam.harness import SweepResult, SweepRow, SweptParameter, TrialRecord, regroup, run_sweep
from risjam.store import RecordStore

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
RESULT_COLUMNS = (
    "parameter",
    "scheme",
    "smp",
    "sjp",
    "mean_p_j_w",
    "mean_gamma_m_db",
    "n_trials",
    "n_failed",
)
SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def configure_logging(env_var: str = "RISJW_LOG") -> int:
    raw = os.environ.get(env_var, "WARNING").strip()
    level = int(raw) if raw.isdigit() else logging.getLevelName(raw.upper())
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
    return level


# SECTION 1: Result formatting
def row_dict(row: SweepRow) -> t.Dict[str, t.Any]:
    m = row.metrics
    return {
        "parameter": row.value,
        "scheme": row.scheme.name,
        "smp": m.smp,
        "sjp": m.sjp,
        "mean_p_j_w": m.mean_p_j,
        "mean_gamma_m_db": m.mean_gamma_m_db,
        "n_trials": m.n_trials,
        "n_failed": m.n_failed,
    }


def _cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_csv(path: Path, rows: t.Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_cell(v) for v in row_dict(row).values()])


def _json_value(value):
    if isinstance(value, float) and value != value:
        return None
    return value


def summary_table(parameter: SweptParameter, rows: t.Sequence[SweepRow]) -> str:
    header = f"{parameter.name:>12} {'scheme':<14} {'SMP':>6} {'SJP':>6} {'P_J [W]':>10} {'SNR_M [dB]':>10} {'failed':>6}"
    lines = [header, "-" * len(header)]
    for row in rows:
        m = row.metrics
        lines.append(
            f"{row.value:>12g} {row.scheme.label:<14} {m.smp:>6.3f} {m.sjp:>6.3f} "
            f"{m.mean_p_j:>10.4g} {m.mean_gamma_m_db:>10.2f} {m.n_failed:>6d}"
        )
    return "\n".join(lines)


def write_outputs(
    out: Path, result: SweepResult, manifest: t.Dict[str, t.Any]
) -> t.Dict[str, str]:
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        name: out / name
        for name in ("results.csv", "results.json", "manifest.json", "trials.sqlite")
    }
    manifest["outputs"] = {name: str(p) for name, p in paths.items()}
    # trials first, so a store error leaves no summary files behind
    for p in paths.values():
        p.unlink(missing_ok=True)
    with RecordStore(paths["trials.sqlite"], TrialRecord) as store:
        store.save(result.records)
    write_csv(paths["results.csv"], result.rows)
    document = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(RESULT_COLUMNS),
        "rows": [
            {k: _json_value(v) for k, v in row_dict(row).items()} for row in result.rows
        ],
        "manifest": manifest,
    }
    paths["results.json"].write_text(json.dumps(document, indent=2) + "\n")
    paths["manifest.json"].write_text(json.dumps(manifest, indent=2) + "\n")
    for p in paths.values():
        logger.info("Wrote %s", p)
    return manifest["outputs"]


# SECTION 2: Commands
def _configs(args):
    configs = load_config(args.config)
    return apply_overrides(
        configs,
        seed=getattr(args, "seed", None),
        trials=getattr(args, "trials", None),
        schemes=getattr(args, "schemes", None),
    )


def run_command(args) -> int:
    (scenario, solver, sweep), overrides = _configs(args)
    manifest = {
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "base_seed": sweep.base_seed,
        "config_path": str(args.config) if args.config else None,
        "config_text": Path(args.config).read_text() if args.config else "",
        "overrides": overrides,
        "resolved": {
            "scenario": snapshot(scenario),
            "solver": snapshot(solver),
            "sweep": snapshot(sweep),
        },
    }
    result = run_sweep(sweep, scenario, solver, parallel=args.parallel)
    write_outputs(Path(args.out), result, manifest)
    print(summary_table(result.parameter, result.rows))
    return EXIT_OK


def validate_command(args) -> int:
    _configs(args)
    print(f"{args.config or 'defaults'}: OK")
    return EXIT_OK


def sweep_list_command(args) -> int:
    (_, _, sweep), _ = _configs(args)
    for value in sweep.values:
        for scheme in sweep.schemes:
            print(f"{sweep.swept_parameter.name}={value:g}\t{scheme.name}\t{sweep.n_trials} trials")
    return EXIT_OK


def report_command(args) -> int:
    if not Path(args.db).is_file():
        logger.error("No trial database at %s", args.db)
        return EXIT_FAILURE
    with RecordStore(args.db, TrialRecord) as store:
        records = store.records()
    if not records:
        logger.error("%s holds no trial records", args.db)
        return EXIT_FAILURE
    parameter = SweptParameter[args.parameter] if args.parameter else SweptParameter.P_ST
    print(summary_table(parameter, regroup(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risjam", description="RIS-assisted monitoring and jamming Monte Carlo simulator."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", type=Path, default=None, help="TOML configuration file")
        p.add_argument("--seed", type=int, default=None, help="override sweep.base_seed")
        p.add_argument("--trials", type=int, default=None, help="override sweep.n_trials")
        p.add_argument("--schemes", default=None, help="comma separated scheme names")
        return p

    run = with_config(commands.add_parser("run", help="run a sweep and write results"))
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    run.add_argument("--parallel", type=int, default=1, help="worker processes")
    run.set_defaults(func=run_command)

    validate = with_config(commands.add_parser("validate", help="check a configuration"))
    validate.set_defaults(func=validate_command)

    listing = with_config(commands.add_parser("sweep-list", help="list sweep points"))
    listing.set_defaults(func=sweep_list_command)

    report = commands.add_parser("report", help="re-aggregate a stored run")
    report.add_argument("--db", type=Path, required=True, help="trials.sqlite of a run")
    report.add_argument(
        "--parameter",
        choices=[p.name for p in SweptParameter],
        default=None,
        help="label for the sweep column",
    )
    report.set_defaults(func=report_command)
    return parser


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error("%s", e)
        print(e, file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        logger.critical("risjam %s failed", args.command, exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
