"""Command-line interface: ``dwtunnel {run,scan,plot,validate}``.

Exit status: 0 success, 1 invalid input or usage, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, NumericalFailure
from .experiment import run_simulation, scan_epsilon
from .io import (
    OutputBundle,
    format_number,
    load_config,
    render_plot,
    write_scan,
    write_snapshot,
    write_timeseries,
)

logger = logging.getLogger("dwtunnel")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for numerical failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _prepare_outdir(out: Path, force: bool, names: Sequence[str]):
    out.mkdir(parents=True, exist_ok=True)
    clashes = [n for n in names if (out / n).exists()]
    if clashes and not force:
        raise ConfigurationError(
            f"{out} already contains {', '.join(clashes)}; pass --force to overwrite"
        )


def _snapshot_name(tau: float) -> str:
    return f"snapshot_tau_{format_number(tau)}.csv"


def cmd_run(args) -> int:
    config = load_config(args.config)
    out = Path(args.out)
    snap_names = [_snapshot_name(t) for t in config.snapshot_times()]
    plot_names = ["occupancy.svg", "mean_x.svg", "energy.svg"]
    _prepare_outdir(out, args.force, ["timeseries.csv", "metrics.json", *snap_names, *plot_names])

    record = run_simulation(config)
    grid = record.grid
    pot = config.potential()
    bundle = OutputBundle(out)
    bundle.timeseries_path = write_timeseries(record, out / "timeseries.csv")
    for tau, wf in record.snapshots.items():
        bundle.snapshot_paths.append(write_snapshot(wf, grid, pot, wf.tau, out / _snapshot_name(tau)))
    ts = bundle.timeseries_path
    bundle.plot_paths += [
        render_plot(ts, ["prob_left", "prob_right"], out / "occupancy.svg", title="Well occupation"),
        render_plot(ts, ["mean_x"], out / "mean_x.svg", title="Mean coordinate"),
        render_plot(ts, ["energy_total", "barrier_height"], out / "energy.svg", title="Energy"),
    ]
    m = record.metrics
    summary = {
        "epsilon": config.epsilon,
        "max_prob_right": m.max_prob_right,
        "first_passage_tau": m.first_passage_tau,
        "transfer_cycles": m.transfer_cycles,
        "final_prob_left": record.samples[-1].prob_left,
        "norm_drift": float(np.max(np.abs(record.column("norm") - 1.0))),
        "config": config.to_dict(),
    }
    (out / "metrics.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"epsilon            {format_number(config.epsilon)}")
    print(f"max_prob_right     {format_number(m.max_prob_right)}")
    print(f"first_passage_tau  {format_number(m.first_passage_tau) or '-'}")
    print(f"transfer_cycles    {m.transfer_cycles}")
    print(f"norm_drift         {format_number(summary['norm_drift'])}")
    print(f"wall_time_s        {record.wall_time:.1f}")
    print(f"output             {out}")
    return EXIT_OK


def _epsilons(args) -> List[float]:
    if args.epsilons:
        try:
            return [float(e) for e in args.epsilons.split(",") if e.strip()]
        except ValueError:
            raise ConfigurationError(f"cannot parse --epsilons {args.epsilons!r}") from None
    if args.eps_from is None or args.eps_to is None or args.eps_steps is None:
        raise ConfigurationError("give either --epsilons or all of --eps-from/--eps-to/--eps-steps")
    if args.eps_steps < 1:
        raise ConfigurationError("--eps-steps must be >= 1")
    return [float(e) for e in np.linspace(args.eps_from, args.eps_to, args.eps_steps)]


def cmd_scan(args) -> int:
    config = load_config(args.config)
    eps = _epsilons(args)
    out = Path(args.out)
    _prepare_outdir(out, args.force, ["scan.csv"])
    records = scan_epsilon(config, eps, jobs=args.jobs)
    path = write_scan(records, out / "scan.csv")
    failed = sum(not r.ok for r in records)
    print(f"{len(records)} scan points written to {path} ({failed} failed)")
    return EXIT_OK


def cmd_plot(args) -> int:
    columns = [c for c in args.columns.split(",") if c]
    try:
        render_plot(args.csv, columns, args.out, title=args.title or "")
    except KeyError as exc:
        raise ConfigurationError(exc.args[0]) from None
    except (OSError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None
    print(args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    config = load_config(args.config)
    print(json.dumps(config.to_dict(), sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dwtunnel", description="Tunneling in a time-periodic double well.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="single simulation")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--force", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scan", help="scan the drive frequency epsilon")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--eps-from", type=float)
    s.add_argument("--eps-to", type=float)
    s.add_argument("--eps-steps", type=int)
    s.add_argument("--epsilons", help="comma-separated list, overrides --eps-*")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_scan)

    pl = sub.add_parser("plot", help="SVG line chart of CSV columns")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--columns", required=True, help="comma-separated column names")
    pl.add_argument("--out", required=True)
    pl.add_argument("--title")
    pl.set_defaults(func=cmd_plot)

    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
