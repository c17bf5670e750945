"""Command-line entry point ``pulseopt``.

Subcommands
-----------
run     execute one configured optimization
sweep   run every value of the configured sweep
check   fast numerical invariant suite
emit    write plot tables from a saved run

Exit status is 0 on success, 2 for invalid input and 1 for runtime
failures. Errors are reported on stderr as one JSON line
``{"error": {"type": ..., "message": ..., "details": [...]}}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


def _error(kind: str, message: str, details=None, code: int = EXIT_RUNTIME) -> int:
    payload = {"error": {"type": kind, "message": message, "details": list(details or [])}}
    print(json.dumps(payload), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulseopt", description="Spectral-pulse optimization runs.")
    parser.add_argument("--version", action="version", version=f"pulseopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", metavar="PATH", required=config_required, help="YAML run configuration")
        p.add_argument("--seed", metavar="N", type=int, default=None, help="override optimizer.seed")
        p.add_argument("--out", metavar="DIR", default=None, help="output directory")

    common(sub.add_parser("run", help="execute one configured optimization"))
    p = sub.add_parser("sweep", help="run every value of the configured sweep")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common(sub.add_parser("check", help="fast numerical invariant suite"), config_required=False)
    p = sub.add_parser("emit", help="write plot tables from a saved run")
    common(p, config_required=False)
    p.add_argument("--run", metavar="DIR", required=True, help="run directory")
    p.add_argument("--kind", default="all", help="series name or 'all'")
    return parser


def _cmd_run(args) -> int:
    from .runner import RunConfig, run
    cfg = RunConfig.from_file(args.config).with_overrides(seed=args.seed)
    rec = run(cfg, out_dir=args.out)
    print(json.dumps({"status": rec.status, "directory": str(rec.directory),
                      "n_iterations": rec.n_iterations, "wall_clock_s": rec.wall_clock}))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .runner import RunConfig, run_sweep
    if args.jobs < 1:
        return _error("ConfigError", "--jobs must be >= 1", code=EXIT_INPUT)
    cfg = RunConfig.from_file(args.config).with_overrides(seed=args.seed)
    records = run_sweep(cfg, out_dir=args.out, jobs=args.jobs)
    print(json.dumps({"status": "ok", "runs": [str(r.directory) for r in records]}))
    return EXIT_OK


def _cmd_check(args) -> int:
    from .checks import run_checks
    ok = run_checks(seed=0 if args.seed is None else args.seed)
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_emit(args) -> int:
    from .runner import RunRecord, emit_plot_data
    run_dir = Path(args.run)
    try:
        rec = RunRecord.load(run_dir)
    except FileNotFoundError as exc:
        return _error("InputError", str(exc), code=EXIT_INPUT)
    try:
        paths = emit_plot_data(rec, args.kind, args.out or run_dir / "plots")
    except KeyError as exc:
        return _error("InputError", exc.args[0], code=EXIT_INPUT)
    print(json.dumps({"status": "ok", "files": [str(p) for p in paths]}))
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "check": _cmd_check, "emit": _cmd_emit}


def main(argv=None) -> int:
    from .runner import ConfigError, RunFailed
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; keep its status for --help/--version
        if exc.code in (0, None):
            return EXIT_OK
        return _error("UsageError", "invalid command line", code=EXIT_INPUT)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        return _error("ConfigError", "invalid configuration", exc.errors, code=EXIT_INPUT)
    except RunFailed as exc:
        where = str(exc.record.directory) if exc.record is not None and exc.record.directory else None
        return _error("RunFailed", str(exc), [f"partial record: {where}"] if where else [])
    except Exception as exc:  # noqa: BLE001 - last-resort machine-readable report
        return _error(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
