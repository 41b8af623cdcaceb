"""Command-line interface.

    ghostsim run <scenario-file> [--seed N] [--method mc|analytic|both]
                 [--out DIR] [--threads N]
    ghostsim presets list | dump <name>
    ghostsim validate <scenario-file>

Exit codes: 0 success, 2 configuration error, 3 numerical or
degenerate-statistics error, 4 I/O error. --threads falls back to the
GHOSTSIM_THREADS environment variable, then to 1.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError, GhostSimError
from .runner import run_scenario
from .output import export_results
from .scenario import dump_scenario, parse_scenario

__all__ = ["main"]

_METHOD_ALIASES = {"mc": "montecarlo", "montecarlo": "montecarlo",
                   "analytic": "analytic", "both": "both"}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostsim",
        description="Lensless ghost-imaging and photon-coincidence simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="path to a .scenario file")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed (unsigned 64-bit)")
    run.add_argument("--method", choices=sorted(set(_METHOD_ALIASES)),
                     default=None, help="override the computation method")
    run.add_argument("--out", default=None, help="override the output directory")
    run.add_argument("--threads", type=int, default=None,
                     help="worker threads (default: GHOSTSIM_THREADS or 1)")

    presets = sub.add_parser("presets", help="list or print bundled scenarios")
    presets.add_argument("action", choices=("list", "dump"))
    presets.add_argument("name", nargs="?", default=None)

    validate = sub.add_parser("validate", help="parse and check a scenario file")
    validate.add_argument("scenario", help="path to a .scenario file")
    return parser


def _preset_dir():
    return resources.files("ghostsim") / "presets"


def preset_names() -> list:
    return sorted(p.name[:-len(".scenario")]
                  for p in _preset_dir().iterdir()
                  if p.name.endswith(".scenario"))


def preset_text(name: str) -> str:
    entry = _preset_dir() / f"{name}.scenario"
    if not entry.is_file():
        raise ConfigError(
            f"no preset named {name!r}; available: {', '.join(preset_names())}"
        )
    return entry.read_text(encoding="utf-8")


def _resolve_threads(cli_value) -> int:
    if cli_value is not None:
        n = cli_value
    else:
        env = os.environ.get("GHOSTSIM_THREADS", "").strip()
        if env:
            try:
                n = int(env)
            except ValueError:
                raise ConfigError(
                    f"GHOSTSIM_THREADS must be an integer, got {env!r}")
        else:
            n = 1
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def _cmd_run(args) -> int:
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        threads = _resolve_threads(args.threads)
        cfg = parse_scenario(text)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.method is not None:
            overrides["method"] = _METHOD_ALIASES[args.method]
        if args.out is not None:
            overrides["output"] = args.out
        if overrides:
            # re-validate the overridden config through the one validator
            cfg = parse_scenario(dump_scenario(replace(cfg, **overrides)))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        profiles, report = run_scenario(cfg, workers=threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GhostSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, ZeroDivisionError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        written = export_results(profiles, report, cfg.output)
        _write_resolved(cfg, Path(cfg.output))
    except OSError as exc:
        print(f"I/O error writing results: {exc}", file=sys.stderr)
        return EXIT_IO

    for path in written:
        print(path)
    print(f"runtime: {report.runtime_seconds:.2f} s")
    for key, value in sorted(report.to_json_dict().items()):
        if value is not None and value != []:
            print(f"{key}: {value}")
    return EXIT_OK


def _write_resolved(cfg, out_dir: Path) -> None:
    with open(out_dir / "scenario.resolved", "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(dump_scenario(cfg))


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(name)
        return EXIT_OK
    if not args.name:
        print("error: presets dump requires a name", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sys.stdout.write(preset_text(args.name))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_scenario(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"OK: kind={cfg.kind} method={cfg.method} seed={cfg.seed}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "presets":
        return _cmd_presets(args)
    return _cmd_validate(args)


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
