"""Command-line front end: ``twophoton run|validate|materials``."""

from __future__ import annotations

import argparse
import json
import sys

from .optics import OutOfRangeError, load_materials, materials_version
from .runner import (EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, NUMERICAL_ERRORS, ConfigError,
                     RunConfig, run_experiment)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twophoton",
                                     description="Run two-photon interference and barrier experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--output-dir", default=None, help="overrides output.directory")
    run.add_argument("--workers", type=int, default=1, help="threads for scan points")

    val = sub.add_parser("validate", help="schema-check a config without running it")
    val.add_argument("config")

    mat = sub.add_parser("materials", help="inspect the materials data file")
    mat.add_argument("action", choices=["list"])
    return parser


def _load(path) -> RunConfig:
    return RunConfig.from_file(path)


def _err(kind: str, exc: BaseException) -> None:
    print(f"error ({kind}): {exc}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
    except OSError as exc:
        _err("io", exc)
        return EXIT_IO
    except ConfigError as exc:
        _err("config", exc)
        return EXIT_CONFIG
    if args.workers < 1:
        _err("config", ValueError("--workers must be >= 1"))
        return EXIT_CONFIG
    try:
        result = run_experiment(cfg, args.output_dir, args.workers)
    except OSError as exc:
        _err("io", exc)
        return EXIT_IO
    except NUMERICAL_ERRORS as exc:
        _err("numerical", exc)
        return EXIT_NUMERICAL
    except (ConfigError, OutOfRangeError, KeyError) as exc:
        _err("config", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        # engine preconditions violated by the configured parameters
        _err("config", exc)
        return EXIT_CONFIG
    for path in result.files:
        print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except OSError as exc:
        _err("io", exc)
        return EXIT_IO
    except ConfigError as exc:
        _err("config", exc)
        return EXIT_CONFIG
    print(f"{args.config}: ok ({cfg.experiment})")
    return EXIT_OK


def cmd_materials(args) -> int:
    try:
        table = load_materials()
        version = materials_version()
    except OSError as exc:
        _err("io", exc)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        _err("config", exc)
        return EXIT_CONFIG
    rows = [{"name": m.name, "range_nm": [m.valid_range[0] * 1e9, m.valid_range[1] * 1e9]}
            for m in table.values()]
    print(json.dumps({"version": version, "materials": rows}, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": cmd_run, "validate": cmd_validate, "materials": cmd_materials}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
