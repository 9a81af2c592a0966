"""Command line entry point: ``ltecoex run|validate|schema|presets``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path
from typing import List, Optional

from . import __version__
from .config import EXPERIMENTS, ConfigError, RunConfig, json_schema, parse_config
from .experiments import run_experiment

OUT_ENV = "LTECOEX_OUT"

log = logging.getLogger("ltecoex")


def preset_path(name: str) -> Path:
    return Path(str(resources.files("ltecoex") / "presets" / f"{name}.toml"))


def load_target(target: str) -> RunConfig:
    """A config file path, or the name of a shipped preset."""
    path = Path(target)
    if path.is_file():
        return parse_config(path)
    if target in EXPERIMENTS:
        return parse_config(preset_path(target))
    raise ConfigError(f"'{target}' is neither a config file nor a preset ({', '.join(EXPERIMENTS)})")


def apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    engine = {}
    if args.seed is not None:
        engine["seed_base"] = args.seed
    if args.drops is not None:
        engine["drops"] = args.drops
    if args.duration_ms is not None:
        engine["duration_ms"] = args.duration_ms
    if args.workers is not None:
        engine["workers"] = args.workers
    return cfg.with_overrides(engine=engine) if engine else cfg


def output_dir(cfg: RunConfig, flag: Optional[str]) -> Path:
    # flag beats environment beats config
    return Path(flag or os.environ.get(OUT_ENV) or cfg.output.directory)


def cmd_run(args) -> int:
    cfg = apply_flags(load_target(args.target), args)
    if not cfg.experiment:
        raise ConfigError("experiment: the configuration does not name an experiment")
    out = output_dir(cfg, args.out)
    files = run_experiment(cfg.experiment, cfg, out)
    for f in files:
        print(f)
    return 0


def cmd_validate(args) -> int:
    cfg = load_target(args.target)
    print(f"ok: {args.target} (experiment={cfg.experiment or '-'}, digest={cfg.digest()[:12]})")
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(json_schema(), indent=2))
    return 0


def cmd_presets(args) -> int:
    for name in EXPERIMENTS:
        print(f"{name}\t{preset_path(name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ltecoex", description="LTE/WLAN co-existence simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or config file")
    run.add_argument("target", help="preset name or path to a TOML config")
    run.add_argument("--seed", type=int, help="seed of drop 0 (engine.seed_base)")
    run.add_argument("--drops", type=int, help="number of drops per run kind")
    run.add_argument("--duration-ms", type=int, help="simulated time per drop")
    run.add_argument("--workers", type=int, help="parallel drop processes")
    run.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and output.directory)")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("target")
    val.set_defaults(func=cmd_validate)

    sub.add_parser("schema", help="print the config JSON schema").set_defaults(func=cmd_schema)
    sub.add_parser("presets", help="list shipped presets").set_defaults(func=cmd_presets)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        log.debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
