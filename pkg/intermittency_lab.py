#!/usr/bin/env python3
"""
Weak-Intermittency Laboratory
Command-line entry point: bounds, simulate, renewal and classify subcommands
driven by one TOML run configuration.
"""

import argparse
import logging
import secrets
import sys
from pathlib import Path
from typing import List, Optional

from intermittency.common.command_executor import COMMANDS, CommandExecutor
from intermittency.common.config_loader import ConfigLoader, load_env_defaults
from intermittency.common.errors import ConfigError, LabError
from intermittency.common.result_writers import ResultWriter

logger = logging.getLogger("intermittency")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Weak-intermittency laboratory for parabolic SPDEs")
    parser.add_argument("command", choices=COMMANDS, help="Subcommand to run")
    parser.add_argument("--config", "-c", help="TOML run configuration (path or preset name)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a configuration field (repeatable)")
    parser.add_argument("--out", "-o", help="Output directory")
    parser.add_argument("--seed", type=int, help="Unsigned 64-bit master seed")
    parser.add_argument("--threads", "-t", type=int, help="Worker processes for the simulator")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")
    return parser


def resolve_seed(command: str, cli_seed: Optional[int], config_seed: Optional[int]) -> Optional[int]:
    """CLI flag, then config field; simulate draws and prints a fresh one when neither is set"""
    seed = cli_seed if cli_seed is not None else config_seed
    if seed is not None and not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", field="--seed")
    if seed is None and command == "simulate":
        seed = secrets.randbits(64)
        print(f"No seed given; using seed {seed}")
    return seed


def report_error(exc: LabError, out_dir: Optional[Path]) -> int:
    """One-line error on stderr plus error.json when an output directory is known"""
    print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
    if out_dir is not None:
        try:
            ResultWriter(str(out_dir)).write_json("error", exc.to_dict(), force=True)
        except OSError as write_exc:
            logger.warning("could not save error document: %s", write_exc)
    return exc.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir: Optional[Path] = Path(args.out) if args.out else None
    try:
        env = load_env_defaults()
        logging.basicConfig(level=args.log_level or env.log_level,
                            format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        loader = ConfigLoader()
        config = loader.load(args.config, tuple(args.overrides))
        if out_dir is None:
            out_dir = Path(config.optional("output.directory", str, "a directory path", env.out_dir))
        threads = args.threads if args.threads is not None else env.threads
        if threads < 1:
            raise ConfigError("thread count must be >= 1", field="--threads")
        if args.command == "classify" and "sigma" not in config.data:
            config.generator()
        else:
            config.validate()
        seed = resolve_seed(args.command, args.seed, config.seed)

        writer = ResultWriter(str(out_dir), config.formats())
        executor = CommandExecutor(config, writer, seed, threads)
        executor.execute(args.command)
        for path in executor.written:
            print(f"   saved {path}")
        return 0
    except LabError as exc:
        return report_error(exc, out_dir)
    except KeyboardInterrupt:
        print("\nRun interrupted by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
