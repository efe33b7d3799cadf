#!/usr/bin/env python3
"""
pepa-psni - Main Application Entry Point

Command-line toolkit for PEPA models: derivation graphs, underlying CTMCs,
lumpable bisimilarity and persistent stochastic non-interference checks.
"""

import argparse
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import List, Optional

from cli.runner import Command, IgnoredSet, OutputFormat, RunConfig, run
from core.exceptions import ConfigError
from core.security import PsniMethod
from utils.config import load_config_file, resolve_max_states
from utils.constants import (
    APP_NAME, APP_VERSION, DEFAULT_LOG_LEVEL, DEFAULT_MAX_STATES, EXIT_INPUT_ERROR, LOG_BACKUP_COUNT,
    LOG_FORMAT, LOG_MAX_SIZE, MAX_STATES_ENV_VAR
)

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Check persistent stochastic non-interference of PEPA models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    parser.add_argument("command", choices=[c.value for c in Command], help="operation to run")
    parser.add_argument("input", help="path of the .pepa model")
    parser.add_argument("--high", help="comma-separated high action types (overrides the model)")
    parser.add_argument(
        "--max-states", type=int, default=None,
        help=f"state-space limit (default {DEFAULT_MAX_STATES}, or ${MAX_STATES_ENV_VAR})",
    )
    parser.add_argument("--method", choices=[m.value for m in PsniMethod], default=None,
                        help="PSNI decision method for 'check' (default both)")
    parser.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat],
                        default=None, help="output format (default text)")
    parser.add_argument("--json", action="store_true", help="shorthand for --format json")
    parser.add_argument("--output", help="also write the result as a JSON document to this file")
    parser.add_argument("--ignored", default=None,
                        help="ignored set for 'lump': 'tau' or 'high,tau' (default tau)")
    parser.add_argument("--attacker", help="constant used as high attacker by 'attack'")
    parser.add_argument("--high-contrast", action="store_true", help="accessible DOT colours")
    parser.add_argument("--config", help="YAML file with default option values")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None,
                        help=f"logging level (default {DEFAULT_LOG_LEVEL})")
    parser.add_argument("--log-file", help="also write logs to this rotating file")
    return parser


def setup_logging(level: str, log_file: Optional[str] = None):
    """Configure the root logger; stdout stays reserved for command output."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(RotatingFileHandler(
            log_file, maxBytes=LOG_MAX_SIZE, backupCount=LOG_BACKUP_COUNT, encoding="utf-8"
        ))
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, handlers=handlers, force=True)


def _split_actions(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge command-line arguments with the optional config file.

    Raises:
        ConfigError: invalid option values
    """
    file_config = load_config_file(args.config) if args.config else {}

    output_format = args.output_format or file_config.get("format", OutputFormat.TEXT.value)
    if args.json:
        output_format = OutputFormat.JSON.value
    method = args.method or file_config.get("method", PsniMethod.BOTH.value)
    ignored = args.ignored or file_config.get("ignored", IgnoredSet.TAU.value)

    high = None
    if args.high is not None:
        high = _split_actions(args.high)
    elif "high" in file_config:
        configured = file_config["high"]
        high = _split_actions(configured) if isinstance(configured, str) else [str(a) for a in configured]

    try:
        return RunConfig(
            input_path=args.input,
            command=Command(args.command),
            high_override=high,
            max_states=resolve_max_states(args.max_states, file_config, DEFAULT_MAX_STATES),
            method=PsniMethod(method),
            output_format=OutputFormat(output_format),
            ignored=IgnoredSet.parse(str(ignored)),
            attacker=args.attacker,
            high_contrast=args.high_contrast,
            output_path=args.output,
        )
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    try:
        file_level = None
        if args.config:
            file_level = load_config_file(args.config).get("log_level")
        level = (args.log_level or file_level or DEFAULT_LOG_LEVEL).upper()
        if level not in LOG_LEVELS:
            raise ConfigError(f"unknown log level {level!r}")
        setup_logging(level, args.log_file)
        cfg = build_run_config(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    logger.info(f"{APP_NAME} {APP_VERSION}: {cfg.command.value} {cfg.input_path}")
    status, output = run(cfg)
    if output:
        print(output)
    return status


if __name__ == "__main__":
    sys.exit(main())
