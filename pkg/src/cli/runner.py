"""
Command dispatch for the pepa-psni tool.

``run`` loads a model, executes one command and returns the exit status
together with the text to print. Every toolkit error is turned into a
diagnostic and an exit status here; nothing escapes to the caller.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from cli import formatters
from core.ctmc import build_generator, steady_state
from core.exceptions import ConfigError, InputError, InternalError, ModelParseError, ResourceError
from core.json_export import ResultExporter
from core.lumping import coarsest_lumpable_partition
from core.models import Constant, ModelEnv
from core.parser import load_model, render_model
from core.security import PsniMethod, check_against_attacker, check_psni, low_view_report
from core.semantics import derive_graph
from core.validators import validate_env
from utils.constants import (
    DEFAULT_MAX_STATES, EXIT_INPUT_ERROR, EXIT_OK, EXIT_PSNI_FAILS, EXIT_RESOURCE_ERROR, TAU
)

logger = logging.getLogger(__name__)


class Command(Enum):
    PARSE = "parse"
    GRAPH = "graph"
    CTMC = "ctmc"
    STEADY = "steady"
    LUMP = "lump"
    CHECK = "check"
    REPORT = "report"
    ATTACK = "attack"


class OutputFormat(Enum):
    TEXT = "text"
    JSON = "json"
    DOT = "dot"


class IgnoredSet(Enum):
    """Action types whose own-class rates the lump command ignores."""
    TAU = "tau"
    HIGH_TAU = "high,tau"

    @classmethod
    def parse(cls, text: str) -> "IgnoredSet":
        parts = frozenset(p.strip() for p in text.split(",") if p.strip())
        if parts == {TAU}:
            return cls.TAU
        if parts == {"high", TAU}:
            return cls.HIGH_TAU
        raise ConfigError(f"--ignored must be 'tau' or 'high,tau', got {text!r}")


DOT_COMMANDS = {Command.GRAPH, Command.LUMP}


@dataclass
class RunConfig:
    """One invocation of the tool."""
    input_path: Path
    command: Command
    high_override: Optional[List[str]] = None
    max_states: int = DEFAULT_MAX_STATES
    method: PsniMethod = PsniMethod.BOTH
    output_format: OutputFormat = OutputFormat.TEXT
    ignored: IgnoredSet = IgnoredSet.TAU
    attacker: Optional[str] = None
    high_contrast: bool = False
    output_path: Optional[Path] = None

    def __post_init__(self):
        self.input_path = Path(self.input_path)
        if self.output_path is not None:
            self.output_path = Path(self.output_path)
        if self.max_states < 1:
            raise ConfigError(f"max_states must be at least 1, got {self.max_states}")
        if self.output_format is OutputFormat.DOT and self.command not in DOT_COMMANDS:
            raise ConfigError(f"dot output is not available for the {self.command.value} command")
        if self.command is Command.ATTACK and not self.attacker:
            raise ConfigError("the attack command needs --attacker")
        if self.high_override is not None and TAU in self.high_override:
            raise ConfigError(f"'{TAU}' cannot be declared high")


Document = Callable[[], Dict]
Text = Callable[[], str]


@dataclass
class _Context:
    cfg: RunConfig
    env: ModelEnv
    exporter: ResultExporter = field(default_factory=ResultExporter)

    def finish(self, status: int, document: Document, text: Text) -> Tuple[int, str]:
        """
        Render a command result in the requested format.

        The JSON document is also written to ``output_path`` when one is set.
        """
        data = None
        if self.cfg.output_path is not None:
            data = document()
            if not self.exporter.export_to_file(data, self.cfg.output_path):
                raise ConfigError(f"cannot write {self.cfg.output_path}")
        if self.cfg.output_format is OutputFormat.JSON:
            return status, self.exporter.dumps(data if data is not None else document())
        return status, text()


def _cmd_parse(ctx: _Context) -> Tuple[int, str]:
    return ctx.finish(
        EXIT_OK,
        lambda: ctx.exporter.model_to_dict(ctx.env),
        lambda: render_model(ctx.env).rstrip("\n"),
    )


def _cmd_graph(ctx: _Context) -> Tuple[int, str]:
    g = derive_graph(ctx.env, max_states=ctx.cfg.max_states)
    if ctx.cfg.output_format is OutputFormat.DOT:
        text = partial(formatters.format_graph_dot, g, ctx.env, high_contrast=ctx.cfg.high_contrast)
    else:
        text = partial(formatters.format_graph_text, g)
    return ctx.finish(EXIT_OK, lambda: ctx.exporter.graph_to_dict(g), text)


def _cmd_ctmc(ctx: _Context) -> Tuple[int, str]:
    g = derive_graph(ctx.env, max_states=ctx.cfg.max_states)
    q = build_generator(g)
    return ctx.finish(
        EXIT_OK,
        lambda: ctx.exporter.generator_to_dict(q, g.labels()),
        lambda: formatters.format_generator_text(q, g.labels()),
    )


def _cmd_steady(ctx: _Context) -> Tuple[int, str]:
    g = derive_graph(ctx.env, max_states=ctx.cfg.max_states)
    pi = steady_state(build_generator(g))
    return ctx.finish(
        EXIT_OK,
        lambda: ctx.exporter.steady_state_to_dict(pi, g.labels()),
        lambda: formatters.format_steady_text(pi, g.labels()),
    )


def _cmd_lump(ctx: _Context) -> Tuple[int, str]:
    g = derive_graph(ctx.env, max_states=ctx.cfg.max_states)
    ignored: FrozenSet[str] = frozenset({TAU})
    if ctx.cfg.ignored is IgnoredSet.HIGH_TAU:
        ignored |= ctx.env.high
    partition = coarsest_lumpable_partition(g, ignored)
    if ctx.cfg.output_format is OutputFormat.DOT:
        text = partial(
            formatters.format_graph_dot, g, ctx.env,
            partition=partition, high_contrast=ctx.cfg.high_contrast,
        )
    else:
        text = partial(formatters.format_partition_text, partition, g.labels(), sorted(ignored))
    return ctx.finish(
        EXIT_OK,
        lambda: ctx.exporter.partition_to_dict(partition, g.labels(), sorted(ignored)),
        text,
    )


def _cmd_check(ctx: _Context) -> Tuple[int, str]:
    verdict = check_psni(ctx.env, ctx.cfg.method, ctx.cfg.max_states)
    return ctx.finish(
        EXIT_OK if verdict.holds else EXIT_PSNI_FAILS,
        lambda: ctx.exporter.verdict_to_dict(verdict),
        lambda: formatters.format_verdict_text(verdict),
    )


def _cmd_report(ctx: _Context) -> Tuple[int, str]:
    report = low_view_report(ctx.env, ctx.cfg.max_states)
    return ctx.finish(
        EXIT_OK,
        lambda: ctx.exporter.report_to_dict(report),
        lambda: formatters.format_report_text(report),
    )


def _cmd_attack(ctx: _Context) -> Tuple[int, str]:
    name = ctx.cfg.attacker
    ctx.env.lookup(name)
    verdict = check_against_attacker(ctx.env, Constant(name), ctx.cfg.max_states)
    return ctx.finish(
        EXIT_OK if verdict.holds else EXIT_PSNI_FAILS,
        lambda: ctx.exporter.attack_to_dict(verdict),
        lambda: formatters.format_attack_text(verdict),
    )


_COMMANDS: Dict[Command, Callable[[_Context], Tuple[int, str]]] = {
    Command.PARSE: _cmd_parse,
    Command.GRAPH: _cmd_graph,
    Command.CTMC: _cmd_ctmc,
    Command.STEADY: _cmd_steady,
    Command.LUMP: _cmd_lump,
    Command.CHECK: _cmd_check,
    Command.REPORT: _cmd_report,
    Command.ATTACK: _cmd_attack,
}


def _error_output(cfg: RunConfig, kind: str, message: str,
                  diagnostics: Optional[List[str]] = None) -> str:
    if cfg.output_format is OutputFormat.JSON:
        data = {"error": kind, "message": message}
        if diagnostics is not None:
            data["diagnostics"] = diagnostics
        return json.dumps(data, indent=2, ensure_ascii=False)
    if diagnostics:
        return "\n".join([f"error: {message.splitlines()[0]}"] + diagnostics)
    return f"error: {message}"


def _load(cfg: RunConfig) -> ModelEnv:
    env = load_model(cfg.input_path)
    if cfg.high_override is None:
        return env
    env = env.with_high(cfg.high_override)
    is_valid, diagnostics = validate_env(env)
    if not is_valid:
        raise ModelParseError(diagnostics)
    return env


def run(cfg: RunConfig) -> Tuple[int, str]:
    """
    Execute one command.

    Returns:
        Tuple of (exit_status, output_text); 0 success or PSNI holds,
        1 PSNI fails, 2 input error, 3 resource, solver or internal error
    """
    try:
        return _COMMANDS[cfg.command](_Context(cfg=cfg, env=_load(cfg)))
    except FileNotFoundError:
        logger.error(f"File not found: {cfg.input_path}")
        return EXIT_INPUT_ERROR, _error_output(cfg, "input", f"file not found: {cfg.input_path}")
    except OSError as e:
        logger.error(f"Cannot read {cfg.input_path}: {e}")
        return EXIT_INPUT_ERROR, _error_output(cfg, "input", f"cannot read {cfg.input_path}: {e}")
    except ModelParseError as e:
        logger.error(f"Model rejected: {cfg.input_path}")
        return EXIT_INPUT_ERROR, _error_output(
            cfg, "input", str(e), [str(d) for d in e.diagnostics]
        )
    except InputError as e:
        logger.error(f"{cfg.command.value} failed: {e}")
        return EXIT_INPUT_ERROR, _error_output(cfg, "input", str(e))
    except ResourceError as e:
        logger.error(f"{cfg.command.value} failed: {e}")
        return EXIT_RESOURCE_ERROR, _error_output(cfg, "resource", str(e))
    except InternalError as e:
        logger.error(f"{cfg.command.value} failed: {e}")
        return EXIT_RESOURCE_ERROR, _error_output(cfg, "internal", f"internal error: {e}")
    except Exception as e:
        logger.exception(f"Unexpected failure in {cfg.command.value}")
        return EXIT_RESOURCE_ERROR, _error_output(cfg, "internal", f"internal error: {e}")
