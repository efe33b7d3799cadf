"""
Semantic validation of parsed models.

This module provides the diagnostics record shared with the parser and the
well-formedness checks that need the whole model: constant binding,
duplicate definitions, sequential/model component stratification, guarded
recursion and the warnings about the high action partition.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

import networkx as nx

from core.models import (
    Choice, Constant, Cooperation, Hiding, ModelEnv, Prefix, ProcessTerm, subterms
)

logger = logging.getLogger(__name__)

Position = Tuple[int, int]


class ValidationSeverity(Enum):
    """Diagnostic severity levels."""
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class ParseDiagnostic:
    """A positioned message about a model source."""
    line: int
    column: int
    message: str
    severity: ValidationSeverity = ValidationSeverity.ERROR

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError(f"diagnostic position must be 1-based, got {self.line}:{self.column}")

    @property
    def is_error(self) -> bool:
        return self.severity == ValidationSeverity.ERROR

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity.value}: {self.message}"


@dataclass
class Definition:
    name: str
    body: ProcessTerm
    position: Position


@dataclass
class ModelOutline:
    """Everything the parser recovered from a source, with positions."""
    definitions: List[Definition] = field(default_factory=list)
    high: List[Tuple[str, Position]] = field(default_factory=list)
    system: Optional[ProcessTerm] = None
    system_position: Position = (1, 1)
    node_positions: Dict[int, Position] = field(default_factory=dict)
    unparsed: Set[str] = field(default_factory=set)


class ModelValidator:
    """Well-formedness checks over a parsed model."""

    def __init__(self):
        self.validation_results: List[ParseDiagnostic] = []
        self._positions: Dict[int, Position] = {}

    def add_result(self, result: ParseDiagnostic):
        self.validation_results.append(result)

    def get_results(self) -> List[ParseDiagnostic]:
        return sorted(self.validation_results, key=lambda d: (d.line, d.column))

    def has_errors(self) -> bool:
        return any(r.is_error for r in self.validation_results)

    def has_warnings(self) -> bool:
        return any(r.severity == ValidationSeverity.WARNING for r in self.validation_results)

    def _error(self, position: Position, message: str):
        self.add_result(ParseDiagnostic(position[0], position[1], message))

    def _warning(self, position: Position, message: str):
        self.add_result(ParseDiagnostic(position[0], position[1], message, ValidationSeverity.WARNING))

    def _where(self, term: ProcessTerm, fallback: Position) -> Position:
        return self._positions.get(id(term), fallback)

    def validate_outline(self, outline: ModelOutline) -> bool:
        """
        Run every semantic check on a parsed model.

        Returns:
            True if no error diagnostic was produced
        """
        self._positions = outline.node_positions
        bodies: Dict[str, ProcessTerm] = {}
        for definition in outline.definitions:
            if definition.name in bodies:
                self._error(definition.position, f"duplicate definition of constant {definition.name}")
                continue
            bodies[definition.name] = definition.body

        if outline.system is not None and not outline.definitions and not outline.unparsed:
            self._error(outline.system_position, "model defines no constants")

        roots: List[Tuple[ProcessTerm, Position]] = [
            (d.body, d.position) for d in outline.definitions
        ]
        if outline.system is not None:
            roots.append((outline.system, outline.system_position))

        high = {name for name, _ in outline.high}
        known = set(bodies) | outline.unparsed
        for term, position in roots:
            self.validate_bindings(term, known, position)
            self.validate_stratification(term, position)
            self.validate_cooperation_sets(term, high, position)

        positions = {d.name: d.position for d in outline.definitions}
        self.validate_guardedness(bodies, positions)
        self.validate_high_usage(outline.high, roots)
        return not self.has_errors()

    def validate_bindings(self, term: ProcessTerm, known: Set[str], fallback: Position) -> bool:
        """Every referenced constant must be defined, possibly by a statement that failed to parse."""
        is_valid = True
        for node in subterms(term):
            if isinstance(node, Constant) and node.name not in known:
                self._error(self._where(node, fallback), f"undefined constant {node.name}")
                is_valid = False
        return is_valid

    def validate_stratification(self, term: ProcessTerm, fallback: Position) -> bool:
        """Cooperation and hiding may not occur beneath a prefix or a choice."""
        is_valid = True
        for node in subterms(term):
            if isinstance(node, Prefix):
                children = [node.continuation]
            elif isinstance(node, Choice):
                children = [node.left, node.right]
            else:
                continue
            for child in children:
                if isinstance(child, (Cooperation, Hiding)):
                    operator = "cooperation" if isinstance(child, Cooperation) else "hiding"
                    self._error(
                        self._where(child, self._where(node, fallback)),
                        f"{operator} may not appear inside a sequential component",
                    )
                    is_valid = False
        return is_valid

    def validate_cooperation_sets(self, term: ProcessTerm, high: set,
                                  fallback: Position) -> bool:
        """Warn about synchronisation on high actions inside the model."""
        for node in subterms(term):
            if isinstance(node, Cooperation):
                shared_high = sorted(node.coop_set & high)
                if shared_high:
                    self._warning(
                        self._where(node, fallback),
                        f"high action(s) {', '.join(shared_high)} used in a cooperation set",
                    )
        return True

    def validate_guardedness(self, bodies: Dict[str, ProcessTerm],
                             positions: Dict[str, Position]) -> bool:
        """Reject constants that reach themselves without passing a prefix."""
        graph = nx.DiGraph()
        graph.add_nodes_from(bodies)
        for name, body in bodies.items():
            for target in _unguarded_constants(body):
                if target in bodies:
                    graph.add_edge(name, target)

        is_valid = True
        for component in nx.strongly_connected_components(graph):
            names = sorted(component)
            cyclic = len(names) > 1 or graph.has_edge(names[0], names[0])
            if cyclic:
                self._error(
                    positions.get(names[0], (1, 1)),
                    f"unguarded recursion through {', '.join(names)}",
                )
                is_valid = False
        return is_valid

    def validate_high_usage(self, high: List[Tuple[str, Position]],
                            roots: List[Tuple[ProcessTerm, Position]]) -> bool:
        """Warn about high actions that never occur in a prefix."""
        occurring = set()
        for term, _ in roots:
            for node in subterms(term):
                if isinstance(node, Prefix):
                    occurring.add(node.activity.action)
        for name, position in high:
            if name not in occurring:
                self._warning(position, f"high action {name} never occurs in the model")
        return True


def _unguarded_constants(term: ProcessTerm) -> List[str]:
    """Constants reachable from term without crossing a prefix."""
    found = []
    stack = [term]
    while stack:
        node = stack.pop()
        if isinstance(node, Constant):
            found.append(node.name)
        elif isinstance(node, (Choice, Cooperation)):
            stack.extend([node.left, node.right])
        elif isinstance(node, Hiding):
            stack.append(node.inner)
    return found


def validate_outline(outline: ModelOutline) -> Tuple[bool, List[ParseDiagnostic]]:
    """
    Validate a parsed model.

    Returns:
        Tuple of (is_valid, diagnostics)
    """
    validator = ModelValidator()
    validator.validate_outline(outline)
    return not validator.has_errors(), validator.get_results()


def validate_env(env: ModelEnv) -> Tuple[bool, List[ParseDiagnostic]]:
    """
    Validate a model built in memory; positions default to 1:1.

    Returns:
        Tuple of (is_valid, diagnostics)
    """
    outline = ModelOutline(
        definitions=[Definition(name, body, (1, 1)) for name, body in env.defs.items()],
        high=[(name, (1, 1)) for name in sorted(env.high)],
        system=env.system,
    )
    validator = ModelValidator()
    is_valid = validator.validate_outline(outline)
    diagnostics = validator.get_results()
    if validator.has_warnings():
        for diagnostic in diagnostics:
            if not diagnostic.is_error:
                logger.warning(f"Model warning: {diagnostic.message}")
    return is_valid, diagnostics
