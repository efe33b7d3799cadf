"""
Recursive-descent parser and canonical printer for the .pepa format.

The parser turns source text into a ModelEnv or a list of positioned
diagnostics; it never raises on bad input. Syntax errors abort only the
current statement: parsing resumes after the next ``;`` so one pass can
report several problems. Semantic checks are delegated to
``core.validators``.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import AbstractSet, List, Optional, Tuple, Union

from core.exceptions import ModelParseError
from core.lexer import Token, TokenType, lex
from core.models import (
    Activity, Choice, Constant, Cooperation, Hiding, ModelEnv, Prefix, ProcessTerm, Rate
)
from core.validators import (
    Definition, ModelOutline, ParseDiagnostic, Position, validate_outline
)
from utils.constants import KEYWORD_HIGH, KEYWORD_SYSTEM, TAU, TOP_SYMBOL

logger = logging.getLogger(__name__)

_IGNORE = {TokenType.WHITESPACE, TokenType.COMMENT}

Expected = Union[TokenType, str, AbstractSet[str]]


class ModelSyntaxError(ValueError):
    """Raised inside the parser; converted to a diagnostic per statement."""

    def __init__(self, message: str, position: Position):
        self.message = message
        self.position = position
        super().__init__(f"{message} at {position[0]}:{position[1]}")


class TokenStream:
    """Two-token lookahead over the significant tokens of a source."""

    def __init__(self, code: str):
        self.code = code
        self.iterator = lex(code)
        self._end = self._end_position(code)
        self._current_token = self._forward()
        self._next_token = self._forward()

    @staticmethod
    def _end_position(code: str) -> Position:
        lines = code.split("\n")
        return len(lines), len(lines[-1]) + 1

    def _forward(self) -> Optional[Token]:
        try:
            token = next(self.iterator)
            while token.token_type in _IGNORE:
                token = next(self.iterator)
            return token
        except StopIteration:
            return None

    def consume(self) -> Token:
        if self._current_token is None:
            raise self.make_error("unexpected end of input")
        token = self._current_token
        self._current_token = self._next_token
        self._next_token = self._forward()
        return token

    @staticmethod
    def _matches(token: Optional[Token], expected: Expected) -> bool:
        if token is None:
            return False
        if isinstance(expected, TokenType):
            return token.token_type is expected
        if isinstance(expected, str):
            return token.token_type is TokenType.SYMBOL and token.text == expected
        return token.text in expected

    def accept(self, expected: Expected) -> Optional[Token]:
        if self._matches(self._current_token, expected):
            return self.consume()
        return None

    def expect(self, expected: Expected, description: Optional[str] = None) -> Token:
        token = self.accept(expected)
        if token is None:
            if description is None:
                description = expected.value if isinstance(expected, TokenType) else f"'{expected}'"
            raise self.make_error(f"expected {description}")
        return token

    def check(self, expected: Expected) -> bool:
        return self._matches(self._current_token, expected)

    def check_next(self, expected: Expected) -> bool:
        return self._matches(self._next_token, expected)

    @property
    def finished_parsing(self) -> bool:
        return self._current_token is None

    @property
    def position(self) -> Position:
        if self._current_token is None:
            return self._end
        return self._current_token.line, self._current_token.column

    def make_error(self, message: str) -> ModelSyntaxError:
        token = self._current_token
        if token is None:
            return ModelSyntaxError(f"{message}, found end of input", self._end)
        return ModelSyntaxError(f"{message}, found '{token.text}'", (token.line, token.column))

    def skip_statement(self):
        """Drop tokens up to and including the next ';'."""
        while self._current_token is not None:
            token = self.consume()
            if token.token_type is TokenType.SYMBOL and token.text == ";":
                return


class _ModelParser:
    """Statement-level driver collecting a ModelOutline."""

    def __init__(self, source: str):
        self.stream = TokenStream(source)
        self.outline = ModelOutline()
        self.diagnostics: List[ParseDiagnostic] = []
        self._seen_definition = False

    def error(self, position: Position, message: str):
        self.diagnostics.append(ParseDiagnostic(position[0], position[1], message))

    def _mark(self, node: ProcessTerm, position: Position) -> ProcessTerm:
        self.outline.node_positions[id(node)] = position
        return node

    def parse(self) -> ModelOutline:
        stream = self.stream
        while not stream.finished_parsing:
            start = stream.position
            try:
                if self.outline.system is not None:
                    raise stream.make_error("unexpected input after the system declaration")
                if stream.check(TokenType.UNKNOWN):
                    raise stream.make_error("unexpected character")
                if stream.check(TokenType.IDENT) and stream.check({KEYWORD_HIGH}):
                    self.parse_header()
                elif stream.check(TokenType.IDENT) and stream.check({KEYWORD_SYSTEM}):
                    self.parse_system()
                elif stream.check(TokenType.CONST):
                    self.parse_definition()
                else:
                    raise stream.make_error("expected a definition, a high declaration or 'system'")
            except ModelSyntaxError as error:
                self.error(error.position, error.message)
                if not stream.finished_parsing and stream.position == start:
                    if stream.consume().text == ";":
                        continue
                stream.skip_statement()
        if self.outline.system is None:
            self.error(stream.position, "missing system declaration")
        return self.outline

    def parse_header(self):
        stream = self.stream
        keyword = stream.consume()
        if self._seen_definition:
            raise ModelSyntaxError(
                "high declarations must precede the definitions", (keyword.line, keyword.column)
            )
        stream.expect("=")
        stream.expect("{")
        names = self.parse_identlist("}", "high")
        stream.expect("}")
        stream.expect(";")
        self.outline.high.extend(names)

    def parse_definition(self):
        stream = self.stream
        name = stream.consume()
        if name.text == TOP_SYMBOL:
            raise ModelSyntaxError(
                f"'{TOP_SYMBOL}' is reserved for the passive rate", (name.line, name.column)
            )
        try:
            stream.expect(":=")
            body = self.parse_term()
            stream.expect(";")
        except ModelSyntaxError:
            self.outline.unparsed.add(name.text)
            raise
        self._seen_definition = True
        self.outline.definitions.append(Definition(name.text, body, (name.line, name.column)))

    def parse_system(self):
        stream = self.stream
        keyword = stream.consume()
        self.outline.system_position = (keyword.line, keyword.column)
        self.outline.system = self.parse_term()
        stream.expect(";")

    def parse_identlist(self, closing: str, operator: str) -> List[Tuple[str, Position]]:
        stream = self.stream
        names: List[Tuple[str, Position]] = []
        if stream.check(closing):
            return names
        while True:
            token = stream.expect(TokenType.IDENT, "an action type")
            if token.text == TAU:
                raise ModelSyntaxError(
                    f"'{TAU}' may not appear in a {operator} set", (token.line, token.column)
                )
            names.append((token.text, (token.line, token.column)))
            if not stream.accept(","):
                return names

    def parse_term(self) -> ProcessTerm:
        return self.parse_cooperation()

    def parse_cooperation(self) -> ProcessTerm:
        stream = self.stream
        position = stream.position
        left = self.parse_hiding()
        while stream.accept("<"):
            names = self.parse_identlist(">", "cooperation")
            stream.expect(">")
            right = self.parse_hiding()
            left = self._mark(Cooperation(left, frozenset(n for n, _ in names), right), position)
        return left

    def parse_hiding(self) -> ProcessTerm:
        stream = self.stream
        position = stream.position
        inner = self.parse_choice()
        while stream.accept("/"):
            stream.expect("{")
            names = self.parse_identlist("}", "hiding")
            stream.expect("}")
            inner = self._mark(Hiding(inner, frozenset(n for n, _ in names)), position)
        return inner

    def parse_choice(self) -> ProcessTerm:
        stream = self.stream
        position = stream.position
        left = self.parse_prefix()
        while stream.accept("+"):
            right = self.parse_prefix()
            left = self._mark(Choice(left, right), position)
        return left

    def parse_prefix(self) -> ProcessTerm:
        stream = self.stream
        position = stream.position
        if stream.check(TokenType.CONST):
            token = stream.consume()
            if token.text == TOP_SYMBOL:
                raise ModelSyntaxError(
                    f"'{TOP_SYMBOL}' is reserved for the passive rate", position
                )
            return self._mark(Constant(token.text), position)
        if stream.check("(") and stream.check_next(TokenType.IDENT):
            stream.consume()
            action = stream.consume()
            if action.text == TAU:
                raise ModelSyntaxError(
                    f"'{TAU}' is reserved and may only arise from hiding",
                    (action.line, action.column),
                )
            stream.expect(",")
            rate = self.parse_rate()
            stream.expect(")")
            stream.expect(".")
            continuation = self.parse_prefix()
            return self._mark(Prefix(Activity(action.text, rate), continuation), position)
        if stream.accept("("):
            term = self.parse_term()
            stream.expect(")")
            return term
        raise stream.make_error("expected an activity, a constant or '('")

    def parse_rate(self) -> Rate:
        stream = self.stream
        position = stream.position
        if stream.check({TOP_SYMBOL}):
            stream.consume()
            return Rate.top()
        token = stream.expect(TokenType.NUMBER, "a rate")
        value = _parse_number(token.text, position)
        if stream.accept("*"):
            stream.expect({TOP_SYMBOL}, f"'{TOP_SYMBOL}'")
            return Rate.top(value)
        return Rate.finite(value)


def _parse_number(text: str, position: Position) -> Fraction:
    numerator, _, denominator = text.partition("/")
    value = Fraction(numerator)
    if denominator:
        if Fraction(denominator) == 0:
            raise ModelSyntaxError(f"division by zero in rate '{text}'", position)
        value /= Fraction(denominator)
    if value <= 0:
        raise ModelSyntaxError(f"rate must be strictly positive, got '{text}'", position)
    return value


def parse_outline(source: str) -> Tuple[ModelOutline, List[ParseDiagnostic]]:
    """Syntax-only pass: the outline plus syntax diagnostics."""
    parser = _ModelParser(source)
    try:
        outline = parser.parse()
    except RecursionError:
        parser.error((1, 1), "model is nested too deeply")
        outline = parser.outline
    return outline, parser.diagnostics


def parse_model(source: str) -> Tuple[Optional[ModelEnv], List[ParseDiagnostic]]:
    """
    Parse and validate a model.

    Args:
        source: Text in the .pepa format

    Returns:
        Tuple of (env, diagnostics); env is None when any diagnostic is an error
    """
    outline, diagnostics = parse_outline(source)
    _, semantic = validate_outline(outline)
    diagnostics.extend(semantic)
    diagnostics.sort(key=lambda d: (d.line, d.column))

    if any(d.is_error for d in diagnostics):
        return None, diagnostics

    defs = {}
    for definition in outline.definitions:
        defs.setdefault(definition.name, definition.body)
    env = ModelEnv(defs=defs, system=outline.system, high=frozenset(n for n, _ in outline.high))
    logger.debug(f"Parsed model with {len(defs)} definitions and high actions {sorted(env.high)}")
    return env, diagnostics


def load_model(path: Union[str, Path]) -> ModelEnv:
    """
    Read and parse a .pepa file.

    Raises:
        FileNotFoundError: the file does not exist
        ModelParseError: the source holds at least one error diagnostic
    """
    path = Path(path)
    try:
        source = path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as e:
        raise ModelParseError([ParseDiagnostic(1, 1, f"{path.name} is not valid UTF-8: {e.reason}")])

    env, diagnostics = parse_model(source)
    if env is None:
        raise ModelParseError(diagnostics)
    for diagnostic in diagnostics:
        logger.warning(f"{path.name}:{diagnostic}")
    logger.info(f"Loaded model from {path}")
    return env


# Binding strength: cooperation < hiding < choice < prefix/constant.
_COOPERATION, _HIDING, _CHOICE, _ATOM = range(4)


def _level(term: ProcessTerm) -> int:
    if isinstance(term, Cooperation):
        return _COOPERATION
    if isinstance(term, Hiding):
        return _HIDING
    if isinstance(term, Choice):
        return _CHOICE
    return _ATOM


def _render_set(actions: AbstractSet[str]) -> str:
    return ", ".join(sorted(actions))


def _render(term: ProcessTerm, required: int) -> str:
    if isinstance(term, Constant):
        text = term.name
    elif isinstance(term, Prefix):
        heads = []
        node: ProcessTerm = term
        while isinstance(node, Prefix):
            heads.append(f"({node.activity.action}, {node.activity.rate}).")
            node = node.continuation
        text = "".join(heads) + _render(node, _ATOM)
    elif isinstance(term, Choice):
        rights = []
        node = term
        while isinstance(node, Choice):
            rights.append(node.right)
            node = node.left
        parts = [_render(node, _CHOICE)] + [_render(r, _ATOM) for r in reversed(rights)]
        text = " + ".join(parts)
    elif isinstance(term, Hiding):
        text = f"{_render(term.inner, _HIDING)} / {{{_render_set(term.hide_set)}}}"
    elif isinstance(term, Cooperation):
        text = (
            f"{_render(term.left, _COOPERATION)} <{_render_set(term.coop_set)}> "
            f"{_render(term.right, _HIDING)}"
        )
    else:
        raise TypeError(f"not a process term: {term!r}")
    if _level(term) < required:
        return f"({text})"
    return text


def render_term(term: ProcessTerm) -> str:
    """Canonical text of a term; parsing it yields an equal term."""
    return _render(term, _COOPERATION)


def render_model(env: ModelEnv) -> str:
    """Canonical source of a whole model."""
    lines = []
    if env.high:
        lines.append(f"{KEYWORD_HIGH} = {{{_render_set(env.high)}}};")
    for name, body in env.defs.items():
        lines.append(f"{name} := {render_term(body)};")
    lines.append(f"{KEYWORD_SYSTEM} {render_term(env.system)};")
    return "\n".join(lines) + "\n"
