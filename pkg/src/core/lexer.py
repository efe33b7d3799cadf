"""
Tokenizer for the .pepa model format.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator


class TokenType(Enum):
    WHITESPACE = "whitespace"
    COMMENT = "comment"
    NUMBER = "number"
    CONST = "constant"
    IDENT = "identifier"
    SYMBOL = "symbol"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Token:
    token_type: TokenType
    text: str
    line: int
    column: int


_PATTERNS = [
    (TokenType.WHITESPACE, r"\s+"),
    (TokenType.COMMENT, r"%[^\n]*"),
    (TokenType.NUMBER, r"\d+(?:\.\d+)?(?:/\d+)?"),
    (TokenType.CONST, r"[A-Z][A-Za-z0-9_']*"),
    (TokenType.IDENT, r"[a-z_][A-Za-z0-9_]*"),
    (TokenType.SYMBOL, r":=|[;={}(),.+<>/*]"),
    (TokenType.UNKNOWN, r"."),
]

_MASTER = re.compile(
    "|".join(f"(?P<{token_type.name}>{pattern})" for token_type, pattern in _PATTERNS),
    re.DOTALL,
)


def lex(code: str) -> Iterator[Token]:
    """Yield tokens with 1-based line and column positions."""
    line = 1
    line_start = 0
    for match in _MASTER.finditer(code):
        token_type = TokenType[match.lastgroup]
        text = match.group()
        yield Token(token_type, text, line, match.start() - line_start + 1)
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = match.start() + text.rindex("\n") + 1
