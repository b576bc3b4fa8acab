from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = {
    "unit", "field", "public", "constructor", "method", "var", "if", "else",
    "while", "return", "throw", "this", "true", "false",
    "int", "float", "bool", "string",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/%<>!=(){};:,.\[\]\#])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class SubjectError(Exception):
    """Base for all front-end diagnostics; carries a source position."""

    category = "error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{self.category} error at {line}:{col}: {message}")


class ParseError(SubjectError):
    category = "syntax"

    def __init__(self, message: str, line: int = 0, col: int = 0, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message}; expected one of: {', '.join(self.expected)}"
        super().__init__(message, line, col)


class ResolutionError(SubjectError):
    category = "resolution"

    def __init__(self, name: str, line: int = 0, col: int = 0, what: str = "identifier"):
        self.name = name
        super().__init__(f"unknown {what} '{name}'", line, col)


class KindError(SubjectError):
    category = "kind"


class DuplicateError(SubjectError):
    category = "duplicate"


@dataclass(frozen=True)
class Token:
    type: str  # ident | keyword | int | float | string | op | eof
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\t", "\\t"))


def tokenize(source: str) -> list:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "ident":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "<eof>", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.type != "eof":
            self.i += 1
        return tok

    def at(self, text: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.text == text and tok.type in ("op", "keyword", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, *texts: str) -> Token:
        tok = self.peek()
        if tok.text in texts and tok.type in ("op", "keyword", "ident"):
            return self.next()
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, expected=texts)

    def expect_type(self, type_: str, what: str) -> Token:
        tok = self.peek()
        if tok.type != type_:
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, expected=(what,))
        return self.next()
