"""A tiny tokenizer shared by the CTL and modal formula parsers."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str     # "ident", an operator string, or "end"
    text: str
    pos: int


def tokenize(text: str, operators: tuple[str, ...]) -> list[Token]:
    ops = sorted(operators, key=len, reverse=True)
    out = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            out.append(Token("ident", m.group(), i))
            i = m.end()
            continue
        for op in ops:
            if text.startswith(op, i):
                out.append(Token(op, op, i))
                i += len(op)
                break
        else:
            raise ParseError(f"unexpected character {text[i]!r}", i, text)
    out.append(Token("end", "", len(text)))
    return out


class TokenStream:
    def __init__(self, text, operators):
        self.text = text
        self.tokens = tokenize(text, operators)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, kind, text=None) -> Token | None:
        tok = self.peek
        if tok.kind == kind and (text is None or tok.text == text):
            self.i += 1
            return tok
        return None

    def expect(self, kind, text=None) -> Token:
        tok = self.accept(kind, text)
        if tok is None:
            want = text or kind
            got = self.peek.text or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", self.peek.pos, self.text)
        return tok

    def fail(self, message):
        raise ParseError(message, self.peek.pos, self.text)
