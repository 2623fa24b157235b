# promisekit/services/body_expr.py
"""Nested body expressions such as ``S(P1(P2))`` and ``P1(S) & (P2(P3))``.

A term is an agent symbol optionally wrapping one inner term; the innermost symbol is the
origin. An expression is a main term followed by zero or more parenthesised ``&`` conjuncts.
"""
import re
from typing import Iterator, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([()&]))")


class Term(BaseModel):
    model_config = ConfigDict(frozen=True)

    symbol: str
    inner: Optional["Term"] = None

    @classmethod
    def nested(cls, symbols: Sequence[str]) -> "Term":
        """nested(["P2", "P1", "S"]) -> P2(P1(S))"""
        term = None
        for symbol in reversed(symbols):
            term = cls(symbol=symbol, inner=term)
        if term is None:
            raise ValueError("a term needs at least one symbol")
        return term

    @property
    def size(self) -> int:
        return 1 + (self.inner.size if self.inner else 0)

    @property
    def origin(self) -> str:
        return self.inner.origin if self.inner else self.symbol

    def subterms(self) -> Iterator["Term"]:
        term = self
        while term is not None:
            yield term
            term = term.inner

    def __str__(self) -> str:
        if self.inner is None:
            return self.symbol
        return f"{self.symbol}({self.inner})"


class BodyExpr(BaseModel):
    model_config = ConfigDict(frozen=True)

    terms: Tuple[Term, ...] = Field(min_length=1)

    @property
    def main(self) -> Term:
        return self.terms[0]

    @property
    def size(self) -> int:
        """Count of agent symbols in the expression."""
        return sum(t.size for t in self.terms)

    @property
    def origin(self) -> str:
        return self.main.origin

    def signalled(self) -> Set[str]:
        """Sub-expressions the body exposes as its dependencies.

        Everything wrapped by the main term, plus every conjunct, is signalled to the promisee.
        """
        out = {str(t) for t in list(self.main.subterms())[1:]}
        for conjunct in self.terms[1:]:
            out.update(str(t) for t in conjunct.subterms())
        return out

    def __str__(self) -> str:
        return str(self.main) + "".join(f" & ({t})" for t in self.terms[1:])

    @classmethod
    def of(cls, *terms: Term) -> "BodyExpr":
        return cls(terms=terms)

    @classmethod
    def parse(cls, text: str) -> "BodyExpr":
        tokens = _tokenize(text)
        parser = _Parser(tokens, text)
        terms = [parser.term()]
        while parser.peek() == "&":
            parser.expect("&")
            parser.expect("(")
            terms.append(parser.term())
            parser.expect(")")
        if parser.peek() is not None:
            raise ValueError(f"trailing input in body expression {text!r}")
        return cls(terms=tuple(terms))

    @classmethod
    def try_parse(cls, text: str) -> Optional["BodyExpr"]:
        try:
            return cls.parse(text)
        except ValueError:
            return None


def _tokenize(text: str) -> List[str]:
    tokens, pos = [], 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            raise ValueError(f"unexpected character in body expression {text!r} at {pos}")
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: List[str], text: str):
        self.tokens = tokens
        self.pos = 0
        self.text = text

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def expect(self, token: str) -> None:
        if self.peek() != token:
            raise ValueError(f"expected {token!r} in body expression {self.text!r}")
        self.pos += 1

    def term(self) -> Term:
        symbol = self.peek()
        if symbol is None or symbol in "()&":
            raise ValueError(f"expected an agent symbol in body expression {self.text!r}")
        self.pos += 1
        inner = None
        if self.peek() == "(":
            self.expect("(")
            inner = self.term()
            self.expect(")")
        return Term(symbol=symbol, inner=inner)


def expression_size(word: str) -> int:
    """Symbol count of a body word; words that are not expressions count as one symbol."""
    expr = BodyExpr.try_parse(word)
    return expr.size if expr else 1
