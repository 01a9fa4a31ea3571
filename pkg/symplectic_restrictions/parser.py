"""Recursive-descent parser for polynomial text.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" unary) | ("/" integer))*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") integer)?
    atom   := number | variable | "(" expr ")"
    number := digits ("/" digits)?

Coefficients are exact rationals; only division by a nonzero constant is allowed.
"""

import re
from dataclasses import dataclass
from typing import List, Optional

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

from symplectic_restrictions.errors import ParseError

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "name", "op" or "end"
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    text = text.replace("−", "-").replace("·", "*")
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if not match:
            raise ParseError(f"unexpected character {text[position:].lstrip()[0]!r}", position)
        number, name, op = match.groups()
        start = match.start(match.lastindex)
        if number is not None:
            tokens.append(Token("number", number, start))
        elif name is not None:
            tokens.append(Token("name", name, start))
        else:
            tokens.append(Token("op", op, start))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Context:
    """Cursor over the token stream."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def at(self) -> Token:
        return self.tokens[self.pos]

    def accept(self, *ops: str) -> Optional[Token]:
        token = self.at()
        if token.kind == "op" and token.text in ops:
            self.pos += 1
            return token
        return None

    def expect(self, kind: str, text: str = None) -> Token:
        token = self.at()
        if token.kind != kind or (text is not None and token.text != text):
            wanted = text or kind
            found = token.text or "end of input"
            raise ParseError(f"expected {wanted}, found {found!r}", token.position)
        self.pos += 1
        return token


class PolynomialParser:
    """Parses polynomial strings into elements of a fixed ring."""

    def __init__(self, ring: PolyRing):
        self.ring = ring
        self.variables = {str(symbol): gen for symbol, gen in zip(ring.symbols, ring.gens)}

    def parse(self, text: str) -> PolyElement:
        if not isinstance(text, str) or not text.strip():
            raise ParseError("empty polynomial")
        context = Context(tokenize(text))
        value = self.expr(context)
        context.expect("end")
        return value

    def expr(self, context: Context) -> PolyElement:
        value = self.term(context)
        while True:
            if context.accept("+"):
                value = value + self.term(context)
            elif context.accept("-"):
                value = value - self.term(context)
            else:
                return value

    def term(self, context: Context) -> PolyElement:
        value = self.unary(context)
        while True:
            if context.accept("*"):
                value = value * self.unary(context)
            elif context.accept("/"):
                token = context.expect("number")
                divisor = int(token.text)
                if not divisor:
                    raise ParseError("division by zero", token.position)
                value = value * self.ring.ground_new(QQ(1, divisor))
            else:
                return value

    def unary(self, context: Context) -> PolyElement:
        if context.accept("-"):
            return -self.unary(context)
        if context.accept("+"):
            return self.unary(context)
        return self.power(context)

    def power(self, context: Context) -> PolyElement:
        base = self.atom(context)
        if context.accept("^", "**"):
            exponent = context.expect("number")
            return base ** int(exponent.text)
        return base

    def atom(self, context: Context) -> PolyElement:
        token = context.at()
        if token.kind == "number":
            return self.ring.ground_new(self.number(context))
        if token.kind == "name":
            context.pos += 1
            if token.text not in self.variables:
                raise ParseError(f"unknown variable {token.text!r}", token.position)
            return self.variables[token.text]
        if context.accept("("):
            value = self.expr(context)
            context.expect("op", ")")
            return value
        found = token.text or "end of input"
        raise ParseError(f"unexpected {found!r}", token.position)

    def number(self, context: Context):
        """Integer literal, or p/q when a slash joins two integer literals."""
        numerator = int(context.expect("number").text)
        following = context.tokens[context.pos + 1] if context.pos + 1 < len(context.tokens) else None
        if context.at().kind == "op" and context.at().text == "/" and following is not None and following.kind == "number":
            context.pos += 1
            denominator = int(context.expect("number").text)
            if denominator == 0:
                raise ParseError("division by zero", following.position)
            return QQ(numerator, denominator)
        return QQ(numerator)


def parse_polynomial(text: str, ring: PolyRing) -> PolyElement:
    return PolynomialParser(ring).parse(text)
