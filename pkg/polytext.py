"""
polytext.py

Text grammar for polynomials and jet differentials.

  x0^3 + 2/3*x1*x2^2
  (1/2,-3)*eta^2 - xi           ball coefficient given by its center
  z1*(d z1)*(d2 z1) + (d z2)^3  jet differential

Terms are joined by + / -, products by * or juxtaposition, powers by ^.
Identifiers are letters followed by digits, so `x1x2` reads as x1*x2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, List, Optional, Sequence

from fields import QQ, BallField, CoefficientField, FieldMismatchError, PolyError, ball_from_parts, parse_fraction
from polycore import Polynomial


_NUMBER = r"\d+(?:\.\d+)?(?:/\d+)?"
_BALL = r"(?P<ball>\(\s*[-+]?" + _NUMBER + r"\s*,\s*[-+]?" + _NUMBER + r"\s*\))"
_REST = (
    r"|(?P<number>" + _NUMBER + r")"
    r"|(?P<ident>[A-Za-z]+\d*)"
    r"|(?P<op>[-+*^()])"
)
_TOKEN_RE = re.compile(_BALL + _REST)
_JET_TOKEN_RE = re.compile(_BALL + r"|(?P<jet>d(?P<jorder>\d*)\s*(?P<jvar>z\d+))" + _REST)


@dataclass
class Token:
    kind: str
    text: str
    pos: int
    order: int = 0


def tokenize(text: str, allow_jets: bool = False) -> List[Token]:
    pattern = _JET_TOKEN_RE if allow_jets else _TOKEN_RE
    tokens: List[Token] = []
    raw = text or ""
    pos = 0
    while True:
        while pos < len(raw) and raw[pos].isspace():
            pos += 1
        if pos >= len(raw):
            return tokens
        m = pattern.match(raw, pos)
        if not m:
            raise PolyError(f"Unexpected character {raw[pos]!r} at position {pos} in {raw!r}")
        if m.group("ball"):
            tokens.append(Token("ball", m.group("ball"), pos))
        elif allow_jets and m.group("jet"):
            order = int(m.group("jorder") or 1)
            if order < 1:
                raise PolyError(f"Jet order must be at least 1 at position {pos}")
            tokens.append(Token("jet", m.group("jvar"), pos, order))
        elif m.group("number"):
            tokens.append(Token("number", m.group("number"), pos))
        elif m.group("ident"):
            tokens.append(Token("ident", m.group("ident"), pos))
        else:
            tokens.append(Token("op", m.group("op"), pos))
        pos = m.end()


class Builder:
    """Maps grammar atoms to ring elements."""

    def number(self, value: Fraction) -> Any:
        raise NotImplementedError

    def ball(self, text: str) -> Any:
        raise NotImplementedError

    def variable(self, name: str) -> Any:
        raise NotImplementedError

    def jet(self, var: str, order: int) -> Any:
        raise PolyError(f"Jet variable d{order} {var} is not allowed here")


class _Parser:
    def __init__(self, tokens: List[Token], builder: Builder, source: str):
        self.tokens = tokens
        self.i = 0
        self.builder = builder
        self.source = source

    def peek(self) -> Optional[Token]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise PolyError(f"Unexpected end of input in {self.source!r}")
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok.kind != "op" or tok.text != text:
            raise PolyError(f"Expected {text!r} at position {tok.pos}, found {tok.text!r}")

    def parse(self) -> Any:
        if not self.tokens:
            raise PolyError("Empty expression")
        value = self.expr()
        tok = self.peek()
        if tok is not None:
            raise PolyError(f"Unexpected {tok.text!r} at position {tok.pos} in {self.source!r}")
        return value

    def expr(self) -> Any:
        value = self.signed_term()
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "op" or tok.text not in "+-":
                return value
            self.take()
            rhs = self.term()
            value = value + rhs if tok.text == "+" else value - rhs

    def signed_term(self) -> Any:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in "+-":
            self.take()
            value = self.term()
            return -value if tok.text == "-" else value
        return self.term()

    def _starts_factor(self, tok: Optional[Token]) -> bool:
        if tok is None:
            return False
        if tok.kind == "op":
            return tok.text == "("
        return True

    def term(self) -> Any:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "op" and tok.text == "*":
                self.take()
                value = value * self.factor()
            elif self._starts_factor(tok):
                value = value * self.factor()
            else:
                return value

    def factor(self) -> Any:
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "^":
            self.take()
            exp_tok = self.take()
            if exp_tok.kind != "number" or not exp_tok.text.isdigit():
                raise PolyError(f"Exponent must be a nonnegative integer at position {exp_tok.pos}")
            return base ** int(exp_tok.text)
        return base

    def atom(self) -> Any:
        tok = self.take()
        if tok.kind == "number":
            return self.builder.number(parse_fraction(tok.text))
        if tok.kind == "ball":
            return self.builder.ball(tok.text)
        if tok.kind == "ident":
            return self.builder.variable(tok.text)
        if tok.kind == "jet":
            return self.builder.jet(tok.text, tok.order)
        if tok.text == "(":
            value = self.expr()
            self.expect(")")
            return value
        if tok.text == "-":
            return -self.factor()
        raise PolyError(f"Unexpected {tok.text!r} at position {tok.pos} in {self.source!r}")


def parse_expression(text: str, builder: Builder, allow_jets: bool = False) -> Any:
    return _Parser(tokenize(text, allow_jets=allow_jets), builder, text).parse()


def parse_ball_literal(text: str) -> Any:
    inner = text.strip()[1:-1]
    re_part, im_part = (s.strip() for s in inner.split(","))
    return ball_from_parts(re_part, im_part)


class PolynomialBuilder(Builder):
    def __init__(self, field: CoefficientField):
        self.field = field

    def number(self, value: Fraction) -> Polynomial:
        return Polynomial.constant(value, (), self.field)

    def ball(self, text: str) -> Polynomial:
        if not isinstance(self.field, BallField):
            raise FieldMismatchError(f"Ball coefficient {text} in a rational polynomial")
        return Polynomial.constant(parse_ball_literal(text), (), self.field)

    def variable(self, name: str) -> Polynomial:
        return Polynomial.variable(name, None, self.field)


def parse_polynomial(
    text: str,
    variables: Optional[Sequence[str]] = None,
    field: Optional[CoefficientField] = None,
) -> Polynomial:
    """
    Parse polynomial text. Without `field`, ball literals select a BallField,
    otherwise the rational field is used. Without `variables`, variables are
    ordered by first appearance.
    """
    if field is None:
        has_ball = any(t.kind == "ball" for t in tokenize(text))
        field = BallField() if has_ball else QQ
    poly = parse_expression(text, PolynomialBuilder(field))
    if variables is not None:
        poly = poly.with_variables(variables)
    return poly


# ----------------------------
# Printing
# ----------------------------


def format_monomial(variables: Sequence[str], exps: Sequence[int]) -> str:
    parts = []
    for v, k in zip(variables, exps):
        if k == 1:
            parts.append(v)
        elif k > 1:
            parts.append(f"{v}^{k}")
    return "*".join(parts)


def _format_terms(items: Sequence[Any], field: CoefficientField, render: Callable[[Any], str]) -> str:
    pieces: List[str] = []
    for key, c in items:
        mono = render(key)
        if field.kind == QQ.kind:
            negative = c < 0
            mag = -c if negative else c
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            sign = "-" if negative else "+"
        else:
            body = f"{field.format(c)}*{mono}" if mono else field.format(c)
            sign = "+"
        if not pieces:
            pieces.append(body if sign == "+" else f"-{body}")
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces) if pieces else "0"


def format_polynomial(p: Polynomial) -> str:
    return _format_terms(p.sorted_terms(), p.field, lambda e: format_monomial(p.variables, e))


def parse_jet(text: str, n: Optional[int] = None, field: CoefficientField = QQ) -> Any:
    from jetalg import parse_jet_differential

    return parse_jet_differential(text, n=n, field=field)


def format_jet(omega: Any) -> str:
    from jetalg import format_jet_differential

    return format_jet_differential(omega)
