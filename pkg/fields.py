"""
fields.py

Coefficient fields shared by polynomials and truncated series.

Two instantiations of one interface:
  - RationalField: exact Fraction arithmetic (the exact track)
  - BallField: outward-rounded complex balls (flint.acb) at a working precision

Ball arithmetic uses the global flint context, so precision is set with
`working_precision(bits)` around a computation, not per value.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, Union

from flint import acb, arb, ctx, fmpq

logger = logging.getLogger(__name__)


DEFAULT_PRECISION = 256
MAX_PRECISION = 4096


class PolyError(ValueError):
    pass


class FieldMismatchError(PolyError):
    pass


class Certainty(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


# ----------------------------
# Precision control
# ----------------------------


@contextmanager
def working_precision(bits: int) -> Iterator[int]:
    """Temporarily set the ball-arithmetic precision (bits). Not thread-safe."""
    if int(bits) < 16:
        raise PolyError(f"Precision must be at least 16 bits, got {bits}")
    old = ctx.prec
    ctx.prec = int(bits)
    try:
        yield int(bits)
    finally:
        ctx.prec = old


def precision_ladder(start: int = DEFAULT_PRECISION, maximum: int = MAX_PRECISION) -> Iterator[int]:
    bits = int(start)
    while bits <= maximum:
        yield bits
        bits *= 2


# ----------------------------
# Conversions
# ----------------------------


def parse_fraction(text: str) -> Fraction:
    raw = (text or "").strip()
    if not raw:
        raise PolyError("Empty rational literal")
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError) as e:
        raise PolyError(f"Bad rational literal {raw!r}: {e}")


def fraction_to_fmpq(x: Fraction) -> fmpq:
    return fmpq(x.numerator, x.denominator)


def fmpq_to_fraction(x: fmpq) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def rational_ball(x: Union[int, Fraction]) -> acb:
    x = Fraction(x)
    return acb(arb(fraction_to_fmpq(x)))


def ball_from_parts(re: Any, im: Any = 0) -> acb:
    """Ball from real/imaginary parts given as ints, Fractions or decimal strings."""

    def part(v: Any) -> arb:
        if isinstance(v, arb):
            return v
        if isinstance(v, (int, Fraction)):
            return arb(fraction_to_fmpq(Fraction(v)))
        if isinstance(v, float):
            return arb(v)
        s = str(v).strip()
        if "/" in s:
            return arb(fraction_to_fmpq(parse_fraction(s)))
        return arb(s)

    return acb(part(re), part(im))


def ball_to_json(x: acb) -> Dict[str, Any]:
    return {
        "mid": [float(x.real.mid()), float(x.imag.mid())],
        "rad": float(x.rad()),
    }


def ball_center_text(x: acb, digits: int = 20) -> str:
    re = x.real.mid().str(digits, radius=False)
    im = x.imag.mid().str(digits, radius=False)
    return f"({re},{im})"


# ----------------------------
# Fields
# ----------------------------


class CoefficientField:
    kind = "abstract"

    @property
    def zero(self) -> Any:
        raise NotImplementedError

    @property
    def one(self) -> Any:
        raise NotImplementedError

    def convert(self, x: Any) -> Any:
        raise NotImplementedError

    def is_zero(self, x: Any) -> bool:
        raise NotImplementedError

    def may_be_zero(self, x: Any) -> bool:
        raise NotImplementedError

    def to_json(self, x: Any) -> Any:
        raise NotImplementedError

    def format(self, x: Any) -> str:
        raise NotImplementedError

    def same_kind(self, other: "CoefficientField") -> bool:
        return self.kind == other.kind

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CoefficientField) and self.kind == other.kind

    def __hash__(self) -> int:
        return hash(self.kind)


class RationalField(CoefficientField):
    kind = "rational"

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def convert(self, x: Any) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, bool):
            return Fraction(int(x))
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, fmpq):
            return fmpq_to_fraction(x)
        if isinstance(x, str):
            return parse_fraction(x)
        if isinstance(x, (acb, arb, complex, float)):
            raise FieldMismatchError(
                f"Cannot place {type(x).__name__} value {x!r} in the rational field; "
                "use a BallField polynomial instead"
            )
        raise FieldMismatchError(f"Unsupported rational coefficient type: {type(x).__name__}")

    def is_zero(self, x: Any) -> bool:
        return x == 0

    def may_be_zero(self, x: Any) -> bool:
        return x == 0

    def to_json(self, x: Fraction) -> str:
        return str(x)

    def format(self, x: Fraction) -> str:
        return str(x)

    def __repr__(self) -> str:
        return "RationalField()"


class BallField(CoefficientField):
    kind = "ball"

    def __init__(self, precision: int = DEFAULT_PRECISION):
        self.precision = int(precision)

    @property
    def zero(self) -> acb:
        return acb(0)

    @property
    def one(self) -> acb:
        return acb(1)

    def convert(self, x: Any) -> acb:
        if isinstance(x, acb):
            return x
        if isinstance(x, arb):
            return acb(x)
        if isinstance(x, (int, Fraction, fmpq)):
            q = x if isinstance(x, fmpq) else fraction_to_fmpq(Fraction(x))
            return acb(arb(q))
        if isinstance(x, (float, complex)):
            return acb(complex(x))
        if isinstance(x, str):
            return ball_from_parts(x)
        raise FieldMismatchError(f"Unsupported ball coefficient type: {type(x).__name__}")

    def is_zero(self, x: acb) -> bool:
        return x.is_zero()

    def may_be_zero(self, x: acb) -> bool:
        return x.contains(0)

    def to_json(self, x: acb) -> Dict[str, Any]:
        return ball_to_json(x)

    def format(self, x: acb) -> str:
        return ball_center_text(x, digits=max(17, int(self.precision * 0.30103)))

    def __repr__(self) -> str:
        return f"BallField(precision={self.precision})"


QQ = RationalField()


def ball_field(precision: int = DEFAULT_PRECISION) -> BallField:
    return BallField(precision)


def field_of(value: Any) -> CoefficientField:
    if isinstance(value, (acb, arb, complex, float)):
        return BallField()
    return QQ
