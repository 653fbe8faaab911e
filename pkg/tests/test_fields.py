from fractions import Fraction

import pytest
from flint import acb, arb, ctx

from fields import (
    QQ,
    BallField,
    Certainty,
    FieldMismatchError,
    PolyError,
    ball_from_parts,
    ball_to_json,
    field_of,
    parse_fraction,
    precision_ladder,
    rational_ball,
    working_precision,
)


def test_precision_ladder_doubles_up_to_max():
    assert list(precision_ladder(256, 4096)) == [256, 512, 1024, 2048, 4096]
    assert list(precision_ladder(300, 1000)) == [300, 600]


def test_working_precision_restores_context():
    before = ctx.prec
    with working_precision(512) as bits:
        assert bits == 512
        assert ctx.prec == 512
    assert ctx.prec == before


def test_working_precision_rejects_tiny():
    with pytest.raises(PolyError):
        with working_precision(8):
            pass


def test_parse_fraction():
    assert parse_fraction("-3/4") == Fraction(-3, 4)
    assert parse_fraction(" 7 ") == Fraction(7)
    with pytest.raises(PolyError):
        parse_fraction("")
    with pytest.raises(PolyError):
        parse_fraction("1/0")


def test_rational_field_refuses_balls_and_floats():
    assert QQ.convert(3) == Fraction(3)
    assert QQ.convert("2/6") == Fraction(1, 3)
    with pytest.raises(FieldMismatchError):
        QQ.convert(0.5)
    with pytest.raises(FieldMismatchError):
        QQ.convert(acb(1))


def test_ball_field_zero_tests():
    bf = BallField(128)
    assert bf.is_zero(bf.convert(0))
    x = bf.convert(Fraction(1, 3))
    assert not bf.is_zero(x)
    assert not bf.may_be_zero(x)
    fuzzy = acb(arb("0 +/- 1e-30"))
    assert bf.may_be_zero(fuzzy)
    assert not bf.is_zero(fuzzy)


def test_ball_helpers():
    b = ball_from_parts("1/2", -2)
    data = ball_to_json(b)
    assert data["mid"] == [0.5, -2.0]
    assert data["rad"] == 0.0
    assert rational_ball(Fraction(3, 8)) == acb(0.375)


def test_field_of_and_equality():
    assert field_of(Fraction(1)) == QQ
    assert field_of(acb(1)).kind == "ball"
    assert BallField(64) == BallField(512)
    assert BallField() != QQ


def test_certainty_values():
    assert Certainty.YES.value == "yes"
    assert Certainty("unknown") is Certainty.UNKNOWN
