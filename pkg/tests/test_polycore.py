import random
from fractions import Fraction

import pytest
import sympy
from flint import acb

from fields import BallField, Certainty, FieldMismatchError, PolyError, QQ, working_precision
from polycore import (
    Polynomial,
    SeriesError,
    TruncatedSeries,
    discriminant,
    from_fmpq_poly,
    is_squarefree_certified,
    resultant,
    series_compose_and_invert,
    to_fmpq_poly,
    univariate_coeffs,
    univariate_divmod,
    univariate_gcd,
)
from polytext import parse_polynomial


def _x():
    return Polynomial.variable("x")


def _to_sympy(p: Polynomial):
    syms = [sympy.Symbol(v) for v in p.variables]
    total = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, k in zip(syms, e):
            term *= s**k
        total += term
    return sympy.expand(total)


def _random_poly(rng: random.Random, variables, max_deg=3, terms=4) -> Polynomial:
    out = {}
    for _ in range(terms):
        e = tuple(rng.randint(0, max_deg) for _ in variables)
        out[e] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return Polynomial(variables, out)


def test_zero_polynomial_degree_and_homogeneity():
    z = Polynomial.zero(("x", "y"))
    assert z.total_degree() == -1
    assert z.is_zero()
    assert z.is_homogeneous()


def test_duplicate_and_negative_exponents_rejected():
    with pytest.raises(PolyError):
        Polynomial(("x", "x"), {})
    with pytest.raises(PolyError):
        Polynomial(("x",), {(-1,): 1})


def test_arithmetic_matches_sympy():
    rng = random.Random(11)
    for _ in range(40):
        a = _random_poly(rng, ("x", "y"))
        b = _random_poly(rng, ("x", "y"))
        assert sympy.expand(_to_sympy(a * b) - _to_sympy(a) * _to_sympy(b)) == 0
        assert sympy.expand(_to_sympy(a + b) - _to_sympy(a) - _to_sympy(b)) == 0
        assert sympy.expand(_to_sympy(a**3) - _to_sympy(a) ** 3) == 0


def test_diff_matches_sympy():
    rng = random.Random(5)
    x, y = sympy.symbols("x y")
    for _ in range(20):
        a = _random_poly(rng, ("x", "y"), max_deg=5)
        assert sympy.expand(_to_sympy(a.diff("x")) - sympy.diff(_to_sympy(a), x)) == 0
        assert sympy.expand(_to_sympy(a.diff("y")) - sympy.diff(_to_sympy(a), y)) == 0


def test_variable_alignment_and_subs():
    x = Polynomial.variable("x")
    y = Polynomial.variable("y")
    p = x * x + y
    assert p.variables == ("x", "y")
    q = p.subs({"y": x + 1})
    assert q == x * x + x + 1
    assert p.evaluate({"x": Fraction(2), "y": Fraction(-1)}) == 3


def test_with_variables_refuses_to_drop_used():
    p = Polynomial.variable("x", ("x", "y"))
    assert p.with_variables(("x",)).variables == ("x",)
    with pytest.raises(PolyError):
        p.with_variables(("y",))


def test_rational_ball_mixing_is_rejected():
    p = _x()
    with pytest.raises(FieldMismatchError):
        p + acb(1)
    b = p.to_field(BallField())
    with pytest.raises(FieldMismatchError):
        p + b


def test_gcd_and_divmod_match_sympy():
    x = _x()
    a = (x - 1) ** 2 * (x + 2) * (x * x + 1)
    b = (x - 1) * (x + 2) ** 3
    g = univariate_gcd(a, b)
    assert g == (x - 1) * (x + 2)
    q, r = univariate_divmod(a, g)
    assert r.is_zero()
    assert q * g == a
    assert univariate_gcd(Polynomial.zero(("x",)), Polynomial.zero(("x",))).is_zero()


def test_gcd_random_cases_match_sympy():
    rng = random.Random(17)
    X = sympy.Symbol("x")
    for _ in range(40):
        a = _random_poly(rng, ("x",), max_deg=4, terms=3)
        b = _random_poly(rng, ("x",), max_deg=4, terms=3)
        common = _random_poly(rng, ("x",), max_deg=2, terms=2)
        a, b = a * common, b * common
        g = univariate_gcd(a, b)
        expected = sympy.Poly(sympy.gcd(_to_sympy(a), _to_sympy(b)), X)
        if expected.is_zero:
            assert g.is_zero()
            continue
        expected = expected.monic()
        assert _to_sympy(g.with_variables(("x",))) == sympy.expand(expected.as_expr())
        if not b.is_zero():
            q, r = univariate_divmod(a, b)
            assert q * b + r == a
            assert r.total_degree() < b.total_degree()


def test_fmpq_poly_conversion_and_squarefree_path():
    p = parse_polynomial("x^3 - 3/2*x + 1/4")
    f = to_fmpq_poly(p)
    assert f.degree() == 3
    assert from_fmpq_poly(f, "x") == p
    assert is_squarefree_certified((p * p).with_variables(("x",))) == Certainty.NO
    with pytest.raises(FieldMismatchError):
        to_fmpq_poly(p.to_field(BallField()))
    with pytest.raises(PolyError):
        univariate_divmod(p, Polynomial.zero(("x",)))


def test_resultant_exact_and_ball_agree():
    x = _x()
    a = x**3 - 2 * x + 5
    b = x**2 + 3 * x - 1
    exact = resultant(a, b)
    X = sympy.Symbol("x")
    assert exact == Fraction(int(sympy.resultant(X**3 - 2 * X + 5, X**2 + 3 * X - 1, X)))
    with working_precision(256):
        ball = resultant(a.to_field(BallField()), b.to_field(BallField()))
        assert ball.contains(acb(int(exact)))


def test_discriminant_of_quadratic():
    x = _x()
    p = 2 * x**2 + 3 * x - 5
    assert discriminant(p) == Fraction(3 * 3 - 4 * 2 * (-5))


def test_squarefree_exact_and_ball():
    x = _x()
    assert is_squarefree_certified(x**3 - x) == Certainty.YES
    assert is_squarefree_certified((x - 1) ** 2 * (x + 1)) == Certainty.NO
    with working_precision(256):
        assert is_squarefree_certified((x**3 - x).to_field(BallField())) == Certainty.YES
        # a ball test never answers NO
        assert is_squarefree_certified(((x - 1) ** 2).to_field(BallField())) == Certainty.UNKNOWN
    with pytest.raises(PolyError):
        is_squarefree_certified(Polynomial.constant(3, ("x",)))


def test_univariate_coeffs():
    p = parse_polynomial("3*t^3 - t + 2")
    assert univariate_coeffs(p) == [2, -1, 0, 3]
    assert univariate_coeffs(Polynomial.zero(("t",))) == []


# ----------------------------
# Series
# ----------------------------


def test_series_reciprocal_and_pole():
    s = TruncatedSeries([1, 1], 10)
    inv = s.reciprocal()
    assert inv.coeffs == [Fraction((-1) ** k) for k in range(11)]
    assert (s * inv).agrees_with(TruncatedSeries.constant(1, 10))
    with pytest.raises(SeriesError):
        TruncatedSeries([0, 1], 10).reciprocal()


def test_compose_and_invert_helper():
    e = TruncatedSeries.exp_series(8)
    t = TruncatedSeries.variable(8)
    assert series_compose_and_invert(e, t * 2) == TruncatedSeries.exp_series(8, 2)
    assert series_compose_and_invert(e) == TruncatedSeries.exp_series(8, -1)


def test_composition_orders_and_constant_term():
    s = TruncatedSeries.exp_series(6)
    with pytest.raises(SeriesError):
        s.compose(TruncatedSeries([1, 1], 6))
    short = TruncatedSeries([0, 1, 1], 3)
    assert s.compose(short).order == 3


def test_reversion_of_sin_matches_arcsin():
    s = TruncatedSeries.sin_series(9)
    g = s.revert()
    X = sympy.Symbol("x")
    expected = sympy.series(sympy.asin(X), X, 0, 10).removeO()
    for k in range(10):
        c = expected.coeff(X, k)
        assert g.coeffs[k] == Fraction(int(c.p), int(c.q))
    assert s.compose(g).agrees_with(TruncatedSeries.variable(9))


def test_rational_power():
    s = TruncatedSeries([1, 1], 8)
    half = s.rational_power(Fraction(1, 2))
    assert (half * half).agrees_with(s)
    cube = s.rational_power(3)
    assert cube.agrees_with(s**3)
    with pytest.raises(SeriesError):
        TruncatedSeries([2, 1], 8).rational_power(Fraction(1, 2))


def test_derivative_loses_one_order_and_exhausts():
    s = TruncatedSeries.exp_series(3)
    d = s.derivative()
    assert d.order == 2
    assert d.agrees_with(s.truncate(2))
    with pytest.raises(SeriesError):
        s.derivative(4)


def test_integral_inverts_derivative():
    s = TruncatedSeries.sin_series(7)
    assert s.derivative().integral().agrees_with(s.truncate(7))


def test_series_field_mismatch():
    a = TruncatedSeries([1, 2], 4)
    b = TruncatedSeries([1, 2], 4, field=BallField())
    with pytest.raises(FieldMismatchError):
        a + b


def test_valuation_and_zero():
    assert TruncatedSeries([0, 0, 3], 5).valuation() == 2
    assert TruncatedSeries([0], 5).is_zero()
    assert QQ.is_zero(TruncatedSeries([0, 0], 3).coeffs[1])
