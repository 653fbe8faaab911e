"""
polycore.py

Sparse multivariate polynomials and dense truncated power series over a
pluggable coefficient field (see fields.py), plus the univariate machinery
used by the certificate checkers: gcd, resultant, discriminant, squarefree
certification.

Monomial order for printing is graded lexicographic by the declared
variable list.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from flint import acb, acb_mat, arb, fmpq, fmpq_mat, fmpq_poly

from fields import (
    QQ,
    BallField,
    Certainty,
    CoefficientField,
    FieldMismatchError,
    PolyError,
    fmpq_to_fraction,
    fraction_to_fmpq,
)

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction, acb, arb, fmpq]

DEFAULT_TRUNCATION = 24

_SCALAR_TYPES = (int, Fraction, acb, arb, fmpq)


class SeriesError(ValueError):
    pass


# ----------------------------
# Polynomial
# ----------------------------


class Polynomial:
    """Immutable sparse polynomial: {exponent tuple: nonzero coefficient}."""

    __slots__ = ("variables", "terms", "field")

    def __init__(
        self,
        variables: Sequence[str],
        terms: Optional[Mapping[Sequence[int], Any]] = None,
        field: CoefficientField = QQ,
    ):
        variables = tuple(str(v) for v in variables)
        if len(set(variables)) != len(variables):
            raise PolyError(f"Duplicate variable names: {list(variables)}")
        clean: Dict[Exponent, Any] = {}
        for exps, c in (terms or {}).items():
            e = tuple(int(x) for x in exps)
            if len(e) != len(variables):
                raise PolyError(f"Exponent vector {e} does not match variables {list(variables)}")
            if any(x < 0 for x in e):
                raise PolyError(f"Negative exponent in {e}")
            c = field.convert(c)
            if e in clean:
                c = clean[e] + c
            clean[e] = c
        self.variables = variables
        self.field = field
        self.terms = {e: c for e, c in clean.items() if not field.is_zero(c)}

    @classmethod
    def _raw(cls, variables: Tuple[str, ...], terms: Dict[Exponent, Any], field: CoefficientField) -> "Polynomial":
        p = cls.__new__(cls)
        p.variables = variables
        p.field = field
        p.terms = {e: c for e, c in terms.items() if not field.is_zero(c)}
        return p

    # --- constructors ---

    @classmethod
    def zero(cls, variables: Sequence[str] = (), field: CoefficientField = QQ) -> "Polynomial":
        return cls._raw(tuple(variables), {}, field)

    @classmethod
    def constant(cls, c: Any, variables: Sequence[str] = (), field: CoefficientField = QQ) -> "Polynomial":
        variables = tuple(variables)
        return cls._raw(variables, {(0,) * len(variables): field.convert(c)}, field)

    @classmethod
    def variable(cls, name: str, variables: Optional[Sequence[str]] = None, field: CoefficientField = QQ) -> "Polynomial":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            raise PolyError(f"Variable {name!r} not in {list(variables)}")
        e = tuple(1 if v == name else 0 for v in variables)
        return cls._raw(variables, {e: field.one}, field)

    @classmethod
    def from_univariate(cls, coeffs: Sequence[Any], var: str, field: CoefficientField = QQ) -> "Polynomial":
        """Coefficients listed from the constant term upward."""
        return cls((var,), {(i,): c for i, c in enumerate(coeffs)}, field)

    # --- basic queries ---

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self) -> Any:
        return self.terms.get((0,) * len(self.variables), self.field.zero)

    def total_degree(self) -> int:
        """Degree of the zero polynomial is -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def homogeneous_degree(self) -> Optional[int]:
        degrees = {sum(e) for e in self.terms}
        if len(degrees) == 1:
            return degrees.pop()
        return None

    def is_homogeneous(self, degree: Optional[int] = None) -> bool:
        if not self.terms:
            return True
        d = self.homogeneous_degree()
        return d is not None and (degree is None or d == degree)

    def used_variables(self) -> List[str]:
        return [v for i, v in enumerate(self.variables) if any(e[i] for e in self.terms)]

    def _index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise PolyError(f"Variable {var!r} not in {list(self.variables)}")

    def degree_in(self, var: str) -> int:
        if var not in self.variables:
            return 0 if self.terms else -1
        i = self._index(var)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def coefficient_in(self, var: str, k: int) -> "Polynomial":
        """Coefficient of var^k, as a polynomial over the same variable list."""
        if var not in self.variables:
            return self if k == 0 else Polynomial.zero(self.variables, self.field)
        i = self._index(var)
        out: Dict[Exponent, Any] = {}
        for e, c in self.terms.items():
            if e[i] == k:
                out[e[:i] + (0,) + e[i + 1:]] = c
        return Polynomial._raw(self.variables, out, self.field)

    def sorted_terms(self) -> List[Tuple[Exponent, Any]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    # --- variable lists and fields ---

    def with_variables(self, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.used_variables() if v not in variables]
        if missing:
            raise PolyError(f"Cannot drop variables in use: {missing}")
        pos = {v: i for i, v in enumerate(self.variables)}
        out: Dict[Exponent, Any] = {}
        for e, c in self.terms.items():
            out[tuple(e[pos[v]] if v in pos else 0 for v in variables)] = c
        return Polynomial._raw(variables, out, self.field)

    def trim_variables(self) -> "Polynomial":
        return self.with_variables(self.used_variables())

    def to_field(self, field: CoefficientField) -> "Polynomial":
        if self.field.same_kind(field):
            return self
        if isinstance(self.field, BallField) and not isinstance(field, BallField):
            raise FieldMismatchError("Cannot move a ball-coefficient polynomial to the rational field")
        return Polynomial._raw(self.variables, {e: field.convert(c) for e, c in self.terms.items()}, field)

    # --- arithmetic ---

    def _coerce(self, other: Any) -> "Polynomial":
        if isinstance(other, Polynomial):
            if not self.field.same_kind(other.field):
                raise FieldMismatchError(
                    f"Coefficient-field mismatch: {self.field.kind} vs {other.field.kind}"
                )
            return other
        if isinstance(other, _SCALAR_TYPES):
            if isinstance(other, (acb, arb)) and not isinstance(self.field, BallField):
                raise FieldMismatchError("Ball scalar combined with a rational polynomial")
            return Polynomial.constant(other, self.variables, self.field)
        raise PolyError(f"Unsupported operand type: {type(other).__name__}")

    @staticmethod
    def _align(a: "Polynomial", b: "Polynomial") -> Tuple["Polynomial", "Polynomial"]:
        if a.variables == b.variables:
            return a, b
        merged = a.variables + tuple(v for v in b.variables if v not in a.variables)
        return a.with_variables(merged), b.with_variables(merged)

    def __add__(self, other: Any) -> "Polynomial":
        a, b = Polynomial._align(self, self._coerce(other))
        out = dict(a.terms)
        for e, c in b.terms.items():
            out[e] = out[e] + c if e in out else c
        return Polynomial._raw(a.variables, out, a.field)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()}, self.field)

    def __sub__(self, other: Any) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "Polynomial":
        a, b = Polynomial._align(self, self._coerce(other))
        out: Dict[Exponent, Any] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                c = c1 * c2
                out[e] = out[e] + c if e in out else c
        return Polynomial._raw(a.variables, out, a.field)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise PolyError(f"Polynomial power must be a nonnegative integer, got {k!r}")
        result = Polynomial.constant(1, self.variables, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c: Any) -> "Polynomial":
        c = self.field.convert(c)
        return Polynomial._raw(self.variables, {e: v * c for e, v in self.terms.items()}, self.field)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, _SCALAR_TYPES):
            other = Polynomial.constant(other, self.variables, self.field)
        if not isinstance(other, Polynomial) or not self.field.same_kind(other.field):
            return NotImplemented
        a, b = Polynomial._align(self, other)
        return a.terms == b.terms

    __hash__ = None  # type: ignore[assignment]

    # --- calculus / substitution ---

    def diff(self, var: str) -> "Polynomial":
        if var not in self.variables:
            return Polynomial.zero(self.variables, self.field)
        i = self._index(var)
        out: Dict[Exponent, Any] = {}
        for e, c in self.terms.items():
            if e[i]:
                out[e[:i] + (e[i] - 1,) + e[i + 1:]] = c * e[i]
        return Polynomial._raw(self.variables, out, self.field)

    def evaluate(self, values: Mapping[str, Any]) -> Any:
        """
        Evaluate with arbitrary ring elements (field scalars, TruncatedSeries,
        Polynomials). Every used variable must be bound.
        """
        missing = [v for v in self.used_variables() if v not in values]
        if missing:
            raise PolyError(f"No value provided for variables: {missing}")
        powers: Dict[Tuple[str, int], Any] = {}

        def power(v: str, k: int) -> Any:
            key = (v, k)
            if key not in powers:
                powers[key] = values[v] if k == 1 else power(v, k - 1) * values[v]
            return powers[key]

        total: Any = None
        for e, c in self.sorted_terms():
            term: Any = None
            for v, k in zip(self.variables, e):
                if k:
                    term = power(v, k) if term is None else term * power(v, k)
            term = c if term is None else term * c
            total = term if total is None else total + term
        return self.field.zero if total is None else total

    def subs(self, mapping: Mapping[str, Any]) -> "Polynomial":
        """Substitute polynomials (or scalars) for variables; unmapped variables stay."""
        keep = tuple(v for v in self.variables if v not in mapping)
        values: Dict[str, Any] = {}
        for v in self.variables:
            if v in mapping:
                sub = mapping[v]
                values[v] = sub if isinstance(sub, Polynomial) else Polynomial.constant(sub, keep, self.field)
            else:
                values[v] = Polynomial.variable(v, keep, self.field)
        result = self.evaluate(values)
        if not isinstance(result, Polynomial):
            result = Polynomial.constant(result, keep, self.field)
        return result

    def __str__(self) -> str:
        from polytext import format_polynomial

        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, variables={list(self.variables)})"


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise PolyError(f"Unknown polynomial operation: {op!r}")


# ----------------------------
# Univariate machinery
# ----------------------------


def univariate_variable(*polys: Polynomial) -> str:
    used: List[str] = []
    for p in polys:
        for v in p.used_variables():
            if v not in used:
                used.append(v)
    if len(used) > 1:
        raise PolyError(f"Expected univariate input, got variables {used}")
    if used:
        return used[0]
    for p in polys:
        if p.variables:
            return p.variables[0]
    return "x"


def univariate_coeffs(p: Polynomial, var: Optional[str] = None) -> List[Any]:
    """Dense coefficient list, constant term first; [] for the zero polynomial."""
    var = var or univariate_variable(p)
    others = [v for v in p.used_variables() if v != var]
    if others:
        raise PolyError(f"Expected a polynomial in {var!r} only, also uses {others}")
    d = p.degree_in(var)
    if d < 0:
        return []
    out = [p.field.zero] * (d + 1)
    i = p.variables.index(var) if var in p.variables else None
    for e, c in p.terms.items():
        out[e[i] if i is not None else 0] = c
    return out


def _trim(coeffs: List[Any], field: CoefficientField) -> List[Any]:
    while coeffs and field.is_zero(coeffs[-1]):
        coeffs.pop()
    return coeffs


def _require_rational(*polys: Polynomial) -> None:
    for p in polys:
        if p.field.kind != QQ.kind:
            raise FieldMismatchError("Exact univariate gcd needs rational coefficients")


def to_fmpq_poly(p: Polynomial, var: Optional[str] = None) -> fmpq_poly:
    _require_rational(p)
    return fmpq_poly([fraction_to_fmpq(c) for c in univariate_coeffs(p, var)])


def from_fmpq_poly(f: fmpq_poly, var: str) -> Polynomial:
    return Polynomial.from_univariate([fmpq_to_fraction(c) for c in f.coeffs()], var, QQ)


def univariate_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd. gcd(a, 0) = monic(a); gcd(0, 0) = 0."""
    _require_rational(a, b)
    var = univariate_variable(a, b)
    g = to_fmpq_poly(a, var).gcd(to_fmpq_poly(b, var))
    if g.degree() < 0:
        return Polynomial.zero((var,), QQ)
    return from_fmpq_poly(g / g[g.degree()], var)


def univariate_divmod(a: Polynomial, b: Polynomial) -> Tuple[Polynomial, Polynomial]:
    _require_rational(a, b)
    var = univariate_variable(a, b)
    divisor = to_fmpq_poly(b, var)
    if divisor.degree() < 0:
        raise PolyError("Division by the zero polynomial")
    q, r = divmod(to_fmpq_poly(a, var), divisor)
    return from_fmpq_poly(q, var), from_fmpq_poly(r, var)


def to_fmpq_mat(rows: Sequence[Sequence[Any]]) -> fmpq_mat:
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    flat = [fraction_to_fmpq(Fraction(c)) for row in rows for c in row]
    return fmpq_mat(nrows, ncols, flat)


def exact_determinant(rows: Sequence[Sequence[Any]]) -> Fraction:
    if not rows:
        return Fraction(1)
    return fmpq_to_fraction(to_fmpq_mat(rows).det())


def sylvester_matrix(a: Sequence[Any], b: Sequence[Any]) -> List[List[Any]]:
    """Sylvester matrix of two dense coefficient lists (constant term first)."""
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    zero = a[0] * 0
    rows: List[List[Any]] = []
    for i in range(n):
        row = [zero] * size
        for j, c in enumerate(reversed(a)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for j, c in enumerate(reversed(b)):
            row[i + j] = c
        rows.append(row)
    return rows


def resultant(a: Polynomial, b: Polynomial, var: Optional[str] = None) -> Any:
    """Resultant via the Sylvester determinant; exact on rationals, a ball otherwise."""
    p = a._coerce(b)
    field = a.field
    var = var or univariate_variable(a, p)
    x = _trim(univariate_coeffs(a, var), field)
    y = _trim(univariate_coeffs(p, var), field)
    if not x or not y:
        return field.zero
    m, n = len(x) - 1, len(y) - 1
    if m == 0:
        return x[0] ** n
    if n == 0:
        return y[0] ** m
    rows = sylvester_matrix(x, y)
    if field.kind == QQ.kind:
        return exact_determinant(rows)
    return acb_mat(rows).det()


def discriminant(p: Polynomial, var: Optional[str] = None) -> Any:
    var = var or univariate_variable(p)
    coeffs = _trim(univariate_coeffs(p, var), p.field)
    n = len(coeffs) - 1
    if n < 1:
        raise PolyError("Discriminant needs degree at least 1")
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return resultant(p, p.diff(var), var) * sign / coeffs[-1]


def is_squarefree_certified(p: Polynomial) -> Certainty:
    """
    Exact track: YES iff gcd(p, p') is constant, NO otherwise.
    Ball track: YES when resultant(p, p') excludes 0, UNKNOWN otherwise; never NO.
    """
    var = univariate_variable(p)
    coeffs = _trim(univariate_coeffs(p, var), p.field)
    if len(coeffs) < 2:
        raise PolyError("Squarefree test needs degree at least 1")
    if p.field.kind == QQ.kind:
        f = to_fmpq_poly(p, var)
        return Certainty.YES if f.gcd(f.derivative()).degree() == 0 else Certainty.NO
    if p.field.may_be_zero(coeffs[-1]):
        return Certainty.UNKNOWN
    res = resultant(p, p.diff(var), var)
    if p.field.may_be_zero(res):
        logger.debug("Squarefree resultant ball contains 0: %s", res)
        return Certainty.UNKNOWN
    return Certainty.YES


# ----------------------------
# Truncated power series
# ----------------------------


class TruncatedSeries:
    """
    Dense series c_0 + c_1 t + ... + c_K t^K, known to be correct through
    order K. Binary operations keep the smaller order of their operands.
    """

    __slots__ = ("coeffs", "order", "var", "field")

    def __init__(
        self,
        coeffs: Sequence[Any],
        order: Optional[int] = None,
        var: str = "zeta",
        field: CoefficientField = QQ,
    ):
        if order is None:
            order = max(len(coeffs) - 1, 0)
        order = int(order)
        if order < 0:
            raise SeriesError(f"Truncation order must be nonnegative, got {order}")
        values = [field.convert(c) for c in list(coeffs)[: order + 1]]
        values.extend([field.zero] * (order + 1 - len(values)))
        self.coeffs = values
        self.order = order
        self.var = var
        self.field = field

    @classmethod
    def _raw(cls, coeffs: List[Any], order: int, var: str, field: CoefficientField) -> "TruncatedSeries":
        s = cls.__new__(cls)
        s.coeffs = coeffs
        s.order = order
        s.var = var
        s.field = field
        return s

    # --- constructors ---

    @classmethod
    def constant(cls, c: Any, order: int = DEFAULT_TRUNCATION, var: str = "zeta", field: CoefficientField = QQ) -> "TruncatedSeries":
        return cls([c], order, var, field)

    @classmethod
    def variable(cls, order: int = DEFAULT_TRUNCATION, var: str = "zeta", field: CoefficientField = QQ) -> "TruncatedSeries":
        return cls([0, 1], order, var, field)

    @classmethod
    def from_polynomial(cls, p: Polynomial, order: int = DEFAULT_TRUNCATION, var: Optional[str] = None) -> "TruncatedSeries":
        var = var or univariate_variable(p)
        return cls(univariate_coeffs(p, var), order, var, p.field)

    @classmethod
    def exp_series(cls, order: int = DEFAULT_TRUNCATION, scale: Any = 1, var: str = "zeta") -> "TruncatedSeries":
        """exp(scale * t) with rational scale."""
        scale = Fraction(scale)
        coeffs = [Fraction(1)]
        for k in range(1, order + 1):
            coeffs.append(coeffs[-1] * scale / k)
        return cls(coeffs, order, var, QQ)

    @classmethod
    def sin_series(cls, order: int = DEFAULT_TRUNCATION, var: str = "zeta") -> "TruncatedSeries":
        coeffs = [Fraction(0)] * (order + 1)
        fact = Fraction(1)
        for k in range(1, order + 1):
            fact *= k
            if k % 2:
                coeffs[k] = Fraction((-1) ** ((k - 1) // 2)) / fact
        return cls(coeffs, order, var, QQ)

    # --- queries ---

    def valuation(self) -> Optional[int]:
        for i, c in enumerate(self.coeffs):
            if not self.field.is_zero(c):
                return i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def truncate(self, order: int) -> "TruncatedSeries":
        order = min(int(order), self.order)
        return TruncatedSeries._raw(self.coeffs[: order + 1], order, self.var, self.field)

    def agrees_with(self, other: "TruncatedSeries", through: Optional[int] = None) -> bool:
        upto = min(self.order, other.order) if through is None else through
        if upto > min(self.order, other.order):
            raise SeriesError(f"Cannot compare through order {upto}; operands known through {min(self.order, other.order)}")
        return all(self.coeffs[i] == other.coeffs[i] for i in range(upto + 1))

    def to_polynomial(self) -> Polynomial:
        return Polynomial.from_univariate(self.coeffs, self.var, self.field)

    # --- arithmetic ---

    def _coerce(self, other: Any) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if not self.field.same_kind(other.field):
                raise FieldMismatchError(f"Series field mismatch: {self.field.kind} vs {other.field.kind}")
            if other.var != self.var:
                raise SeriesError(f"Series variable mismatch: {self.var!r} vs {other.var!r}")
            return other
        if isinstance(other, _SCALAR_TYPES):
            return TruncatedSeries.constant(other, self.order, self.var, self.field)
        raise SeriesError(f"Unsupported operand type: {type(other).__name__}")

    def __add__(self, other: Any) -> "TruncatedSeries":
        o = self._coerce(other)
        k = min(self.order, o.order)
        return TruncatedSeries._raw([self.coeffs[i] + o.coeffs[i] for i in range(k + 1)], k, self.var, self.field)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw([-c for c in self.coeffs], self.order, self.var, self.field)

    def __sub__(self, other: Any) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "TruncatedSeries":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "TruncatedSeries":
        if isinstance(other, _SCALAR_TYPES):
            c = self.field.convert(other)
            return TruncatedSeries._raw([x * c for x in self.coeffs], self.order, self.var, self.field)
        o = self._coerce(other)
        k = min(self.order, o.order)
        zero = self.field.zero
        out = [zero] * (k + 1)
        is_zero = self.field.is_zero
        for i in range(k + 1):
            a = self.coeffs[i]
            if is_zero(a):
                continue
            for j in range(k + 1 - i):
                b = o.coeffs[j]
                if not is_zero(b):
                    out[i + j] = out[i + j] + a * b
        return TruncatedSeries._raw(out, k, self.var, self.field)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "TruncatedSeries":
        if isinstance(other, _SCALAR_TYPES):
            c = self.field.convert(other)
            if self.field.is_zero(c):
                raise SeriesError("Division of a series by zero")
            return self * (self.field.one / c)
        return self * self._coerce(other).reciprocal()

    def __pow__(self, k: int) -> "TruncatedSeries":
        if not isinstance(k, int):
            raise SeriesError(f"Series power must be an integer, got {k!r}")
        if k < 0:
            return self.reciprocal() ** (-k)
        result = TruncatedSeries.constant(1, self.order, self.var, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and self.var == other.var and self.coeffs == other.coeffs

    __hash__ = None  # type: ignore[assignment]

    # --- calculus ---

    def derivative(self, times: int = 1) -> "TruncatedSeries":
        s = self
        for _ in range(int(times)):
            if s.order < 1:
                raise SeriesError("Truncation order exhausted by differentiation")
            coeffs = [s.coeffs[i] * i for i in range(1, s.order + 1)]
            s = TruncatedSeries._raw(coeffs, s.order - 1, s.var, s.field)
        return s

    def integral(self, constant: Any = 0) -> "TruncatedSeries":
        coeffs = [self.field.convert(constant)]
        coeffs.extend(c / (i + 1) for i, c in enumerate(self.coeffs))
        return TruncatedSeries._raw(coeffs, self.order + 1, self.var, self.field)

    def reciprocal(self) -> "TruncatedSeries":
        a0 = self.coeffs[0]
        if self.field.may_be_zero(a0):
            raise SeriesError("Reciprocal of a series with zero constant term (pole); factor it out first")
        inv0 = self.field.one / a0
        out = [inv0]
        for n in range(1, self.order + 1):
            acc = self.field.zero
            for i in range(1, n + 1):
                if not self.field.is_zero(self.coeffs[i]):
                    acc = acc + self.coeffs[i] * out[n - i]
            out.append(-acc * inv0)
        return TruncatedSeries._raw(out, self.order, self.var, self.field)

    def rational_power(self, alpha: Any) -> "TruncatedSeries":
        """self^alpha for rational alpha; the constant term must be 1."""
        alpha = Fraction(alpha)
        if self.coeffs[0] != self.field.one:
            raise SeriesError("Rational powers need a series with constant term 1")
        a = self.coeffs
        out = [self.field.one]
        for n in range(1, self.order + 1):
            acc = self.field.zero
            for k in range(1, n + 1):
                if not self.field.is_zero(a[k]):
                    acc = acc + a[k] * out[n - k] * self.field.convert((alpha + 1) * k - n)
            out.append(acc / n)
        return TruncatedSeries._raw(out, self.order, self.var, self.field)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner(t)); inner must have zero constant term."""
        inner = self._coerce_inner(inner)
        if not self.field.is_zero(inner.coeffs[0]):
            raise SeriesError("Composition needs an inner series with zero constant term")
        k = min(self.order, inner.order)
        t = inner.truncate(k)
        result = TruncatedSeries.constant(self.coeffs[k], k, inner.var, self.field)
        for i in range(k - 1, -1, -1):
            result = result * t + self.coeffs[i]
        return result

    def _coerce_inner(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        if not isinstance(inner, TruncatedSeries):
            raise SeriesError(f"Expected a series, got {type(inner).__name__}")
        if not self.field.same_kind(inner.field):
            raise FieldMismatchError(f"Series field mismatch: {self.field.kind} vs {inner.field.kind}")
        return inner

    def revert(self) -> "TruncatedSeries":
        """Compositional inverse g with self(g(t)) = t; needs c_0 = 0 and c_1 != 0."""
        if not self.field.is_zero(self.coeffs[0]):
            raise SeriesError("Reversion needs zero constant term")
        if self.order < 1 or self.field.may_be_zero(self.coeffs[1]):
            raise SeriesError("Reversion needs a nonzero linear coefficient")
        k = self.order
        inv1 = self.field.one / self.coeffs[1]
        t = TruncatedSeries.variable(k, self.var, self.field)
        g = t * inv1
        # each pass fixes one more coefficient of g
        for _ in range(k - 1):
            residual = self.compose(g) - t
            if residual.is_zero():
                break
            g = g - residual * inv1
        return g

    def evaluate(self, x: Any) -> Any:
        total: Any = self.coeffs[self.order]
        for c in reversed(self.coeffs[: self.order]):
            total = total * x + c
        return total

    def __repr__(self) -> str:
        shown = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if self.order >= 6 else ""
        return f"TruncatedSeries([{shown}{more}], order={self.order}, var={self.var!r})"


def series_compose_and_invert(s: TruncatedSeries, t: Optional[TruncatedSeries] = None) -> TruncatedSeries:
    """s(t) when t is given, otherwise 1/s."""
    if t is None:
        return s.reciprocal()
    return s.compose(t)


def series_from_values(values: Iterable[Any], order: int, var: str = "zeta", field: CoefficientField = QQ) -> TruncatedSeries:
    return TruncatedSeries(list(values), order, var, field)
