"""
jetalg.py

Formal k-jet differentials on affine n-space.

A jet monomial is a product of the jet variables d^l z_j (1 <= l <= k); each
d^l z_j contributes l to the weight. Coordinates z_j themselves carry weight 0
and live in the polynomial coefficient, so a JetDifferential is a map
{JetMonomial: Polynomial in z1..zn}. Products are symmetric.

Pullback along a curve germ f substitutes d^l z_j -> f_j^(l)(t) and returns
the scalar series tau(t) with f*omega = tau(t) (dt)^m.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar, Union

from fields import QQ, CoefficientField, FieldMismatchError, PolyError
from polycore import DEFAULT_TRUNCATION, Polynomial, SeriesError, TruncatedSeries, univariate_variable
from polytext import Builder, parse_expression, tokenize

logger = logging.getLogger(__name__)

JetKey = Tuple[int, int]  # (variable index j >= 1, jet order l >= 1)

T = TypeVar("T")


class JetError(ValueError):
    pass


def coordinate_names(n: int) -> Tuple[str, ...]:
    return tuple(f"z{j}" for j in range(1, n + 1))


# ----------------------------
# Jet monomials
# ----------------------------


@dataclass(frozen=True)
class JetMonomial:
    exps: Tuple[Tuple[JetKey, int], ...] = ()

    @classmethod
    def from_dict(cls, exps: Mapping[JetKey, int]) -> "JetMonomial":
        items = []
        for (j, l), nu in exps.items():
            if j < 1 or l < 1:
                raise JetError(f"Jet variable d{l} z{j} out of range")
            if nu < 0:
                raise JetError(f"Negative exponent {nu} on d{l} z{j}")
            if nu:
                items.append(((int(j), int(l)), int(nu)))
        return cls(tuple(sorted(items)))

    @classmethod
    def single(cls, j: int, l: int, power: int = 1) -> "JetMonomial":
        return cls.from_dict({(j, l): power})

    def as_dict(self) -> Dict[JetKey, int]:
        return dict(self.exps)

    @property
    def weight(self) -> int:
        return sum(l * nu for (_, l), nu in self.exps)

    @property
    def order(self) -> int:
        return max((l for (_, l), _nu in self.exps), default=0)

    @property
    def max_index(self) -> int:
        return max((j for (j, _), _nu in self.exps), default=0)

    def __mul__(self, other: "JetMonomial") -> "JetMonomial":
        out = self.as_dict()
        for key, nu in other.exps:
            out[key] = out.get(key, 0) + nu
        return JetMonomial.from_dict(out)

    def derivative_terms(self) -> List[Tuple[int, "JetMonomial"]]:
        """d(mu) as a list of (integer multiplier, monomial), by the Leibniz rule."""
        out: List[Tuple[int, JetMonomial]] = []
        base = self.as_dict()
        for (j, l), nu in self.exps:
            nxt = dict(base)
            nxt[(j, l)] = nu - 1
            nxt[(j, l + 1)] = nxt.get((j, l + 1), 0) + 1
            out.append((nu, JetMonomial.from_dict(nxt)))
        return out

    def sort_key(self) -> Tuple[Any, ...]:
        return (self.weight, tuple((-j, l, nu) for (j, l), nu in self.exps))

    def __str__(self) -> str:
        return format_jet_monomial(self)


def format_jet_variable(j: int, l: int) -> str:
    return f"d z{j}" if l == 1 else f"d{l} z{j}"


def format_jet_monomial(mu: JetMonomial) -> str:
    parts = []
    for (j, l), nu in mu.exps:
        atom = f"({format_jet_variable(j, l)})"
        parts.append(atom if nu == 1 else f"{atom}^{nu}")
    return "*".join(parts)


# ----------------------------
# Jet differentials
# ----------------------------


class JetDifferential:
    __slots__ = ("n", "k", "terms", "field")

    def __init__(
        self,
        n: int,
        terms: Optional[Mapping[JetMonomial, Any]] = None,
        k: Optional[int] = None,
        field: CoefficientField = QQ,
    ):
        if n < 1:
            raise JetError(f"Ambient dimension must be at least 1, got {n}")
        names = coordinate_names(n)
        clean: Dict[JetMonomial, Polynomial] = {}
        for mu, c in (terms or {}).items():
            if mu.max_index > n:
                raise JetError(f"Jet monomial {mu} uses a variable beyond z{n}")
            poly = c if isinstance(c, Polynomial) else Polynomial.constant(c, names, field)
            if not poly.field.same_kind(field):
                raise FieldMismatchError(f"Coefficient field {poly.field.kind} differs from {field.kind}")
            stray = [v for v in poly.used_variables() if v not in names]
            if stray:
                raise JetError(f"Coefficient uses non-coordinate variables {stray}")
            poly = poly.with_variables(names)
            if mu in clean:
                poly = clean[mu] + poly
            clean[mu] = poly
        self.n = int(n)
        self.field = field
        self.terms = {mu: c for mu, c in clean.items() if not c.is_zero()}
        actual = max((mu.order for mu in self.terms), default=0)
        self.k = max(int(k or 0), actual)

    # --- constructors ---

    @classmethod
    def zero(cls, n: int, field: CoefficientField = QQ) -> "JetDifferential":
        return cls(n, {}, 0, field)

    @classmethod
    def from_polynomial(cls, p: Polynomial, n: int) -> "JetDifferential":
        return cls(n, {JetMonomial(): p}, 0, p.field)

    @classmethod
    def constant(cls, c: Any, n: int, field: CoefficientField = QQ) -> "JetDifferential":
        return cls(n, {JetMonomial(): c}, 0, field)

    @classmethod
    def jet_variable(cls, j: int, l: int, n: int, field: CoefficientField = QQ) -> "JetDifferential":
        if not 1 <= j <= n:
            raise JetError(f"Jet variable index z{j} outside 1..{n}")
        return cls(n, {JetMonomial.single(j, l): 1}, l, field)

    # --- grading ---

    def weights(self) -> List[int]:
        return sorted({mu.weight for mu in self.terms})

    def homogeneous_weight(self) -> Optional[int]:
        ws = self.weights()
        return ws[0] if len(ws) == 1 else None

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    @property
    def weight(self) -> Optional[int]:
        return self.homogeneous_weight()

    @property
    def order(self) -> int:
        return max((mu.order for mu in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    # --- arithmetic ---

    def _coerce(self, other: Any) -> "JetDifferential":
        if isinstance(other, JetDifferential):
            if other.n != self.n:
                n = max(self.n, other.n)
                return JetDifferential(n, other.terms, other.k, other.field)
            return other
        if isinstance(other, Polynomial):
            return JetDifferential.from_polynomial(other.to_field(self.field), self.n)
        return JetDifferential.constant(other, self.n, self.field)

    def _lift(self, n: int) -> "JetDifferential":
        return self if n == self.n else JetDifferential(n, self.terms, self.k, self.field)

    def __add__(self, other: Any) -> "JetDifferential":
        o = self._coerce(other)
        n = max(self.n, o.n)
        a, b = self._lift(n), o._lift(n)
        out = dict(a.terms)
        for mu, c in b.terms.items():
            out[mu] = out[mu] + c if mu in out else c
        return JetDifferential(n, out, max(a.k, b.k), a.field)

    __radd__ = __add__

    def __neg__(self) -> "JetDifferential":
        return JetDifferential(self.n, {mu: -c for mu, c in self.terms.items()}, self.k, self.field)

    def __sub__(self, other: Any) -> "JetDifferential":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "JetDifferential":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "JetDifferential":
        o = self._coerce(other)
        n = max(self.n, o.n)
        a, b = self._lift(n), o._lift(n)
        out: Dict[JetMonomial, Polynomial] = {}
        for mu1, c1 in a.terms.items():
            for mu2, c2 in b.terms.items():
                mu = mu1 * mu2
                c = c1 * c2
                out[mu] = out[mu] + c if mu in out else c
        return JetDifferential(n, out, max(a.k, b.k), a.field)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "JetDifferential":
        if not isinstance(e, int) or e < 0:
            raise JetError(f"Jet power must be a nonnegative integer, got {e!r}")
        result = JetDifferential.constant(1, self.n, self.field)
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JetDifferential):
            return NotImplemented
        n = max(self.n, other.n)
        return self._lift(n).terms == other._lift(n).terms

    __hash__ = None  # type: ignore[assignment]

    # --- the operator d ---

    def total_derivative(self) -> "JetDifferential":
        """d(c*mu) = sum_j (dc/dz_j)(d z_j)*mu + c*d(mu); weight rises by exactly 1."""
        names = coordinate_names(self.n)
        out: Dict[JetMonomial, Polynomial] = {}

        def add(mu: JetMonomial, c: Polynomial) -> None:
            if c.is_zero():
                return
            out[mu] = out[mu] + c if mu in out else c

        for mu, c in self.terms.items():
            for j, name in enumerate(names, start=1):
                dc = c.diff(name)
                if not dc.is_zero():
                    add(mu * JetMonomial.single(j, 1), dc)
            for mult, nu in mu.derivative_terms():
                add(nu, c.scale(mult))
        return JetDifferential(self.n, out, self.k + 1 if self.terms else self.k, self.field)

    def __str__(self) -> str:
        return format_jet_differential(self)

    def __repr__(self) -> str:
        return f"JetDifferential({str(self)!r}, n={self.n}, k={self.k})"


def total_derivative(omega: JetDifferential) -> JetDifferential:
    return omega.total_derivative()


# ----------------------------
# Curve germs
# ----------------------------


class CurveGerm:
    """Truncated series map t -> (f_1(t), ..., f_n(t))."""

    def __init__(self, components: Sequence[TruncatedSeries]):
        comps = list(components)
        if not comps:
            raise JetError("A curve germ needs at least one component")
        var, field = comps[0].var, comps[0].field
        for s in comps:
            if s.var != var:
                raise JetError(f"Germ components use different variables: {var!r} vs {s.var!r}")
            if not s.field.same_kind(field):
                raise FieldMismatchError("Germ components use different coefficient fields")
        self.components = comps
        self.var = var
        self.field = field
        self._derivs: Dict[Tuple[int, int], TruncatedSeries] = {}

    @classmethod
    def from_polynomials(cls, polys: Sequence[Polynomial], order: int = DEFAULT_TRUNCATION, var: str = "zeta") -> "CurveGerm":
        comps = []
        for p in polys:
            used = p.used_variables()
            v = used[0] if used else var
            if len(used) > 1:
                raise JetError(f"Germ component {p} is not univariate")
            s = TruncatedSeries.from_polynomial(p, order, v)
            comps.append(TruncatedSeries(s.coeffs, order, var, p.field))
        return cls(comps)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return min(s.order for s in self.components)

    def derivative(self, j: int, l: int) -> TruncatedSeries:
        """l-th derivative of the j-th component (1-based j)."""
        key = (j, l)
        if key not in self._derivs:
            if not 1 <= j <= self.n:
                raise JetError(f"Germ has no component z{j} (n={self.n})")
            base = self.components[j - 1] if l == 0 else self.derivative(j, l - 1)
            self._derivs[key] = base if l == 0 else base.derivative()
        return self._derivs[key]

    def coordinate_values(self) -> Dict[str, TruncatedSeries]:
        return {name: s for name, s in zip(coordinate_names(self.n), self.components)}

    def evaluate(self, p: Polynomial) -> TruncatedSeries:
        """p(f(t)) for a polynomial in z1..zn."""
        names = coordinate_names(self.n)
        stray = [v for v in p.used_variables() if v not in names]
        if stray:
            raise JetError(f"Polynomial uses variables {stray} outside the germ coordinates {list(names)}")
        p = p.to_field(self.field) if not p.field.same_kind(self.field) else p
        value = p.evaluate(self.coordinate_values())
        if isinstance(value, TruncatedSeries):
            return value
        return TruncatedSeries.constant(value, self.order, self.var, self.field)

    def reparametrize(self, inner: TruncatedSeries) -> "CurveGerm":
        return CurveGerm([s.compose(inner) for s in self.components])

    def __repr__(self) -> str:
        return f"CurveGerm(n={self.n}, order={self.order}, var={self.var!r})"


def pullback(omega: JetDifferential, f: CurveGerm) -> TruncatedSeries:
    """Scalar series tau with f*omega = tau (dt)^m; omega must be weight-homogeneous."""
    if omega.n > f.n:
        raise JetError(f"Jet differential on C^{omega.n} cannot be pulled back along a germ into C^{f.n}")
    if omega.is_zero():
        return TruncatedSeries.constant(0, f.order, f.var, f.field)
    m = omega.homogeneous_weight()
    if m is None:
        raise JetError(f"Pullback needs a weight-homogeneous jet differential, got weights {omega.weights()}")
    k = omega.order
    if f.order < k * m:
        raise JetError(f"Germ truncation {f.order} is below the required depth k*m = {k}*{m} = {k * m}")
    names = coordinate_names(f.n)
    total: Optional[TruncatedSeries] = None
    for mu in sorted(omega.terms, key=JetMonomial.sort_key):
        c = omega.terms[mu].with_variables(names)
        term = f.evaluate(c)
        for (j, l), nu in mu.exps:
            term = term * (f.derivative(j, l) ** nu)
        total = term if total is None else total + term
    return total  # type: ignore[return-value]


# ----------------------------
# Wronskians
# ----------------------------


def determinant(matrix: Sequence[Sequence[T]]) -> T:
    """Cofactor determinant over any commutative ring, memoized on column subsets."""
    s = len(matrix)
    if s == 0:
        raise JetError("Determinant of an empty matrix")
    memo: Dict[int, Any] = {}

    def minor(row: int, cols: int) -> Any:
        if row == s:
            return None
        if cols in memo:
            return memo[cols]
        acc: Any = None
        sign = 1
        for c in range(s):
            if cols & (1 << c):
                continue
            rest = minor(row + 1, cols | (1 << c))
            term = matrix[row][c] if rest is None else matrix[row][c] * rest
            term = term if sign > 0 else -term
            acc = term if acc is None else acc + term
            sign = -sign
        memo[cols] = acc
        return acc

    return minor(0, 0)


def _as_series(entry: Union[Polynomial, TruncatedSeries], germ: Optional[CurveGerm], order: int) -> TruncatedSeries:
    if isinstance(entry, TruncatedSeries):
        return entry
    if isinstance(entry, Polynomial):
        if germ is not None:
            return germ.evaluate(entry)
        var = univariate_variable(entry)
        return TruncatedSeries.from_polynomial(entry, order, var)
    raise JetError(f"Wronskian entries must be polynomials or series, got {type(entry).__name__}")


def wronskian_as_jet(
    entries: Sequence[Union[Polynomial, TruncatedSeries]],
    germ: Optional[CurveGerm] = None,
    order: int = DEFAULT_TRUNCATION,
) -> TruncatedSeries:
    """W(u_1..u_s) = det[u_j^(i-1)] as a series, known through order K - (s - 1)."""
    if not entries:
        raise JetError("Wronskian of an empty entry list")
    series = [_as_series(e, germ, order) for e in entries]
    var = series[0].var
    for s in series:
        if s.var != var:
            raise JetError(f"Wronskian entries use different variables: {var!r} vs {s.var!r}")
    size = len(series)
    if min(s.order for s in series) < size - 1:
        raise SeriesError(f"Truncation too small for a {size}x{size} Wronskian")
    rows = [series]
    for _ in range(1, size):
        rows.append([s.derivative() for s in rows[-1]])
    return determinant(rows)


def wronskian_jet(polys: Sequence[Polynomial], n: int) -> JetDifferential:
    """The Wronskian of coordinate polynomials as a jet differential of weight s(s-1)/2."""
    if not polys:
        raise JetError("Wronskian of an empty entry list")
    rows = [[JetDifferential.from_polynomial(p, n) for p in polys]]
    for _ in range(1, len(polys)):
        rows.append([w.total_derivative() for w in rows[-1]])
    return determinant(rows)


# ----------------------------
# Text grammar
# ----------------------------


class JetBuilder(Builder):
    def __init__(self, n: int, field: CoefficientField):
        self.n = n
        self.field = field
        self.names = coordinate_names(n)

    def number(self, value: Fraction) -> JetDifferential:
        return JetDifferential.constant(value, self.n, self.field)

    def ball(self, text: str) -> JetDifferential:
        from polytext import parse_ball_literal

        return JetDifferential.constant(self.field.convert(parse_ball_literal(text)), self.n, self.field)

    def variable(self, name: str) -> JetDifferential:
        if name not in self.names:
            raise JetError(f"Unknown coordinate {name!r}; expected one of {list(self.names)}")
        return JetDifferential.from_polynomial(Polynomial.variable(name, self.names, self.field), self.n)

    def jet(self, var: str, order: int) -> JetDifferential:
        j = int(var[1:])
        return JetDifferential.jet_variable(j, order, self.n, self.field)


def parse_jet_differential(text: str, n: Optional[int] = None, field: CoefficientField = QQ) -> JetDifferential:
    if n is None:
        indices = []
        for tok in tokenize(text, allow_jets=True):
            if tok.kind in ("ident", "jet") and tok.text.startswith("z") and tok.text[1:].isdigit():
                indices.append(int(tok.text[1:]))
        n = max(indices, default=1)
    try:
        return parse_expression(text, JetBuilder(n, field), allow_jets=True)
    except PolyError as e:
        raise JetError(str(e))


def format_jet_differential(omega: JetDifferential) -> str:
    if omega.is_zero():
        return "0"
    pieces: List[str] = []
    for mu in sorted(omega.terms, key=JetMonomial.sort_key, reverse=True):
        c = omega.terms[mu]
        mono = format_jet_monomial(mu)
        sign = "+"
        if len(c.terms) == 1:
            (e, coeff), = c.terms.items()
            if c.field.kind == QQ.kind and coeff < 0:
                sign, c = "-", -c
            text = str(c)
            if not mono:
                body = text
            elif text == "1":
                body = mono
            else:
                body = f"{text}*{mono}"
        else:
            body = f"({c})*{mono}" if mono else str(c)
        if not pieces:
            pieces.append(body if sign == "+" else f"-{body}")
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)
