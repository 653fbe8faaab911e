"""
nevanlinna.py

Numerical value-distribution functionals on circles |zeta| = r:
  - circle averages A_r (trapezoid rule, error from node halving)
  - counting / proximity / characteristic functions of meromorphic samples
  - the elliptic-curve theta model and the defect ratio m(r) / T(r)
  - probes: curvature identity, calculus-lemma inequality, Green identity

All numerics are numpy complex128. Rational samples are reduced exactly first
and their poles come from certified root isolation (flint).
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from flint import acb, acb_poly, fmpq_poly
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as npoly
from scipy.special import logsumexp

from fields import (
    DEFAULT_PRECISION,
    QQ,
    PolyError,
    ball_field,
    ball_from_parts,
    fraction_to_fmpq,
    working_precision,
)
from polycore import (
    Polynomial,
    TruncatedSeries,
    univariate_coeffs,
    univariate_divmod,
    univariate_gcd,
    univariate_variable,
)
from polytext import parse_polynomial

logger = logging.getLogger(__name__)


DEFAULT_NODES = 512
RADIAL_NUDGE = 1e-9
DEFAULT_RADIAL_NODES = 96
THETA_TAIL_TOLERANCE = 1e-18
NEAR_ZERO_LOG = math.log(1e-12)

Evaluator = Callable[[np.ndarray], np.ndarray]


class NevanlinnaError(ValueError):
    pass


def _numeric(c: Any) -> complex:
    if isinstance(c, acb):
        return complex(float(c.real.mid()), float(c.imag.mid()))
    if isinstance(c, Fraction):
        return complex(float(c))
    return complex(c)


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ys against xs."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise NevanlinnaError(f"Slope fit needs at least 2 paired points, got {len(xs)} and {len(ys)}")
    return float(np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)[0])


def radius_grid(spec: str, r_min: float = 1.0, r_max: Optional[float] = None) -> List[float]:
    """
    Radius grid from text:
      "log:32"       32 geometrically spaced radii in [r_min, r_max]
      "lin:10"       10 evenly spaced radii in [r_min, r_max]
      "5,10,20,40"   explicit list
    """
    text = (spec or "").strip()
    if text.startswith(("log:", "lin:")):
        kind, count = text.split(":", 1)
        try:
            n = int(count)
        except ValueError:
            raise NevanlinnaError(f"Invalid grid size in {spec!r}") from None
        if r_max is None:
            raise NevanlinnaError(f"Grid {spec!r} needs a maximum radius")
        if n < 2:
            raise NevanlinnaError(f"Grid {spec!r} needs at least 2 radii")
        if kind == "log":
            radii = [float(x) for x in np.geomspace(r_min, r_max, n)]
        else:
            radii = [float(x) for x in np.linspace(r_min, r_max, n)]
    else:
        try:
            radii = [float(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise NevanlinnaError(f"Invalid radius list {spec!r}") from None
    return _check_grid(radii)


def _check_grid(radii: Sequence[float]) -> List[float]:
    out = [float(r) for r in radii]
    if not out:
        raise NevanlinnaError("Empty radius grid")
    if out[0] <= 0:
        raise NevanlinnaError(f"Radii must be positive, got {out[0]}")
    for a, b in zip(out, out[1:]):
        if b <= a:
            raise NevanlinnaError(f"Radius grid must be increasing, got {a} then {b}")
    return out


# ----------------------------
# Circle averages
# ----------------------------


@dataclass
class CircleAverage:
    value: float
    error: float


def circle_points(r: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * np.pi * np.arange(nodes) / nodes
    return angles, r * np.exp(1j * angles)


def _evaluate_real(integrand: Callable[[np.ndarray], Any], z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        values = np.asarray(integrand(z), dtype=float)
    return np.array(np.broadcast_to(values, z.shape), dtype=float)


def circle_average(
    integrand: Callable[[np.ndarray], Any],
    r: float,
    nodes: int = DEFAULT_NODES,
    nudge: float = RADIAL_NUDGE,
) -> CircleAverage:
    """
    Trapezoid average of a real integrand over |zeta| = r. Non-finite samples
    are re-evaluated at radius r(1 + nudge); the error is |A_N - A_{N/2}|.
    """
    if r <= 0:
        raise NevanlinnaError(f"Radius must be positive, got {r}")
    if nodes < 4 or nodes % 2:
        raise NevanlinnaError(f"Node count must be an even integer >= 4, got {nodes}")

    angles, z = circle_points(r, nodes)
    values = _evaluate_real(integrand, z)
    bad = ~np.isfinite(values)
    if bad.any():
        logger.info("Radial nudge at r=%g for %d of %d nodes", r, int(bad.sum()), nodes)
        moved = (r * (1.0 + nudge)) * np.exp(1j * angles[bad])
        values[bad] = _evaluate_real(integrand, moved)
        still = ~np.isfinite(values)
        if still.any():
            listed = ", ".join(f"{a:.6f}" for a in angles[still][:10])
            raise NevanlinnaError(f"Integrand not finite on |zeta|={r:g} after radial nudge at angles [{listed}]")

    fine = float(values.mean())
    coarse = float(values[::2].mean())
    return CircleAverage(fine, abs(fine - coarse))


def log_circle_average(log_g: Callable[[np.ndarray], Any], r: float, nodes: int = DEFAULT_NODES) -> float:
    """log A_r(g) from samples of log g, without forming g."""
    _, z = circle_points(r, nodes)
    values = _evaluate_real(log_g, z)
    if not np.isfinite(values).all():
        raise NevanlinnaError(f"log g not finite on |zeta|={r:g}")
    return float(logsumexp(values) - math.log(nodes))


# ----------------------------
# Meromorphic samples
# ----------------------------


@dataclass
class MeromorphicSample:
    """
    A meromorphic function known through an evaluator and its poles inside
    r_max. Rational samples also carry their reduced numerator/denominator.
    """

    evaluator: Evaluator
    poles: List[Tuple[complex, int]]
    kind: str = "plugin"
    r_max: float = math.inf
    numerator: Optional[Polynomial] = None
    denominator: Optional[Polynomial] = None
    label: str = ""

    def __call__(self, z: Any) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self.evaluator(np.asarray(z, dtype=complex))

    @property
    def degree(self) -> Optional[int]:
        if self.kind != "rational":
            return None
        return max(self.numerator.total_degree(), self.denominator.total_degree(), 0)

    def check_radius(self, r: float) -> None:
        if r > self.r_max:
            raise NevanlinnaError(f"Radius {r:g} is beyond the pole list validity radius {self.r_max:g}")

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "label": self.label,
            "degree": self.degree,
            "r_max": None if math.isinf(self.r_max) else self.r_max,
            "poles": [{"re": z.real, "im": z.imag, "mult": m} for z, m in self.poles],
        }


def polynomial_roots(p: Polynomial, var: Optional[str] = None) -> List[Tuple[complex, int]]:
    """
    Roots with multiplicity. Rational input: fmpq_poly.complex_roots. Ball
    input: acb_poly.roots, which requires distinct roots (multiplicity 1).
    """
    var = var or univariate_variable(p)
    coeffs = univariate_coeffs(p, var)
    if not coeffs:
        raise NevanlinnaError("The zero polynomial has no isolated roots")

    v = 0
    while p.field.is_zero(coeffs[v]):
        v += 1
    roots: List[Tuple[complex, int]] = [(0j, v)] if v else []
    rest = coeffs[v:]
    if len(rest) == 1:
        return roots

    if p.field.kind == QQ.kind:
        found = fmpq_poly([fraction_to_fmpq(c) for c in rest]).complex_roots()
        roots.extend((_numeric(z), int(m)) for z, m in found)
        return roots

    try:
        found = acb_poly(rest).roots()
    except ValueError as exc:
        bits = getattr(p.field, "precision", DEFAULT_PRECISION)
        raise NevanlinnaError(f"Could not isolate the roots of {p} at {bits} bits: {exc}") from exc
    roots.extend((_numeric(z), 1) for z in found)
    return roots


def _polynomial_evaluator(coeffs: Sequence[complex]) -> Evaluator:
    c = np.asarray(coeffs if len(coeffs) else [0.0], dtype=complex)
    return lambda z: npoly.polyval(z, c)


def rational_sample(
    numerator: Polynomial,
    denominator: Optional[Polynomial] = None,
    label: str = "",
) -> MeromorphicSample:
    if denominator is None:
        denominator = Polynomial.constant(1, numerator.variables, numerator.field)
    if denominator.is_zero():
        raise NevanlinnaError("Denominator is the zero polynomial")
    try:
        var = univariate_variable(numerator, denominator)
    except PolyError as exc:
        raise NevanlinnaError(str(exc)) from exc

    num = numerator.trim_variables().with_variables((var,))
    den = denominator.trim_variables().with_variables((var,))
    if num.field.kind != den.field.kind:
        bf = num.field if num.field.kind != QQ.kind else den.field
        num, den = num.to_field(bf), den.to_field(bf)

    if num.field.kind == QQ.kind:
        g = univariate_gcd(num, den)
        if g.total_degree() > 0:
            num = univariate_divmod(num, g)[0]
            den = univariate_divmod(den, g)[0]

    top = _polynomial_evaluator([_numeric(c) for c in univariate_coeffs(num, var)])
    bottom = _polynomial_evaluator([_numeric(c) for c in univariate_coeffs(den, var)])
    poles = polynomial_roots(den, var) if den.total_degree() > 0 else []
    return MeromorphicSample(
        evaluator=lambda z: top(z) / bottom(z),
        poles=poles,
        kind="rational",
        numerator=num,
        denominator=den,
        label=label or f"({num})/({den})",
    )


def plugin_sample(
    evaluator: Evaluator,
    poles: Sequence[Tuple[complex, int]],
    r_max: float,
    label: str = "",
) -> MeromorphicSample:
    checked = []
    for z, m in poles:
        if int(m) < 1:
            raise NevanlinnaError(f"Pole multiplicity must be positive, got {m} at {z}")
        checked.append((complex(z), int(m)))
    if r_max <= 0:
        raise NevanlinnaError(f"Validity radius must be positive, got {r_max}")
    return MeromorphicSample(evaluator=evaluator, poles=checked, kind="plugin", r_max=float(r_max), label=label)


def _division_split(text: str) -> Optional[int]:
    """Index of the top-level '/' separating numerator from denominator."""
    depth = 0
    cut = None
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            before = text[:i].rstrip()
            after = text[i + 1 :].lstrip()
            numeric = before[-1:].isdigit() and after[:1].isdigit()
            if not numeric:
                cut = i
    return cut


def sample_from_text(text: str) -> MeromorphicSample:
    """Parse 'rational:<num>/<den>' (the '/<den>' part is optional)."""
    body = text.strip()
    if not body.startswith("rational:"):
        raise NevanlinnaError(f"Unknown sample {text!r}; expected 'rational:<num>/<den>'")
    body = body[len("rational:") :]
    cut = _division_split(body)
    num_text, den_text = (body, "1") if cut is None else (body[:cut], body[cut + 1 :])
    try:
        num = parse_polynomial(num_text)
        den = parse_polynomial(den_text)
    except PolyError as exc:
        raise NevanlinnaError(f"Cannot parse sample {text!r}: {exc}") from exc
    return rational_sample(num, den, label=body)


def _require_rational_kind(F: MeromorphicSample) -> None:
    if F.kind != "rational":
        raise NevanlinnaError(f"Operation needs a rational sample, got kind {F.kind!r}")


def _shift_scalar(a: Any) -> Any:
    if isinstance(a, (int, Fraction)):
        return Fraction(a)
    if isinstance(a, acb):
        return a
    c = complex(a)
    if c.imag == 0:
        return Fraction(c.real)
    return ball_from_parts(Fraction(c.real), Fraction(c.imag))


def shifted_reciprocal(F: MeromorphicSample, a: Any) -> MeromorphicSample:
    """The rational sample 1/(F - a)."""
    _require_rational_kind(F)
    shift = _shift_scalar(a)
    num, den = F.numerator, F.denominator
    with working_precision(DEFAULT_PRECISION):
        if isinstance(shift, acb):
            bf = ball_field(DEFAULT_PRECISION)
            num, den = num.to_field(bf), den.to_field(bf)
        diff = num - den.scale(shift)
        if diff.is_zero():
            raise NevanlinnaError(f"F is identically {a}; 1/(F - a) is undefined")
        return rational_sample(den, diff, label=f"1/(({F.label}) - ({a}))")


def log_derivative(F: MeromorphicSample) -> MeromorphicSample:
    """The rational sample F'/F."""
    _require_rational_kind(F)
    num, den = F.numerator, F.denominator
    if num.is_zero():
        raise NevanlinnaError("Logarithmic derivative of the zero function")
    var = univariate_variable(num, den)
    top = num.diff(var) * den - num * den.diff(var)
    with working_precision(DEFAULT_PRECISION):
        return rational_sample(top, num * den, label=f"({F.label})'/({F.label})")


# ----------------------------
# Counting, proximity, characteristic
# ----------------------------


def pole_count(F: MeromorphicSample, r: float) -> int:
    F.check_radius(r)
    return sum(m for z, m in F.poles if abs(z) <= r)


def counting_function(F: MeromorphicSample, r: float, truncation: Optional[int] = None) -> float:
    """
    N(r) = sum over poles 0 < |z| <= r of mult * log(r/|z|) + mult_0 * log r.
    With a truncation level l each multiplicity is capped at l.
    """
    if r <= 0:
        raise NevanlinnaError(f"Radius must be positive, got {r}")
    F.check_radius(r)
    if truncation is not None and truncation < 1:
        raise NevanlinnaError(f"Truncation level must be >= 1, got {truncation}")
    total = 0.0
    for z, m in F.poles:
        size = abs(z)
        if size > r:
            continue
        mult = m if truncation is None else min(m, truncation)
        total += mult * (math.log(r) if size == 0 else math.log(r / size))
    return total


def _log_plus_abs(F: Callable[[np.ndarray], np.ndarray]) -> Evaluator:
    return lambda z: np.log(np.maximum(np.abs(F(z)), 1.0))


def proximity_function(F: MeromorphicSample, r: float, a: Any = None, nodes: int = DEFAULT_NODES) -> CircleAverage:
    """m(r, F, a) = A_r(log+ 1/|F - a|); a = None means the value infinity."""
    F.check_radius(r)
    if a is None:
        return circle_average(_log_plus_abs(F), r, nodes)
    target = complex(_numeric(_shift_scalar(a)))
    return circle_average(lambda z: np.log(np.maximum(1.0 / np.abs(F(z) - target), 1.0)), r, nodes)


@dataclass
class NevanlinnaProfile:
    radii: List[float]
    a_term: List[float]
    n_term: List[float]
    quad_error: List[float]
    nodes: int
    m: Optional[List[float]] = None
    n_truncated: Optional[List[float]] = None
    truncation: Optional[int] = None
    degree_check: Optional[Dict[str, Any]] = None

    @property
    def t(self) -> List[float]:
        return [a + n for a, n in zip(self.a_term, self.n_term)]

    def records(self) -> List[Dict[str, Any]]:
        out = []
        for i, r in enumerate(self.radii):
            t = self.a_term[i] + self.n_term[i]
            m = self.m[i] if self.m is not None else None
            rec: Dict[str, Any] = {
                "r": r,
                "A_term": self.a_term[i],
                "N_term": self.n_term[i],
                "T": t,
                "m": m,
                "ratio": (m / t) if (m is not None and t > 0) else None,
                "quad_error": self.quad_error[i],
            }
            if self.n_truncated is not None:
                rec["N_truncated"] = self.n_truncated[i]
            out.append(rec)
        return out


def characteristic(
    F: MeromorphicSample,
    radii: Sequence[float],
    nodes: int = DEFAULT_NODES,
    truncation: Optional[int] = None,
    proximity_to: Any = None,
    tolerance: float = 0.05,
) -> NevanlinnaProfile:
    """
    T(r, F) = A_r(log+|F|) + N(r, F) on a grid. For rational F of degree d the
    slope of T against log r over the last quarter of the grid must be d.
    """
    radii = _check_grid(radii)
    a_term, n_term, errors = [], [], []
    n_trunc: Optional[List[float]] = [] if truncation is not None else None
    m_vals: Optional[List[float]] = [] if proximity_to is not None else None

    for r in radii:
        F.check_radius(r)
        avg = circle_average(_log_plus_abs(F), r, nodes)
        a_term.append(avg.value)
        errors.append(avg.error)
        n_term.append(counting_function(F, r))
        if n_trunc is not None:
            n_trunc.append(counting_function(F, r, truncation))
        if m_vals is not None:
            m_vals.append(proximity_function(F, r, proximity_to, nodes).value)

    profile = NevanlinnaProfile(
        radii=radii,
        a_term=a_term,
        n_term=n_term,
        quad_error=errors,
        nodes=nodes,
        m=m_vals,
        n_truncated=n_trunc,
        truncation=truncation,
    )
    if F.kind == "rational" and len(radii) >= 4:
        profile.degree_check = _degree_check(profile, F.degree, tolerance)
    return profile


def _degree_check(profile: NevanlinnaProfile, degree: int, tolerance: float) -> Dict[str, Any]:
    k = max(2, len(profile.radii) // 4)
    xs = [math.log(r) for r in profile.radii[-k:]]
    slope = fit_slope(xs, profile.t[-k:])
    ok = abs(slope - degree) <= tolerance
    if not ok:
        logger.warning("T(r) slope %.4f over the last %d radii does not match degree %d", slope, k, degree)
    return {"expected": degree, "slope": slope, "points": k, "tolerance": tolerance, "ok": ok}


def first_main_theorem_gap(
    F: MeromorphicSample,
    a: Any,
    radii: Sequence[float],
    nodes: int = DEFAULT_NODES,
) -> Dict[str, Any]:
    """T(r, 1/(F - a)) - T(r, F) on a grid; bounded with zero slope in log r."""
    base = characteristic(F, radii, nodes)
    shifted = characteristic(shifted_reciprocal(F, a), radii, nodes)
    gaps = [s - b for s, b in zip(shifted.t, base.t)]
    return {
        "a": str(a),
        "gaps": gaps,
        "sup_gap": max(abs(g) for g in gaps),
        "slope": fit_slope([math.log(r) for r in base.radii], gaps) if len(gaps) >= 2 else 0.0,
    }


def log_derivative_ratio(F: MeromorphicSample, radii: Sequence[float], nodes: int = DEFAULT_NODES) -> List[float]:
    """m(r, F'/F) / T(r, F) on a grid."""
    G = log_derivative(F)
    base = characteristic(F, radii, nodes)
    out = []
    for r, t in zip(base.radii, base.t):
        m = proximity_function(G, r, None, nodes).value
        out.append(m / t if t > 0 else math.inf)
    return out


# ----------------------------
# Elliptic theta model
# ----------------------------


@dataclass
class EllipticModel:
    """
    C / (Z + tau Z) with one divisor point p. theta is the Jacobi series
    sum_k exp(pi i tau k^2 + 2 pi i k z); theta_D(z) = theta(z + s) with
    s = (1 + tau)/2 - p vanishes exactly on p + lattice, and
    |theta_D|^2 exp(-phi_D) is lattice invariant for
    phi(w) = 2 pi (Im w)^2 / Im tau, phi_D(z) = phi(z + s).
    """

    tau: complex = 1j
    point: complex = 0j
    tail_tolerance: float = THETA_TAIL_TOLERANCE
    grid: int = 64
    _norm_constant: Optional[float] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self.tau = complex(self.tau)
        self.point = complex(self.point)
        if self.tau.imag <= 0:
            raise NevanlinnaError(f"Im tau must be positive, got tau={self.tau}")

    @property
    def shift(self) -> complex:
        return (1 + self.tau) / 2 - self.point

    def series_bound(self, max_imag: float = 0.0) -> int:
        """Smallest K whose tail terms |k| > K are below the tolerance."""
        y = self.tau.imag
        limit = math.log(self.tail_tolerance)
        k = int(math.ceil(abs(max_imag) / y)) + 1
        while -math.pi * y * k * k + 2 * math.pi * k * abs(max_imag) > limit:
            k += 1
        return k

    def theta(self, z: Any) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        bound = self.series_bound(float(np.max(np.abs(flat.imag))) if flat.size else 0.0)
        k = np.arange(-bound, bound + 1)
        exponent = (1j * np.pi * self.tau * k * k)[None, :] + 2j * np.pi * flat[:, None] * k[None, :]
        return np.exp(exponent).sum(axis=1).reshape(z.shape)

    def theta_mp(self, z: Any, dps: int = 30) -> mpmath.mpc:
        """theta at a complex or mpc point, via mpmath.jtheta(3, pi z, q)."""
        with mpmath.workdps(dps):
            tau = mpmath.mpc(self.tau.real, self.tau.imag)
            q = mpmath.exp(mpmath.pi * 1j * tau)
            return mpmath.jtheta(3, mpmath.pi * mpmath.mpc(z), q)

    def phi(self, w: Any) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return 2 * np.pi * w.imag**2 / self.tau.imag

    def reduce(self, w: Any) -> np.ndarray:
        """Translate into the fundamental parallelogram {a + b tau : 0 <= a, b < 1}."""
        w = np.asarray(w, dtype=complex)
        b = np.floor(w.imag / self.tau.imag)
        w = w - b * self.tau
        return w - np.floor(w.real)

    def log_section_norm(self, z: Any) -> np.ndarray:
        """log(|theta_D(z)| exp(-phi_D(z)/2)), lattice invariant."""
        w = self.reduce(np.asarray(z, dtype=complex) + self.shift)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.theta(w))) - self.phi(w) / 2

    def norm_constant(self) -> float:
        """Max of the invariant norm over a grid on the torus."""
        if self._norm_constant is None:
            t = np.arange(self.grid) / self.grid
            w = t[:, None] + t[None, :] * self.tau
            with np.errstate(divide="ignore"):
                values = np.log(np.abs(self.theta(w))) - self.phi(w) / 2
            self._norm_constant = float(np.max(values))
        return self._norm_constant

    def transformation_exponent(self, z: complex, period: str) -> complex:
        """A_l(z) + B_l for theta_D(z + l) = exp(A_l(z) + B_l) theta_D(z)."""
        if period == "1":
            return 0j
        if period == "tau":
            return -2j * math.pi * z - 1j * math.pi * self.tau - 2j * math.pi * self.shift
        raise NevanlinnaError(f"Unknown period {period!r}; expected '1' or 'tau'")

    def transformation_residual(
        self,
        points: Optional[Sequence[complex]] = None,
        count: int = 100,
        seed: int = 7,
        dps: int = 30,
    ) -> Dict[str, Any]:
        """
        Max residuals of the quasi-periodicity law for both periods, computed
        with mpmath, and the gap between the numpy series and mpmath.
        """
        if points is None:
            rng = random.Random(seed)
            points = [complex(rng.uniform(0, 1), rng.uniform(-1, 1)) for _ in range(count)]
        worst = {"1": 0.0, "tau": 0.0}
        series_gap = 0.0
        with mpmath.workdps(dps):
            # shifts and exponents stay in mpmath
            tau = mpmath.mpc(self.tau.real, self.tau.imag)
            s = (1 + tau) / 2 - mpmath.mpc(self.point.real, self.point.imag)
            two_pi_i = 2j * mpmath.pi
            for z in points:
                zm = mpmath.mpc(complex(z))
                base = self.theta_mp(zm + s, dps)
                for period, step, exponent in (
                    ("1", 1, mpmath.mpc(0)),
                    ("tau", tau, -two_pi_i * (zm + s) - 1j * mpmath.pi * tau),
                ):
                    moved = self.theta_mp(zm + step + s, dps)
                    worst[period] = max(worst[period], float(abs(moved - mpmath.exp(exponent) * base)))
                numeric = self.theta(np.array([complex(z) + self.shift]))[0]
                series_gap = max(series_gap, abs(complex(numeric) - complex(base)))
        return {
            "tau": [self.tau.real, self.tau.imag],
            "points": len(points),
            "residual_1": worst["1"],
            "residual_tau": worst["tau"],
            "series_gap": series_gap,
            "series_bound": self.series_bound(1.0 + abs(self.shift.imag)),
        }


@dataclass
class DefectProfile:
    radii: List[float]
    m: List[float]
    T: List[float]
    quad_error: List[float]
    nodes: int
    norm_constant: float
    c: complex

    @property
    def ratios(self) -> List[float]:
        return [m / t for m, t in zip(self.m, self.T)]

    def growth_exponent(self, lo: float = 0.0, hi: float = math.inf) -> float:
        pts = [(math.log(r), math.log(t)) for r, t in zip(self.radii, self.T) if lo <= r <= hi]
        return fit_slope([p[0] for p in pts], [p[1] for p in pts])

    def records(self) -> List[Dict[str, Any]]:
        return [
            {
                "r": r,
                "A_term": None,
                "N_term": None,
                "T": t,
                "m": m,
                "ratio": m / t,
                "quad_error": e,
                "o1": self.norm_constant,
            }
            for r, m, t, e in zip(self.radii, self.m, self.T, self.quad_error)
        ]


def defect_estimate(
    model: EllipticModel,
    c: complex,
    radii: Sequence[float],
    nodes: int = DEFAULT_NODES,
) -> DefectProfile:
    """
    m(r)/T(r) for the line zeta -> c zeta on the elliptic curve, with
    m(r) = A_r(sup log|s_D| - log|s_D(c zeta)|) and T(r) = A_r(phi_D(c zeta))/2.
    """
    c = complex(c)
    if c == 0:
        raise NevanlinnaError("Line coefficient c must be nonzero")
    radii = _check_grid(radii)
    top = model.norm_constant()

    def proximity(z: np.ndarray) -> np.ndarray:
        ell = model.log_section_norm(c * z)
        # samples on top of a zero count as singular and get nudged
        return np.where(ell < NEAR_ZERO_LOG + top, np.inf, top - ell)

    m_vals, t_vals, errors = [], [], []
    for r in radii:
        m = circle_average(proximity, r, nodes)
        t = circle_average(lambda z: model.phi(c * z + model.shift) / 2, r, nodes)
        if t.value <= 0:
            raise NevanlinnaError(f"Characteristic vanishes at r={r:g}")
        m_vals.append(m.value)
        t_vals.append(t.value)
        errors.append(m.error + t.error)
        logger.debug("defect r=%g m=%.6g T=%.6g", r, m.value, t.value)
    return DefectProfile(radii, m_vals, t_vals, errors, nodes, top, c)


# ----------------------------
# Probes
# ----------------------------


@dataclass
class HolomorphicSample:
    value: Evaluator
    derivative: Evaluator
    label: str = ""

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Any], label: str = "") -> "HolomorphicSample":
        c = np.asarray([_numeric(x) for x in coeffs] or [0.0], dtype=complex)
        dc = npoly.polyder(c) if len(c) > 1 else np.zeros(1, dtype=complex)
        return cls(lambda z: npoly.polyval(z, c), lambda z: npoly.polyval(z, dc), label)

    @classmethod
    def from_series(cls, s: TruncatedSeries) -> "HolomorphicSample":
        return cls.from_coefficients(s.coeffs, label=repr(s))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "HolomorphicSample":
        return cls.from_coefficients(univariate_coeffs(p), label=str(p))


def curvature_identity_check(
    w: HolomorphicSample,
    h: float = 1e-3,
    radius: float = 1.0,
    points: int = 41,
) -> Dict[str, Any]:
    """
    Compare (1/4) Laplacian of log(1 + |w|^2), by a 5-point stencil, with
    |w'|^2 / (1 + |w|^2)^2 on a grid of the disc |zeta| <= radius.
    """
    if h <= 0:
        raise NevanlinnaError(f"Step must be positive, got {h}")
    xs = np.linspace(-radius, radius, points)
    z = (xs[None, :] + 1j * xs[:, None]).reshape(-1)
    z = z[np.abs(z) <= radius]

    def f(u: np.ndarray) -> np.ndarray:
        return np.log1p(np.abs(w.value(u)) ** 2)

    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / (h * h)
    left = lap / 4
    right = np.abs(w.derivative(z)) ** 2 / (1 + np.abs(w.value(z)) ** 2) ** 2
    err = float(np.max(np.abs(left - right)))
    scale = float(np.max(np.abs(right)))
    return {
        "label": w.label,
        "h": h,
        "points": int(z.size),
        "max_abs_error": err,
        "residual": err / scale if scale > 0 else err,
    }


def _radial_rule(r: float, radial_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on (0, r) and weights times the kernel 2 pi s log(r/s)."""
    x, wts = legendre.leggauss(radial_nodes)
    s = r * (x + 1) / 2
    return s, wts * (r / 2) * 2 * np.pi * s * np.log(r / s)


def integrated_average(
    h: Callable[[np.ndarray], Any],
    r: float,
    nodes: int = DEFAULT_NODES,
    radial_nodes: int = DEFAULT_RADIAL_NODES,
) -> float:
    """I_r(h) = int_0^r drho/rho int_{|zeta|<rho} h = int_0^r 2 pi s log(r/s) A_s(h) ds."""
    s, kernel = _radial_rule(r, radial_nodes)
    values = [circle_average(h, float(si), nodes).value for si in s]
    return float(np.dot(kernel, values))


def log_integrated_average(
    log_g: Callable[[np.ndarray], Any],
    r: float,
    nodes: int = DEFAULT_NODES,
    radial_nodes: int = DEFAULT_RADIAL_NODES,
) -> float:
    """log I_r(g) from log g, summed with logsumexp."""
    s, kernel = _radial_rule(r, radial_nodes)
    logs = [math.log(k) + log_circle_average(log_g, float(si), nodes) for si, k in zip(s, kernel)]
    return float(logsumexp(logs))


@dataclass
class CalculusLemmaReport:
    radii: List[float]
    lhs: List[float]
    log_integral: List[float]
    constant: float
    empirical_constant: float
    violating_radii: List[float]

    def to_json(self) -> Dict[str, Any]:
        return {
            "radii": self.radii,
            "lhs": self.lhs,
            "log_integral": self.log_integral,
            "constant": self.constant,
            "empirical_constant": self.empirical_constant,
            "violating_radii": self.violating_radii,
        }


def calculus_lemma_probe(
    log_g: Callable[[np.ndarray], Any],
    radii: Sequence[float],
    constant: float = 2.0,
    nodes: int = DEFAULT_NODES,
    radial_nodes: int = DEFAULT_RADIAL_NODES,
) -> CalculusLemmaReport:
    """
    Both sides of A_r(log g) <= C (log r + log I_r(g)). Reports the smallest
    C that works on the grid and the radii where the given C fails.
    """
    radii = _check_grid(radii)
    lhs, logs, violating = [], [], []
    worst = 0.0
    for r in radii:
        left = circle_average(log_g, r, nodes).value
        log_i = log_integrated_average(log_g, r, nodes, radial_nodes)
        denom = math.log(r) + log_i
        lhs.append(left)
        logs.append(log_i)
        if denom > 0:
            worst = max(worst, left / denom)
            if left > constant * denom:
                violating.append(r)
        elif left > 0:
            violating.append(r)
    if violating:
        logger.info("Calculus-lemma inequality fails at %d radii with C=%g", len(violating), constant)
    return CalculusLemmaReport(radii, lhs, logs, constant, worst, violating)


def green_identity_check(
    g: Callable[[np.ndarray], Any],
    laplacian: Callable[[np.ndarray], Any],
    r: float,
    nodes: int = DEFAULT_NODES,
    radial_nodes: int = DEFAULT_RADIAL_NODES,
) -> Dict[str, float]:
    """I_r((1/pi) ddbar g) against (A_r(g) - g(0)) / 2, with ddbar = Laplacian / 4."""
    lhs = integrated_average(lambda z: np.asarray(laplacian(z), dtype=float) / (4 * np.pi), r, nodes, radial_nodes)
    center = float(np.asarray(g(np.zeros(1, dtype=complex)), dtype=float).reshape(-1)[0])
    rhs = (circle_average(g, r, nodes).value - center) / 2
    return {"r": r, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)}
