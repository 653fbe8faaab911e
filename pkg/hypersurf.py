"""
hypersurf.py

Explicit hyperbolic hypersurfaces and their certificate checkers.

- Power sums of N = 4n-3 generic linear forms to the power p = 16(n-1)^2,
  with the Grassmannian count certificate attached.
- Degree-n surfaces x0^n + x1^n + x2^n + x3^(n-2) g(x) = 0 with g quadratic:
  for each substitution pattern and each root zeta of zeta^n = -1, the
  quadratic h = A xi^2 + B(eta) xi + C(eta) must have constant nonzero A and
  P(eta) = -eta^n + (B^2 - 4AC)/(4A) must have n distinct roots.
- The diagonal family g = x3^2 + a0 x0^2 + a1 x1^2 + a2 x2^2 through its
  closed-form conditions.

Verdicts are exact wherever the data is rational; branch values of zeta are
complex balls, and an indeterminate ball is reported as unknown after the
precision ladder runs out.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from flint import acb, arb, fmpq

from fields import (
    DEFAULT_PRECISION,
    MAX_PRECISION,
    QQ,
    BallField,
    Certainty,
    ball_to_json,
    fraction_to_fmpq,
    precision_ladder,
    working_precision,
)
from grassmann import (
    HyperplaneSet,
    ScanReport,
    canonical_partition,
    emptiness_evidence,
    enumerate_block_multisets,
    matrix_rank,
    prop4_threshold_scan,
)
from polycore import Polynomial, is_squarefree_certified, univariate_gcd

logger = logging.getLogger(__name__)

HYPERBOLIC_CERTIFIED = "hyperbolic-certified"
REJECTED = "rejected"
UNKNOWN = "unknown"

PROJECTIVE3 = ("x0", "x1", "x2", "x3")
PATTERN_VARS = ("xi", "eta", "zeta")


class HypersurfaceError(ValueError):
    pass


@dataclass
class CertificateVerdict:
    verdict: str
    failing_condition: Optional[str] = None
    witness: Dict[str, Any] = field(default_factory=dict)
    precision: int = 0
    cases: int = 0

    @property
    def certified(self) -> bool:
        return self.verdict == HYPERBOLIC_CERTIFIED

    def to_json(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "failing_condition": self.failing_condition,
            "witness": self.witness,
            "precision": self.precision,
            "cases": self.cases,
        }


# ----------------------------
# Power sums of linear forms
# ----------------------------


def theorem3_parameters(n: int) -> Tuple[int, int]:
    if n < 2:
        raise HypersurfaceError(f"Need n >= 2, got {n}")
    N = 4 * n - 3
    p = 16 * (n - 1) ** 2
    if 1 + N * (N - 2) != p:
        raise HypersurfaceError(f"Exponent identity failed at n={n}")
    return N, p


def linear_form_power(form: Sequence[Any], p: int, names: Sequence[str]) -> Polynomial:
    """(sum_i c_i x_i)^p by multinomial expansion."""
    coeffs = [Fraction(c) for c in form]
    if len(coeffs) != len(names):
        raise HypersurfaceError(f"Form has {len(coeffs)} entries for {len(names)} variables")
    support = [i for i, c in enumerate(coeffs) if c != 0]
    terms: Dict[Tuple[int, ...], Fraction] = {}
    fact = [math.factorial(i) for i in range(p + 1)]

    def rec(pos: int, remaining: int, exps: List[int]) -> None:
        if pos == len(support) - 1:
            exps.append(remaining)
            full = [0] * len(names)
            value = Fraction(fact[p])
            for idx, e in zip(support, exps):
                full[idx] = e
                value = value / fact[e] * coeffs[idx] ** e
            terms[tuple(full)] = value
            exps.pop()
            return
        for e in range(remaining, -1, -1):
            exps.append(e)
            rec(pos + 1, remaining - e, exps)
            exps.pop()

    if not support:
        return Polynomial.zero(names, QQ)
    rec(0, p, [])
    return Polynomial(names, terms, QQ)


def _form_text(form: Sequence[Fraction], names: Sequence[str]) -> str:
    poly = Polynomial(names, {tuple(int(i == j) for j in range(len(names))): c for i, c in enumerate(form)}, QQ)
    return str(poly)


@dataclass
class Theorem3Instance:
    n: int
    N: int
    p: int
    forms: List[List[Fraction]]
    seed: int
    scan: ScanReport
    evidence: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f"x{i}" for i in range(self.n + 1))

    def power_sum_text(self) -> str:
        return " + ".join(f"({_form_text(f, self.names)})^{self.p}" for f in self.forms)

    def defining_polynomial(self) -> Polynomial:
        if self.n > 3:
            raise HypersurfaceError(f"Expanded form is only produced for n <= 3, got n={self.n}")
        total = Polynomial.zero(self.names, QQ)
        for f in self.forms:
            total = total + linear_form_power(f, self.p, self.names)
        return total

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "N": self.N,
            "p": self.p,
            "seed": self.seed,
            "forms": [[str(c) for c in f] for f in self.forms],
            "power_sum": self.power_sum_text(),
            "prop4": {
                "m": self.scan.m,
                "N": self.scan.N,
                "threshold": self.scan.threshold,
                "uniformly_empty": self.scan.uniformly_empty,
                "cases": len(self.scan.reports),
            },
            "evidence": self.evidence,
        }


def _forms_in_general_position(forms: List[List[Fraction]], n: int, rng: random.Random, max_subsets: int) -> bool:
    for a, b in itertools.combinations(forms, 2):
        if matrix_rank([a, b]) < 2:
            return False
    if len(forms) < n + 1:
        return True
    subsets = list(itertools.combinations(range(len(forms)), n + 1))
    if len(subsets) > max_subsets:
        subsets = rng.sample(subsets, max_subsets)
    return all(matrix_rank([forms[i] for i in s]) == n + 1 for s in subsets)


def construct_theorem3(
    n: int,
    seed: int = 7,
    height: int = 9,
    retries: int = 50,
    max_subsets: int = 5000,
    evidence_trials: int = 2,
) -> Theorem3Instance:
    N, p = theorem3_parameters(n)
    rng = random.Random(seed)
    for attempt in range(1, retries + 1):
        forms = []
        while len(forms) < N:
            row = [Fraction(rng.randint(-height, height)) for _ in range(n + 1)]
            if any(row):
                forms.append(row)
        if _forms_in_general_position(forms, n, rng, max_subsets):
            break
        logger.info("Form draw %d not in general position; redrawing", attempt)
    else:
        raise HypersurfaceError(f"No forms in general position after {retries} draws")

    scan = prop4_threshold_scan(n + 1, N)
    evidence: List[Dict[str, Any]] = []
    if evidence_trials > 0 and n <= 4:
        H = HyperplaneSet(n + 1, forms)
        for sizes in enumerate_block_multisets(N):
            part = canonical_partition(sizes)
            for k in range(2, n + 1):
                rep = emptiness_evidence(H, part, k, evidence_trials, seed=seed)
                evidence.append({"k": k, "blocks": list(sizes), "verdict": rep.verdict, "generic_rank": rep.generic_rank})
    return Theorem3Instance(n=n, N=N, p=p, forms=forms, seed=seed, scan=scan, evidence=evidence)


# ----------------------------
# Completing the square
# ----------------------------


def complete_square_residual(A: Any, B: Any, C: Any) -> Polynomial:
    """(B^2 - 4AC)/(4A), which equals (h')^2/(2h'') - h for h = A y^2 + B y + C."""
    if isinstance(A, Polynomial):
        if not A.is_constant():
            raise HypersurfaceError(f"Leading coefficient {A} is not constant")
        field_ = A.field
        A = A.constant_term()
    else:
        field_ = B.field if isinstance(B, Polynomial) else (C.field if isinstance(C, Polynomial) else QQ)
        if isinstance(A, acb) and not isinstance(field_, BallField):
            field_ = BallField()
        A = field_.convert(A)
    if field_.may_be_zero(A):
        raise HypersurfaceError("Leading coefficient is zero (or its ball contains zero)")
    names = ("eta",)
    B = B if isinstance(B, Polynomial) else Polynomial.constant(B, names, field_)
    C = C if isinstance(C, Polynomial) else Polynomial.constant(C, names, field_)
    B, C = B.to_field(field_), C.to_field(field_)
    return (B * B - C.scale(4 * A)).scale(field_.one / (4 * A))


# ----------------------------
# Degree-n surfaces with quadratic g
# ----------------------------


@dataclass
class Theorem4Instance:
    n: int
    g: Polynomial

    def __post_init__(self) -> None:
        if self.n < 11:
            raise HypersurfaceError(f"Need n >= 11, got {self.n}")
        stray = [v for v in self.g.used_variables() if v not in PROJECTIVE3]
        if stray:
            raise HypersurfaceError(f"g uses variables {stray} outside x0..x3")
        if self.g.field.kind != QQ.kind:
            raise HypersurfaceError("g must have rational coefficients")
        g = self.g.with_variables(PROJECTIVE3)
        if not g.is_homogeneous(2):
            raise HypersurfaceError(f"g = {g} is not a homogeneous quadratic")
        if g.terms.get((0, 0, 0, 2)) != 1:
            raise HypersurfaceError(f"g must satisfy g(0,0,0,x3) = x3^2, got {g}")
        self.g = g

    def pattern_polynomial(self, pattern: int) -> Polynomial:
        """h(xi, eta, zeta) for the given substitution pattern (1, 2 or 3)."""
        xi, eta, zeta = (Polynomial.variable(v, PATTERN_VARS) for v in PATTERN_VARS)
        one = Polynomial.constant(1, PATTERN_VARS)
        subs = {
            1: (zeta * xi, xi, eta, one),
            2: (eta, zeta * xi, xi, one),
            3: (eta, xi, zeta * xi, one),
        }.get(pattern)
        if subs is None:
            raise HypersurfaceError(f"Unknown pattern {pattern}")
        return self.g.subs(dict(zip(PROJECTIVE3, subs))).with_variables(PATTERN_VARS)

    def hypersurface(self) -> Polynomial:
        x = [Polynomial.variable(v, PROJECTIVE3) for v in PROJECTIVE3]
        return x[0] ** self.n + x[1] ** self.n + x[2] ** self.n + x[3] ** (self.n - 2) * self.g

    def quadratic_parts(self, pattern: int) -> Tuple[Polynomial, Polynomial, Polynomial]:
        h = self.pattern_polynomial(pattern)
        if h.degree_in("xi") > 2:
            raise HypersurfaceError(f"Pattern {pattern} is not quadratic in xi")
        return h.coefficient_in("xi", 2), h.coefficient_in("xi", 1), h.coefficient_in("xi", 0)


def branch_root(j: int, n: int) -> acb:
    """zeta_j = exp(i pi (2j+1)/n), the j-th root of zeta^n = -1, at the working precision."""
    return acb(arb(fmpq(2 * j + 1, n))).exp_pi_i()


def _univariate(p: Polynomial, var: str) -> Polynomial:
    return p.trim_variables().with_variables((var,))


def _in_eta(p: Polynomial) -> Polynomial:
    if "zeta" in p.used_variables() or "xi" in p.used_variables():
        raise HypersurfaceError(f"{p} still depends on xi or zeta")
    return _univariate(p, "eta")


def _first_vanishing_branch(A: Polynomial, n: int, bits: int) -> int:
    with working_precision(bits):
        field_ = BallField(bits)
        for j in range(n):
            value = A.to_field(field_).evaluate({"zeta": branch_root(j, n), "eta": field_.zero, "xi": field_.zero})
            if field_.may_be_zero(value):
                return j
    return 0


def _branch_polynomial(A: Polynomial, B: Polynomial, C: Polynomial, n: int, j: int, bits: int) -> Certainty:
    with working_precision(bits):
        field_ = BallField(bits)
        zeta = branch_root(j, n)
        a = A.to_field(field_).evaluate({"zeta": zeta, "eta": field_.zero, "xi": field_.zero})
        if field_.may_be_zero(a):
            return Certainty.UNKNOWN
        b = B.to_field(field_).subs({"zeta": zeta, "xi": 0}).with_variables(("eta",))
        c = C.to_field(field_).subs({"zeta": zeta, "xi": 0}).with_variables(("eta",))
        eta = Polynomial.variable("eta", ("eta",), field_)
        P = -(eta ** n) + complete_square_residual(a, b, c)
        return is_squarefree_certified(P)


def check_theorem4(
    inst: Theorem4Instance,
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> CertificateVerdict:
    n = inst.n
    zeta_var = Polynomial.variable("zeta", ("zeta",))
    cyclo = zeta_var ** n + 1
    used_precision = 0
    unknown: Optional[Dict[str, Any]] = None
    cases = 0

    for pattern in (1, 2, 3):
        A, B, C = inst.quadratic_parts(pattern)
        if "eta" in A.used_variables():
            return CertificateVerdict(REJECTED, "hessian-not-constant", {"pattern": pattern, "branch": 0, "A": str(A)}, used_precision, cases)
        if A.is_zero():
            return CertificateVerdict(REJECTED, "zero-hessian", {"pattern": pattern, "branch": 0, "A": "0"}, used_precision, cases)
        A_zeta = _univariate(A, "zeta")
        common = univariate_gcd(A_zeta, cyclo)
        if common.total_degree() >= 1:
            j = _first_vanishing_branch(A, n, max(precision, 64))
            return CertificateVerdict(
                REJECTED,
                "zero-hessian",
                {"pattern": pattern, "branch": j, "A": str(A_zeta), "common_factor": str(common)},
                used_precision,
                cases,
            )

        zeta_free = "zeta" not in B.used_variables() and "zeta" not in C.used_variables()
        if (B.is_zero() and "zeta" not in C.used_variables()) or (zeta_free and A.is_constant()):
            if B.is_zero():
                residual = -_in_eta(C)
            else:
                residual = complete_square_residual(A.constant_term(), _in_eta(B), _in_eta(C))
            eta = Polynomial.variable("eta", ("eta",))
            P = -(eta ** n) + residual
            cases += n
            if is_squarefree_certified(P) == Certainty.NO:
                return CertificateVerdict(
                    REJECTED,
                    "repeated-root",
                    {"pattern": pattern, "branch": 0, "P": str(P), "gcd": str(univariate_gcd(P, P.diff("eta")))},
                    used_precision,
                    cases,
                )
            continue

        for j in range(n):
            cases += 1
            outcome = Certainty.UNKNOWN
            for bits in precision_ladder(precision, max_precision):
                used_precision = max(used_precision, bits)
                outcome = _branch_polynomial(A, B, C, n, j, bits)
                if outcome != Certainty.UNKNOWN:
                    break
                logger.info("Pattern %d branch %d indeterminate at %d bits; raising precision", pattern, j, bits)
            if outcome == Certainty.UNKNOWN and unknown is None:
                unknown = {"pattern": pattern, "branch": j}

    if unknown is not None:
        return CertificateVerdict(UNKNOWN, "distinct-roots-indeterminate", unknown, used_precision, cases)
    return CertificateVerdict(HYPERBOLIC_CERTIFIED, None, {}, used_precision, cases)


# ----------------------------
# Diagonal family
# ----------------------------


def _is_exact(a: Any) -> bool:
    return isinstance(a, (int, Fraction))


def theorem4_instance_from_corollary(n: int, a0: Any, a1: Any, a2: Any) -> Theorem4Instance:
    a = [Fraction(x) for x in (a0, a1, a2)]
    terms = {(0, 0, 0, 2): 1, (2, 0, 0, 0): a[0], (0, 2, 0, 0): a[1], (0, 0, 2, 0): a[2]}
    return Theorem4Instance(n, Polynomial(PROJECTIVE3, terms, QQ))


def _as_ball(a: Any) -> acb:
    if isinstance(a, acb):
        return a
    return acb(arb(fraction_to_fmpq(Fraction(a))))


def corollary_branch_values(n: int, a: Any, bits: int) -> List[acb]:
    """1 + a w^2 + w^n over the n-2 branches of w = (-2a/n)^(1/(n-2))."""
    with working_precision(bits):
        ball = _as_ball(a)
        if ball.is_zero():
            return [acb(1)] * (n - 2)
        base = -2 * ball / n
        root = (base.log() / (n - 2)).exp()
        values = []
        for k in range(n - 2):
            w = root * acb(arb(fmpq(2 * k, n - 2))).exp_pi_i()
            values.append(1 + ball * w ** 2 + w ** n)
        return values


def _exact_double_root(n: int, a: Fraction) -> bool:
    eta = Polynomial.variable("eta", ("eta",))
    P = -(eta ** n) - eta ** 2 * a - 1
    return is_squarefree_certified(P) == Certainty.NO


def check_corollary(
    n: int,
    a0: Any,
    a1: Any,
    a2: Any,
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> CertificateVerdict:
    if n < 11:
        raise HypersurfaceError(f"Need n >= 11, got {n}")
    a = [Fraction(x) if isinstance(x, (int, str)) else x for x in (a0, a1, a2)]
    sign = 1 if (n + 1) % 2 == 0 else -1
    used = 0
    unknown: Optional[Dict[str, Any]] = None
    cases = 0

    for i, j in ((0, 1), (0, 2), (1, 2)):
        cases += 1
        if _is_exact(a[i]) and _is_exact(a[j]):
            if a[i] ** n == sign * a[j] ** n:
                return CertificateVerdict(REJECTED, "power-condition", {"i": i, "j": j, "a_i": str(a[i]), "a_j": str(a[j])}, used, cases)
            continue
        resolved = False
        for bits in precision_ladder(precision, max_precision):
            used = max(used, bits)
            with working_precision(bits):
                diff = _as_ball(a[i]) ** n - sign * _as_ball(a[j]) ** n
                if not diff.contains(0):
                    resolved = True
                    break
        if not resolved and unknown is None:
            unknown = {"condition": "power-condition", "i": i, "j": j}

    for j in range(3):
        cases += n - 2
        exact = _is_exact(a[j])
        resolved = False
        for bits in precision_ladder(precision, max_precision):
            used = max(used, bits)
            values = corollary_branch_values(n, a[j], bits)
            bad = [k for k, v in enumerate(values) if v.contains(0)]
            if not bad:
                resolved = True
                break
            if exact:
                if _exact_double_root(n, a[j]):
                    with working_precision(bits):
                        witness = {"j": j, "a_j": str(a[j]), "branch": bad[0], "value": ball_to_json(values[bad[0]])}
                    return CertificateVerdict(REJECTED, "branch-condition", witness, used, cases)
                resolved = True
                break
        if not resolved and unknown is None:
            unknown = {"condition": "branch-condition", "j": j}

    if unknown is not None:
        return CertificateVerdict(UNKNOWN, unknown["condition"], unknown, used, cases)
    return CertificateVerdict(HYPERBOLIC_CERTIFIED, None, {}, used, cases)
