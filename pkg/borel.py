"""
borel.py

Wronskian and Borel-type reductions for hypersurfaces of the form

    sum_j x_j^(p - delta_j) * g_j(x_0, ..., x_n) = 0

- borel_threshold: the exponent bound (n+1)(n-1) + sum(delta_j)
- wronskian_chart_transfer: the Wronskian in the x_0 != 0 chart against the
  one in the x_n != 0 chart, along a germ lifted to x-coordinates
- find_borel_partition: split series summing to zero into proportional blocks
  with vanishing block sums, with the largest number of blocks

Everything is decided at the truncated-series level: a None partition is
evidence (truncation too small, or no proportional structure), not a proof.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from fields import QQ
from jetalg import CurveGerm, JetDifferential, coordinate_names, wronskian_as_jet, wronskian_jet
from polycore import Polynomial, TruncatedSeries

logger = logging.getLogger(__name__)


class BorelError(ValueError):
    pass


def projective_names(n: int) -> Tuple[str, ...]:
    return tuple(f"x{j}" for j in range(n + 1))


# ----------------------------
# Threshold arithmetic
# ----------------------------


def borel_threshold(n: int, deltas: Sequence[int]) -> int:
    if n < 2:
        raise BorelError(f"Need n >= 2, got {n}")
    if len(deltas) != n + 1:
        raise BorelError(f"Expected {n + 1} degrees delta_0..delta_{n}, got {len(deltas)}")
    if any(int(d) < 0 for d in deltas):
        raise BorelError(f"Degrees must be nonnegative: {list(deltas)}")
    return (n + 1) * (n - 1) + sum(int(d) for d in deltas)


def prefactor_exponent(n: int, p: int, deltas: Sequence[int]) -> int:
    """Exponent of w_0 relating the two charts' Wronskians: p - sum(delta) - (n+1)(n-1)."""
    return int(p) - borel_threshold(n, deltas)


def cartan_truncation_bookkeeping(n: int, p: int) -> Dict[str, Any]:
    """
    Truncated-counting route: with multiplicities capped at n-1, the counting
    side contributes (n-1)(n+1)/p of the characteristic, which is a
    contradiction exactly when p > (n+1)(n-1).
    """
    if n < 2:
        raise BorelError(f"Need n >= 2, got {n}")
    if p < 1:
        raise BorelError(f"Need p >= 1, got {p}")
    ratio = Fraction((n - 1) * (n + 1), p)
    return {
        "n": n,
        "p": p,
        "truncation_level": n - 1,
        "threshold": (n + 1) * (n - 1),
        "ratio": str(ratio),
        "contradiction": ratio < 1,
    }


# ----------------------------
# Power-sum instances
# ----------------------------


@dataclass
class PowerSumInstance:
    n: int
    p: int
    deltas: List[int]
    gs: List[Polynomial]

    def __post_init__(self) -> None:
        names = projective_names(self.n)
        if len(self.deltas) != self.n + 1 or len(self.gs) != self.n + 1:
            raise BorelError(f"Need n+1 = {self.n + 1} degrees and polynomials")
        borel_threshold(self.n, self.deltas)
        fixed: List[Polynomial] = []
        for j, (d, g) in enumerate(zip(self.deltas, self.gs)):
            if self.p < d:
                raise BorelError(f"p = {self.p} is below delta_{j} = {d}")
            stray = [v for v in g.used_variables() if v not in names]
            if stray:
                raise BorelError(f"g_{j} uses variables {stray} outside {list(names)}")
            if g.is_zero() or not g.is_homogeneous(d):
                raise BorelError(f"g_{j} = {g} is not a nonzero homogeneous polynomial of degree {d}")
            fixed.append(g.with_variables(names))
        self.gs = fixed

    @property
    def threshold(self) -> int:
        return borel_threshold(self.n, self.deltas)

    def defining_polynomial(self) -> Polynomial:
        names = projective_names(self.n)
        total = Polynomial.zero(names, QQ)
        for j, (d, g) in enumerate(zip(self.deltas, self.gs)):
            total = total + Polynomial.variable(names[j], names) ** (self.p - d) * g
        return total


@dataclass
class ChartTransferReport:
    n: int
    p: int
    deltas: List[int]
    threshold: int
    prefactor_exponent: int
    identity_holds: bool
    verified_through_order: int
    wz_valuation: Optional[int]
    ww_valuation: Optional[int]
    w0_order: Optional[int]
    w0_divisor_exponent: int
    divisible: bool
    prefactor_identity_holds: bool
    on_hypersurface: bool
    hypersurface_relation: Optional[bool]

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "p": self.p,
            "deltas": list(self.deltas),
            "threshold": self.threshold,
            "prefactor_exponent": self.prefactor_exponent,
            "identity_holds": self.identity_holds,
            "verified_through_order": self.verified_through_order,
            "wz_valuation": self.wz_valuation,
            "ww_valuation": self.ww_valuation,
            "w0_order": self.w0_order,
            "w0_divisor_exponent": self.w0_divisor_exponent,
            "divisible": self.divisible,
            "prefactor_identity_holds": self.prefactor_identity_holds,
            "on_hypersurface": self.on_hypersurface,
            "hypersurface_relation": self.hypersurface_relation,
        }


def _chart_terms(inst: PowerSumInstance, x: Sequence[TruncatedSeries], chart: int) -> List[TruncatedSeries]:
    """u_j = x_j^(p - delta_j) g_j(x) / x_chart^p for j = 0..n."""
    names = projective_names(inst.n)
    inv = x[chart].reciprocal()
    affine = [s * inv for s in x]
    values = {name: s for name, s in zip(names, affine)}
    out = []
    for j, (d, g) in enumerate(zip(inst.deltas, inst.gs)):
        g_val = g.evaluate(values)
        if not isinstance(g_val, TruncatedSeries):
            g_val = TruncatedSeries.constant(g_val, affine[0].order, affine[0].var, affine[0].field)
        out.append(affine[j] ** (inst.p - d) * g_val)
    return out


def w_chart_wronskian(inst: PowerSumInstance) -> JetDifferential:
    """
    W(w_0^(p-delta_0) g^_0, ..., w_(n-1)^(p-delta_(n-1)) g^_(n-1)) with
    g^_j(w) = g_j(w_0, ..., w_(n-1), 1), as a jet differential. The jet
    coordinates z1..zn stand for w_0..w_(n-1).
    """
    n = inst.n
    names = coordinate_names(n)
    proj = projective_names(n)
    mapping: Dict[str, Any] = {proj[j]: Polynomial.variable(names[j], names) for j in range(n)}
    mapping[proj[n]] = Polynomial.constant(1, names)
    entries = []
    for j in range(n):
        g_hat = inst.gs[j].subs(mapping).with_variables(names)
        entries.append(Polynomial.variable(names[j], names) ** (inst.p - inst.deltas[j]) * g_hat)
    return wronskian_jet(entries, n)


def w0_order(omega: JetDifferential) -> Optional[int]:
    """Largest e with w_0^e dividing every coefficient; None for the zero differential."""
    if omega.is_zero():
        return None
    return min(e[0] for c in omega.terms.values() for e in c.terms)


def _unit_power(s: TruncatedSeries, k: int) -> TruncatedSeries:
    return s ** k if k >= 0 else s.reciprocal() ** (-k)


def _prefactor_identity(
    inst: PowerSumInstance,
    x: Sequence[TruncatedSeries],
    wz: TruncatedSeries,
    ww: TruncatedSeries,
) -> bool:
    """
    W_z / prod_{j=1..n} z_j^(a_j) = w_0^E / prod_{j=1..n-1} w_j^(a_j) * W_w / w_0^(a_0)
    with a_j = p - delta_j - n + 1 and E the prefactor exponent.
    """
    n, p = inst.n, inst.p
    a = [p - d - n + 1 for d in inst.deltas]
    inv0 = x[0].reciprocal()
    invn = x[n].reciprocal()
    lhs = wz
    for j in range(1, n + 1):
        lhs = lhs * _unit_power(x[j] * inv0, -a[j])
    w0 = x[0] * invn
    rhs = ww * _unit_power(w0, prefactor_exponent(n, p, inst.deltas) - a[0])
    for j in range(1, n):
        rhs = rhs * _unit_power(x[j] * invn, -a[j])
    return lhs.agrees_with(rhs, min(lhs.order, rhs.order))


def wronskian_chart_transfer(inst: PowerSumInstance, germ: CurveGerm) -> ChartTransferReport:
    """
    Along a germ x(t) avoiding the coordinate hyperplanes, with
    u_j the z-chart terms (z_j = x_j/x_0) and v_j the w-chart terms
    (w_j = x_j/x_n), check W(u_0..u_{n-1}) * w_0^(n p) = W(v_0..v_{n-1}).

    Independently of the germ, the w-chart Wronskian is formed exactly as a
    jet differential and its order in w_0 is compared with p - delta_0 - n + 1.
    Along the germ, the rewritten form with the w_0^(p - sum delta - (n+1)(n-1))
    prefactor is checked as a series identity.
    """
    n = inst.n
    if germ.n != n + 1:
        raise BorelError(f"Germ must have n+1 = {n + 1} components x_0..x_{n}, got {germ.n}")
    if inst.p <= inst.threshold:
        raise BorelError(f"p = {inst.p} must exceed the threshold {inst.threshold}")
    x = germ.components
    for j, s in enumerate(x):
        if s.field.is_zero(s.coeffs[0]):
            raise BorelError(f"Germ meets the coordinate hyperplane x_{j} = 0 at the origin (index {j})")

    u = _chart_terms(inst, x, 0)
    v = _chart_terms(inst, x, n)
    w0 = x[0] * x[n].reciprocal()
    wz = wronskian_as_jet(u[:n])
    ww = wronskian_as_jet(v[:n])
    lhs = wz * (w0 ** (n * inst.p))
    through = min(lhs.order, ww.order)
    holds = lhs.agrees_with(ww, through)

    total = u[0]
    for s in u[1:]:
        total = total + s
    on_surface = total.is_zero()
    relation: Optional[bool] = None
    if on_surface:
        left = wronskian_as_jet([u[0]] + u[1:n])
        right = wronskian_as_jet([u[0]] + u[2:n + 1])
        sign = -1 if (n - 1) % 2 else 1
        relation = left.agrees_with(right * sign)
    exact = w_chart_wronskian(inst)
    order = w0_order(exact)
    needed = inst.p - inst.deltas[0] - n + 1
    divisible = order is None or order >= needed
    if not divisible:
        logger.warning("w-chart Wronskian has w_0-order %s, below p - delta_0 - n + 1 = %d", order, needed)
    logger.debug("Chart transfer n=%d p=%d: identity=%s through order %d, w_0-order %s", n, inst.p, holds, through, order)
    return ChartTransferReport(
        n=n,
        p=inst.p,
        deltas=list(inst.deltas),
        threshold=inst.threshold,
        prefactor_exponent=prefactor_exponent(n, inst.p, inst.deltas),
        identity_holds=holds,
        verified_through_order=through,
        wz_valuation=wz.valuation(),
        ww_valuation=ww.valuation(),
        w0_order=order,
        w0_divisor_exponent=needed,
        divisible=divisible,
        prefactor_identity_holds=_prefactor_identity(inst, x, wz, ww),
        on_hypersurface=on_surface,
        hypersurface_relation=relation,
    )


# ----------------------------
# Borel partitions
# ----------------------------


@dataclass
class BorelPartition:
    blocks: List[List[int]]
    representatives: List[int]
    constants: List[List[Fraction]]
    verified_through_order: int
    zero_indices: List[int] = field(default_factory=list)

    @property
    def q(self) -> int:
        return len(self.blocks)

    def verify(self, f_series: Sequence[TruncatedSeries]) -> bool:
        k = self.verified_through_order
        for block, rep, consts in zip(self.blocks, self.representatives, self.constants):
            if block == [rep] and rep in self.zero_indices:
                if not f_series[rep].truncate(k).is_zero():
                    return False
                continue
            base = f_series[rep]
            others = [j for j in block if j != rep]
            for j, c in zip(others, consts):
                if not f_series[j].agrees_with(base * c, k):
                    return False
            total = base
            for j in others:
                total = total + f_series[j]
            if not total.truncate(k).is_zero():
                return False
        return True

    def to_json(self) -> Dict[str, Any]:
        return {
            "blocks": [list(b) for b in self.blocks],
            "representatives": list(self.representatives),
            "constants": [[str(c) for c in row] for row in self.constants],
            "verified_through_order": self.verified_through_order,
            "zero_indices": list(self.zero_indices),
        }


def _ratio(f: TruncatedSeries, base: TruncatedSeries, k: int) -> Optional[Fraction]:
    """c with f = c*base through order k, or None."""
    v = base.valuation()
    if v is None or v > k:
        return None
    c = f.coeffs[v] / base.coeffs[v]
    if c == 0:
        return None
    return c if f.agrees_with(base * c, k) else None


def _max_zero_sum_split(consts: Sequence[Fraction]) -> Optional[List[List[int]]]:
    """Partition positions 0..s-1 into the most subsets with zero constant sum."""
    s = len(consts)
    full = (1 << s) - 1
    sums = [Fraction(0)] * (1 << s)
    for mask in range(1, 1 << s):
        low = (mask & -mask).bit_length() - 1
        sums[mask] = sums[mask & (mask - 1)] + consts[low]
    best: Dict[int, Optional[List[int]]] = {0: []}
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        choice: Optional[List[int]] = None
        sub = rest
        while True:
            block = sub | low
            if sums[block] == 0 and best.get(mask ^ block) is not None:
                cand = best[mask ^ block] + [block]  # type: ignore[operator]
                if choice is None or len(cand) > len(choice):
                    choice = cand
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best[mask] = choice
    result = best[full]
    if result is None:
        return None
    return [[i for i in range(s) if blk & (1 << i)] for blk in result]


def find_borel_partition(
    f_series: Sequence[TruncatedSeries],
    depth: Optional[int] = None,
) -> Optional[BorelPartition]:
    if len(f_series) < 2:
        raise BorelError("Need at least two series")
    for s in f_series:
        if s.field.kind != QQ.kind:
            raise BorelError("Borel partition search needs exact rational series")
    k = min(s.order for s in f_series)
    if depth is not None and k < depth:
        raise BorelError(f"Series truncation {k} is below the detection depth {depth}")
    total = f_series[0]
    for s in f_series[1:]:
        total = total + s
    if not total.truncate(k).is_zero():
        raise BorelError(f"Series do not sum to zero through order {k} (first nonzero at order {total.valuation()})")

    zero_indices = [j for j, s in enumerate(f_series) if s.truncate(k).is_zero()]
    classes: List[Tuple[int, List[int], List[Fraction]]] = []
    for j, s in enumerate(f_series):
        if j in zero_indices:
            continue
        for rep, members, consts in classes:
            c = _ratio(s, f_series[rep], k)
            if c is not None:
                members.append(j)
                consts.append(c)
                break
        else:
            classes.append((j, [j], [Fraction(1)]))

    blocks: List[List[int]] = []
    for rep, members, consts in classes:
        if sum(consts) != 0:
            logger.info("Proportionality class %s has nonzero constant sum; no Borel partition", members)
            return None
        split = _max_zero_sum_split(consts)
        if split is None:
            return None
        blocks.extend(sorted(members[i] for i in part) for part in split)
    blocks.extend([j] for j in zero_indices)
    blocks.sort(key=lambda b: b[0])

    representatives = [b[0] for b in blocks]
    constants: List[List[Fraction]] = []
    for block in blocks:
        base = f_series[block[0]]
        row = []
        for j in block[1:]:
            c = _ratio(f_series[j], base, k)
            if c is None:
                raise BorelError(f"Lost proportionality for index {j} against {block[0]}")
            row.append(c)
        constants.append(row)
    part = BorelPartition(blocks, representatives, constants, k, zero_indices)
    if not part.verify(f_series):
        raise BorelError("Partition failed re-verification")
    logger.debug("Borel partition: %s", part.blocks)
    return part


def series_spec(text: str, order: int, var: str = "zeta") -> TruncatedSeries:
    """
    Series from short text: a polynomial in one variable, or
    `<coef>@exp:<scale>` for coef * exp(scale * t).
    """
    from polytext import parse_polynomial

    raw = (text or "").strip()
    if not raw:
        raise BorelError("Empty series description")
    coef = Fraction(1)
    if "@" in raw:
        head, raw = raw.split("@", 1)
        coef = Fraction(head.strip())
    if raw.startswith("exp:"):
        return TruncatedSeries.exp_series(order, Fraction(raw[4:].strip()), var) * coef
    poly = parse_polynomial(raw)
    used = poly.used_variables()
    if len(used) > 1:
        raise BorelError(f"Series description {text!r} is not univariate")
    s = TruncatedSeries.from_polynomial(poly, order, used[0] if used else var)
    return TruncatedSeries(s.coeffs, order, var, QQ) * coef
