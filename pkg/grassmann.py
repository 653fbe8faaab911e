"""
grassmann.py

Dimension counting for degeneracy strata of the Grassmannian of k-planes W
in C^m: the stratum of a block of hyperplanes H_1..H_l is where the
restrictions H_i|W span at most a line. It has codimension (k-1)(l-1), so a
grouped partition of N hyperplanes into blocks gives codimension
(k-1) * sum(l_v - 1), and the stratum is empty by count once that exceeds
dim G = k(m-k). For N >= 4m-7 every partition is empty by count.

Concrete collections get randomized rank evidence with exact arithmetic on
every sample; any kernel found is returned as an explicit W.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from fields import fmpq_to_fraction
from polycore import to_fmpq_mat

logger = logging.getLogger(__name__)

EMPTY_BY_COUNT = "EmptyByCount"
POSSIBLY_NONEMPTY = "PossiblyNonempty"
CERTIFIED_EMPTY = "CertifiedEmptyByCount"

DEFAULT_HEIGHT = 1000

Matrix = List[List[Fraction]]


class GrassmannError(ValueError):
    pass


# ----------------------------
# Exact linear algebra
# ----------------------------


def _as_matrix(rows: Sequence[Sequence[Any]]) -> Matrix:
    return [[Fraction(c) for c in row] for row in rows]


def rref(rows: Sequence[Sequence[Any]]) -> Tuple[Matrix, int]:
    mat = _as_matrix(rows)
    if not mat or not mat[0]:
        return mat, 0
    r, rank = to_fmpq_mat(mat).rref()
    out = [[fmpq_to_fraction(r[i, j]) for j in range(len(mat[0]))] for i in range(len(mat))]
    return out, int(rank)


def matrix_rank(rows: Sequence[Sequence[Any]]) -> int:
    return rref(rows)[1]


def nullspace(rows: Sequence[Sequence[Any]], ncols: int) -> Matrix:
    """Basis of {v : rows * v = 0}, one basis vector per free column."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    reduced, rank = rref(rows)
    pivots: List[int] = []
    for i in range(rank):
        for j in range(ncols):
            if reduced[i][j] != 0:
                pivots.append(j)
                break
    basis: Matrix = []
    for free in (j for j in range(ncols) if j not in pivots):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -reduced[i][free]
        basis.append(v)
    return basis


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


# ----------------------------
# Types
# ----------------------------


@dataclass
class HyperplaneSet:
    m: int
    forms: Matrix

    def __post_init__(self) -> None:
        self.forms = _as_matrix(self.forms)
        if len(self.forms) < 2:
            raise GrassmannError(f"Need at least 2 hyperplanes, got {len(self.forms)}")
        for i, row in enumerate(self.forms, start=1):
            if len(row) != self.m:
                raise GrassmannError(f"Form H_{i} has length {len(row)}, expected m = {self.m}")
            if all(c == 0 for c in row):
                raise GrassmannError(f"Form H_{i} is zero")

    @property
    def N(self) -> int:
        return len(self.forms)

    def block_forms(self, block: Sequence[int]) -> Matrix:
        return [self.forms[i - 1] for i in block]


@dataclass
class GroupedPartition:
    """Blocks of 1-based hyperplane indices, each of size >= 2."""

    blocks: List[List[int]]

    def __post_init__(self) -> None:
        self.blocks = [sorted(int(i) for i in b) for b in self.blocks]
        if not self.blocks:
            raise GrassmannError("A partition needs at least one block")
        seen: List[int] = []
        for b in self.blocks:
            if len(b) < 2:
                raise GrassmannError(f"Block {b} has fewer than 2 hyperplanes")
            seen.extend(b)
        if sorted(seen) != list(range(1, len(seen) + 1)):
            raise GrassmannError(f"Blocks must partition 1..{len(seen)}, got {self.blocks}")

    @property
    def sizes(self) -> List[int]:
        return [len(b) for b in self.blocks]

    @property
    def N(self) -> int:
        return sum(self.sizes)

    @property
    def q(self) -> int:
        return len(self.blocks)


def canonical_partition(sizes: Sequence[int]) -> GroupedPartition:
    """Assign consecutive indices to blocks of the given sizes."""
    blocks: List[List[int]] = []
    start = 1
    for s in sizes:
        blocks.append(list(range(start, start + int(s))))
        start += int(s)
    return GroupedPartition(blocks)


def enumerate_block_multisets(N: int, smallest: int = 2) -> Iterator[Tuple[int, ...]]:
    """Partitions of N into parts >= 2, as non-increasing tuples."""

    def rec(remaining: int, cap: int) -> Iterator[Tuple[int, ...]]:
        if remaining == 0:
            yield ()
            return
        for part in range(min(cap, remaining), smallest - 1, -1):
            for rest in rec(remaining - part, part):
                yield (part,) + rest

    if N < smallest:
        return iter(())
    return rec(N, N)


# ----------------------------
# Counting
# ----------------------------


def _sizes_of(partition: Union[GroupedPartition, Sequence[int]]) -> List[int]:
    if isinstance(partition, GroupedPartition):
        return partition.sizes
    sizes = [int(s) for s in partition]
    if not sizes or any(s < 2 for s in sizes):
        raise GrassmannError(f"Block sizes must all be >= 2, got {sizes}")
    return sizes


def stratum_codimension(k: int, partition: Union[GroupedPartition, Sequence[int]], m: Optional[int] = None) -> int:
    if k < 2 or (m is not None and k > m - 1):
        upper = "m-1" if m is None else str(m - 1)
        raise GrassmannError(f"k = {k} out of range 2..{upper}")
    return (k - 1) * sum(s - 1 for s in _sizes_of(partition))


@dataclass
class CodimReport:
    k: int
    m: int
    sizes: List[int]
    codimension: int
    ambient_dim: int
    verdict: str

    def to_json(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "m": self.m,
            "blocks": list(self.sizes),
            "codim": self.codimension,
            "ambient_dim": self.ambient_dim,
            "verdict": self.verdict,
        }


def codim_report(k: int, m: int, partition: Union[GroupedPartition, Sequence[int]]) -> CodimReport:
    codim = stratum_codimension(k, partition, m)
    ambient = k * (m - k)
    verdict = EMPTY_BY_COUNT if codim > ambient else POSSIBLY_NONEMPTY
    return CodimReport(k, m, _sizes_of(partition), codim, ambient, verdict)


@dataclass
class ScanReport:
    m: int
    N: int
    threshold: int
    reports: List[CodimReport] = field(default_factory=list)

    @property
    def uniformly_empty(self) -> bool:
        return all(r.verdict == EMPTY_BY_COUNT for r in self.reports)

    def witnesses(self) -> List[CodimReport]:
        return [r for r in self.reports if r.verdict == POSSIBLY_NONEMPTY]

    def to_json(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "N": self.N,
            "threshold": self.threshold,
            "at_or_above_threshold": self.N >= self.threshold,
            "uniformly_empty": self.uniformly_empty,
            "cases": len(self.reports),
            "reports": [r.to_json() for r in self.reports],
        }


def prop4_threshold_scan(m: int, N: int) -> ScanReport:
    """Every (k, block multiset) for k in 2..m-1 and blocks >= 2 summing to N."""
    if m < 3:
        raise GrassmannError(f"Need m >= 3, got {m}")
    if N < 2:
        raise GrassmannError(f"Need N >= 2, got {N}")
    scan = ScanReport(m=m, N=N, threshold=4 * m - 7)
    for sizes in enumerate_block_multisets(N):
        for k in range(2, m):
            scan.reports.append(codim_report(k, m, list(sizes)))
    if scan.N >= scan.threshold and not scan.uniformly_empty:
        raise GrassmannError(f"Count argument failed at m={m}, N={N}")
    return scan


# ----------------------------
# Membership and evidence
# ----------------------------


def stratum_membership(W: Sequence[Sequence[Any]], forms: Sequence[Sequence[Any]]) -> bool:
    """True iff the restrictions of the forms to row-span(W) span at most a line."""
    w = _as_matrix(W)
    if not w:
        raise GrassmannError("W has no rows")
    k = len(w)
    if matrix_rank(w) != k:
        raise GrassmannError(f"W must have full rank {k}")
    h = _as_matrix(forms)
    restricted = [[_dot(row, wr) for wr in w] for row in h]
    return matrix_rank(restricted) <= 1


def _random_rational(rng: random.Random, height: int) -> Fraction:
    return Fraction(rng.randint(-height, height), rng.randint(1, height))


def random_forms(m: int, N: int, rng: random.Random, height: int = 9) -> Matrix:
    forms = []
    while len(forms) < N:
        row = [Fraction(rng.randint(-height, height)) for _ in range(m)]
        if any(row):
            forms.append(row)
    return forms


def _proportionality_constant(h: Sequence[Fraction], base: Sequence[Fraction]) -> Optional[Fraction]:
    for x, y in zip(h, base):
        if y != 0:
            c = x / y
            return c if all(a == c * b for a, b in zip(h, base)) else None
    return None


@dataclass
class EvidenceReport:
    k: int
    m: int
    blocks: List[List[int]]
    codimension: int
    ambient_dim: int
    trials: int
    generic_rank: int
    stack_rows: int
    certified_empty_by_count: bool
    counterexample: Optional[Matrix] = None
    ranks: List[int] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return CERTIFIED_EMPTY if self.certified_empty_by_count else POSSIBLY_NONEMPTY

    def to_json(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "m": self.m,
            "blocks": [list(b) for b in self.blocks],
            "codim": self.codimension,
            "ambient_dim": self.ambient_dim,
            "verdict": self.verdict,
            "generic_rank": self.generic_rank,
            "stack_rows": self.stack_rows,
            "trials": self.trials,
            "counterexample": None if self.counterexample is None else [[str(c) for c in row] for row in self.counterexample],
        }


def _stack(H: HyperplaneSet, partition: GroupedPartition, consts: Sequence[Sequence[Fraction]]) -> Matrix:
    rows: Matrix = []
    for block, cs in zip(partition.blocks, consts):
        base = H.forms[block[0] - 1]
        for i, c in zip(block[1:], cs):
            rows.append([a - c * b for a, b in zip(H.forms[i - 1], base)])
    return rows


def _try_kernel(H: HyperplaneSet, partition: GroupedPartition, rows: Matrix, k: int) -> Optional[Matrix]:
    basis = nullspace(rows, H.m)
    if len(basis) < k:
        return None
    W = basis[:k]
    if all(stratum_membership(W, H.block_forms(b)) for b in partition.blocks):
        return W
    logger.warning("Kernel of the stacked forms failed stratum membership; discarded")
    return None


def emptiness_evidence(
    H: HyperplaneSet,
    partition: GroupedPartition,
    k: int,
    trials: int,
    seed: int = 7,
    height: int = DEFAULT_HEIGHT,
) -> EvidenceReport:
    if trials <= 0:
        raise GrassmannError("Need at least one trial")
    if partition.N != H.N:
        raise GrassmannError(f"Partition covers {partition.N} hyperplanes, the set has {H.N}")
    report = codim_report(k, H.m, partition)
    rng = random.Random(seed)
    ranks: List[int] = []
    counterexample: Optional[Matrix] = None
    first_consts: List[List[Fraction]] = []

    for t in range(trials):
        consts = [[_random_rational(rng, height) for _ in b[1:]] for b in partition.blocks]
        if t == 0:
            first_consts = consts
        rows = _stack(H, partition, consts)
        ranks.append(matrix_rank(rows))
        if counterexample is None:
            counterexample = _try_kernel(H, partition, rows, k)

    # exact constants where a block is already proportional
    if counterexample is None:
        exact = []
        for b, fallback in zip(partition.blocks, first_consts):
            base = H.forms[b[0] - 1]
            row = []
            for i, c in zip(b[1:], fallback):
                pc = _proportionality_constant(H.forms[i - 1], base)
                row.append(c if pc is None else pc)
            exact.append(row)
        counterexample = _try_kernel(H, partition, _stack(H, partition, exact), k)

    # every form of every block vanishing on W
    if counterexample is None:
        counterexample = _try_kernel(H, partition, [list(r) for r in H.forms], k)

    generic = max(ranks)
    certified = counterexample is None and report.verdict == EMPTY_BY_COUNT and all(H.m - r < k for r in ranks)
    logger.info("Evidence k=%d blocks=%s: generic rank %d over %d trials", k, partition.blocks, generic, trials)
    return EvidenceReport(
        k=k,
        m=H.m,
        blocks=partition.blocks,
        codimension=report.codimension,
        ambient_dim=report.ambient_dim,
        trials=trials,
        generic_rank=generic,
        stack_rows=sum(len(b) - 1 for b in partition.blocks),
        certified_empty_by_count=certified,
        counterexample=counterexample,
        ranks=ranks,
    )
