import random
from fractions import Fraction

import pytest

from grassmann import (
    CERTIFIED_EMPTY,
    EMPTY_BY_COUNT,
    POSSIBLY_NONEMPTY,
    GrassmannError,
    GroupedPartition,
    HyperplaneSet,
    canonical_partition,
    codim_report,
    emptiness_evidence,
    enumerate_block_multisets,
    matrix_rank,
    nullspace,
    prop4_threshold_scan,
    random_forms,
    stratum_codimension,
    stratum_membership,
)


def _identity(m):
    return [[int(i == j) for j in range(m)] for i in range(m)]


def test_rank_and_nullspace():
    rows = [[1, 2, 3], [2, 4, 6]]
    assert matrix_rank(rows) == 1
    basis = nullspace(rows, 3)
    assert len(basis) == 2
    for v in basis:
        assert sum(Fraction(a) * b for a, b in zip(rows[0], v)) == 0
    assert len(nullspace([], 2)) == 2


def test_block_multisets():
    assert list(enumerate_block_multisets(4)) == [(4,), (2, 2)]
    assert list(enumerate_block_multisets(1)) == []
    assert len(list(enumerate_block_multisets(9))) == 8


def test_partition_validation():
    assert canonical_partition([3, 2]).blocks == [[1, 2, 3], [4, 5]]
    with pytest.raises(GrassmannError):
        GroupedPartition([[1, 2], [2, 3]])
    with pytest.raises(GrassmannError):
        GroupedPartition([[1]])
    with pytest.raises(GrassmannError):
        GroupedPartition([])


def test_codimension_formula():
    assert stratum_codimension(3, [4, 2], 6) == 2 * 4
    report = codim_report(2, 4, [3, 2])
    assert report.codimension == 3 and report.ambient_dim == 4
    assert report.verdict == POSSIBLY_NONEMPTY
    assert codim_report(3, 4, [2, 2]).verdict == EMPTY_BY_COUNT
    with pytest.raises(GrassmannError):
        codim_report(4, 4, [2, 2])
    with pytest.raises(GrassmannError):
        codim_report(2, 4, [3, 1])


def test_scan_at_threshold_is_uniformly_empty():
    scan = prop4_threshold_scan(4, 9)
    assert scan.threshold == 9
    assert scan.uniformly_empty
    payload = scan.to_json()
    assert payload["cases"] == 16
    assert payload["at_or_above_threshold"] is True
    assert len({tuple(r["blocks"]) for r in payload["reports"]}) == 8


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_scan_above_threshold(m):
    for N in (4 * m - 7, 4 * m - 6):
        assert prop4_threshold_scan(m, N).uniformly_empty


def test_witnesses_below_threshold():
    scan = prop4_threshold_scan(4, 8)
    witnesses = scan.witnesses()
    assert witnesses
    assert any(w.k == 2 and w.sizes == [2, 2, 2, 2] for w in witnesses)
    assert prop4_threshold_scan(5, 12).witnesses()


def test_membership():
    W = [[1, 0, 0], [0, 1, 0]]
    assert stratum_membership(W, [[1, 1, 5], [2, 2, 7]])
    assert not stratum_membership(W, [[1, 0, 0], [0, 1, 0]])
    with pytest.raises(GrassmannError):
        stratum_membership([[1, 2, 3], [2, 4, 6]], [[1, 0, 0]])


def test_hyperplane_set_validation():
    with pytest.raises(GrassmannError):
        HyperplaneSet(3, [[1, 0, 0]])
    with pytest.raises(GrassmannError):
        HyperplaneSet(3, [[1, 0, 0], [0, 0]])
    with pytest.raises(GrassmannError):
        HyperplaneSet(3, [[1, 0, 0], [0, 0, 0]])


def test_evidence_finds_counterexample_for_proportional_blocks():
    H = HyperplaneSet(4, [[1, 0, 0, 0], [2, 0, 0, 0], [0, 1, 0, 0], [0, 3, 0, 0]])
    report = emptiness_evidence(H, canonical_partition([2, 2]), k=2, trials=3)
    assert report.verdict == POSSIBLY_NONEMPTY
    assert report.counterexample is not None
    for block in ([1, 2], [3, 4]):
        assert stratum_membership(report.counterexample, H.block_forms(block))


def test_evidence_certifies_empty_stratum():
    H = HyperplaneSet(4, _identity(4))
    report = emptiness_evidence(H, canonical_partition([2, 2]), k=3, trials=4)
    assert report.verdict == CERTIFIED_EMPTY
    assert report.counterexample is None
    assert report.generic_rank == 2
    assert report.to_json()["stack_rows"] == 2


def test_evidence_input_checks():
    H = HyperplaneSet(4, _identity(4))
    with pytest.raises(GrassmannError):
        emptiness_evidence(H, canonical_partition([2, 2]), k=2, trials=0)
    with pytest.raises(GrassmannError):
        emptiness_evidence(H, canonical_partition([2, 3]), k=2, trials=1)


def test_random_forms_are_reproducible():
    a = random_forms(4, 6, random.Random(3))
    b = random_forms(4, 6, random.Random(3))
    assert a == b
    assert all(any(row) for row in a)
