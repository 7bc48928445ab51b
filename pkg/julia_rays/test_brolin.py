import pytest

from errors import InvalidInputError
from models.report import brolin_doc
from services.brolin import brolin_sample, sample_angles


def test_sample_angles_are_reproducible_dyadics():
    first = sample_angles(8, seed=1)
    assert first == sample_angles(8, seed=1)
    assert first != sample_angles(8, seed=2)
    for t in first:
        assert 2**64 % t.denominator == 0


def test_square_map_sample_is_exact(identity_map):
    sample = brolin_sample(identity_map, 12, seed=3, depth=40)
    assert len(sample.records) == 12
    assert len(sample.decided) == 12
    for record in sample.decided:
        assert abs(abs(record.point) - 1) < 1e-10
        assert record.residual <= 1e-10
    assert sample.fraction_below() == 1.0


def test_chebyshev_sample_lands_consistently(chebyshev_map):
    sample = brolin_sample(chebyshev_map, 1000, seed=42, depth=30)
    assert len(sample.decided) >= 990
    assert sample.fraction_below(1e-6) >= 0.99
    for record in sample.decided:
        assert abs(record.point.imag) < 1e-6
        assert -2 - 1e-6 <= record.point.real <= 2 + 1e-6


def test_reruns_are_identical(chebyshev_map):
    first = brolin_sample(chebyshev_map, 16, seed=9, depth=16)
    second = brolin_sample(chebyshev_map, 16, seed=9, depth=16)
    assert [(r.t, r.point, r.residual) for r in first.records] == [
        (r.t, r.point, r.residual) for r in second.records
    ]


def test_brolin_doc_counts(identity_map):
    sample = brolin_sample(identity_map, 5, seed=0, depth=12)
    doc = brolin_doc(sample)
    assert doc.n == 5
    assert doc.seed == 0
    assert len(doc.records) == 5
    assert doc.decided == len(sample.decided)
    assert doc.below_threshold <= doc.decided


def test_brolin_rejects_empty_sample(identity_map):
    with pytest.raises(InvalidInputError):
        brolin_sample(identity_map, 0, seed=0)
