import math
from fractions import Fraction

import numpy as np
import pytest

from errors import (
    InconclusiveGeometryError,
    InvalidInputError,
    NotARayPairError,
    RootIsCriticalError,
)
from services.circle import Angle, arcs_disjoint_or_nested
from services.wakes import (
    Evidence,
    RayPair,
    SeparationOutcome,
    WakeKind,
    contains_critical,
    image_wake,
    iteration_bound,
    point_in_region,
    separation_search,
    wake_from_arc,
    wake_from_pair,
)

_SIDE = np.linspace(0, 1, 400, endpoint=False)
SQUARE = np.concatenate([_SIDE, 1 + 1j * _SIDE, 1j + 1 - _SIDE, 1j * (1 - _SIDE)])


def _pair(p: int, q: int) -> RayPair:
    return RayPair(Angle(p, q), Angle(q - p, q))


def _wake(qmap, cache, pair):
    return wake_from_pair(qmap, pair, cache.pair(pair))


def test_point_in_region():
    assert point_in_region(SQUARE, complex(0.5, 0.5))
    assert not point_in_region(SQUARE, complex(2, 0.5))
    assert not point_in_region(SQUARE, complex(0.5, -3))


def test_point_on_boundary_is_inconclusive():
    with pytest.raises(InconclusiveGeometryError):
        point_in_region(SQUARE, complex(0.5, 0.01))


def test_ray_pair_needs_distinct_angles():
    with pytest.raises(InvalidInputError):
        RayPair(Angle(1, 3), Angle(1, 3))
    pair = _pair(1, 9)
    assert pair.doubled() == RayPair(Angle(2, 9), Angle(7, 9))
    assert pair.tau() == RayPair(Angle(11, 18), Angle(7, 18))


def test_iteration_bound():
    assert iteration_bound(Fraction(1, 2)) == 1
    assert iteration_bound(Fraction(2, 9)) == 3
    assert iteration_bound(Fraction(1, 9)) == 4
    with pytest.raises(InvalidInputError):
        iteration_bound(Fraction(0))


def test_wake_side_is_chosen_away_from_alpha(chebyshev_map, chebyshev_cache):
    wake = _wake(chebyshev_map, chebyshev_cache, _pair(1, 9))
    assert wake.a == Fraction(2, 9)
    assert (wake.side_arc.start, wake.side_arc.end) == (Angle(8, 9), Angle(1, 9))
    assert wake.alpha_excluded == Evidence.geometric
    assert wake.co_wake_angle == Fraction(7, 9)
    assert abs(wake.root - 1.5320888862) < 1e-6

    wake = _wake(chebyshev_map, chebyshev_cache, _pair(4, 9))
    assert wake.a == Fraction(1, 9)
    assert (wake.side_arc.start, wake.side_arc.end) == (Angle(4, 9), Angle(5, 9))


def test_pair_landing_at_alpha_is_rejected(chebyshev_map, chebyshev_cache):
    with pytest.raises(InvalidInputError):
        _wake(chebyshev_map, chebyshev_cache, _pair(1, 3))


def test_rays_that_do_not_co_land_are_rejected(chebyshev_map, chebyshev_cache):
    pair = RayPair(Angle(1, 9), Angle(2, 9))
    with pytest.raises(NotARayPairError):
        _wake(chebyshev_map, chebyshev_cache, pair)


def test_contains_critical(chebyshev_map, chebyshev_cache):
    assert not contains_critical(_wake(chebyshev_map, chebyshev_cache, _pair(1, 9)))
    big = _wake(chebyshev_map, chebyshev_cache, _pair(2, 7))
    assert big.a == Fraction(4, 7)
    assert contains_critical(big)
    with pytest.raises(RootIsCriticalError):
        contains_critical(_wake(chebyshev_map, chebyshev_cache, _pair(1, 4)))


def test_caller_asserted_wake_skips_geometry():
    wake = wake_from_arc(_pair(2, 7), Angle(5, 7), Angle(2, 7))
    assert wake.alpha_excluded == Evidence.caller_asserted
    assert wake.a == Fraction(4, 7)
    assert not wake.has_geometry()
    assert contains_critical(wake)
    with pytest.raises(InvalidInputError):
        wake_from_arc(_pair(2, 7), Angle(1, 7), Angle(2, 7))


def test_image_wake(chebyshev_map, chebyshev_cache):
    wake = _wake(chebyshev_map, chebyshev_cache, _pair(4, 9))
    image, kind = image_wake(chebyshev_map, wake, chebyshev_cache.pair(wake.pair.doubled()))
    assert kind == WakeKind.wake
    assert image.a == Fraction(2, 9)
    assert (image.side_arc.start, image.side_arc.end) == (Angle(8, 9), Angle(1, 9))

    wake = _wake(chebyshev_map, chebyshev_cache, _pair(1, 9))
    image, kind = image_wake(chebyshev_map, wake)
    assert kind == WakeKind.wake
    assert image.a == Fraction(4, 9)


def test_image_wake_rejections(chebyshev_map, chebyshev_cache):
    with pytest.raises(InvalidInputError):
        image_wake(chebyshev_map, _wake(chebyshev_map, chebyshev_cache, _pair(2, 7)))
    # f(1) = -1 = alpha
    with pytest.raises(InvalidInputError):
        image_wake(chebyshev_map, _wake(chebyshev_map, chebyshev_cache, _pair(1, 6)))
    with pytest.raises(InconclusiveGeometryError):
        image_wake(chebyshev_map, wake_from_arc(_pair(1, 9), Angle(8, 9), Angle(1, 9)))


def test_separation_through_tau_pair(chebyshev_map, chebyshev_cache):
    result = separation_search(chebyshev_map, _pair(1, 9), chebyshev_cache)
    assert result.outcome == SeparationOutcome.tau
    assert result.pair == RayPair(Angle(13, 18), Angle(5, 18))
    assert result.wake.a == Fraction(5, 9)
    assert [step.a for step in result.steps] == [Fraction(2, 9), Fraction(4, 9)]
    assert result.iteration_bound == 3
    assert contains_critical(result.wake)


def test_separation_immediate_and_critical(chebyshev_map, chebyshev_cache):
    result = separation_search(chebyshev_map, _pair(2, 7), chebyshev_cache)
    assert result.outcome == SeparationOutcome.separated
    assert len(result.steps) == 1

    result = separation_search(chebyshev_map, _pair(1, 4), chebyshev_cache)
    assert result.outcome == SeparationOutcome.root_is_critical


def test_symmetric_pairs_follow_the_wake_calculus(chebyshev_map, chebyshev_cache):
    # odd denominators prime to 3 keep every orbit away from 1/4, 1/6 and 1/3
    wakes = []
    for q in (5, 7, 11, 13, 17, 19, 23, 25, 29, 31, 35, 37):
        for p in range(1, (q + 1) // 2):
            if math.gcd(p, q) != 1:
                continue
            t = Fraction(p, q)
            wake = _wake(chebyshev_map, chebyshev_cache, _pair(p, q))
            expected = 2 * t if t < Fraction(1, 3) else 1 - 2 * t
            assert wake.a == expected, f"pair {p}/{q}"
            assert wake.a + wake.co_wake_angle == 1
            assert contains_critical(wake) == (expected > Fraction(1, 2))
            if wake.a < Fraction(1, 2):
                image, _ = image_wake(
                    chebyshev_map, wake, chebyshev_cache.pair(wake.pair.doubled())
                )
                assert image.a == 2 * wake.a

            result = separation_search(chebyshev_map, wake.pair, chebyshev_cache)
            assert result.outcome in (SeparationOutcome.separated, SeparationOutcome.tau), result.note
            assert len(result.steps) <= result.iteration_bound
            assert contains_critical(result.wake)
            wakes.append(wake)
    assert len(wakes) >= 100
    arcs = [(w.side_arc.start, w.side_arc.end) for w in wakes]
    for i, first in enumerate(arcs):
        for second in arcs[i + 1:]:
            assert arcs_disjoint_or_nested(first, second)


def test_trail_cache_memoizes(chebyshev_cache):
    first = chebyshev_cache.get(Angle(3, 11))
    assert chebyshev_cache.get(Angle(3, 11)) is first
    size = len(chebyshev_cache)
    chebyshev_cache.get(Angle(3, 11))
    assert len(chebyshev_cache) == size
