import cmath
import math
from fractions import Fraction

import pytest

from errors import ConjugacyResidualError, InsufficientPrecisionError, InvalidInputError
from services.circle import Angle, double, tau_angle
from services.experiments import chebyshev_landing, chebyshev_point, oracle_error
from services.quadmap import from_c
from services.raytrace import (
    MIN_LANDING_SAMPLES,
    LandingStatus,
    TraceConfig,
    TrailStatus,
    check_conjugacy,
    equipotential,
    exact_seed_potential,
    green_residuals,
    landing_estimate,
    trace_irrational,
    trace_many,
    trace_ray,
)
from services.rotnum import AngleApproximation


def test_grid_potentials_double_exactly():
    cfg = TraceConfig(g0=math.log(1e4), depth=10, substeps=4)
    assert cfg.levels == 40
    assert cfg.potential(0) == cfg.g0
    for i in range(4, cfg.levels + 1):
        assert cfg.potential(i - 4) == 2 * cfg.potential(i)


def test_seed_potential_grows_with_precision():
    low = exact_seed_potential(from_c(0))
    high = exact_seed_potential(from_c(0, precision=200))
    assert low == pytest.approx(53 * math.log(2) / 2 + 1)
    assert high > low


def test_square_map_rays_are_radial(identity_map):
    for t in [Angle(0), Angle(1, 3), Angle(1, 5), Angle(7, 16)]:
        trail = trace_ray(identity_map, t, depth=20)
        assert trail.status == TrailStatus.traced
        assert len(trail.samples) == 20 * 4 + 1
        for g, z in trail.samples:
            w = cmath.exp(complex(g, 2 * math.pi * float(t)))
            assert abs(z - w) <= 1e-12 * max(1.0, abs(w))


def test_square_map_rays_land_on_unit_circle(identity_map):
    trail = trace_ray(identity_map, Angle(1, 7), depth=40)
    estimate = landing_estimate(trail)
    assert estimate.status == LandingStatus.landed
    assert abs(abs(estimate.point) - 1) < 1e-10
    assert abs(estimate.point - cmath.exp(2j * math.pi / 7)) < 1e-10


def test_chebyshev_oracle(chebyshev_map):
    for t in [Angle(1, 9), Angle(1, 7), Angle(3, 11), Angle(5, 13)]:
        trail = trace_ray(chebyshev_map, t, depth=30)
        assert trail.status == TrailStatus.traced
        assert oracle_error(trail) <= 1e-9
        g, z = trail.samples[4]
        assert abs(z - chebyshev_point(g, t)) <= 1e-9 * abs(z)


def test_chebyshev_landings(chebyshev_map):
    for t in [Angle(1, 9), Angle(2, 9), Angle(1, 7)]:
        estimate = landing_estimate(trace_ray(chebyshev_map, t, depth=30))
        assert estimate.status == LandingStatus.landed
        assert abs(estimate.point - chebyshev_landing(t)) < 1e-6
    beta = landing_estimate(trace_ray(chebyshev_map, Angle(0), depth=30))
    assert abs(beta.point - 2) < 1e-9


def test_real_parameter_rays_are_mirror_images():
    qmap = from_c(-1)
    for t in [Angle(1, 3), Angle(1, 5), Angle(3, 7)]:
        trail = trace_ray(qmap, t, depth=20)
        mirror = trace_ray(qmap, Angle(1 - t.value), depth=20)
        for (g, z), (h, w) in zip(trail.samples, mirror.samples):
            assert g == h
            assert abs(z.conjugate() - w) <= 1e-12 * max(1.0, abs(z))


def test_symmetric_angle_gives_negated_ray():
    qmap = from_c(complex(-0.12, 0.75))
    for t in [Angle(1, 5), Angle(2, 7), Angle(1, 12)]:
        trail = trace_ray(qmap, t, depth=20)
        opposite = trace_ray(qmap, tau_angle(t), depth=20)
        for (_, z), (_, w) in zip(trail.samples, opposite.samples):
            assert abs(z + w) <= 1e-12 * max(1.0, abs(z))


def test_trail_satisfies_conjugacy(chebyshev_map):
    trail = trace_ray(chebyshev_map, Angle(1, 9), depth=25)
    image = trace_ray(chebyshev_map, double(trail.angle), depth=25)
    assert trail.max_residual <= trail.config.tol_conj
    assert check_conjugacy(chebyshev_map, trail, image) <= 1e-9


def test_conjugacy_check_rejects_mismatched_trails(chebyshev_map):
    trail = trace_ray(chebyshev_map, Angle(1, 9), depth=10)
    wrong = trace_ray(chebyshev_map, Angle(1, 7), depth=10)
    with pytest.raises(InvalidInputError):
        check_conjugacy(chebyshev_map, trail, wrong)
    other_grid = trace_ray(chebyshev_map, Angle(2, 9), depth=10, m=2)
    with pytest.raises(InvalidInputError):
        check_conjugacy(chebyshev_map, trail, other_grid)


def test_conjugacy_check_flags_a_wrong_branch(chebyshev_map):
    trail = trace_ray(chebyshev_map, Angle(1, 9), depth=10)
    image = trace_ray(chebyshev_map, Angle(2, 9), depth=10)
    image.samples[3] = (image.samples[3][0], image.samples[3][1] + 1e-3)
    with pytest.raises(ConjugacyResidualError):
        check_conjugacy(chebyshev_map, trail, image)


def test_trace_rejects_bad_parameters(identity_map):
    with pytest.raises(InvalidInputError):
        trace_ray(identity_map, Angle(1, 3), g0=1.0)
    with pytest.raises(InvalidInputError):
        trace_ray(identity_map, Angle(1, 3), depth=0)
    with pytest.raises(InvalidInputError):
        trace_ray(identity_map, Angle(1, 3), m=0)


def test_landing_needs_enough_samples(identity_map):
    trail = trace_ray(identity_map, Angle(1, 3), depth=2, m=4)
    assert len(trail.samples) < MIN_LANDING_SAMPLES
    with pytest.raises(InvalidInputError):
        landing_estimate(trail)


def test_shallow_trail_is_undecided(chebyshev_map):
    trail = trace_ray(chebyshev_map, Angle(1, 9), depth=3)
    estimate = landing_estimate(trail)
    assert estimate.status == LandingStatus.undecided
    assert estimate.tail_diameter > 1e-6


def test_trace_many_keeps_order(chebyshev_map):
    angles = [Angle(k, 11) for k in range(11)]
    trails = trace_many(chebyshev_map, angles, depth=8)
    assert [trail.angle for trail in trails] == angles


def test_high_precision_trace_agrees(chebyshev_map):
    fine = from_c(-2, precision=100)
    coarse = trace_ray(chebyshev_map, Angle(1, 7), depth=12)
    precise = trace_ray(fine, Angle(1, 7), depth=12)
    for (_, z), (_, w) in zip(coarse.samples, precise.samples):
        assert abs(z - w) <= 1e-12 * max(1.0, abs(w))


def test_trace_irrational_checks_angle_precision(identity_map):
    t = AngleApproximation(Fraction(5, 16), Fraction(1, 2**60))
    trail = trace_irrational(identity_map, t, depth=10, m=4)
    assert trail.angle == Angle(5, 16)
    loose = AngleApproximation(Fraction(5, 16), Fraction(1, 2**20))
    with pytest.raises(InsufficientPrecisionError):
        trace_irrational(identity_map, loose, depth=10, m=4)
    with pytest.raises(InvalidInputError):
        trace_irrational(identity_map, t, depth=10, m=4, guard=2)


def test_equipotential_points_have_the_requested_potential(chebyshev_map):
    points = equipotential(chebyshev_map, 0.5, 16)
    assert len(points) == 16
    assert green_residuals(chebyshev_map, points, 0.5) < 1e-9
    for k, z in enumerate(points):
        assert abs(z - chebyshev_point(0.5, Angle(k, 16))) < 1e-9


def test_equipotential_rejects_bad_input(chebyshev_map):
    with pytest.raises(InvalidInputError):
        equipotential(chebyshev_map, 0.5, 4)
    with pytest.raises(InvalidInputError):
        equipotential(chebyshev_map, 0, 16)


def test_equipotential_at_unit_potential(chebyshev_map):
    points = equipotential(chebyshev_map, 1.0, 8)
    assert abs(points[0] - (math.e + 1 / math.e)) < 1e-9
    assert abs(points[4] + (math.e + 1 / math.e)) < 1e-9


def test_golden_critical_angle_precision_gate(golden_map):
    from services.rotnum import critical_angle, golden_mean

    fine = critical_angle(golden_mean(), Fraction(1, 10**12))
    trail = trace_irrational(golden_map, fine, depth=15, m=2)
    assert trail.angle == Angle(fine.value)
    coarse = critical_angle(golden_mean(), Fraction(1, 10**3))
    with pytest.raises(InsufficientPrecisionError):
        trace_irrational(golden_map, coarse, depth=15, m=2)


def test_shallow_golden_trail_is_undecided(golden_map):
    trail = trace_ray(golden_map, Angle(1, 3), depth=2, m=8)
    estimate = landing_estimate(trail, eps_land=1e-6)
    assert estimate.status == LandingStatus.undecided
