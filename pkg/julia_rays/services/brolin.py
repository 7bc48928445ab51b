"""Sampling the measure of maximal entropy through uniformly random external angles."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

import config
from errors import InvalidInputError
from services.circle import Angle, double
from services.quadmap import QuadraticMap
from services.raytrace import (
    EPS_LAND,
    LandingStatus,
    landing_estimate,
    trace_ray,
)

logger = logging.getLogger(__name__)

ANGLE_BITS = 64
RESIDUAL_THRESHOLD = 1e-6


@dataclass
class BrolinRecord:
    t: Angle
    status: LandingStatus
    point: Optional[complex] = None
    residual: Optional[float] = None  # only when both t and 2t landed


@dataclass
class BrolinSample:
    seed: int
    n: int
    c: complex
    depth: int
    substeps: int
    records: list[BrolinRecord] = field(default_factory=list)

    @property
    def decided(self) -> list[BrolinRecord]:
        return [r for r in self.records if r.residual is not None]

    def fraction_below(self, threshold: float = RESIDUAL_THRESHOLD) -> float:
        decided = self.decided
        if not decided:
            return 0.0
        return sum(1 for r in decided if r.residual < threshold) / len(decided)


def sample_angles(n: int, seed: int) -> list[Angle]:
    """n uniform 64-bit dyadic angles from numpy's PCG64 generator."""
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2**ANGLE_BITS, size=n, dtype=np.uint64, endpoint=False)
    return [Angle(Fraction(int(k), 2**ANGLE_BITS)) for k in draws]


def _record(qmap: QuadraticMap, t: Angle, depth: int, m: int, eps_land: float) -> BrolinRecord:
    trail = trace_ray(qmap, t, depth=depth, m=m)
    image = trace_ray(qmap, double(t), depth=depth, m=m)
    land = landing_estimate(trail, eps_land=eps_land)
    land2 = landing_estimate(image, eps_land=eps_land)
    residual = None
    if land.status == LandingStatus.landed and land2.status == LandingStatus.landed:
        residual = abs(complex(qmap(qmap.ctx.mpc(land.point))) - land2.point)
    return BrolinRecord(t=t, status=land.status, point=land.point, residual=residual)


def brolin_sample(
    qmap: QuadraticMap,
    n: int,
    seed: int,
    depth: int = 30,
    m: int = 4,
    eps_land: float = EPS_LAND,
) -> BrolinSample:
    """Trace n random angles and their doubles, recording |f(land t) - land 2t|."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    angles = sample_angles(n, seed)
    workers = min(config.thread_count(), n)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(lambda t: _record(qmap, t, depth, m, eps_land), angles))
    sample = BrolinSample(
        seed=seed, n=n, c=qmap.c_complex, depth=depth, substeps=m, records=records
    )
    logger.info(
        f"brolin sample seed={seed} n={n}: {len(sample.decided)} decided, "
        f"{sample.fraction_below():.1%} below {RESIDUAL_THRESHOLD:g}"
    )
    return sample
