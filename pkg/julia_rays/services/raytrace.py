"""External rays and equipotentials by pullback through the Böttcher conjugacy.

Potentials run along the grid g_i = g0 * 2^(-i/m). Since 2 g_i = g_(i-m),
the sample x(g_i, s) is a square root of x(g_(i-m), 2s) - c, and the whole
ray is one row of a triangular table whose row j carries the angle 2^j t.
Grid levels i < m are seeded by pulling back from a potential high enough
that phi(z) = z holds to working precision.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

import mpmath

import config
from errors import (
    BranchAmbiguityError,
    ConjugacyResidualError,
    InsufficientPrecisionError,
    InvalidInputError,
)
from services.circle import Angle, double
from services.quadmap import QuadraticMap, green

logger = logging.getLogger(__name__)

DEFAULT_G0 = math.log(1e4)
MIN_G0 = 2.0
DEFAULT_TOL_CONJ = 1e-9
AMBIGUITY_RATIO = 2.0
MAX_REFINEMENTS = 2
IRRATIONAL_GUARD = 8

EPS_LAND = 1e-6
EPS_LAND_INDIFFERENT = 5e-2
TAIL_FRACTION = 0.1
MIN_LANDING_SAMPLES = 10


class TrailStatus(str, Enum):
    traced = "traced-to-depth"
    aborted = "aborted-branch-ambiguity"


class LandingStatus(str, Enum):
    landed = "landed"
    undecided = "undecided"


@dataclass(frozen=True)
class TraceConfig:
    g0: float = DEFAULT_G0
    depth: int = 30
    substeps: int = 4
    tol_conj: float = DEFAULT_TOL_CONJ

    @property
    def levels(self) -> int:
        return self.depth * self.substeps

    def potential(self, i: int) -> float:
        # exact under doubling: potential(i - m) == 2 * potential(i)
        q, r = divmod(i, self.substeps)
        return math.ldexp(self.g0 * 2.0 ** (-r / self.substeps), -q)


@dataclass
class RayTrail:
    angle: Angle
    c: complex
    samples: list[tuple[float, complex]]
    status: TrailStatus
    config: TraceConfig
    max_residual: float = 0.0
    refinements: int = 0

    @property
    def potentials(self) -> list[float]:
        return [g for g, _ in self.samples]

    @property
    def points(self) -> list[complex]:
        return [z for _, z in self.samples]

    @property
    def deepest(self) -> complex:
        return self.samples[-1][1]


@dataclass
class LandingEstimate:
    point: complex
    status: LandingStatus
    tail_diameter: float
    potential_reached: float


@dataclass
class _Table:
    rows: list[list] = field(default_factory=list)
    ambiguous_at: Optional[tuple[int, int]] = None


# ── Numerics ────────────────────────────────────────────────────────────


def _real(ctx, value: Fraction):
    if ctx is mpmath.fp:
        return value.numerator / value.denominator
    return ctx.mpf(value.numerator) / value.denominator


def _asymptotic(ctx, g: float, s: Fraction):
    """phi^-1(e^(g + 2 pi i s)) to leading order: the point e^(g + 2 pi i s)."""
    return ctx.exp(ctx.mpc(g, 0) + ctx.mpc(0, 2) * ctx.pi * _real(ctx, s))


def exact_seed_potential(qmap: QuadraticMap) -> float:
    """Potential above which |phi(z)/z - 1| is below one ulp."""
    return (qmap.precision * math.log(2) + math.log1p(abs(qmap.c_complex))) / 2 + 1


def _pick_branch(ctx, qmap: QuadraticMap, target, predictor):
    """Preimage of ``target`` nearer ``predictor``, or None when the choice is unsafe."""
    root = ctx.sqrt(target - qmap.c)
    near, far = abs(root - predictor), abs(root + predictor)
    if near <= far:
        return root if far >= AMBIGUITY_RATIO * near else None
    return -root if near >= AMBIGUITY_RATIO * far else None


def _seed(qmap: QuadraticMap, g: float, s: Fraction, g_exact: float):
    ctx = qmap.ctx
    k = 0
    while g * 2**k < g_exact:
        k += 1
    x = _asymptotic(ctx, g * 2**k, (s * 2**k) % 1)
    for level in range(k - 1, -1, -1):
        guess = _asymptotic(ctx, g * 2**level, (s * 2**level) % 1)
        x = _pick_branch(ctx, qmap, x, guess)
        if x is None:
            return None
    return x


def _build_table(qmap: QuadraticMap, t: Angle, cfg: TraceConfig) -> _Table:
    ctx = qmap.ctx
    m, n_levels, depth = cfg.substeps, cfg.levels, cfg.depth
    g_exact = exact_seed_potential(qmap)
    angles = [t.value]
    for _ in range(depth):
        angles.append((2 * angles[-1]) % 1)

    table = _Table(rows=[[] for _ in range(depth + 1)])
    reach_below = None  # deepest level reached by row j + 1
    for j in range(depth, -1, -1):
        limit = n_levels - j * m
        if reach_below is not None:
            limit = min(limit, reach_below + m)
        row = table.rows[j]
        for i in range(limit + 1):
            if i < m:
                x = _seed(qmap, cfg.potential(i), angles[j], g_exact)
            else:
                target = table.rows[j + 1][i - m]
                x = _pick_branch(ctx, qmap, target, row[i - 1])
            if x is None:
                if table.ambiguous_at is None:
                    table.ambiguous_at = (j, i)
                break
            row.append(x)
        reach_below = len(row) - 1
    return table


def _certify(qmap: QuadraticMap, table: _Table, cfg: TraceConfig) -> float:
    row, image = table.rows[0], table.rows[1] if len(table.rows) > 1 else []
    worst = 0.0
    m = cfg.substeps
    for i in range(m, len(row)):
        if i - m >= len(image):
            break
        x = row[i]
        residual = float(abs(qmap(x) - image[i - m]))
        scale = max(1.0, float(abs(x)))
        if residual > cfg.tol_conj * scale:
            raise ConjugacyResidualError(
                f"residual {residual:.3e} at potential {cfg.potential(i):.6g} exceeds "
                f"{cfg.tol_conj:.1e}"
            )
        worst = max(worst, residual / scale)
    return worst


# ── Operations ──────────────────────────────────────────────────────────


def trace_ray(
    qmap: QuadraticMap,
    t: Angle,
    g0: float = DEFAULT_G0,
    depth: int = 30,
    m: int = 4,
    tol_conj: float = DEFAULT_TOL_CONJ,
    max_refinements: int = MAX_REFINEMENTS,
) -> RayTrail:
    """Sample R_t at potentials g0 * 2^(-i/m), i = 0 .. depth*m.

    An ambiguous branch choice retries with twice the substeps (the result
    is subsampled back to the requested grid); once ``max_refinements`` is
    spent the partial trail comes back with status aborted.
    """
    if depth < 1 or m < 1:
        raise InvalidInputError("depth and substeps must be >= 1")
    if g0 < MIN_G0:
        raise InvalidInputError(f"g0 must be >= {MIN_G0}")
    t = Angle(t)
    cfg = TraceConfig(g0=g0, depth=depth, substeps=m, tol_conj=tol_conj)

    for refinement in range(max_refinements + 1):
        factor = 2**refinement
        work_cfg = replace(cfg, substeps=m * factor)
        table = _build_table(qmap, t, work_cfg)
        if table.ambiguous_at is None or refinement == max_refinements:
            break
        j, i = table.ambiguous_at
        logger.warning(
            f"branch ambiguity for t={t} at row {j}, level {i}; refining to m={m * factor * 2}"
        )

    residual = _certify(qmap, table, work_cfg)
    row = table.rows[0]
    samples = [
        (work_cfg.potential(i), complex(row[i])) for i in range(0, len(row), factor)
    ]
    status = TrailStatus.traced if table.ambiguous_at is None else TrailStatus.aborted
    if status == TrailStatus.aborted:
        logger.warning(
            f"trace of t={t} aborted after {len(samples)} samples (branch ambiguity)"
        )
    return RayTrail(
        angle=t,
        c=qmap.c_complex,
        samples=samples,
        status=status,
        config=cfg,
        max_residual=residual,
        refinements=refinement,
    )


def trace_many(qmap: QuadraticMap, angles: list[Angle], **kwargs) -> list[RayTrail]:
    """Trace several angles in a thread pool; results keep the input order."""
    if not angles:
        return []
    workers = min(config.thread_count(), len(angles))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: trace_ray(qmap, a, **kwargs), angles))


def landing_estimate(
    trail: RayTrail, eps_land: float = EPS_LAND, tail_fraction: float = TAIL_FRACTION
) -> LandingEstimate:
    if len(trail.samples) < MIN_LANDING_SAMPLES:
        raise InvalidInputError(
            f"landing needs >= {MIN_LANDING_SAMPLES} samples, trail has {len(trail.samples)}"
        )
    if not 0 < tail_fraction <= 1:
        raise InvalidInputError("tail_fraction must lie in (0, 1]")
    k = max(2, math.ceil(len(trail.samples) * tail_fraction))
    tail = trail.points[-k:]
    diameter = max(abs(a - b) for idx, a in enumerate(tail) for b in tail[idx + 1:])
    status = LandingStatus.landed if diameter <= eps_land else LandingStatus.undecided
    return LandingEstimate(
        point=trail.deepest,
        status=status,
        tail_diameter=diameter,
        potential_reached=trail.samples[-1][0],
    )


def check_conjugacy(qmap: QuadraticMap, trail: RayTrail, image: RayTrail, tol: Optional[float] = None) -> float:
    """Max relative residual |f(x(g, t)) - x(2g, 2t)| between a trail and the trail of 2t."""
    if image.angle != double(trail.angle):
        raise InvalidInputError(f"image trail has angle {image.angle}, expected {double(trail.angle)}")
    if image.config.g0 != trail.config.g0 or image.config.substeps != trail.config.substeps:
        raise InvalidInputError("trails must share g0 and substeps")
    tol = trail.config.tol_conj if tol is None else tol
    m = trail.config.substeps
    worst = 0.0
    for i in range(m, len(trail.samples)):
        if i - m >= len(image.samples):
            break
        x = trail.samples[i][1]
        residual = abs(qmap(qmap.ctx.mpc(x)) - image.samples[i - m][1])
        scale = max(1.0, abs(x))
        if residual > tol * scale:
            raise ConjugacyResidualError(
                f"trail {trail.angle} vs {image.angle}: residual {float(residual):.3e} at sample {i}"
            )
        worst = max(worst, float(residual) / scale)
    return worst


def trace_irrational(
    qmap: QuadraticMap,
    t_approx,
    depth: int = 30,
    m: int = 4,
    tol_conj: float = DEFAULT_TOL_CONJ,
    g0: float = DEFAULT_G0,
    guard: int = IRRATIONAL_GUARD,
) -> RayTrail:
    """Trace the dyadic truncation of an irrational angle.

    Each doubling multiplies the angle error by two, so the truncation must
    be within 2^-(depth*m + guard) for the traced rows to stay within 2^-guard
    of the true angles.
    """
    if guard < IRRATIONAL_GUARD:
        raise InvalidInputError(f"guard must be >= {IRRATIONAL_GUARD}")
    required = Fraction(1, 2 ** (depth * m + guard))
    if t_approx.error_bound > required:
        raise InsufficientPrecisionError(
            f"angle error {float(t_approx.error_bound):.3e} exceeds 2^-{depth * m + guard} "
            f"needed for {depth * m} grid levels"
        )
    return trace_ray(qmap, Angle(t_approx.value), g0=g0, depth=depth, m=m, tol_conj=tol_conj)


def equipotential(
    qmap: QuadraticMap, g: float, n: int, m: int = 4, g0: float = DEFAULT_G0
) -> list[complex]:
    """n points at angles k/n on the level curve G = g."""
    if g <= 0:
        raise InvalidInputError("g must be positive")
    if n < 8:
        raise InvalidInputError("need at least 8 samples")
    steps = max(1, math.ceil(math.log2(g0 / g)))
    start = math.ldexp(g, steps)
    trails = trace_many(
        qmap, [Angle(k, n) for k in range(n)], g0=start, depth=steps, m=m
    )
    points = []
    for trail in trails:
        if trail.status != TrailStatus.traced:
            raise BranchAmbiguityError(
                f"equipotential {g}: ray {trail.angle} aborted", angle=trail.angle
            )
        points.append(trail.deepest)
    return points


def green_residuals(qmap: QuadraticMap, points: list[complex], g: float, tol: float = 1e-9) -> float:
    """Largest |G(z) - g| over ``points``."""
    return max(abs(green(qmap, z, tol).green_estimate - g) for z in points)
