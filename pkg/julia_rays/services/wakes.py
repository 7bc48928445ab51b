"""Ray pairs, wakes and the separation search.

Wake angles are exact (``Fraction``); which of the two complementary
components is the wake is decided geometrically, by locating alpha against
a polygon made of the two trails, the landing segment and an arc at the
outer potential.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from errors import (
    ConsistencyFailureError,
    InconclusiveGeometryError,
    InvalidInputError,
    NotARayPairError,
    RootIsCriticalError,
)
from services.circle import (
    HALF,
    Angle,
    Orientation,
    angle_in_arc,
    arc_measure,
    double,
    tau_angle,
)
from services.quadmap import QuadraticMap, ordered_alpha
from services.raytrace import (
    DEFAULT_G0,
    DEFAULT_TOL_CONJ,
    LandingEstimate,
    RayTrail,
    landing_estimate,
    trace_ray,
)

logger = logging.getLogger(__name__)

PAIR_TOL = 1e-4
CLEARANCE = 10.0
ARC_STEPS_PER_TURN = 512


class Evidence(str, Enum):
    geometric = "geometric"
    caller_asserted = "caller-asserted"


class WakeKind(str, Enum):
    wake = "wake"
    co_wake = "co-wake"


class SeparationOutcome(str, Enum):
    separated = "separated"  # a(W) > 1/2: the wake holds 0 and not alpha
    tau = "tau"  # the tau-pair separates alpha from 0
    root_is_critical = "root-is-critical"
    inconclusive = "inconclusive"


@dataclass(frozen=True)
class RayPair:
    t: Angle
    t_prime: Angle
    root_estimate: Optional[LandingEstimate] = None

    def __post_init__(self):
        if self.t == self.t_prime:
            raise InvalidInputError(f"a ray pair needs two distinct angles, got {self.t} twice")

    @property
    def angles(self) -> tuple[Angle, Angle]:
        return self.t, self.t_prime

    def doubled(self) -> "RayPair":
        return RayPair(double(self.t), double(self.t_prime))

    def tau(self) -> "RayPair":
        return RayPair(tau_angle(self.t), tau_angle(self.t_prime))


@dataclass(frozen=True)
class SideArc:
    """The arc of angles at infinity bounding the wake, traversed ccw."""

    start: Angle
    end: Angle
    orientation: Orientation = Orientation.ccw

    @property
    def measure(self) -> Fraction:
        return arc_measure(self.start, self.end, self.orientation)

    def contains(self, x: Angle) -> bool:
        return angle_in_arc(x, self.start, self.end)


@dataclass
class Wake:
    pair: RayPair
    side_arc: SideArc
    a: Fraction
    alpha_excluded: Evidence
    kind: WakeKind = WakeKind.wake
    trails: dict[Angle, RayTrail] = field(default_factory=dict, repr=False)

    @property
    def co_wake_angle(self) -> Fraction:
        return 1 - self.a

    @property
    def root(self) -> Optional[complex]:
        if self.pair.root_estimate is None:
            return None
        return self.pair.root_estimate.point

    def has_geometry(self) -> bool:
        return self.side_arc.start in self.trails and self.side_arc.end in self.trails


@dataclass
class SeparationStep:
    pair: RayPair
    a: Fraction
    action: str


@dataclass
class SeparationResult:
    outcome: SeparationOutcome
    pair: RayPair
    wake: Optional[Wake]
    steps: list[SeparationStep]
    iteration_bound: int
    note: str = ""


# ── Geometry ────────────────────────────────────────────────────────────


def region_polygon(start_trail: RayTrail, end_trail: RayTrail, arc: SideArc) -> np.ndarray:
    """Closed polygon around the component whose angles at infinity are ``arc``."""
    g_out = start_trail.samples[0][0]
    length = float(arc.measure)
    steps = max(2, math.ceil(length * ARC_STEPS_PER_TURN))
    theta = float(arc.start.value) + length * np.arange(1, steps) / steps
    outer = np.exp(g_out + 2j * np.pi * theta)
    return np.concatenate(
        [
            np.asarray(start_trail.points[::-1], dtype=complex),
            outer,
            np.asarray(end_trail.points, dtype=complex),
        ]
    )


def point_in_region(poly: np.ndarray, p: complex) -> bool:
    """Even-odd crossing test; raises when p sits too close to the boundary."""
    p = complex(p)
    a = poly
    b = np.roll(poly, -1)
    ab = b - a
    seg_len2 = np.abs(ab) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        proj = np.where(seg_len2 > 0, ((p - a) * np.conj(ab)).real / seg_len2, 0.0)
    proj = np.clip(proj, 0.0, 1.0)
    dist = np.abs(a + proj * ab - p)
    k = int(np.argmin(dist))
    if dist[k] < CLEARANCE * math.sqrt(seg_len2[k]):
        raise InconclusiveGeometryError(
            f"point {p} is {dist[k]:.3e} from the boundary, local spacing {math.sqrt(seg_len2[k]):.3e}"
        )
    ay, by = a.imag, b.imag
    straddles = (ay > p.imag) != (by > p.imag)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = a.real + (p.imag - ay) * (b.real - a.real) / (by - ay)
    crossings = np.count_nonzero(straddles & (p.real < x_cross))
    return crossings % 2 == 1


def _wake_polygon(wake: Wake) -> np.ndarray:
    arc = wake.side_arc
    return region_polygon(wake.trails[arc.start], wake.trails[arc.end], arc)


# ── Operations ──────────────────────────────────────────────────────────


def _root(pair: RayPair, trails: tuple[RayTrail, RayTrail], pair_tol: float) -> LandingEstimate:
    first, second = trails
    if first.angle != pair.t or second.angle != pair.t_prime:
        raise InvalidInputError("trails must be given in the order of the pair's angles")
    gap = abs(first.deepest - second.deepest)
    if gap > pair_tol:
        raise NotARayPairError(
            f"rays {pair.t} and {pair.t_prime} end {gap:.3e} apart (tolerance {pair_tol:.1e})"
        )
    estimate = landing_estimate(first, eps_land=pair_tol)
    mid = (first.deepest + second.deepest) / 2
    return LandingEstimate(
        point=mid,
        status=estimate.status,
        tail_diameter=max(estimate.tail_diameter, gap),
        potential_reached=estimate.potential_reached,
    )


def wake_from_arc(pair: RayPair, start: Angle, end: Angle, trails: Optional[dict] = None) -> Wake:
    """A wake whose side the caller asserts, e.g. from known combinatorics."""
    if {start, end} != set(pair.angles):
        raise InvalidInputError("arc endpoints must be the pair's angles")
    arc = SideArc(start, end)
    return Wake(
        pair=pair, side_arc=arc, a=arc.measure,
        alpha_excluded=Evidence.caller_asserted, trails=dict(trails or {}),
    )


def wake_from_pair(
    qmap: QuadraticMap,
    pair: RayPair,
    trails: tuple[RayTrail, RayTrail],
    pair_tol: float = PAIR_TOL,
) -> Wake:
    """The component of C minus (R_t, R_t', root) not containing alpha."""
    root = _root(pair, trails, pair_tol)
    alpha = complex(ordered_alpha(qmap))
    if abs(root.point - alpha) <= pair_tol:
        raise InvalidInputError(f"the pair {pair.t}, {pair.t_prime} lands at alpha; wakes need another root")
    by_angle = {pair.t: trails[0], pair.t_prime: trails[1]}
    candidate = SideArc(pair.t, pair.t_prime)
    poly = region_polygon(trails[0], trails[1], candidate)
    arc = SideArc(pair.t_prime, pair.t) if point_in_region(poly, alpha) else candidate
    return Wake(
        pair=RayPair(pair.t, pair.t_prime, root),
        side_arc=arc,
        a=arc.measure,
        alpha_excluded=Evidence.geometric,
        trails=by_angle,
    )


def contains_critical(wake: Wake) -> bool:
    """a(W) > 1/2, cross-checked against the location of 0 when trails are at hand."""
    if wake.a == HALF:
        raise RootIsCriticalError(f"wake {wake.side_arc.start}..{wake.side_arc.end} has angle 1/2")
    exact = wake.a > HALF
    if wake.has_geometry():
        try:
            geometric = point_in_region(_wake_polygon(wake), 0j)
        except InconclusiveGeometryError as e:
            logger.info(f"skipping geometric check of 0: {e}")
        else:
            if geometric != exact:
                raise ConsistencyFailureError(
                    f"a(W)={wake.a} says contains-0={exact}, geometry says {geometric}"
                )
    return exact


def image_wake(
    qmap: QuadraticMap,
    wake: Wake,
    image_trails: Optional[tuple[RayTrail, RayTrail]] = None,
    pair_tol: float = PAIR_TOL,
) -> tuple[Wake, WakeKind]:
    """f(W): the region cut out by (R_2t, R_2t') with angle 2 a(W).

    It is a co-wake exactly when -alpha lies in W; the answer is cross-checked
    by locating alpha in the image region when image trails are given.
    """
    if wake.a >= HALF:
        raise InvalidInputError(f"image_wake needs a(W) < 1/2, got {wake.a}")
    if not wake.has_geometry():
        raise InconclusiveGeometryError("image_wake needs the trails of W")
    alpha = complex(ordered_alpha(qmap))
    if wake.root is not None and abs(complex(qmap(wake.root)) - alpha) <= pair_tol:
        raise InvalidInputError("f(root) = alpha: the image of W is not a wake or co-wake")

    neg_alpha_inside = point_in_region(_wake_polygon(wake), -alpha)
    kind = WakeKind.co_wake if neg_alpha_inside else WakeKind.wake
    arc = SideArc(double(wake.side_arc.start), double(wake.side_arc.end))
    image_pair = wake.pair.doubled()
    image = Wake(
        pair=image_pair, side_arc=arc, a=arc.measure,
        alpha_excluded=Evidence.geometric, kind=kind,
    )
    if image.a != 2 * wake.a:
        raise ConsistencyFailureError(f"doubled arc has angle {image.a}, expected {2 * wake.a}")

    if image_trails is not None:
        image.pair = RayPair(image_pair.t, image_pair.t_prime, _root(image_pair, image_trails, pair_tol))
        image.trails = {image_pair.t: image_trails[0], image_pair.t_prime: image_trails[1]}
        try:
            alpha_inside = point_in_region(_wake_polygon(image), alpha)
        except InconclusiveGeometryError as e:
            logger.info(f"skipping alpha check on the image region: {e}")
        else:
            if alpha_inside != (kind == WakeKind.co_wake):
                raise ConsistencyFailureError(
                    f"-alpha in W is {neg_alpha_inside} but alpha in f(W) is {alpha_inside}"
                )
    return image, kind


def iteration_bound(a: Fraction) -> int:
    """Smallest k with 2^k a >= 1/2, plus one."""
    if a <= 0:
        raise InvalidInputError("wake angle must be positive")
    k = 0
    while a * 2**k < HALF:
        k += 1
    return k + 1


class TrailCache:
    """Thread-safe memo of traced rays for one map and one trace configuration."""

    def __init__(
        self,
        qmap: QuadraticMap,
        depth: int = 30,
        m: int = 4,
        g0: float = DEFAULT_G0,
        tol_conj: float = DEFAULT_TOL_CONJ,
    ):
        self.qmap = qmap
        self.depth = depth
        self.m = m
        self.g0 = g0
        self.tol_conj = tol_conj
        self._trails: dict[Angle, RayTrail] = {}
        self._lock = threading.Lock()

    def get(self, angle: Angle) -> RayTrail:
        with self._lock:
            cached = self._trails.get(angle)
        if cached is not None:
            return cached
        trail = trace_ray(
            self.qmap, angle, g0=self.g0, depth=self.depth, m=self.m, tol_conj=self.tol_conj
        )
        with self._lock:
            return self._trails.setdefault(angle, trail)

    def pair(self, pair: RayPair) -> tuple[RayTrail, RayTrail]:
        return self.get(pair.t), self.get(pair.t_prime)

    def __len__(self) -> int:
        return len(self._trails)


def separation_search(
    qmap: QuadraticMap,
    pair: RayPair,
    provider: TrailCache,
    pair_tol: float = PAIR_TOL,
) -> SeparationResult:
    """Push a wake forward until it holds 0, or its tau-image separates alpha from 0."""
    steps: list[SeparationStep] = []
    try:
        wake = wake_from_pair(qmap, pair, provider.pair(pair), pair_tol)
    except InconclusiveGeometryError as e:
        return SeparationResult(SeparationOutcome.inconclusive, pair, None, steps, 0, note=str(e))
    bound = iteration_bound(wake.a)
    current = pair

    for _ in range(bound):
        try:
            if wake.a > HALF:
                steps.append(SeparationStep(current, wake.a, "wake contains 0"))
                contains_critical(wake)
                return SeparationResult(SeparationOutcome.separated, current, wake, steps, bound)
            if wake.a == HALF:
                steps.append(SeparationStep(current, wake.a, "root is the critical point"))
                return SeparationResult(
                    SeparationOutcome.root_is_critical, current, wake, steps, bound
                )
            if point_in_region(_wake_polygon(wake), -complex(ordered_alpha(qmap))):
                steps.append(SeparationStep(current, wake.a, "-alpha in W: take the tau-pair"))
                tau_pair = current.tau()
                tau_wake = wake_from_pair(qmap, tau_pair, provider.pair(tau_pair), pair_tol)
                return SeparationResult(SeparationOutcome.tau, tau_pair, tau_wake, steps, bound)
            steps.append(SeparationStep(current, wake.a, "advance to the image wake"))
            image_pair = current.doubled()
            wake, _ = image_wake(qmap, wake, provider.pair(image_pair), pair_tol)
            current = wake.pair
        except InconclusiveGeometryError as e:
            logger.warning(f"separation search inconclusive at {current.t}, {current.t_prime}: {e}")
            return SeparationResult(
                SeparationOutcome.inconclusive, current, wake, steps, bound, note=str(e)
            )

    return SeparationResult(
        SeparationOutcome.inconclusive, current, wake, steps, bound,
        note=f"no decision within {bound} iterations",
    )
