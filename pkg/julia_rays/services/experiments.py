"""Desk-checkable experiments: the Chebyshev oracle and the golden-mean Siegel map."""

import cmath
import logging
import math
import time
from fractions import Fraction
from typing import Callable, Optional

from errors import JuliaRaysError
from models.report import (
    ExperimentReport,
    Measurement,
    Outcome,
    SuiteReport,
    aggregate,
)
from models.trail import pair as complex_pair
from services.circle import Angle, double, halve, tau_angle
from services.quadmap import QuadraticMap, from_c, from_rotation_number
from services.raytrace import (
    EPS_LAND,
    LandingStatus,
    RayTrail,
    TrailStatus,
    check_conjugacy,
    landing_estimate,
    trace_irrational,
    trace_many,
)
from services.rotnum import AngleApproximation, critical_angle, golden_mean

logger = logging.getLogger(__name__)

CHEBYSHEV_ANGLES = [Angle(1, 9), Angle(1, 7), Angle(3, 11), Angle(5, 13)]
ORACLE_MIN_POTENTIAL = 1e-4
ORACLE_REL_TOL = 1e-9
ENDPOINT_TOL = 1e-9
SIEGEL_TOL_CONJ = 1e-6
MONOTONE_WINDOW = 20
CLUSTER_SEPARATION = 3.0
GUARD_BITS = 8
# R_t* needs about 400 grid levels before its tail is within 5e-2 of 0
SIEGEL_DEPTH = 200
SIEGEL_SUBSTEPS = 2


class _Recorder:
    """Collects measurements for one report."""

    def __init__(self):
        self.measurements: list[Measurement] = []
        self.notes: list[str] = []

    def check(self, label: str, value: float, tolerance: float, detail: str = "") -> bool:
        ok = value <= tolerance
        self.measurements.append(
            Measurement(
                label=label, value=float(value), tolerance=tolerance,
                outcome=Outcome.passed if ok else Outcome.failed, detail=detail,
            )
        )
        return ok

    def flag(self, label: str, ok: bool, detail: str = "") -> None:
        self.measurements.append(
            Measurement(label=label, outcome=Outcome.passed if ok else Outcome.failed, detail=detail)
        )

    def undecided(self, label: str, detail: str = "") -> None:
        self.measurements.append(Measurement(label=label, outcome=Outcome.undecided, detail=detail))

    def fail(self, label: str, detail: str) -> None:
        self.measurements.append(Measurement(label=label, outcome=Outcome.failed, detail=detail))

    def report(self, name: str, qmap: QuadraticMap, inputs: dict, started: float) -> ExperimentReport:
        report = ExperimentReport(
            name=name,
            c=complex_pair(qmap.c_complex),
            inputs=inputs,
            measurements=self.measurements,
            runtime_ms=(time.perf_counter() - started) * 1000,
            notes=self.notes,
        )
        logger.info(f"experiment {name}: {report.overall.value} in {report.runtime_ms:.0f} ms")
        return report


# ── Chebyshev ───────────────────────────────────────────────────────────


def chebyshev_point(g: float, t: Angle) -> complex:
    """psi(w) = w + 1/w conjugates squaring to z^2 - 2 outside the unit disk."""
    w = cmath.exp(complex(g, 2 * math.pi * float(t)))
    return w + 1 / w


def chebyshev_landing(t: Angle) -> float:
    return 2 * math.cos(2 * math.pi * float(t))


def oracle_error(trail: RayTrail, min_potential: float = ORACLE_MIN_POTENTIAL) -> float:
    worst = 0.0
    for g, z in trail.samples:
        if g < min_potential:
            break
        exact = chebyshev_point(g, trail.angle)
        worst = max(worst, abs(z - exact) / abs(exact))
    return worst


def _landing_check(rec: _Recorder, label: str, trail: RayTrail, expected: float, tol: float) -> None:
    estimate = landing_estimate(trail, eps_land=EPS_LAND)
    if estimate.status != LandingStatus.landed:
        rec.undecided(label, f"tail diameter {estimate.tail_diameter:.3e}")
        return
    rec.check(label, abs(estimate.point - expected), tol)


def exp_chebyshev_oracle(depth: int = 30, m: int = 4) -> ExperimentReport:
    started = time.perf_counter()
    rec = _Recorder()
    qmap = from_c(-2)
    mirrored = [Angle(1 - t.value) for t in CHEBYSHEV_ANGLES]
    ends = [Angle(0), Angle(1, 2)]
    trails = trace_many(qmap, CHEBYSHEV_ANGLES + mirrored + ends, depth=depth, m=m)
    by_angle = {trail.angle: trail for trail in trails}

    for trail in trails:
        if trail.status != TrailStatus.traced:
            rec.fail(f"trace {trail.angle}", "branch ambiguity")
    rec.check(
        "conjugacy residual", max(trail.max_residual for trail in trails), trails[0].config.tol_conj
    )
    for t, u in zip(CHEBYSHEV_ANGLES, mirrored):
        rec.check(f"psi oracle {t}", oracle_error(by_angle[t]), ORACLE_REL_TOL)
        _landing_check(rec, f"landing {t}", by_angle[t], chebyshev_landing(t), EPS_LAND)
        rec.check(
            f"co-landing {t}, {u}", abs(by_angle[t].deepest - by_angle[u].deepest), EPS_LAND
        )
    _landing_check(rec, "landing 0 at beta = 2", by_angle[ends[0]], 2.0, ENDPOINT_TOL)
    _landing_check(rec, "landing 1/2 at -2", by_angle[ends[1]], -2.0, ENDPOINT_TOL)
    return rec.report("chebyshev", qmap, {"depth": depth, "substeps": m}, started)


# ── Golden-mean Siegel map ──────────────────────────────────────────────


def golden_siegel_map() -> QuadraticMap:
    return from_rotation_number(golden_mean())


def golden_critical_angle(levels: int) -> AngleApproximation:
    """t* truncated finely enough to trace ``levels`` grid levels."""
    return critical_angle(golden_mean(), Fraction(1, 2 ** (levels + GUARD_BITS)))


def _nonincreasing_violations(values: list[float], slack: float = 1e-15) -> int:
    return sum(1 for a, b in zip(values, values[1:]) if b > a + slack)


def exp_golden_siegel(
    depth: int = SIEGEL_DEPTH,
    m: int = SIEGEL_SUBSTEPS,
    eps: float = 5e-2,
    tol_conj: float = SIEGEL_TOL_CONJ,
) -> ExperimentReport:
    started = time.perf_counter()
    rec = _Recorder()
    qmap = golden_siegel_map()
    inputs = {"depth": depth, "substeps": m, "eps": eps, "tol_conj": tol_conj}
    approx = golden_critical_angle(depth * m)
    t_star = Angle(approx.value)
    inputs["t_star"] = float(approx.value)
    rec.check("critical angle error bound", float(approx.error_bound), 1e-6)

    try:
        trail = trace_irrational(qmap, approx, depth=depth, m=m, tol_conj=tol_conj)
    except JuliaRaysError as e:
        rec.fail("trace R_t*", str(e))
        return rec.report("golden-siegel", qmap, inputs, started)
    tau_trail, image = trace_many(
        qmap, [tau_angle(t_star), double(t_star)], depth=depth, m=m, tol_conj=tol_conj
    )

    for label, tr in (("R_t*", trail), ("R_t*+1/2", tau_trail), ("R_2t*", image)):
        if tr.status != TrailStatus.traced:
            rec.fail(f"trace {label}", f"aborted after {len(tr.samples)} samples")

    for label, tr in (("R_t*", trail), ("R_t*+1/2", tau_trail)):
        distances = [abs(z) for z in tr.points]
        rec.check(f"{label} deepest distance to 0", distances[-1], eps)
        window = distances[-MONOTONE_WINDOW:]
        rec.flag(
            f"{label} distance to 0 nonincreasing over last {MONOTONE_WINDOW} grid levels",
            _nonincreasing_violations(window) == 0,
        )
    n = min(len(trail.samples), len(tau_trail.samples))
    rec.check(
        "tau symmetry",
        max(abs(trail.points[i] + tau_trail.points[i]) for i in range(n)),
        tol_conj,
    )
    rec.check("R_2t* deepest distance to c", abs(image.deepest - qmap.c_complex), eps)
    try:
        rec.check("conjugacy R_t* -> R_2t*", check_conjugacy(qmap, trail, image, tol_conj), tol_conj)
    except JuliaRaysError as e:
        rec.fail("conjugacy R_t* -> R_2t*", str(e))
    return rec.report("golden-siegel", qmap, inputs, started)


def _best_pairing(points: list[complex]) -> tuple[list[tuple[int, int]], float, float]:
    """Split four points into two pairs minimizing the larger intra-pair distance."""
    pairings = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]]
    best = None
    for pairing in pairings:
        intra = max(abs(points[a] - points[b]) for a, b in pairing)
        if best is None or intra < best[1]:
            centers = [(points[a] + points[b]) / 2 for a, b in pairing]
            best = (pairing, intra, abs(centers[0] - centers[1]))
    return best


def exp_preimage_cluster(
    depth: int = SIEGEL_DEPTH, m: int = SIEGEL_SUBSTEPS, eps: float = 5e-2
) -> ExperimentReport:
    started = time.perf_counter()
    rec = _Recorder()
    qmap = golden_siegel_map()
    c = qmap.c_complex
    inputs = {"depth": depth, "substeps": m, "eps": eps}
    approx = golden_critical_angle(depth * m)
    t_star = Angle(approx.value)
    targets = {t_star, tau_angle(t_star)}
    angles = list(halve(t_star)) + list(halve(tau_angle(t_star)))
    inputs["angles"] = [str(a) for a in angles]

    # halving halves the truncation error, so t* precision carries over
    if approx.error_bound / 2 > Fraction(1, 2 ** (depth * m + GUARD_BITS)):
        rec.fail("halved angle precision", f"error {float(approx.error_bound):.3e}")
        return rec.report("preimage-cluster", qmap, inputs, started)
    trails = trace_many(qmap, angles, depth=depth, m=m, tol_conj=SIEGEL_TOL_CONJ)
    for trail in trails:
        if trail.status != TrailStatus.traced:
            rec.fail(f"trace {trail.angle}", "branch ambiguity")
    points = [trail.deepest for trail in trails]

    pairing, intra, inter = _best_pairing(points)
    if inter < CLUSTER_SEPARATION * intra:
        rec.undecided("clustering", f"inter {inter:.3e} < {CLUSTER_SEPARATION} x intra {intra:.3e}")
        return rec.report("preimage-cluster", qmap, inputs, started)
    centers = [(points[a] + points[b]) / 2 for a, b in pairing]
    rec.notes.append(f"clusters {[(str(angles[a]), str(angles[b])) for a, b in pairing]}")
    for k, center in enumerate(centers):
        rec.check(f"cluster {k} center: z^2 + c", abs(center * center + c), eps)
        doubled = {double(angles[a]) for a in pairing[k]}
        rec.flag(f"cluster {k} doubled angles", doubled == targets, str(sorted(map(str, doubled))))
    rec.check("centers are negatives", abs(centers[0] + centers[1]), eps)
    return rec.report("preimage-cluster", qmap, inputs, started)


EXPERIMENTS: dict[str, Callable[..., ExperimentReport]] = {
    "chebyshev": exp_chebyshev_oracle,
    "golden-siegel": exp_golden_siegel,
    "preimage-cluster": exp_preimage_cluster,
}


def run_experiment(name: str, depth: Optional[int] = None, m: Optional[int] = None) -> ExperimentReport:
    if name not in EXPERIMENTS:
        raise KeyError(name)
    kwargs = {}
    if depth is not None:
        kwargs["depth"] = depth
    if m is not None:
        kwargs["m"] = m
    return EXPERIMENTS[name](**kwargs)


def verify_all(depth: Optional[int] = None, m: Optional[int] = None) -> SuiteReport:
    reports = [run_experiment(name, depth, m) for name in EXPERIMENTS]
    return SuiteReport(reports=reports, overall=aggregate([r.overall for r in reports]))
