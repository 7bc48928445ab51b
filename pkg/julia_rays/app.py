from contextlib import asynccontextmanager, contextmanager
from fractions import Fraction
from typing import Optional, Union

from dotenv import load_dotenv

from fastapi import FastAPI, HTTPException, Query

load_dotenv()

import config
from errors import JuliaRaysError, RootIsCriticalError
from models.report import (
    BrolinRequest,
    BrolinSampleDoc,
    ExperimentReport,
    SuiteReport,
    brolin_doc,
)
from models.rotation import (
    ApproximationDoc,
    ClassificationReport,
    approximation_doc,
)
from models.trail import (
    EquipotentialDoc,
    EquipotentialRequest,
    TraceRequest,
    TrailDoc,
    equipotential_doc,
    trail_doc,
)
from models.wake import SeparationDoc, WakeDoc, WakeRequest, separation_doc, wake_doc
from services.brolin import brolin_sample
from services.circle import Angle
from services.experiments import EXPERIMENTS, run_experiment, verify_all
from services.quadmap import resolve_map
from services.raytrace import DEFAULT_G0, MIN_LANDING_SAMPLES, equipotential, landing_estimate, trace_many
from services.rotnum import classify, critical_angle, parse_cf
from services.wakes import RayPair, TrailCache, contains_critical, separation_search, wake_from_pair


@asynccontextmanager
async def lifespan(app: FastAPI):
    config.configure_logging()
    yield


app = FastAPI(title="Julia Rays API", lifespan=lifespan)


@contextmanager
def _http_errors():
    """Input errors -> 400, the a(W) = 1/2 signal -> 409, computational limits -> 422."""
    try:
        yield
    except RootIsCriticalError as e:
        raise HTTPException(status_code=409, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except (JuliaRaysError, RuntimeError) as e:
        raise HTTPException(status_code=422, detail=str(e))


def _map(req):
    return resolve_map(c=req.c, theta_cf=req.theta_cf)


def _depth(value: Optional[int]) -> int:
    return value if value is not None else config.default_depth()


def _substeps(value: Optional[int]) -> int:
    return value if value is not None else config.default_substeps()


@app.get("/health")
async def health():
    return {"status": "ok"}


# ── Rotation numbers ───────────────────────────────────────────────────


@app.get("/classify", response_model=ClassificationReport)
def classify_endpoint(theta_cf: str = Query(...), depth: Optional[int] = Query(None, ge=2)):
    with _http_errors():
        return classify(parse_cf(theta_cf), _depth(depth))


@app.get("/critical-angle", response_model=ApproximationDoc)
def critical_angle_endpoint(
    theta_cf: str = Query(...),
    err: str = Query("1e-8"),
    digits: int = Query(0, ge=0, le=4096),
):
    with _http_errors():
        return approximation_doc(critical_angle(parse_cf(theta_cf), Fraction(err)), digits)


# ── Rays ───────────────────────────────────────────────────────────────


@app.post("/trace", response_model=list[TrailDoc])
def trace_endpoint(body: TraceRequest):
    with _http_errors():
        qmap = _map(body)
        trails = trace_many(
            qmap,
            [Angle.parse(a) for a in body.angles],
            g0=body.g0 if body.g0 is not None else DEFAULT_G0,
            depth=_depth(body.depth),
            m=_substeps(body.substeps),
            tol_conj=body.tol_conj,
        )
        docs = []
        for trail in trails:
            landing = None
            if len(trail.samples) >= MIN_LANDING_SAMPLES:
                landing = landing_estimate(trail, eps_land=body.eps_land)
            docs.append(trail_doc(trail, landing))
        return docs


@app.post("/equipotential", response_model=EquipotentialDoc)
def equipotential_endpoint(body: EquipotentialRequest):
    with _http_errors():
        qmap = _map(body)
        points = equipotential(qmap, body.potential, body.samples, m=_substeps(body.substeps))
        return equipotential_doc(qmap.c_complex, body.potential, points)


# ── Wakes ──────────────────────────────────────────────────────────────


def _wake_setup(body: WakeRequest):
    qmap = _map(body)
    cache = TrailCache(qmap, depth=_depth(body.depth), m=_substeps(body.substeps))
    return qmap, RayPair(Angle.parse(body.t), Angle.parse(body.t_prime)), cache


@app.post("/wake", response_model=WakeDoc)
def wake_endpoint(body: WakeRequest):
    with _http_errors():
        qmap, pair, cache = _wake_setup(body)
        wake = wake_from_pair(qmap, pair, cache.pair(pair), pair_tol=body.pair_tol)
        try:
            holds_zero = contains_critical(wake)
        except RootIsCriticalError:
            holds_zero = None
        return wake_doc(wake, holds_zero)


@app.post("/separate", response_model=SeparationDoc)
def separate_endpoint(body: WakeRequest):
    with _http_errors():
        qmap, pair, cache = _wake_setup(body)
        return separation_doc(separation_search(qmap, pair, cache, pair_tol=body.pair_tol))


# ── Harness ────────────────────────────────────────────────────────────


@app.post("/brolin", response_model=BrolinSampleDoc)
def brolin_endpoint(body: BrolinRequest):
    if body.n > 10_000:
        raise HTTPException(status_code=400, detail="n is capped at 10000 per request")
    with _http_errors():
        qmap = _map(body)
        sample = brolin_sample(
            qmap, body.n, body.seed, depth=_depth(body.depth), m=_substeps(body.substeps)
        )
        return brolin_doc(sample)


@app.get("/verify/{experiment}", response_model=Union[SuiteReport, ExperimentReport])
def verify_endpoint(
    experiment: str,
    depth: Optional[int] = Query(None, ge=1),
    substeps: Optional[int] = Query(None, ge=1),
):
    if experiment != "all" and experiment not in EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"Unknown experiment {experiment!r}")
    with _http_errors():
        if experiment == "all":
            return verify_all(depth, substeps)
        return run_experiment(experiment, depth, substeps)
