from typing import Optional

from pydantic import BaseModel

from models.rotation import AngleDoc, fraction_doc
from models.trail import LandingDoc, MapRequest, landing_doc


# ── Request / response schemas ──────────────────────────────────────────


class WakeRequest(MapRequest):
    """Body of POST /wake and POST /separate: the two angles of a ray pair."""
    t: str
    t_prime: str
    depth: Optional[int] = None
    substeps: Optional[int] = None
    pair_tol: float = 1e-4


class SideArcDoc(BaseModel):
    start: AngleDoc
    end: AngleDoc
    orientation: str


class WakeDoc(BaseModel):
    pair: tuple[AngleDoc, AngleDoc]
    side_arc: SideArcDoc
    a: AngleDoc
    co_wake_angle: AngleDoc
    alpha_excluded: str
    kind: str
    root: Optional[LandingDoc] = None
    contains_critical: Optional[bool] = None


class SeparationStepDoc(BaseModel):
    pair: tuple[AngleDoc, AngleDoc]
    a: AngleDoc
    action: str


class SeparationDoc(BaseModel):
    outcome: str
    pair: tuple[AngleDoc, AngleDoc]
    wake: Optional[WakeDoc] = None
    steps: list[SeparationStepDoc]
    iteration_bound: int
    note: str = ""


# ── Converters ──────────────────────────────────────────────────────────


def _angle(a) -> AngleDoc:
    return AngleDoc(**a.to_json())


def _pair(pair) -> tuple[AngleDoc, AngleDoc]:
    return (_angle(pair.t), _angle(pair.t_prime))


def wake_doc(wake, contains_critical: Optional[bool] = None) -> WakeDoc:
    root = wake.pair.root_estimate
    return WakeDoc(
        pair=_pair(wake.pair),
        side_arc=SideArcDoc(
            start=_angle(wake.side_arc.start),
            end=_angle(wake.side_arc.end),
            orientation=wake.side_arc.orientation.value,
        ),
        a=fraction_doc(wake.a),
        co_wake_angle=fraction_doc(wake.co_wake_angle),
        alpha_excluded=wake.alpha_excluded.value,
        kind=wake.kind.value,
        root=landing_doc(root) if root is not None else None,
        contains_critical=contains_critical,
    )


def separation_doc(result) -> SeparationDoc:
    return SeparationDoc(
        outcome=result.outcome.value,
        pair=_pair(result.pair),
        wake=wake_doc(result.wake) if result.wake is not None else None,
        steps=[
            SeparationStepDoc(pair=_pair(s.pair), a=fraction_doc(s.a), action=s.action)
            for s in result.steps
        ],
        iteration_bound=result.iteration_bound,
        note=result.note,
    )
