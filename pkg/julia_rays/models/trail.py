from typing import Optional

from pydantic import BaseModel

from models.rotation import AngleDoc


# ── Request / response schemas ──────────────────────────────────────────


class LandingDoc(BaseModel):
    point: tuple[float, float]
    status: str
    tail_diameter: float
    potential_reached: float


class TraceConfigDoc(BaseModel):
    g0: float
    depth: int
    substeps: int
    tol_conj: float


class TrailDoc(BaseModel):
    """One traced ray; samples are [g, re, im] by decreasing potential."""
    c: tuple[float, float]
    angle: AngleDoc
    samples: list[tuple[float, float, float]]
    status: str
    config: TraceConfigDoc
    max_residual: float
    refinements: int = 0
    landing: Optional[LandingDoc] = None


class EquipotentialDoc(BaseModel):
    c: tuple[float, float]
    potential: float
    points: list[tuple[float, float]]


class MapRequest(BaseModel):
    """Either c = [re, im] or a continued-fraction spec for theta."""
    c: Optional[tuple[float, float]] = None
    theta_cf: Optional[str] = None


class TraceRequest(MapRequest):
    angles: list[str]
    depth: Optional[int] = None
    substeps: Optional[int] = None
    g0: Optional[float] = None
    tol_conj: float = 1e-9
    eps_land: float = 1e-6


class EquipotentialRequest(MapRequest):
    potential: float
    samples: int = 64
    substeps: Optional[int] = None


# ── Converters ──────────────────────────────────────────────────────────


def pair(z: complex) -> tuple[float, float]:
    z = complex(z)
    return (z.real, z.imag)


def landing_doc(estimate) -> LandingDoc:
    return LandingDoc(
        point=pair(estimate.point),
        status=estimate.status.value,
        tail_diameter=estimate.tail_diameter,
        potential_reached=estimate.potential_reached,
    )


def trail_doc(trail, landing=None) -> TrailDoc:
    cfg = trail.config
    return TrailDoc(
        c=pair(trail.c),
        angle=AngleDoc(**trail.angle.to_json()),
        samples=[(g, z.real, z.imag) for g, z in trail.samples],
        status=trail.status.value,
        config=TraceConfigDoc(
            g0=cfg.g0, depth=cfg.depth, substeps=cfg.substeps, tol_conj=cfg.tol_conj
        ),
        max_residual=trail.max_residual,
        refinements=trail.refinements,
        landing=landing_doc(landing) if landing is not None else None,
    )


def equipotential_doc(c: complex, potential: float, points: list[complex]) -> EquipotentialDoc:
    return EquipotentialDoc(c=pair(c), potential=potential, points=[pair(z) for z in points])
