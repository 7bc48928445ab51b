from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Field, model_validator

from models.trail import MapRequest

CREMER_STATEMENT = (
    "The Cremer half of the main result is not reproducible at desk scale: no "
    "biaccessible point of a Cremer Julia set is known to exist, so there is "
    "nothing to trace. It is covered only by the shared machinery checked here "
    "(conjugacy residuals, wake calculus, the Siegel-side experiments)."
)


class Outcome(str, Enum):
    passed = "pass"
    failed = "fail"
    undecided = "undecided"


def aggregate(outcomes: list[Outcome]) -> Outcome:
    if any(o == Outcome.failed for o in outcomes):
        return Outcome.failed
    if any(o == Outcome.undecided for o in outcomes):
        return Outcome.undecided
    return Outcome.passed


class Measurement(BaseModel):
    label: str
    value: Optional[float] = None
    tolerance: Optional[float] = None
    outcome: Outcome
    detail: str = ""


class ExperimentReport(BaseModel):
    name: str
    c: tuple[float, float]
    inputs: dict[str, Any] = Field(default_factory=dict)
    measurements: list[Measurement] = Field(default_factory=list)
    overall: Optional[Outcome] = None
    runtime_ms: float = 0.0
    notes: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _overall_matches(self):
        expected = aggregate([m.outcome for m in self.measurements])
        if not self.measurements:
            expected = Outcome.failed
        if self.overall is None:
            self.overall = expected
        elif self.overall != expected:
            raise ValueError(f"overall {self.overall.value} disagrees with measurements ({expected.value})")
        return self


class SuiteReport(BaseModel):
    reports: list[ExperimentReport]
    overall: Outcome
    cremer_statement: str = CREMER_STATEMENT


class BrolinRecord(BaseModel):
    t: str
    landing_status: str
    point: Optional[tuple[float, float]] = None
    residual: Optional[float] = None


class BrolinSampleDoc(BaseModel):
    seed: int
    n: int
    c: tuple[float, float]
    depth: int
    substeps: int
    records: list[BrolinRecord]
    decided: int
    below_threshold: int
    threshold: float


class BrolinRequest(MapRequest):
    n: int = 100
    seed: int = 0
    depth: Optional[int] = None
    substeps: Optional[int] = None


# ── Converters ──────────────────────────────────────────────────────────


def brolin_doc(sample, threshold: float = 1e-6) -> BrolinSampleDoc:
    records = []
    for r in sample.records:
        point = None if r.point is None else (r.point.real, r.point.imag)
        records.append(
            BrolinRecord(t=str(r.t), landing_status=r.status.value, point=point, residual=r.residual)
        )
    decided = sample.decided
    return BrolinSampleDoc(
        seed=sample.seed,
        n=sample.n,
        c=(sample.c.real, sample.c.imag),
        depth=sample.depth,
        substeps=sample.substeps,
        records=records,
        decided=len(decided),
        below_threshold=sum(1 for r in decided if r.residual < threshold),
        threshold=threshold,
    )
