from enum import Enum
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel, model_validator


class TriState(str, Enum):
    true = "true"
    false = "false"
    unknown = "unknown"


# ── Documents ───────────────────────────────────────────────────────────


class AngleDoc(BaseModel):
    """Exact angle; big integers travel as decimal strings."""
    num: str
    den: str


class ApproximationDoc(BaseModel):
    """A real number as an exact value plus a certified error bound."""
    value: AngleDoc
    error_bound: AngleDoc
    value_float: float
    error_float: float
    binary_digits: Optional[str] = None


class ClassificationReport(BaseModel):
    """Membership in constant type, Diophantine and Brjuno classes."""
    constant_type: TriState
    diophantine: TriState
    brjuno: TriState
    witness: str
    depth_used: int
    sup_quotient: int = 0
    sup_log_ratio: float = 0.0
    partial_sum: float = 0.0

    @model_validator(mode="after")
    def _inclusions(self):
        # constant type ⊂ Diophantine ⊂ Brjuno
        chain = [self.constant_type, self.diophantine, self.brjuno]
        for inner, outer in zip(chain, chain[1:]):
            if inner == TriState.true and outer != TriState.true:
                raise ValueError("class inclusion violated: a true class implies its superclass")
            if outer == TriState.false and inner != TriState.false:
                raise ValueError("class inclusion violated: a false class implies its subclasses")
        return self


class ContinuedFractionDoc(BaseModel):
    spec: str
    convergents: list[tuple[str, str]]
    theta: Optional[float] = None


# ── Converters ──────────────────────────────────────────────────────────


def fraction_doc(value: Fraction) -> AngleDoc:
    value = Fraction(value)
    return AngleDoc(num=str(value.numerator), den=str(value.denominator))


def doc_fraction(doc: AngleDoc) -> Fraction:
    return Fraction(int(doc.num), int(doc.den))


def approximation_doc(approx, digits: int = 0) -> ApproximationDoc:
    """Serialize an AngleApproximation, optionally with its leading binary digits."""
    from services.circle import binary_digits

    return ApproximationDoc(
        value=fraction_doc(approx.value),
        error_bound=fraction_doc(approx.error_bound),
        value_float=float(approx.value),
        error_float=float(approx.error_bound),
        binary_digits=binary_digits(approx.value, digits) if digits > 0 else None,
    )


def continued_fraction_doc(cf, depth: int) -> ContinuedFractionDoc:
    limit = cf.max_depth
    n = depth if limit is None else min(depth, limit)
    theta = None
    if cf.tail_rule is not None:
        theta = cf.theta_float()
    return ContinuedFractionDoc(
        spec=cf.spec(),
        convergents=[(str(p), str(q)) for p, q in cf.convergents(n)],
        theta=theta,
    )
