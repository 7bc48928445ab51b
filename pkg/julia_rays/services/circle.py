"""Exact arithmetic on the circle R/Z of external angles."""

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Union

from errors import InvalidInputError

HALF = Fraction(1, 2)

_RATIONAL_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")
_BINARY_RE = re.compile(r"^\s*0?\.([01]*)\s*$")


class Orientation(str, Enum):
    ccw = "ccw"
    cw = "cw"


@dataclass(frozen=True, order=True)
class Angle:
    """A point of R/Z stored as a reduced fraction in [0, 1)."""

    value: Fraction

    def __init__(self, value: Union[Fraction, int, str, "Angle"], denominator: int | None = None):
        if isinstance(value, Angle):
            frac = value.value
        elif denominator is not None:
            frac = Fraction(value, denominator)
        else:
            frac = Fraction(value)
        object.__setattr__(self, "value", frac % 1)

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self) -> str:
        return f"Angle({self.numerator}/{self.denominator})"

    @classmethod
    def parse(cls, text: str) -> "Angle":
        """Parse ``p/q`` or a binary expansion ``.b1b2...bk``."""
        m = _RATIONAL_RE.match(text)
        if m:
            num, den = int(m.group(1)), int(m.group(2))
            if den == 0:
                raise InvalidInputError(f"Zero denominator in angle {text!r}")
            return cls(num, den)
        m = _BINARY_RE.match(text)
        if m and m.group(1):
            return from_binary(m.group(1))
        if text.strip() in ("0", "1"):
            return cls(0)
        raise InvalidInputError(f"Cannot parse angle {text!r}; use p/q or .b1b2...")

    def to_json(self) -> dict[str, str]:
        return {"num": str(self.numerator), "den": str(self.denominator)}

    @classmethod
    def from_json(cls, doc: dict) -> "Angle":
        return cls(int(doc["num"]), int(doc["den"]))


@dataclass
class OrbitSummary:
    preperiod: int
    period: int  # 0: no repetition found within the horizon
    orbit: list[Angle] = field(default_factory=list)


# ── Basic maps ──────────────────────────────────────────────────────────


def double(t: Angle) -> Angle:
    return Angle(2 * t.value)


def tau_angle(t: Angle) -> Angle:
    """The angle of the ray symmetric to R_t under z -> -z."""
    return Angle(t.value + HALF)


def halve(t: Angle) -> tuple[Angle, Angle]:
    """Both preimages of t under doubling, the first in [0, 1/2)."""
    first = Angle(t.value / 2)
    return first, Angle(first.value + HALF)


def orbit(t: Angle, horizon: int) -> OrbitSummary:
    """Iterate doubling up to ``horizon`` steps, detecting preperiod and period."""
    if horizon < 1:
        raise InvalidInputError("horizon must be >= 1")
    seen: dict[Angle, int] = {}
    points: list[Angle] = []
    current = t
    for step in range(horizon + 1):
        if current in seen:
            first = seen[current]
            return OrbitSummary(preperiod=first, period=step - first, orbit=points)
        seen[current] = step
        points.append(current)
        current = double(current)
    return OrbitSummary(preperiod=0, period=0, orbit=points)


# ── Arcs ────────────────────────────────────────────────────────────────


def arc_measure(start: Angle, end: Angle, direction: Orientation = Orientation.ccw) -> Fraction:
    """Length of the arc from ``start`` to ``end``; a point's ccw arc is 0, its cw arc 1."""
    ccw = (end.value - start.value) % 1
    if direction == Orientation.ccw:
        return ccw
    return 1 - ccw if ccw != 0 else Fraction(1)


def angle_in_arc(x: Angle, start: Angle, end: Angle) -> bool:
    """True iff x is strictly inside the ccw arc from ``start`` to ``end``."""
    if start == end:
        raise InvalidInputError("arc endpoints must differ")
    offset = (x.value - start.value) % 1
    return 0 < offset < arc_measure(start, end)


def arc_contains_arc(outer: tuple[Angle, Angle], inner: tuple[Angle, Angle]) -> bool:
    """Closed containment of ccw arcs."""
    length = arc_measure(*outer)
    lo = (inner[0].value - outer[0].value) % 1
    hi = lo + arc_measure(*inner)
    return lo <= length and hi <= length


def arcs_disjoint_or_nested(first: tuple[Angle, Angle], second: tuple[Angle, Angle]) -> bool:
    """Open ccw arcs that are disjoint (touching endpoints allowed) or nested."""
    if arc_contains_arc(first, second) or arc_contains_arc(second, first):
        return True
    return not (
        angle_in_arc(second[0], *first)
        or angle_in_arc(second[1], *first)
        or angle_in_arc(first[0], *second)
        or angle_in_arc(first[1], *second)
    )


# ── Binary expansions ───────────────────────────────────────────────────


def from_binary(bits: str) -> Angle:
    """Exact dyadic rational 0.b1b2...bk."""
    if not bits or any(b not in "01" for b in bits):
        raise InvalidInputError(f"Invalid binary expansion {bits!r}")
    return Angle(int(bits, 2), 2 ** len(bits))


def binary_digits(t: Angle | Fraction, k: int) -> str:
    """First k binary digits of t, computed by exact floor."""
    value = t.value if isinstance(t, Angle) else Fraction(t) % 1
    scaled = math.floor(value * 2**k)
    return format(scaled, f"0{k}b") if k > 0 else ""


def digits_by_doubling(t: Angle, k: int) -> str:
    """Recover k binary digits of t from the itinerary of doubling w.r.t. [0,1/2), [1/2,1)."""
    out = []
    current = t
    for _ in range(k):
        out.append("1" if current.value >= HALF else "0")
        current = double(current)
    return "".join(out)
