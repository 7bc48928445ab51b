"""The quadratic family f(z) = z^2 + c.

Numbers live in an mpmath context chosen by the map's precision:
``mpmath.fp`` (plain Python floats and complexes) at 53 bits, a private
``MPContext`` above that. Every operation here is pure.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional

import mpmath
from mpmath.ctx_mp import MPContext

from errors import ConventionUndefinedError, InvalidInputError

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 53
MULTIPLIER_TOL = 1e-12
ESCAPE_STEP_LIMIT = 10_000
OVERFLOW_MODULUS = 1e150

ESCAPED = complex("inf")


@lru_cache(maxsize=None)
def numeric_context(precision: int = DEFAULT_PRECISION):
    """mpmath context for ``precision`` mantissa bits; contexts are never re-tuned."""
    if precision < DEFAULT_PRECISION:
        raise InvalidInputError(f"precision must be >= {DEFAULT_PRECISION} bits")
    if precision == DEFAULT_PRECISION:
        return mpmath.fp
    ctx = MPContext()
    ctx.prec = precision
    return ctx


class MapSource(str, Enum):
    from_c = "from_c"
    from_multiplier = "from_multiplier"


@dataclass
class EscapeResult:
    escaped: bool
    steps: int
    green_estimate: float
    error_bound: float


@dataclass(frozen=True)
class QuadraticMap:
    c: Any
    alpha: Any
    beta: Any
    multiplier: Any
    source: MapSource = MapSource.from_c
    rotation_number: Optional[Any] = None  # ContinuedFraction when built from theta
    precision: int = DEFAULT_PRECISION

    @property
    def ctx(self):
        return numeric_context(self.precision)

    @property
    def c_complex(self) -> complex:
        return complex(self.c)

    @property
    def escape_radius(self) -> float:
        return max(4.0, abs(self.c_complex) + 2.0)

    def __call__(self, z):
        return z * z + self.c

    def describe(self) -> str:
        c = self.c_complex
        return f"z^2 + ({c.real:.9g}{c.imag:+.9g}i)"


# ── Construction ────────────────────────────────────────────────────────


def fixed_points_unordered(c, precision: int = DEFAULT_PRECISION) -> tuple[Any, Any]:
    """The roots (1 - s)/2, (1 + s)/2 of z^2 + c = z with s the principal sqrt(1 - 4c)."""
    ctx = numeric_context(precision)
    s = ctx.sqrt(ctx.mpc(1) - 4 * ctx.mpc(c))
    return (1 - s) / 2, (1 + s) / 2


def _on_excluded_ray(c) -> bool:
    return c.imag == 0 and c.real >= 0.25


def fixed_points(c, precision: int = DEFAULT_PRECISION) -> tuple[Any, Any]:
    """(alpha, beta), alpha being the fixed point further to the left.

    The principal square root has Re s >= 0, so (1 - s)/2 is never to the
    right of (1 + s)/2; the tie Re s = 0 happens only for real c >= 1/4.
    """
    ctx = numeric_context(precision)
    c = ctx.mpc(c)
    if _on_excluded_ray(c):
        raise ConventionUndefinedError(
            f"alpha/beta are undefined for real c >= 1/4 (c={complex(c)}); "
            "use fixed_points_unordered"
        )
    return fixed_points_unordered(c, precision)


def from_c(c, precision: int = DEFAULT_PRECISION) -> QuadraticMap:
    """Any c is allowed; on the real ray c >= 1/4 alpha and beta are just the
    unordered roots, and ``ordered_alpha`` refuses to name them."""
    ctx = numeric_context(precision)
    c = ctx.mpc(c)
    alpha, beta = fixed_points_unordered(c, precision)
    return QuadraticMap(
        c=c, alpha=alpha, beta=beta, multiplier=2 * alpha,
        source=MapSource.from_c, precision=precision,
    )


def ordered_alpha(qmap: QuadraticMap):
    """alpha under the left-of-beta convention; raises on the real ray c >= 1/4."""
    return fixed_points(qmap.c, qmap.precision)[0]


def from_multiplier(
    lam,
    tol: float = MULTIPLIER_TOL,
    strict: bool = True,
    precision: int = DEFAULT_PRECISION,
    rotation_number=None,
) -> QuadraticMap:
    """c = lam (2 - lam) / 4 with alpha = lam / 2.

    ``strict=False`` skips the unit-circle check; the formula itself holds
    for any lam.
    """
    ctx = numeric_context(precision)
    lam = ctx.mpc(lam)
    if strict and abs(abs(lam) - 1) > tol:
        raise InvalidInputError(f"|lambda| = {float(abs(lam))} is not 1 within {tol}")
    alpha = lam / 2
    return QuadraticMap(
        c=lam * (2 - lam) / 4,
        alpha=alpha,
        beta=1 - alpha,
        multiplier=lam,
        source=MapSource.from_multiplier,
        rotation_number=rotation_number,
        precision=precision,
    )


def multiplier_from_theta(theta: Fraction, precision: int = DEFAULT_PRECISION):
    ctx = numeric_context(precision)
    x = ctx.mpf(theta.numerator) / theta.denominator
    return ctx.exp(ctx.mpc(0, 2) * ctx.pi * x)


def from_rotation_number(cf, precision: int = DEFAULT_PRECISION) -> QuadraticMap:
    """lambda = exp(2 pi i theta) with theta known to well below the working precision."""
    from services.rotnum import cf_value

    approx = cf_value(cf, Fraction(1, 2 ** (precision + 8)))
    lam = multiplier_from_theta(approx.value, precision)
    return from_multiplier(lam, strict=False, precision=precision, rotation_number=cf)


# ── Dynamics ────────────────────────────────────────────────────────────


def iterate(qmap: QuadraticMap, z, n: int):
    """f^n(z); returns ESCAPED instead of overflowing."""
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    c = qmap.c
    for _ in range(n):
        if abs(z) > OVERFLOW_MODULUS:
            return ESCAPED
        z = z * z + c
    if abs(z) > OVERFLOW_MODULUS:
        return ESCAPED
    return z


def critical_orbit(qmap: QuadraticMap, k: int) -> list[complex]:
    """0, c, c^2 + c, ... up to k points, cut short at escape."""
    points: list[complex] = []
    z = qmap.ctx.mpc(0)
    for _ in range(k):
        if abs(z) > OVERFLOW_MODULUS:
            break
        points.append(complex(z))
        z = z * z + qmap.c
    return points


def green(qmap: QuadraticMap, z, tol: float, max_steps: int = ESCAPE_STEP_LIMIT) -> EscapeResult:
    """Green's function G(z) = lim 2^-n log|f^n(z)|.

    Past the escape radius each further step changes the estimate by at most
    2^-(n+1) log(1/(1 - |c|/|w|^2)), and those terms sum to less than
    2^-n log(1/(1 - |c|/|w_n|^2)).
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    ctx = qmap.ctx
    c = qmap.c
    abs_c = abs(c)
    r_esc = qmap.escape_radius
    w = ctx.mpc(z)
    for n in range(max_steps + 1):
        r = abs(w)
        if r >= r_esc:
            scale = ctx.mpf(2) ** (-n)
            bound = -float(scale) * math.log1p(-float(abs_c / (r * r)))
            if bound <= tol:
                return EscapeResult(True, n, float(scale * ctx.log(r)), float(bound))
        w = w * w + c
    return EscapeResult(False, max_steps, 0.0, 0.0)


def parse_c(text: str) -> complex:
    """``re,im`` (or a bare real) as a complex parameter."""
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as e:
        raise InvalidInputError(f"c must read re,im, got {text!r}") from e
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) != 2:
        raise InvalidInputError(f"c must read re,im, got {text!r}")
    return complex(parts[0], parts[1])


def resolve_map(c=None, theta_cf: Optional[str] = None, precision: int = DEFAULT_PRECISION) -> QuadraticMap:
    """Exactly one of c or a continued-fraction spec for theta."""
    from services.rotnum import parse_cf

    if (c is None) == (theta_cf is None):
        raise InvalidInputError("give exactly one of c or theta_cf")
    if theta_cf is not None:
        return from_rotation_number(parse_cf(theta_cf), precision)
    if isinstance(c, str):
        c = parse_c(c)
    return from_c(complex(*c) if isinstance(c, (tuple, list)) else c, precision)
