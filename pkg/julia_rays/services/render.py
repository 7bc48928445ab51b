"""Escape-time pictures of filled Julia sets with ray, equipotential and orbit overlays."""

import io
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from PIL import Image, ImageDraw

from errors import InvalidInputError
from services.circle import Angle
from services.quadmap import QuadraticMap, critical_orbit
from services.raytrace import RayTrail, equipotential, trace_many

logger = logging.getLogger(__name__)

MIN_SIZE = 16
MAX_ITER = 256
INTERIOR = (0, 0, 0)
RAY_COLOR = (220, 40, 40)
EQUIPOTENTIAL_COLOR = (40, 90, 220)
ORBIT_COLOR = (40, 200, 80)
ORBIT_RADIUS = 2
CLIP_FACTOR = 10.0


@dataclass(frozen=True)
class Window:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        values = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError("window must be finite")
        if self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise InvalidInputError("window must have positive width and height")

    @classmethod
    def parse(cls, text: str) -> "Window":
        try:
            xmin, xmax, ymin, ymax = (float(v) for v in text.split(","))
        except ValueError as e:
            raise InvalidInputError(f"window must be xmin,xmax,ymin,ymax, got {text!r}") from e
        return cls(xmin, xmax, ymin, ymax)

    @property
    def center(self) -> complex:
        return complex((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)


class _Frame:
    """Pixel <-> plane mapping; pixel centers are symmetric about the window center."""

    def __init__(self, window: Window, width: int, height: int):
        self.window = window
        self.width = width
        self.height = height
        self.dx = (window.xmax - window.xmin) / width
        self.dy = (window.ymax - window.ymin) / height

    def grid(self) -> np.ndarray:
        mid = self.window.center
        cols = (np.arange(self.width) - (self.width - 1) / 2) * self.dx + mid.real
        rows = mid.imag - (np.arange(self.height) - (self.height - 1) / 2) * self.dy
        return cols[np.newaxis, :] + 1j * rows[:, np.newaxis]

    def to_pixel(self, z: complex) -> tuple[float, float]:
        mid = self.window.center
        col = (z.real - mid.real) / self.dx + (self.width - 1) / 2
        row = (self.height - 1) / 2 - (z.imag - mid.imag) / self.dy
        return col, row

    def visible(self, z: complex) -> bool:
        span = max(self.window.xmax - self.window.xmin, self.window.ymax - self.window.ymin)
        return abs(z - self.window.center) <= CLIP_FACTOR * span


def escape_field(qmap: QuadraticMap, frame: _Frame, max_iter: int = MAX_ITER) -> np.ndarray:
    """Green's function estimate per pixel; 0 marks points that never escaped."""
    c = qmap.c_complex
    radius = qmap.escape_radius
    z = frame.grid()
    potential = np.zeros(z.shape)
    alive = np.ones(z.shape, dtype=bool)
    for n in range(max_iter):
        escaped = alive & (np.abs(z) > radius)
        if escaped.any():
            potential[escaped] = np.log(np.abs(z[escaped])) / 2.0**n
            alive &= ~escaped
        if not alive.any():
            break
        z[alive] = z[alive] ** 2 + c
    return potential


def shade(potential: np.ndarray) -> np.ndarray:
    """Gray bands of -log2 G; interior black."""
    rgb = np.zeros(potential.shape + (3,), dtype=np.uint8)
    outside = potential > 0
    level = -np.log2(potential[outside])
    gray = (80 + 150 * (level - np.floor(level))).astype(np.uint8)
    rgb[outside] = gray[:, np.newaxis]
    rgb[~outside] = INTERIOR
    return rgb


def _polyline(draw: ImageDraw.ImageDraw, frame: _Frame, points: list[complex], color, closed=False):
    pixels = [frame.to_pixel(z) for z in points if frame.visible(z)]
    if closed and pixels:
        pixels.append(pixels[0])
    if len(pixels) >= 2:
        draw.line(pixels, fill=color, width=1)


def render(
    qmap: QuadraticMap,
    width: int,
    height: int,
    window: Window,
    rays: Optional[list[Angle]] = None,
    equipotentials: Optional[list[float]] = None,
    orbit_steps: int = 0,
    depth: int = 30,
    m: int = 4,
    trails: Optional[list[RayTrail]] = None,
    max_iter: int = MAX_ITER,
) -> Image.Image:
    if width < MIN_SIZE or height < MIN_SIZE:
        raise InvalidInputError(f"image must be at least {MIN_SIZE}x{MIN_SIZE}")
    frame = _Frame(window, width, height)
    image = Image.fromarray(shade(escape_field(qmap, frame, max_iter)))
    draw = ImageDraw.Draw(image)

    for level in equipotentials or []:
        _polyline(draw, frame, equipotential(qmap, level, 128, m=m), EQUIPOTENTIAL_COLOR, closed=True)
    all_trails = list(trails or [])
    if rays:
        all_trails += trace_many(qmap, rays, depth=depth, m=m)
    for trail in all_trails:
        _polyline(draw, frame, trail.points, RAY_COLOR)
    for z in critical_orbit(qmap, orbit_steps):
        if not frame.visible(z):
            continue
        col, row = frame.to_pixel(z)
        draw.ellipse(
            [col - ORBIT_RADIUS, row - ORBIT_RADIUS, col + ORBIT_RADIUS, row + ORBIT_RADIUS],
            fill=ORBIT_COLOR,
        )
    return image


def ppm_bytes(image: Image.Image) -> bytes:
    """Binary P6: ``P6\\n<w> <h>\\n255\\n`` followed by RGB rows top to bottom."""
    buffer = io.BytesIO()
    image.convert("RGB").save(buffer, format="PPM")
    return buffer.getvalue()


def save_ppm(image: Image.Image, path: str) -> None:
    with open(path, "wb") as f:
        f.write(ppm_bytes(image))


def render_svg(
    window: Window,
    width: int,
    height: int,
    trails: list[RayTrail],
    equipotentials: Optional[list[list[complex]]] = None,
) -> str:
    """Vector overlay of ray trails and equipotential curves."""
    frame = _Frame(window, width, height)

    def path(points: list[complex], closed: bool) -> str:
        pixels = [frame.to_pixel(z) for z in points if frame.visible(z)]
        if len(pixels) < 2:
            return ""
        d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in pixels)
        return d + (" Z" if closed else "")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for curve in equipotentials or []:
        d = path(curve, True)
        if d:
            parts.append(f'<path d="{d}" fill="none" stroke="rgb{EQUIPOTENTIAL_COLOR}"/>')
    for trail in trails:
        d = path(trail.points, False)
        if d:
            parts.append(
                f'<path d="{d}" fill="none" stroke="rgb{RAY_COLOR}" data-angle="{trail.angle}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
