import numpy as np
import pytest

from errors import InvalidInputError
from services.circle import Angle, tau_angle
from services.experiments import (
    SIEGEL_DEPTH,
    SIEGEL_SUBSTEPS,
    SIEGEL_TOL_CONJ,
    golden_critical_angle,
)
from services.quadmap import from_c
from services.raytrace import trace_irrational, trace_ray
from services.render import (
    EQUIPOTENTIAL_COLOR,
    ORBIT_COLOR,
    RAY_COLOR,
    Window,
    ppm_bytes,
    render,
    render_svg,
    save_ppm,
)

WINDOW = Window(-2.5, 2.5, -2.5, 2.5)


def _has_color(image, color) -> bool:
    pixels = np.asarray(image)
    return bool(np.all(pixels == np.array(color, dtype=np.uint8), axis=-1).any())


def test_window_validation():
    assert Window.parse("-1,1,-2,2") == Window(-1, 1, -2, 2)
    assert Window.parse("-1,1,-2,2").center == 0
    with pytest.raises(InvalidInputError):
        Window.parse("1,0,0,1")
    with pytest.raises(InvalidInputError):
        Window.parse("0,1,0")
    with pytest.raises(InvalidInputError):
        Window(0, float("inf"), 0, 1)


def test_chebyshev_interior_is_the_segment(chebyshev_map):
    width, height = 33, 17
    image = render(chebyshev_map, width, height, WINDOW)
    pixels = np.asarray(image)
    black = np.all(pixels == 0, axis=-1)
    rows, cols = np.nonzero(black)
    assert len(rows) > 0
    assert set(rows.tolist()) == {(height - 1) // 2}
    dx = 5 / width
    for col in cols:
        x = (col - (width - 1) / 2) * dx
        assert abs(x) <= 2 + 2 * dx


def test_square_map_interior_is_the_disk(identity_map):
    size = 41
    pixels = np.asarray(render(identity_map, size, size, Window(-2, 2, -2, 2)))
    step = 4 / size
    for row in range(size):
        for col in range(size):
            z = complex((col - 20) * step, (20 - row) * step)
            is_black = bool(np.all(pixels[row, col] == 0))
            if abs(z) < 1 - 2 * step:
                assert is_black
            elif abs(z) > 1 + 2 * step:
                assert not is_black


def test_overlays_are_drawn():
    qmap = from_c(-1)
    image = render(
        qmap, 64, 64, WINDOW, rays=[Angle(1, 3)], equipotentials=[0.5], orbit_steps=3, depth=12
    )
    assert _has_color(image, RAY_COLOR)
    assert _has_color(image, EQUIPOTENTIAL_COLOR)
    assert _has_color(image, ORBIT_COLOR)


def test_render_rejects_tiny_images(chebyshev_map):
    with pytest.raises(InvalidInputError):
        render(chebyshev_map, 8, 64, WINDOW)


def test_ppm_encoding(chebyshev_map, tmp_path):
    image = render(chebyshev_map, 33, 17, WINDOW)
    data = ppm_bytes(image)
    header = b"P6\n33 17\n255\n"
    assert data.startswith(header)
    assert len(data) == len(header) + 33 * 17 * 3
    out = tmp_path / "cheb.ppm"
    save_ppm(image, str(out))
    assert out.read_bytes() == data


def test_svg_overlay(chebyshev_map):
    trail = trace_ray(chebyshev_map, Angle(1, 9), depth=10)
    svg = render_svg(WINDOW, 64, 64, [trail])
    assert svg.startswith("<svg")
    assert 'data-angle="1/9"' in svg
    assert svg.rstrip().endswith("</svg>")


def test_siegel_critical_rays_end_at_the_critical_point(golden_map):
    approx = golden_critical_angle(SIEGEL_DEPTH * SIEGEL_SUBSTEPS)
    kwargs = {"depth": SIEGEL_DEPTH, "m": SIEGEL_SUBSTEPS, "tol_conj": SIEGEL_TOL_CONJ}
    trail = trace_irrational(golden_map, approx, **kwargs)
    tau_trail = trace_ray(golden_map, tau_angle(Angle(approx.value)), **kwargs)
    for tr in (trail, tau_trail):
        assert abs(tr.points[-1]) < 5e-2

    size = 65
    image = render(golden_map, size, size, Window(-1, 1, -1, 1), trails=[trail, tau_trail])
    pixels = np.asarray(image)
    # one pixel is 2/65 wide, so both ends fall within two pixels of the center
    mid = (size - 1) // 2
    near_zero = pixels[mid - 3 : mid + 4, mid - 3 : mid + 4]
    red = np.all(near_zero == np.array(RAY_COLOR, dtype=np.uint8), axis=-1)
    assert red.any()
