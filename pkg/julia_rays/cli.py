#!/usr/bin/env python3
"""Command-line front end.

Usage:
    python cli.py classify --theta-cf "1;tail=const:1"
    python cli.py crit-angle --theta-cf "1;tail=const:1" --err 1e-8
    python cli.py trace --c=-2,0 --angle 1/9
    python cli.py wake --c=-2,0 --t 1/9 --t-prime 8/9
    python cli.py render --c=-2,0 --window=-2.5,2.5,-2.5,2.5 --out cheb.ppm
    python cli.py verify all

Negative c values need the ``--c=-2,0`` spelling. JSON goes to stdout or
``--out``. Exit status: 0 on success, 1 on failed or undecided experiments
and computational failures, 2 on usage and input errors.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel

import config
from errors import JuliaRaysError, RootIsCriticalError
from models.report import Outcome, brolin_doc
from models.rotation import approximation_doc, continued_fraction_doc
from models.trail import equipotential_doc, trail_doc
from models.wake import separation_doc, wake_doc
from services.brolin import brolin_sample
from services.circle import Angle
from services.experiments import EXPERIMENTS, run_experiment, verify_all
from services.quadmap import resolve_map
from services.raytrace import (
    DEFAULT_G0,
    EPS_LAND,
    equipotential,
    landing_estimate,
    trace_many,
    trace_ray,
)
from services.render import Window, render, render_svg, save_ppm
from services.rotnum import classify, critical_angle, parse_cf
from services.wakes import (
    RayPair,
    SeparationOutcome,
    TrailCache,
    contains_critical,
    separation_search,
    wake_from_pair,
)

logger = logging.getLogger(__name__)


def _emit(doc, out: Optional[str]) -> None:
    if isinstance(doc, BaseModel):
        text = doc.model_dump_json(indent=2)
    else:
        text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _map(args):
    return resolve_map(c=args.c, theta_cf=args.lambda_theta, precision=args.precision)


def _depth(args) -> int:
    return args.depth if args.depth is not None else config.default_depth()


def _substeps(args) -> int:
    return args.substeps if args.substeps is not None else config.default_substeps()


# ── Handlers ────────────────────────────────────────────────────────────


def cmd_classify(args) -> int:
    cf = parse_cf(args.theta_cf)
    report = classify(cf, args.depth or config.default_depth())
    doc = {
        "continued_fraction": continued_fraction_doc(cf, min(args.convergents, 64)).model_dump(),
        "classification": report.model_dump(mode="json"),
    }
    _emit(doc, args.out)
    return 0


def cmd_crit_angle(args) -> int:
    cf = parse_cf(args.theta_cf)
    approx = critical_angle(cf, Fraction(args.err))
    _emit(approximation_doc(approx, args.digits), args.out)
    return 0


def cmd_trace(args) -> int:
    qmap = _map(args)
    trail = trace_ray(
        qmap, Angle.parse(args.angle), g0=args.g0, depth=_depth(args),
        m=_substeps(args), tol_conj=args.tol_conj,
    )
    landing = None
    if len(trail.samples) >= 10:
        landing = landing_estimate(trail, eps_land=args.eps_land)
    _emit(trail_doc(trail, landing), args.out)
    return 0


def cmd_equipotential(args) -> int:
    qmap = _map(args)
    points = equipotential(qmap, args.potential, args.samples, m=_substeps(args))
    _emit(equipotential_doc(qmap.c_complex, args.potential, points), args.out)
    return 0


def _pair_and_cache(args):
    qmap = _map(args)
    cache = TrailCache(qmap, depth=_depth(args), m=_substeps(args))
    return qmap, RayPair(Angle.parse(args.t), Angle.parse(args.t_prime)), cache


def cmd_wake(args) -> int:
    qmap, pair, cache = _pair_and_cache(args)
    wake = wake_from_pair(qmap, pair, cache.pair(pair), pair_tol=args.pair_tol)
    try:
        holds_zero = contains_critical(wake)
    except RootIsCriticalError as e:
        logger.info(str(e))
        holds_zero = None
    _emit(wake_doc(wake, holds_zero), args.out)
    return 0


def cmd_separate(args) -> int:
    qmap, pair, cache = _pair_and_cache(args)
    result = separation_search(qmap, pair, cache, pair_tol=args.pair_tol)
    _emit(separation_doc(result), args.out)
    return 1 if result.outcome == SeparationOutcome.inconclusive else 0


def cmd_brolin(args) -> int:
    qmap = _map(args)
    sample = brolin_sample(qmap, args.n, args.seed, depth=_depth(args), m=_substeps(args))
    _emit(brolin_doc(sample), args.out)
    return 0


def cmd_render(args) -> int:
    qmap = _map(args)
    window = Window.parse(args.window)
    rays = [Angle.parse(a) for a in args.ray]
    trails = trace_many(qmap, rays, depth=_depth(args), m=_substeps(args)) if rays else []
    image = render(
        qmap, args.width, args.height, window, trails=trails,
        equipotentials=args.equipotential, orbit_steps=args.orbit, m=_substeps(args),
    )
    save_ppm(image, args.out)
    if args.svg:
        with open(args.svg, "w") as f:
            f.write(render_svg(window, args.width, args.height, trails))
    logger.info(f"wrote {args.width}x{args.height} image to {args.out}")
    return 0


def cmd_verify(args) -> int:
    depth = args.depth
    m = args.substeps
    if args.experiment == "all":
        doc = verify_all(depth, m)
    else:
        doc = run_experiment(args.experiment, depth, m)
    _emit(doc, args.out)
    return 0 if doc.overall == Outcome.passed else 1


# ── Parser ──────────────────────────────────────────────────────────────


def _add_map_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--c", help="parameter as re,im (write --c=-2,0 for negatives)")
    group.add_argument("--lambda-theta", help="continued fraction of theta; lambda = exp(2 pi i theta)")
    p.add_argument("--precision", type=int, default=53, help="mantissa bits (default 53)")


def _add_trace_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--substeps", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="julia-rays", description="External rays of quadratic Julia sets")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="arithmetic class of a rotation number")
    p.add_argument("--theta-cf", required=True)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--convergents", type=int, default=10)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("crit-angle", help="angle of the ray pair landing at the critical point")
    p.add_argument("--theta-cf", required=True)
    p.add_argument("--err", required=True, help="error bound, e.g. 1e-8 or 1/1024")
    p.add_argument("--digits", type=int, default=0, help="also print this many binary digits")
    p.set_defaults(handler=cmd_crit_angle)

    p = sub.add_parser("trace", help="trace one external ray")
    _add_map_flags(p)
    _add_trace_flags(p)
    p.add_argument("--angle", required=True, help="p/q or .b1b2...")
    p.add_argument("--g0", type=float, default=DEFAULT_G0)
    p.add_argument("--tol-conj", type=float, default=1e-9)
    p.add_argument("--eps-land", type=float, default=EPS_LAND)
    p.set_defaults(handler=cmd_trace)

    p = sub.add_parser("equipotential", help="sample a level curve of the Green function")
    _add_map_flags(p)
    p.add_argument("--potential", type=float, required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--substeps", type=int, default=None)
    p.set_defaults(handler=cmd_equipotential)

    for name, handler, text in (
        ("wake", cmd_wake, "wake of a ray pair"),
        ("separate", cmd_separate, "push a wake forward until it separates alpha from 0"),
    ):
        p = sub.add_parser(name, help=text)
        _add_map_flags(p)
        _add_trace_flags(p)
        p.add_argument("--t", required=True)
        p.add_argument("--t-prime", required=True)
        p.add_argument("--pair-tol", type=float, default=1e-4)
        p.set_defaults(handler=handler)

    p = sub.add_parser("brolin", help="sample landing points of uniform random angles")
    _add_map_flags(p)
    _add_trace_flags(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_brolin)

    p = sub.add_parser("render", help="write a PPM picture")
    _add_map_flags(p)
    _add_trace_flags(p)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--window", default="-2.5,2.5,-2.5,2.5")
    p.add_argument("--ray", action="append", default=[])
    p.add_argument("--equipotential", type=float, action="append", default=[])
    p.add_argument("--orbit", type=int, default=0, help="critical orbit points to mark")
    p.add_argument("--svg", default=None, help="also write the ray overlay as SVG")
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("verify", help="run an acceptance experiment")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS) + ["all"])
    _add_trace_flags(p)
    p.set_defaults(handler=cmd_verify)

    for name, action in sub.choices.items():
        action.add_argument("--out", default=None, required=name == "render", help="output file")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    config.configure_logging()
    try:
        return args.handler(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (JuliaRaysError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
