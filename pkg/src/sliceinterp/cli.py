"""Command-line front end.

Subcommands wrap the library one-to-one and print one machine-parsable
``key=value`` summary line per run; human-oriented detail goes to stderr
under ``--verbose``.  Exit codes: 0 success, 2 argument error, 3 I/O or
decode error, 4 numerical divergence.

Intensities are normalized to [0, 1] internally (byte / 255) and msd is
reported on the 8-bit scale.  The defaults tau=0.03, alpha=100 follow the
reference parameter choice for byte-scaled clinical slices; tau trades off
against the intensity scale, so on [0, 1]-normalized synthetic images a
much larger step (tau around 1-10) converges far faster.  Displacements
are in pixels.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .fieldio import GridFormatError, load_rf32, save_df2, save_rf32
from .image import Image2D, PgmDecodeError, load_pgm, msd, save_pgm
from .interpolation import (
    PhantomSpec,
    generate_phantom_pair,
    interpolate_at_ratio,
    interpolate_stack,
    linear_interpolate,
)
from .registration import (
    DivergenceError,
    RegistrationConfig,
    register_single_direction,
    register_symmetric,
)


def _load_image(path: str) -> Image2D:
    return load_pgm(Path(path).read_bytes())


def _load_image_any(path: str) -> Image2D:
    """Read a PGM or RF32 file, picking the codec from the magic bytes."""
    data = Path(path).read_bytes()
    if data.startswith(b"RF32"):
        return load_rf32(data)
    return load_pgm(data)


def _config(args) -> RegistrationConfig:
    return RegistrationConfig(
        alpha=args.alpha, tau=args.tau, ratio=getattr(args, "cfg_ratio", 0.5),
        max_iters=args.max_iters, tol=args.tol,
    )


def _note(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stderr)


def _registration_flags(p: argparse.ArgumentParser, with_ratio: bool = False) -> None:
    p.add_argument("--alpha", type=float, default=100.0,
                   help="curvature smoothness weight (default 100)")
    p.add_argument("--tau", type=float, default=0.03,
                   help="time step; scale-dependent, see module notes (default 0.03)")
    if with_ratio:
        p.add_argument("--ratio", dest="cfg_ratio", type=float, default=0.5,
                       help="position of the implied in-between slice, in (0, 1) "
                            "(default 0.5)")
    p.add_argument("--max-iters", type=int, default=500,
                   help="iteration cap (default 500)")
    p.add_argument("--tol", type=float, default=1e-4,
                   help="stop when the largest update falls below this many pixels")


def _result_summary(result) -> str:
    return (
        f"iterations={result.iterations} "
        f"converged={'true' if result.converged else 'false'} "
        f"ssd_initial={result.ssd_history[0]!r} "
        f"ssd_final={result.ssd_history[-1]!r} "
        f"energy_initial={result.energy_history[0]!r} "
        f"energy_final={result.energy_history[-1]!r}"
    )


def _write_field_preview(field, prefix: str) -> list[Path]:
    """Save field components as PGMs: mid-gray zero, bright positive.

    Both components share one symmetric scale (the largest displacement
    magnitude) so shading is comparable between them.
    """
    peak = max(float(np.abs(field.u1).max()), float(np.abs(field.u2).max()), 1e-12)
    paths = []
    for name, u in (("u1", field.u1), ("u2", field.u2)):
        path = Path(f"{prefix}_{name}.pgm")
        path.write_bytes(save_pgm(Image2D(0.5 + u / (2.0 * peak))))
        paths.append(path)
    return paths


def cmd_register(args) -> int:
    r1 = _load_image(args.slice1)
    r2 = _load_image(args.slice2)
    cfg = _config(args)
    if args.method == "symmetric":
        result = register_symmetric(r1, r2, cfg)
    else:
        result = register_single_direction(r1, r2, cfg)
    Path(args.out).write_bytes(save_df2(result.field))
    _note(args, f"wrote field {args.out}")
    if args.field_preview:
        for path in _write_field_preview(result.field, args.field_preview):
            _note(args, f"wrote preview {path}")
    print(_result_summary(result))
    return 0


def _requested_ratios(args) -> list[float]:
    if args.ratio:
        return list(args.ratio)
    if args.per_gap < 1:
        raise ValueError(f"per-gap must be >= 1, got {args.per_gap}")
    return [j / (args.per_gap + 1) for j in range(1, args.per_gap + 1)]


def _output_paths(out: str, count: int) -> list[Path]:
    base = Path(out)
    if count == 1:
        return [base]
    return [base.with_name(f"{base.stem}_{j + 1:02d}{base.suffix}") for j in range(count)]


def cmd_interpolate(args) -> int:
    r1 = _load_image(args.slice1)
    r2 = _load_image(args.slice2)
    ratios = _requested_ratios(args)
    paths = _output_paths(args.out, len(ratios))
    if args.method == "linear":
        images = [linear_interpolate(r1, r2, r) for r in ratios]
    else:
        cfg = _config(args)
        if args.method == "symmetric":
            result = register_symmetric(r1, r2, cfg)
        else:
            result = register_single_direction(r1, r2, cfg)
        _note(args, _result_summary(result))
        images = [interpolate_at_ratio(r1, r2, result.field, r) for r in ratios]
    for path, image in zip(paths, images):
        path.write_bytes(save_pgm(image))
        _note(args, f"wrote {path}")
        if args.raw_out:
            raw = path.with_suffix(".rf32")
            raw.write_bytes(save_rf32(image))
            _note(args, f"wrote {raw}")
    print(f"written={len(paths)}")
    return 0


def cmd_evaluate(args) -> int:
    original = _load_image_any(args.original)
    candidate = _load_image_any(args.candidate)
    print(f"msd={msd(original, candidate)!r}")
    return 0


def cmd_phantom(args) -> int:
    spec = PhantomSpec(
        kind=args.kind,
        width=args.width,
        height=args.height,
        center=tuple(args.center),
        radius=args.radius,
        half_extent=tuple(args.half_extent) if args.half_extent else None,
        sigma=args.sigma,
        translation=tuple(args.translate),
        scale=args.scale,
        edge_softness=args.edge_softness,
    )
    r1, r2, truth = generate_phantom_pair(spec)
    for path, image in ((args.out1, r1), (args.out2, r2), (args.out_mid, truth)):
        Path(path).write_bytes(save_pgm(image))
        _note(args, f"wrote {path}")
    print("written=3")
    return 0


def cmd_stack(args) -> int:
    slices = [_load_image(path) for path in args.slices]
    out = interpolate_stack(slices, args.per_gap, _config(args))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for index, image in enumerate(out):
        path = out_dir / f"slice_{index:03d}.pgm"
        path.write_bytes(save_pgm(image))
        _note(args, f"wrote {path}")
    print(f"written={len(out)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sliceinterp",
        description="Interpolate missing slices between grayscale PGM images "
                    "by symmetric curvature-regularized registration.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="print per-step detail to stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("register", help="estimate a displacement field between two slices")
    p.add_argument("slice1")
    p.add_argument("slice2")
    p.add_argument("out", help="output DF2 field file")
    p.add_argument("--method", choices=("symmetric", "single"), default="symmetric")
    _registration_flags(p, with_ratio=True)
    p.add_argument("--field-preview", metavar="PREFIX",
                   help="also save <PREFIX>_u1.pgm/<PREFIX>_u2.pgm shading the "
                        "components (mid-gray zero, bright positive, dark negative)")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("interpolate", help="synthesize in-between slices")
    p.add_argument("slice1")
    p.add_argument("slice2")
    p.add_argument("out", help="output PGM; multiple ratios append _01, _02, ...")
    p.add_argument("--method", choices=("symmetric", "single", "linear"),
                   default="symmetric")
    p.add_argument("--ratio", type=float, action="append", metavar="R",
                   help="slice position in [0, 1]; repeatable (default 0.5)")
    p.add_argument("--per-gap", type=int, default=1,
                   help="emit this many evenly spaced slices when no --ratio is given")
    p.add_argument("--raw-out", action="store_true",
                   help="also write each slice as a loss-free .rf32 float grid")
    _registration_flags(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("evaluate", help="mean squared difference on the 8-bit scale")
    p.add_argument("original", help="reference image (PGM or RF32)")
    p.add_argument("candidate", help="image to score (PGM or RF32)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("phantom", help="generate a synthetic test pair plus ground truth")
    p.add_argument("out1")
    p.add_argument("out2")
    p.add_argument("out_mid")
    p.add_argument("--kind", choices=("disk", "rectangle", "gaussian_blob"),
                   default="disk")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--center", type=float, nargs=2, default=(31.5, 31.5),
                   metavar=("CX", "CY"))
    p.add_argument("--radius", type=float, default=10.0,
                   help="disk radius in pixels (default 10)")
    p.add_argument("--half-extent", type=float, nargs=2, default=None,
                   metavar=("HX", "HY"))
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--translate", type=float, nargs=2, default=(0.0, 0.0),
                   metavar=("DX", "DY"))
    p.add_argument("--scale", type=float, default=1.0,
                   help="isotropic size factor applied at pose 1")
    p.add_argument("--edge-softness", type=float, default=1.0)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("stack", help="upsample an ordered slice stack")
    p.add_argument("slices", nargs="+", help="two or more PGM slices in stack order")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--per-gap", type=int, default=1,
                   help="interpolants per gap (default 1)")
    _registration_flags(p)
    p.set_defaults(func=cmd_stack)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PgmDecodeError, GridFormatError, OSError) as exc:
        print(f"sliceinterp: error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"sliceinterp: error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"sliceinterp: error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())
