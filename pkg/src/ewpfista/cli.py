"""Command-line entry point: ``ewpfista <command> [options]``.

Exit status is 0 on success, 2 for usage errors (bad flags or values) and 1
for runtime failures (I/O, malformed or mismatched grid files).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .core import GridError
from .edges import DETECTORS, DetectorConfig
from .gridio import read_grid, write_grid
from .harness import (
    DEFAULT_LAMBDA_GRID,
    METHODS,
    MaskSpec,
    error_map,
    export_pgm,
    reconstruct_record,
    run_experiment,
    solver_config,
    write_csv,
)
from .masks import DEFAULT_CENTER_FRACTION, cartesian_mask, random2d_mask
from .metrics import psnr, rlne
from .phantoms import piecewise_phantom, shepp_logan
from .solver import EDGE_MODES

EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=1.0, help="step size (default 1)")
    p.add_argument("--epsilon", type=float, default=0.1, help="weight offset (default 0.1)")
    p.add_argument("--iters", type=_positive_int, default=100, help="iterations (default 100)")
    p.add_argument("--levels", type=_positive_int, default=3, help="frame levels (default 3)")
    p.add_argument("--no-momentum", action="store_true", help="plain ISTA steps")
    p.add_argument("--canny-low", type=float, default=0.1)
    p.add_argument("--canny-high", type=float, default=0.3)
    p.add_argument("--sigma", type=float, default=1.0, help="Canny Gaussian sigma")
    p.add_argument("--dilate", action="store_true", help="dilate detected edges by one pixel")
    p.add_argument("--timing", action="store_true", help="fill the seconds CSV column")


def _detector_cfg(args, detector: str = "tv") -> DetectorConfig:
    return DetectorConfig(
        detector=detector,
        canny_low=args.canny_low,
        canny_high=args.canny_high,
        gaussian_sigma=args.sigma,
        dilate=args.dilate,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ewpfista", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write a synthetic phantom")
    p.add_argument("--kind", choices=("shepp", "piecewise"), required=True)
    p.add_argument("--size", type=_positive_int, default=256)
    p.add_argument("--regions", type=_positive_int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shapes", default="rect,ellipse", help="piecewise shape kinds")
    p.add_argument("--phase", action="store_true", help="multiply by a smooth phase ramp")
    p.add_argument("--out", required=True)
    p.add_argument("--edges", help="oracle edge map output (piecewise only)")

    p = sub.add_parser("mask", help="write a sampling mask")
    p.add_argument("--kind", choices=("cartesian", "random2d", "full"), required=True)
    p.add_argument("--size", type=_positive_int, default=256)
    p.add_argument("--height", type=_positive_int)
    p.add_argument("--width", type=_positive_int)
    p.add_argument("--af", type=float, default=8.0, help="Cartesian acceleration (>= 1)")
    p.add_argument("--rate", type=float, default=0.18, help="random2d sampling rate")
    p.add_argument("--center-fraction", type=float, default=DEFAULT_CENTER_FRACTION)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("recon", help="simulate measurements and reconstruct one image")
    p.add_argument("--image", required=True, help="reference image grid")
    p.add_argument("--mask", required=True, help="sampling mask grid")
    p.add_argument("--edge", choices=EDGE_MODES, default="none")
    p.add_argument("--detector", choices=DETECTORS, default="tv")
    p.add_argument("--oracle", help="edge map for --edge oracle")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4, help="default 1e-4")
    _add_solver_flags(p)
    p.add_argument("--out", required=True, help="reconstruction grid")
    p.add_argument("--error-map", help="|x - x_hat| grid (default: <out>.err)")
    p.add_argument("--edges-out", help="write the edge map used by the solver")
    p.add_argument("--pgm", help="PGM export of the reconstruction magnitude")
    p.add_argument("--csv", help="append a metrics row to this CSV")

    p = sub.add_parser("experiment", help="sweep methods x masks x thresholds")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--image", help="reference image grid")
    src.add_argument("--phantom", choices=("shepp", "piecewise"), default="piecewise")
    p.add_argument("--oracle", help="oracle edge map for --image")
    p.add_argument("--size", type=_positive_int, default=256)
    p.add_argument("--regions", type=_positive_int, default=5)
    p.add_argument("--phantom-seed", type=int, default=7)
    p.add_argument(
        "--masks", default="cartesian:6,cartesian:8",
        help="comma list of cartesian:AF, random2d:RATE or full",
    )
    p.add_argument("--mask-seed", type=int, default=1)
    p.add_argument("--center-fraction", type=float, default=DEFAULT_CENTER_FRACTION)
    p.add_argument("--methods", default="uniform,tv-edge,oracle-edge")
    p.add_argument("--lambdas", type=_float_list, default=list(DEFAULT_LAMBDA_GRID),
                   help="lambda*gamma grid for the uniform method")
    p.add_argument("--edge-scale", type=float,
                   help="factor on the grid for edge methods (default: epsilon)")
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_solver_flags(p)
    p.set_defaults(iters=200)
    p.add_argument("--csv", required=True)

    p = sub.add_parser("eval", help="metrics between a reference and a reconstruction")
    p.add_argument("--ref", required=True)
    p.add_argument("--recon", required=True)

    p = sub.add_parser("export", help="convert a grid file to an 8-bit PGM")
    p.add_argument("--in", dest="src", required=True)
    p.add_argument("--kind", choices=("image", "kspace", "mask", "edgemap", "real"), default="image")
    p.add_argument("--scaling", choices=("minmax", "absolute01"), default="minmax")
    p.add_argument("--out", required=True)
    return parser


def cmd_phantom(args) -> None:
    if args.kind == "shepp":
        if args.edges:
            raise UsageError("--edges is only available for piecewise phantoms")
        write_grid(shepp_logan(args.size, phase=args.phase), args.out)
        return
    kinds = tuple(k.strip() for k in args.shapes.split(",") if k.strip())
    try:
        img, edges = piecewise_phantom(args.size, args.regions, args.seed, kinds, args.phase)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_grid(img, args.out)
    if args.edges:
        write_grid(edges, args.edges)


def cmd_mask(args) -> None:
    h = args.height or args.size
    w = args.width or args.size
    try:
        if args.kind == "cartesian":
            mask = cartesian_mask(h, w, args.af, args.center_fraction, args.seed)
        elif args.kind == "random2d":
            mask = random2d_mask(h, w, args.rate, args.center_fraction, args.seed)
        else:
            from .core import SamplingMask

            mask = SamplingMask.full(h, w)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_grid(mask, args.out)


def cmd_recon(args) -> None:
    if args.edge == "oracle" and not args.oracle:
        raise UsageError("--edge oracle needs --oracle FILE")
    method = {"none": "uniform", "oracle": "oracle-edge"}.get(args.edge, f"{args.detector}-edge")
    try:
        cfg = solver_config(
            method,
            args.lam * args.gamma,
            args.iters,
            gamma=args.gamma,
            epsilon=args.epsilon,
            levels=args.levels,
            detector=_detector_cfg(args, args.detector),
            momentum=not args.no_momentum,
            track_objective=False,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reference = read_grid(args.image, "image")
    mask = read_grid(args.mask, "mask")
    oracle = read_grid(args.oracle, "edgemap") if args.oracle else None
    res, rec = reconstruct_record(reference, mask, cfg, oracle_edges=oracle)
    write_grid(res.image, args.out)
    write_grid(error_map(reference, res.image), args.error_map or f"{args.out}.err")
    if args.edges_out and res.edge_map_used is not None:
        write_grid(res.edge_map_used, args.edges_out)
    if args.pgm:
        export_pgm(res.image, args.pgm)
    if args.csv:
        write_csv([rec], args.csv, timing=args.timing, append=True)
    print(f"rlne={rec.rlne:.6g} psnr_std={rec.psnr_std:.4f} psnr_paper={rec.psnr_paper:.4f}")


def cmd_experiment(args) -> None:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown methods {unknown}; choose from {list(METHODS)}")
    if not args.lambdas:
        raise UsageError("--lambdas is empty")
    try:
        masks = [
            MaskSpec.parse(t, args.mask_seed, args.center_fraction)
            for t in args.masks.split(",")
            if t.strip()
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.image:
        reference = read_grid(args.image, "image")
        oracle = read_grid(args.oracle, "edgemap") if args.oracle else None
    elif args.phantom == "shepp":
        reference, oracle = shepp_logan(args.size), None
    else:
        reference, oracle = piecewise_phantom(args.size, args.regions, args.phantom_seed)
    if "oracle-edge" in methods and oracle is None:
        raise UsageError("oracle-edge needs an oracle edge map (--oracle or --phantom piecewise)")
    try:
        records = run_experiment(
            reference,
            masks,
            methods=methods,
            lambda_grid=args.lambdas,
            iters=args.iters,
            oracle_edges=oracle,
            edge_grid_scale=args.edge_scale,
            workers=args.workers,
            gamma=args.gamma,
            epsilon=args.epsilon,
            levels=args.levels,
            detector=_detector_cfg(args),
            momentum=not args.no_momentum,
        )
    except ValueError as exc:
        if isinstance(exc, GridError):
            raise
        raise UsageError(str(exc)) from None
    write_csv(records, args.csv, timing=args.timing)


def cmd_eval(args) -> None:
    ref = read_grid(args.ref, "image")
    rec = read_grid(args.recon, "image")
    print(
        f"rlne={rlne(ref, rec)!r} psnr_std={psnr(ref, rec, 'standard')!r} "
        f"psnr_paper={psnr(ref, rec, 'paper_literal')!r}"
    )


def cmd_export(args) -> None:
    grid = read_grid(args.src, args.kind)
    if args.kind == "mask":
        grid = np.asarray(grid.data, dtype=np.float64)
    export_pgm(grid, args.out, args.scaling)


COMMANDS = {
    "phantom": cmd_phantom,
    "mask": cmd_mask,
    "recon": cmd_recon,
    "experiment": cmd_experiment,
    "eval": cmd_eval,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GridError, ValueError) as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
