"""Experiment plumbing: simulated acquisitions, sweeps, CSV rows, PGM export."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import ComplexImage, EdgeWeightMap, KSpaceGrid, RealGrid, SamplingMask
from .edges import DetectorConfig
from .fourier import DcConfig, apply_mask, fft2_centered
from .masks import DEFAULT_CENTER_FRACTION, cartesian_mask, random2d_mask
from .metrics import psnr, rlne
from .solver import ReconResult, SolverConfig, pfista_reconstruct
from .thresholding import ThresholdConfig

__all__ = [
    "CSV_FIELDS",
    "METHODS",
    "DEFAULT_LAMBDA_GRID",
    "MaskSpec",
    "RunRecord",
    "method_label",
    "simulate",
    "solver_config",
    "reconstruct_record",
    "run_experiment",
    "write_csv",
    "csv_text",
    "best_by_method",
    "export_pgm",
    "pgm_bytes",
]

CSV_FIELDS = (
    "method",
    "detector",
    "mask_kind",
    "mask_param",
    "seed",
    "lambda_gamma",
    "iters",
    "rlne",
    "psnr_std",
    "psnr_paper",
    "seconds",
)

# method name -> (edge_mode, detector)
METHODS = {
    "uniform": ("none", "none"),
    "tv-edge": ("detected", "tv"),
    "sobel-edge": ("detected", "sobel"),
    "canny-edge": ("detected", "canny"),
    "oracle-edge": ("oracle", "oracle"),
}

# uniform lambda*gamma sweep; edge methods scale it by epsilon (see run_experiment)
DEFAULT_LAMBDA_GRID = tuple(float(v) for v in np.logspace(-4, -3, 5))


def method_label(edge_mode: str, detector: str = "tv") -> str:
    if edge_mode == "none":
        return "uniform"
    if edge_mode == "oracle":
        return "oracle-edge"
    return f"{detector}-edge"


@dataclass(frozen=True)
class MaskSpec:
    """Recipe for a sampling mask: ``cartesian`` (param = AF), ``random2d``
    (param = rate) or ``full``."""

    kind: str
    param: float = 1.0
    seed: int = 0
    center_fraction: float = DEFAULT_CENTER_FRACTION

    @classmethod
    def parse(cls, text: str, seed: int = 0, center_fraction: float = DEFAULT_CENTER_FRACTION):
        """Parse ``cartesian:8``, ``random2d:0.18`` or ``full``."""
        kind, _, param = text.partition(":")
        kind = kind.strip().lower()
        if kind == "full":
            return cls("full", 1.0, seed, center_fraction)
        if kind not in ("cartesian", "random2d") or not param:
            raise ValueError(f"bad mask spec {text!r}; use cartesian:AF, random2d:RATE or full")
        return cls(kind, float(param), seed, center_fraction)

    def build(self, height: int, width: int) -> SamplingMask:
        if self.kind == "cartesian":
            return cartesian_mask(height, width, self.param, self.center_fraction, self.seed)
        if self.kind == "random2d":
            return random2d_mask(height, width, self.param, self.center_fraction, self.seed)
        if self.kind == "full":
            return SamplingMask.full(height, width)
        raise ValueError(f"unknown mask kind {self.kind!r}")


@dataclass(frozen=True)
class RunRecord:
    method: str
    detector: str
    mask_kind: str
    mask_param: float
    seed: int
    lambda_gamma: float
    iters: int
    rlne: float
    psnr_std: float
    psnr_paper: float
    seconds: float
    initial_objective: float = math.nan
    final_objective: float = math.nan

    def csv_row(self, timing: bool = False) -> list[str]:
        # repr() gives the shortest round-tripping float text; stable across runs
        return [
            self.method,
            self.detector,
            self.mask_kind,
            repr(float(self.mask_param)),
            str(self.seed),
            repr(float(self.lambda_gamma)),
            str(self.iters),
            repr(float(self.rlne)),
            repr(float(self.psnr_std)),
            repr(float(self.psnr_paper)),
            f"{self.seconds:.4f}" if timing else "",
        ]


def simulate(reference: ComplexImage, mask: SamplingMask) -> KSpaceGrid:
    """Retrospective undersampling ``y = M F x``."""
    return apply_mask(fft2_centered(reference), mask)


def solver_config(
    method: str,
    lambda_gamma: float,
    iters: int,
    gamma: float = 1.0,
    epsilon: float = 0.1,
    levels: int = 3,
    detector: DetectorConfig | None = None,
    momentum: bool = True,
    track_objective: bool = False,
) -> SolverConfig:
    """Build a solver configuration for one named method at threshold ``lambda_gamma``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {tuple(METHODS)}")
    if gamma <= 0:
        raise ValueError("gamma must be positive to express lambda*gamma")
    edge_mode, det = METHODS[method]
    det_cfg = detector or DetectorConfig()
    if edge_mode == "detected":
        det_cfg = replace(det_cfg, detector=det)
    return SolverConfig(
        iterations=iters,
        threshold=ThresholdConfig(lam=lambda_gamma / gamma, gamma=gamma, epsilon=epsilon),
        dc=DcConfig(gamma),
        levels=levels,
        edge_mode=edge_mode,
        detector=det_cfg,
        momentum=momentum,
        track_objective=track_objective,
    )


def _mask_fields(mask_spec: MaskSpec | None, mask: SamplingMask) -> tuple[str, float, int]:
    if mask_spec is not None:
        return mask_spec.kind, mask_spec.param, mask_spec.seed
    kind = {"cartesian1d": "cartesian", "random2d": "random2d", "full": "full"}[mask.kind]
    param = 1.0 / mask.nominal_rate if kind == "cartesian" else mask.nominal_rate
    return kind, param, mask.seed


def reconstruct_record(
    reference: ComplexImage,
    mask: SamplingMask,
    cfg: SolverConfig,
    oracle_edges: EdgeWeightMap | None = None,
    mask_spec: MaskSpec | None = None,
) -> tuple[ReconResult, RunRecord]:
    """Simulate, reconstruct and score one configuration."""
    y = simulate(reference, mask)
    res = pfista_reconstruct(y, mask, cfg, reference=reference, oracle_edges=oracle_edges)
    kind, param, seed = _mask_fields(mask_spec, mask)
    detector = {"none": "none", "oracle": "oracle"}.get(cfg.edge_mode, cfg.detector.detector)
    rec = RunRecord(
        method=method_label(cfg.edge_mode, cfg.detector.detector),
        detector=detector,
        mask_kind=kind,
        mask_param=param,
        seed=seed,
        lambda_gamma=cfg.threshold.lam_gamma,
        iters=cfg.iterations,
        rlne=rlne(reference, res.image),
        psnr_std=psnr(reference, res.image, "standard"),
        psnr_paper=psnr(reference, res.image, "paper_literal"),
        seconds=res.elapsed_seconds,
        initial_objective=res.initial_objective,
        final_objective=res.final_objective,
    )
    return res, rec


def _run_job(job):
    reference, mask, cfg, oracle, spec = job
    return reconstruct_record(reference, mask, cfg, oracle, spec)[1]


def run_experiment(
    reference: ComplexImage,
    masks,
    methods=("uniform", "tv-edge", "oracle-edge"),
    lambda_grid=DEFAULT_LAMBDA_GRID,
    iters: int = 200,
    oracle_edges: EdgeWeightMap | None = None,
    edge_grid_scale: float | None = None,
    workers: int = 1,
    **solver_kwargs,
) -> list[RunRecord]:
    """Sweep methods x masks x thresholds; one record per reconstruction.

    Edge-weighted methods use ``lambda_grid`` scaled by ``edge_grid_scale``,
    which defaults to ``epsilon``: their edge-free threshold
    ``lambda*gamma/epsilon`` then covers the same values as the uniform grid.
    Records come back in (method, mask, lambda) order whatever ``workers`` is.
    """
    if edge_grid_scale is None:
        edge_grid_scale = solver_kwargs.get("epsilon", 0.1)
    masks = [MaskSpec.parse(m) if isinstance(m, str) else m for m in masks]
    h, w = reference.shape
    built = [(spec, spec.build(h, w)) for spec in masks]
    jobs = []
    for method in methods:
        if METHODS.get(method, ("",))[0] == "oracle" and oracle_edges is None:
            raise ValueError("oracle-edge requires an oracle edge map")
        scale = 1.0 if method == "uniform" else edge_grid_scale
        for spec, mask in built:
            for lg in lambda_grid:
                cfg = solver_config(method, float(lg) * scale, iters, **solver_kwargs)
                oracle = oracle_edges if method == "oracle-edge" else None
                jobs.append((reference, mask, cfg, oracle, spec))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(job) for job in jobs]


def csv_text(records, timing: bool = False, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_FIELDS)
    for rec in records:
        writer.writerow(rec.csv_row(timing))
    return buf.getvalue()


def write_csv(records, path, timing: bool = False, append: bool = False) -> None:
    """Write records; in append mode the header is only written to an empty file."""
    records = list(records)
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        fresh = not append or fh.tell() == 0
        fh.write(csv_text(records, timing=timing, header=fresh))


def best_by_method(records, mask_kind=None, mask_param=None) -> dict[str, RunRecord]:
    """Lowest-RLNE record per method, optionally restricted to one mask."""
    best: dict[str, RunRecord] = {}
    for rec in records:
        if mask_kind is not None and rec.mask_kind != mask_kind:
            continue
        if mask_param is not None and rec.mask_param != mask_param:
            continue
        cur = best.get(rec.method)
        if cur is None or rec.rlne < cur.rlne:
            best[rec.method] = rec
    return best


def _to_unit(values: np.ndarray, scaling: str) -> np.ndarray:
    if scaling == "minmax":
        lo, hi = float(values.min()), float(values.max())
        if hi <= lo:
            return np.zeros_like(values)
        return (values - lo) / (hi - lo)
    if scaling == "absolute01":
        return np.clip(values, 0.0, 1.0)
    raise ValueError(f"unknown scaling {scaling!r}; use minmax or absolute01")


def pgm_bytes(grid, scaling: str = "minmax") -> bytes:
    """Binary (P5) 8-bit PGM of a grid's magnitude."""
    data = np.asarray(getattr(grid, "data", grid))
    values = np.abs(data).astype(np.float64)
    pixels = np.floor(255.0 * _to_unit(values, scaling) + 0.5).astype(np.uint8)
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()


def export_pgm(grid, path, scaling: str = "minmax") -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(grid, scaling))


def error_map(reference: ComplexImage, reconstruction: ComplexImage) -> RealGrid:
    """Pixel-wise ``|x - x_hat|``."""
    return RealGrid(np.abs(reference.data - reconstruction.data))
