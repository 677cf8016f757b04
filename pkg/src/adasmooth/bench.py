"""Replicated runs and the summary statistics reported from them."""
from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .smoother import SmootherConfig, run_smoother, with_seed


@dataclass(eq=False)
class BenchResult:
    estimates: np.ndarray  # (R, len(checkpoints), dim)
    wall_times: np.ndarray  # (R,) seconds
    checkpoints: np.ndarray
    resampled: np.ndarray  # (R, n_steps) bool
    backward_triggered: np.ndarray  # (R, n_steps) bool
    config: SmootherConfig
    n_particles: int

    @property
    def replicates(self) -> int:
        return self.estimates.shape[0]

    def sample_variance(self) -> np.ndarray:
        """Unbiased variance across replicates, shape ``(checkpoints, dim)``."""
        if self.replicates < 2:
            raise ValueError("sample variance needs at least 2 replicates")
        return self.estimates.var(axis=0, ddof=1)


@dataclass(frozen=True)
class EfficiencyCell:
    alpha: float
    beta: float
    N: int
    checkpoint: int
    efficiency: float
    variance: float
    mean_time: float

    @property
    def degenerate(self) -> bool:
        """Zero variance across replicates, efficiency reported as ``inf``."""
        return self.variance == 0.0


def _one_replicate(model, functional, config, n_particles, n_steps, checkpoints, r):
    try:
        rec = run_smoother(model, functional, config, n_particles, n_steps)
    except Exception as exc:
        exc.replicate = r
        exc.args = (f"replicate {r}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
        raise
    return rec.estimates[checkpoints], rec.wall_time, rec.resampled, rec.backward_triggered


def run_replicates(
    model,
    functional,
    config: SmootherConfig,
    n_particles: int,
    replicates: int,
    checkpoints,
    base_seed: int = 0,
    threads: int = 1,
) -> BenchResult:
    """Run ``replicates`` independent smoothers; replicate ``r`` uses seed ``base_seed + r``.

    Wall time covers the smoothing loop only.  Results do not depend on
    ``threads`` or on completion order, but timings taken with ``threads > 1``
    include contention.
    """
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    checkpoints = np.asarray(sorted(int(c) for c in checkpoints), dtype=int)
    if checkpoints.size == 0 or checkpoints[0] < 0:
        raise ValueError("checkpoints must be non-empty and non-negative")
    n_steps = int(checkpoints[-1])
    jobs = [
        (model, functional, with_seed(config, base_seed + r), n_particles, n_steps, checkpoints, r)
        for r in range(replicates)
    ]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outs = list(pool.map(lambda job: _one_replicate(*job), jobs))
    else:
        outs = [_one_replicate(*job) for job in jobs]
    return BenchResult(
        estimates=np.stack([o[0] for o in outs]),
        wall_times=np.array([o[1] for o in outs]),
        checkpoints=checkpoints,
        resampled=np.stack([o[2] for o in outs]),
        backward_triggered=np.stack([o[3] for o in outs]),
        config=config,
        n_particles=n_particles,
    )


def efficiency_value(variance: float, mean_time: float, N: int) -> float:
    """``1 / (sqrt(N) * variance * time)``; infinite when the variance vanishes."""
    if variance == 0.0:
        return math.inf
    return 1.0 / (math.sqrt(N) * variance * mean_time)


def efficiency(result: BenchResult, N: int | None = None, component: int = 0) -> list[EfficiencyCell]:
    """One efficiency cell per checkpoint for the given functional component."""
    if N is None:
        N = result.n_particles
    var = result.sample_variance()[:, component]
    mean_time = float(result.wall_times.mean())
    return [
        EfficiencyCell(
            alpha=result.config.alpha,
            beta=result.config.beta,
            N=N,
            checkpoint=int(c),
            efficiency=efficiency_value(float(v), mean_time, N),
            variance=float(v),
            mean_time=mean_time,
        )
        for c, v in zip(result.checkpoints, var)
    ]


def variance_growth(result: BenchResult) -> np.ndarray:
    """Sample variance divided by the checkpoint index (NaN at ``n = 0``)."""
    var = result.sample_variance()
    n = result.checkpoints.astype(float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(n > 0, var / np.where(n > 0, n, 1.0), np.nan)


def trace_schedule_gaps(rho, eps):
    """Resampling gaps (in steps) and selections per backward interval for one trace."""
    rho = np.asarray(rho, dtype=bool)
    eps = np.asarray(eps, dtype=bool)
    resample_times = np.flatnonzero(rho)
    backward_times = np.flatnonzero(eps)
    selections = np.cumsum(rho)
    # (selections strictly between two backward steps) + 1 == difference of running counts
    between = np.diff(selections[backward_times])
    return np.diff(resample_times).astype(float), between.astype(float)


def schedule_stats(result) -> tuple[float, float]:
    """Mean gap between resampling times and mean selections per backward interval.

    Accepts a ``BenchResult`` (statistics pooled over replicates) or a pair of
    ``(rho, eps)`` traces.  An undefined statistic (fewer than two events) is
    returned as NaN.
    """
    if isinstance(result, BenchResult):
        rho, eps = result.resampled, result.backward_triggered
    else:
        rho, eps = result
    rho = np.atleast_2d(np.asarray(rho, dtype=bool))
    eps = np.atleast_2d(np.asarray(eps, dtype=bool))
    if rho.size == 0:
        raise ValueError("empty schedule trace")
    gaps, between = [], []
    for r, e in zip(rho, eps):
        g, b = trace_schedule_gaps(r, e)
        gaps.append(g)
        between.append(b)
    gaps = np.concatenate(gaps)
    between = np.concatenate(between)
    mean_gap = float(gaps.mean()) if gaps.size else math.nan
    mean_between = float(between.mean()) if between.size else math.nan
    return mean_gap, mean_between


# CSV output -----------------------------------------------------------------

EFFICIENCY_COLUMNS = ["alpha", "beta", "N", "checkpoint", "variance", "mean_time_s", "efficiency"]
BASELINE_COLUMNS = ["variant", "N", "checkpoint", "variance", "mean_time_s", "efficiency"]
VARIANCE_CURVE_COLUMNS = ["variant", "n", "var_over_n"]
SCHEDULE_COLUMNS = ["alpha", "beta", "N", "mean_resample_gap", "mean_selections_per_backward"]
ESTIMATE_COLUMNS = ["replicate", "checkpoint", "component", "estimate", "estimate_over_sqrt_n"]


def label_slug(label: str) -> str:
    """File-name-safe form of a smoother label, e.g. ``adasmooth_0.6_0.5``."""
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def _write(path, columns, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)
    return path


def write_efficiency_csv(path, cells):
    rows = [[c.alpha, c.beta, c.N, c.checkpoint, c.variance, c.mean_time, c.efficiency] for c in cells]
    return _write(path, EFFICIENCY_COLUMNS, rows)


def write_baseline_efficiency_csv(path, labelled_cells):
    rows = [[label, c.N, c.checkpoint, c.variance, c.mean_time, c.efficiency] for label, c in labelled_cells]
    return _write(path, BASELINE_COLUMNS, rows)


def write_variance_curve_csv(path, curves):
    """``curves`` maps a variant label to ``(checkpoints, var_over_n)``; component 0 is written."""
    rows = []
    for label, (checkpoints, curve) in curves.items():
        curve = np.asarray(curve)
        if curve.ndim > 1:
            curve = curve[:, 0]
        rows += [[label, int(n), float(v)] for n, v in zip(checkpoints, curve)]
    return _write(path, VARIANCE_CURVE_COLUMNS, rows)


def write_schedule_stats_csv(path, rows):
    """``rows`` are ``(alpha, beta, N, mean_gap, mean_between)`` tuples."""
    return _write(path, SCHEDULE_COLUMNS, rows)


def write_estimates_csv(path, result: BenchResult):
    rows = []
    for r in range(result.replicates):
        for k, n in enumerate(result.checkpoints):
            scale = math.sqrt(n) if n > 0 else math.nan
            for c in range(result.estimates.shape[2]):
                est = float(result.estimates[r, k, c])
                rows.append([r, int(n), c, est, est / scale])
    return _write(path, ESTIMATE_COLUMNS, rows)
