"""``adasmooth`` command-line entry point.

Exit codes: 0 success, 2 configuration or path error, 3 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench
from .config import ConfigError, RunConfig, load_config
from .model import LinearGaussianHmm
from .oracle import state_sum_oracle
from .sampling import AllWeightsZero
from .schedule_analysis import periodic_limit
from .smoother import Variant, run_smoother

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

DIAGNOSTIC_COLUMNS = [
    "n", "ess", "rho", "eps", "distinct_enoch", "backward_trials", "fallbacks", "elapsed_s", "log_total_weight",
]


class PathError(ConfigError):
    pass


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out) if args.out else cfg.output_dir or Path(".")
    if not out.is_dir():
        raise PathError(f"output directory does not exist: {out}")
    return out


def _checkpoints(cfg: RunConfig, model) -> list[int]:
    last = model.n_observations - 1
    cps = cfg.bench.checkpoints or [last]
    if max(cps) > last:
        raise ConfigError(f"checkpoint {max(cps)} beyond last observation index {last}", "bench.checkpoints")
    return cps


def cmd_simulate(cfg: RunConfig, out: Path) -> Path:
    if cfg.simulate_steps is None:
        raise ConfigError("simulate needs simulate.n_steps", "simulate.n_steps")
    traj = cfg.base_model().simulate(cfg.simulate_steps, cfg.simulate_seed)
    path = out / "trajectory.csv"
    traj.to_csv(path)
    return path


def cmd_run(cfg: RunConfig, out: Path) -> tuple[Path, Path]:
    model = cfg.build_model()
    functional = cfg.build_functional()
    rec = run_smoother(model, functional, cfg.smoother, cfg.particles)
    n_all = np.arange(rec.n_steps + 1)
    result = bench.BenchResult(
        estimates=rec.estimates[None],
        wall_times=np.array([rec.wall_time]),
        checkpoints=n_all,
        resampled=rec.resampled[None],
        backward_triggered=rec.backward_triggered[None],
        config=cfg.smoother,
        n_particles=cfg.particles,
    )
    est_path = bench.write_estimates_csv(out / "estimates.csv", result)
    diag_path = out / "diagnostics.csv"
    dim = rec.estimates.shape[1]
    with diag_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAGNOSTIC_COLUMNS + [f"estimate_{c}" for c in range(dim)])
        for k in range(rec.n_steps):
            w.writerow(
                [k + 1, rec.ess[k], int(rec.resampled[k]), int(rec.backward_triggered[k]), rec.distinct_enoch[k],
                 rec.backward_trials[k], rec.fallbacks[k], rec.elapsed[k], rec.log_total_weight[k + 1]]
                + list(rec.estimates[k + 1])
            )
    return est_path, diag_path


def cmd_bench_grid(cfg: RunConfig, out: Path, threads: int = 1) -> list[Path]:
    """AdaSmooth efficiency over the (alpha, beta, N) grid, plus optional baselines."""
    model = cfg.build_model()
    functional = cfg.build_functional()
    cps = _checkpoints(cfg, model)
    b = cfg.bench
    cells, sched_rows, baseline_cells = [], [], []
    for N in b.particles:
        for alpha in b.alphas:
            for beta in b.betas:
                sc = replace(cfg.smoother, variant=Variant.ADASMOOTH, alpha=alpha, beta=beta)
                res = bench.run_replicates(model, functional, sc, N, b.replicates, cps, cfg.smoother_seed, threads)
                cells += bench.efficiency(res) if b.replicates > 1 else []
                sched_rows.append((alpha, beta, N, *bench.schedule_stats(res)))
        for name in b.baselines:
            sc = replace(cfg.smoother, variant=Variant(name))
            res = bench.run_replicates(model, functional, sc, N, b.replicates, cps, cfg.smoother_seed, threads)
            if b.replicates > 1:
                baseline_cells += [(sc.label, c) for c in bench.efficiency(res)]
    paths = [
        bench.write_efficiency_csv(out / "efficiency.csv", cells),
        bench.write_schedule_stats_csv(out / "schedule_stats.csv", sched_rows),
    ]
    if b.baselines:
        paths.append(bench.write_baseline_efficiency_csv(out / "efficiency_baselines.csv", baseline_cells))
    return paths


def cmd_variance_curve(cfg: RunConfig, out: Path, threads: int = 1) -> list[Path]:
    model = cfg.build_model()
    functional = cfg.build_functional()
    cps = _checkpoints(cfg, model)
    if cfg.bench.replicates < 2:
        raise ConfigError("variance curves need at least 2 replicates", "bench.replicates")
    curves, paths = {}, []
    for name in cfg.bench.variants:
        sc = replace(cfg.smoother, variant=Variant(name))
        res = bench.run_replicates(model, functional, sc, cfg.particles, cfg.bench.replicates, cps,
                                   cfg.smoother_seed, threads)
        curves[sc.label] = (res.checkpoints, bench.variance_growth(res))
        paths.append(bench.write_estimates_csv(out / f"estimates_{bench.label_slug(sc.label)}.csv", res))
    paths.insert(0, bench.write_variance_curve_csv(out / "variance_curve.csv", curves))
    return paths


def cmd_oracle(cfg: RunConfig, out: Path) -> tuple[Path, float]:
    """Exact smoothed expectation of the state sum; returns the value at the last checkpoint."""
    model = cfg.build_model()
    if not isinstance(model, LinearGaussianHmm):
        raise ConfigError("the exact oracle is only available for model.kind = lgssm", "model.kind")
    if cfg.functional != "state_sum":
        raise ConfigError("the exact oracle supports functional = state_sum only", "functional")
    cps = _checkpoints(cfg, model)
    values = state_sum_oracle(model, cps)
    path = out / "oracle.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "smoothed_state_sum"])
        w.writerows([int(n), float(v)] for n, v in zip(cps, values))
    return path, float(values[-1])


def cmd_schedule_limit(delta: int, r_n: int) -> float:
    return periodic_limit(delta, r_n)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output directory (must exist; overrides output.dir)")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for replicates")

    parser = argparse.ArgumentParser(prog="adasmooth", description="Online particle smoothing of additive functionals.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate a trajectory to trajectory.csv")
    sub.add_parser("run", parents=[common], help="one smoothing run: estimates.csv and diagnostics.csv")
    sub.add_parser("bench-grid", parents=[common], help="efficiency over the alpha/beta/N grid")
    sub.add_parser("variance-curve", parents=[common], help="time-normalised variance per variant")
    sub.add_parser("oracle", parents=[common], help="exact smoothed state sum for a linear Gaussian model")
    sl = sub.add_parser("schedule-limit", parents=[common], help="limit of the periodic-schedule variance factor")
    sl.add_argument("delta", type=int)
    sl.add_argument("r_n", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("must be >= 1", "--threads")
        if args.command == "schedule-limit":
            try:
                print(f"{cmd_schedule_limit(args.delta, args.r_n):.10g}")
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            return EXIT_OK
        cfg = load_config(args.config, seed_override=args.seed)
        out = _out_dir(args, cfg)
        if args.command == "simulate":
            print(cmd_simulate(cfg, out))
        elif args.command == "run":
            for p in cmd_run(cfg, out):
                print(p)
        elif args.command == "bench-grid":
            for p in cmd_bench_grid(cfg, out, args.threads):
                print(p)
        elif args.command == "variance-curve":
            for p in cmd_variance_curve(cfg, out, args.threads):
                print(p)
        elif args.command == "oracle":
            path, value = cmd_oracle(cfg, out)
            print(f"{value:.12g}")
            print(path)
    except AllWeightsZero as exc:
        print(f"error: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # observation files that fail to parse
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
