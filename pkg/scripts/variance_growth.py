"""Time-normalised variance of the smoothed state sum for several smoothers.

    python3 scripts/variance_growth.py --particles 500 --replicates 100 --out-dir results/
"""
import argparse
from pathlib import Path

from adasmooth import LinearGaussianHmm, SmootherConfig, StateSumFunctional, Variant
from adasmooth import bench

CONFIGS = [
    SmootherConfig(variant=Variant.ADASMOOTH, alpha=0.6, beta=0.5),
    SmootherConfig(variant=Variant.ADASMOOTH, alpha=1.0, beta=0.1),
    SmootherConfig(variant=Variant.PARIS, precision_draws=2),
    SmootherConfig(variant=Variant.FFBSM),
    SmootherConfig(variant=Variant.POORMAN, alpha=0.6),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--particles", type=int, default=500)
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--checkpoints", type=int, nargs="+", default=[100, 200, 400, 600, 800, 1000])
    ap.add_argument("--skip", nargs="*", default=[], help="variant names to leave out, e.g. ffbsm")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = LinearGaussianHmm(0.7, 1.0, 0.2, 1.0)
    model = base.with_observations(base.simulate(max(args.checkpoints) + 1, args.seed).observations)
    f = StateSumFunctional()
    curves = {}
    for cfg in CONFIGS:
        if cfg.variant.value in args.skip:
            continue
        res = bench.run_replicates(model, f, cfg, args.particles, args.replicates, args.checkpoints,
                                   args.seed + 1, args.threads)
        curves[cfg.label] = (res.checkpoints, bench.variance_growth(res))
        bench.write_estimates_csv(out / f"estimates_{bench.label_slug(cfg.label)}.csv", res)
        print(cfg.label, " ".join(f"{v:.4g}" for v in curves[cfg.label][1][:, 0]), flush=True)
    bench.write_variance_curve_csv(out / "variance_curve.csv", curves)


if __name__ == "__main__":
    main()
