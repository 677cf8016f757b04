"""Efficiency of FFBSm, PaRIS and AdaSmooth(0.6, 0.5) on the linear Gaussian model.

    python3 scripts/table1_efficiency.py --particles 50 100 200 --replicates 100 --out efficiency_table.csv
"""
import argparse

from adasmooth import LinearGaussianHmm, SmootherConfig, StateSumFunctional, Variant
from adasmooth import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--particles", type=int, nargs="+", default=[50, 100, 200, 500])
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="efficiency_table.csv")
    args = ap.parse_args()

    base = LinearGaussianHmm(0.7, 1.0, 0.2, 1.0)
    model = base.with_observations(base.simulate(args.steps + 1, args.seed).observations)
    f = StateSumFunctional()
    configs = [
        SmootherConfig(variant=Variant.FFBSM),
        SmootherConfig(variant=Variant.PARIS, precision_draws=2),
        SmootherConfig(variant=Variant.ADASMOOTH, alpha=0.6, beta=0.5),
    ]
    cells = []
    for N in args.particles:
        for cfg in configs:
            res = bench.run_replicates(model, f, cfg, N, args.replicates, [args.steps], args.seed + 1, args.threads)
            cell = bench.efficiency(res)[0]
            cells.append((cfg.label, cell))
            print(f"N={N:5d} {cfg.label:20s} efficiency={cell.efficiency:.4g} "
                  f"variance={cell.variance:.4g} time={cell.mean_time:.4f}s", flush=True)
    bench.write_baseline_efficiency_csv(args.out, cells)


if __name__ == "__main__":
    main()
