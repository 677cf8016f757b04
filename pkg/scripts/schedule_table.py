"""Mean resampling gap and selections per backward-sampling step on the SV model.

    python3 scripts/schedule_table.py --particles 100 1000 --replicates 10 --out schedule_stats.csv
"""
import argparse

from adasmooth import SmootherConfig, StochasticVolatilityModel, SvTripleFunctional
from adasmooth import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--particles", type=int, nargs="+", default=[100, 1000])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.3, 0.6, 1.0])
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="schedule_stats.csv")
    args = ap.parse_args()

    base = StochasticVolatilityModel(0.975, 0.641, 0.165, -0.1)
    model = base.with_observations(base.simulate(args.steps + 1, args.seed).observations)
    rows = []
    for alpha in args.alphas:
        for N in args.particles:
            cfg = SmootherConfig(alpha=alpha, beta=args.beta)
            res = bench.run_replicates(model, SvTripleFunctional(), cfg, N, args.replicates, [args.steps],
                                       args.seed + 1, args.threads)
            gap, between = bench.schedule_stats(res)
            rows.append((alpha, args.beta, N, gap, between))
            print(f"alpha={alpha:g} N={N:5d} gap={gap:.3f} selections/backward={between:.3f}", flush=True)
    bench.write_schedule_stats_csv(args.out, rows)


if __name__ == "__main__":
    main()
