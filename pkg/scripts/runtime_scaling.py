"""Wall time of Combo against network size, with a log-log slope fit."""

import argparse
import time

import numpy as np

from combocd import ComboConfig, PlantedSpec, generate, optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000, 4000])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--mu", type=float, default=0.3)
    ap.add_argument("--objective", default="modularity")
    args = ap.parse_args()

    # compile kernels before timing anything
    warm, _ = generate(PlantedSpec(100, 4, 8, 0.2, seed=0))
    optimize(warm, ComboConfig(objective=args.objective))

    xs, ys = [], []
    print("n,seed,seconds,score,k")
    for n in args.sizes:
        for seed in range(args.seeds):
            g, _ = generate(PlantedSpec(n, 10, 16, args.mu, seed=seed))
            start = time.perf_counter()
            r = optimize(g, ComboConfig(objective=args.objective, seed=seed))
            elapsed = time.perf_counter() - start
            xs.append(np.log(n))
            ys.append(np.log(elapsed))
            print(f"{n},{seed},{elapsed:.4f},{r.score:.6f},{r.partition.k}")
    print(f"# log-log slope {np.polyfit(xs, ys, 1)[0]:.3f}")


if __name__ == "__main__":
    main()
