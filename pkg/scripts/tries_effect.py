"""Effect of random starting splits (tries) on final modularity and runtime.

Runs on noisy planted graphs and, for contrast, on a few networkx graphs with
heterogeneous community structure.
"""

import argparse
import time

import numpy as np

from combocd import ComboConfig, Graph, PlantedSpec, generate, karate_club, optimize


def named_graphs():
    yield "karate", karate_club()
    try:
        import networkx as nx
    except ImportError:
        return
    G = nx.convert_node_labels_to_integers(nx.les_miserables_graph())
    yield "lesmis", Graph.from_edges(G.number_of_nodes(), [(u, v, float(d["weight"])) for u, v, d in G.edges(data=True)])


def measure(g, tries, seeds):
    qs, ts = [], []
    for seed in seeds:
        start = time.perf_counter()
        qs.append(optimize(g, ComboConfig(tries=tries, seed=seed)).score)
        ts.append(time.perf_counter() - start)
    return np.mean(qs), np.mean(ts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=20)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--mu", type=float, default=0.5)
    ap.add_argument("--tries", type=int, nargs="+", default=[0, 2])
    args = ap.parse_args()

    print("graph," + ",".join(f"q_t{t},sec_t{t}" for t in args.tries))
    for name, g in named_graphs():
        cells = [measure(g, t, range(3)) for t in args.tries]
        print(name + "," + ",".join(f"{q:.6f},{s:.3f}" for q, s in cells))
    totals = {t: [] for t in args.tries}
    for i in range(args.graphs):
        g, _ = generate(PlantedSpec(args.n, 10, 16, args.mu, seed=100 + i))
        cells = [measure(g, t, [i]) for t in args.tries]
        for t, cell in zip(args.tries, cells):
            totals[t].append(cell)
        print(f"planted{i}," + ",".join(f"{q:.6f},{s:.3f}" for q, s in cells))
    for t in args.tries:
        q, s = np.mean(totals[t], axis=0)
        print(f"# tries={t}: mean Q {q:.6f}, mean time {s:.3f}s")


if __name__ == "__main__":
    main()
