"""Command-line entry point: ``detect``, ``compare``, ``gen`` and ``bench``.

Machine-readable results go to stdout as one JSON line; human-readable notes
go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .bench import ManifestError, load_manifest, run_bench
from .combo import ComboConfig, optimize, write_trace
from .graph import GraphParseError, read_graph
from .louvain import LouvainConfig, louvain
from .objective import ObjectiveKind, score as objective_score
from .partition import PartitionMismatchError, nmi, read_partition_csv, read_partition_pair, write_partition_csv
from .synthgen import InfeasibleSpecError, PlantedSpec, generate

EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.stdout.flush()


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_graph(path):
    try:
        return read_graph(path)
    except (OSError, GraphParseError, ValueError) as exc:
        raise UsageError(f"cannot read graph {path}: {exc}") from exc


def cmd_detect(args) -> int:
    objective = ObjectiveKind.parse(args.objective)
    if args.algorithm == "louvain":
        if objective is not ObjectiveKind.MODULARITY:
            raise UsageError("louvain supports --objective modularity only")
        if args.max_communities is not None or args.init is not None:
            raise UsageError("--max-communities and --init apply to combo only")
    g = _load_graph(args.input)
    init = None
    if args.init is not None:
        try:
            init = read_partition_csv(args.init, g.labels)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read initial partition {args.init}: {exc}") from exc
    start = time.perf_counter()
    trace = None
    if args.algorithm == "combo":
        cfg = ComboConfig(objective=objective, max_communities=args.max_communities,
                          threshold=args.threshold, tries=args.tries, seed=args.seed)
        result = optimize(g, cfg, init=init)
        p, value, trace = result.partition, result.score, result.trace
    else:
        p, value = louvain(g, LouvainConfig(seed=args.seed))
    runtime = time.perf_counter() - start
    write_partition_csv(p, args.output, g.labels)
    if args.trace and trace is not None:
        write_trace(trace, args.trace)
    out = {
        "algorithm": args.algorithm,
        "objective": objective.name.lower(),
        "score": value,
        "k": p.k,
        "n": g.n,
        "runtime": runtime,
        "seed": args.seed,
    }
    if init is not None:
        out["init_score"] = objective_score(g, init, objective)
    _emit(out)
    _note(f"{args.algorithm}/{objective.name.lower()}: score {value:.6f}, {p.k} communities, {runtime:.3f} s")
    return 0


def cmd_compare(args) -> int:
    try:
        p1, p2, nodes = read_partition_pair(args.p1, args.p2)
    except PartitionMismatchError as exc:
        raise UsageError(str(exc)) from exc
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read partitions: {exc}") from exc
    out = {"nmi": nmi(p1, p2), "k1": p1.k, "k2": p2.k}
    if args.graph:
        g = _load_graph(args.graph)
        try:
            p1 = read_partition_csv(args.p1, g.labels)
            p2 = read_partition_csv(args.p2, g.labels)
        except PartitionMismatchError as exc:
            raise UsageError(str(exc)) from exc
        objective = ObjectiveKind.parse(args.objective)
        s1, s2 = objective_score(g, p1, objective), objective_score(g, p2, objective)
        out.update({"objective": objective.name.lower(), "score1": s1, "score2": s2, "delta": s1 - s2})
    _emit(out)
    return 0


def cmd_gen(args) -> int:
    spec = PlantedSpec(n=args.n, k=args.k, avg_degree=args.avg_degree, mu=args.mu, seed=args.seed)
    try:
        pg = generate(spec)
    except InfeasibleSpecError as exc:
        raise UsageError(f"infeasible spec: {exc}") from exc
    edges, truth, meta = pg.write(args.out)
    _emit({"edges": edges, "ground_truth": truth, "metadata": meta, **pg.meta})
    _note(f"wrote {edges}: n={pg.graph.n}, m={pg.graph.total_weight:g}, realized mu {pg.meta['realized_mu']:.3f}")
    return 0


def cmd_bench(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except (OSError, ValueError, ManifestError) as exc:
        raise UsageError(f"bad manifest: {exc}") from exc
    records, summary = run_bench(manifest, args.out, jobs=args.jobs)
    ok = sum(r.status == "ok" for r in records)
    _emit({"records": len(records), "succeeded": ok, "out": str(args.out),
           "algorithms": summary["algorithms"]})
    for alg, entry in summary["algorithms"].items():
        _note(f"{alg}: rank {entry['average_rank']}, percent of max {entry['average_percent_of_max']}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="combocd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="find communities in a graph")
    d.add_argument("--input", required=True, help="edge list or Pajek .net file")
    d.add_argument("--objective", choices=["modularity", "codelength"], default="modularity")
    d.add_argument("--algorithm", choices=["combo", "louvain"], default="combo")
    d.add_argument("--max-communities", type=int, default=None)
    d.add_argument("--tries", type=int, default=2)
    d.add_argument("--threshold", type=float, default=1e-6)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--init", default=None, help="partition CSV to start from")
    d.add_argument("--output", required=True, help="partition CSV to write")
    d.add_argument("--trace", default=None, help="CSV log of accepted moves")
    d.set_defaults(func=cmd_detect)

    c = sub.add_parser("compare", help="NMI between two partitions")
    c.add_argument("p1")
    c.add_argument("p2")
    c.add_argument("--graph", default=None, help="also score both partitions on this graph")
    c.add_argument("--objective", choices=["modularity", "codelength"], default="modularity")
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("gen", help="planted-partition graph with ground truth")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--avg-degree", type=float, default=16.0)
    g.add_argument("--mu", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output prefix")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run a benchmark manifest")
    b.add_argument("manifest")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--jobs", type=int, default=None)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except ValueError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
