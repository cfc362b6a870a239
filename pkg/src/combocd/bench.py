"""Benchmark harness: run algorithms over a network set, score, rank and time them.

Quality ranks follow the usual convention for tied scores: every member of a
tie gets the best rank among them. Ranks are normalized to [0, 1] (1 is the
best) and averaged per algorithm; runs that fail or time out score 0.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import multiprocessing as mp
import os
import time
import traceback
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .combo import ComboConfig, optimize
from .graph import Graph, read_graph
from .louvain import LouvainConfig, louvain
from .objective import ObjectiveKind, score as objective_score
from .partition import Partition, nmi, read_partition_csv, write_partition_csv
from .synthgen import PlantedSpec, generate

log = logging.getLogger(__name__)

TIE_TOL = 1e-9


class ManifestError(ValueError):
    pass


@dataclass
class BenchRecord:
    network: str
    algorithm: str
    objective: str
    repetition: int
    seed: int | None
    status: str
    n: int
    score: float | None = None
    runtime: float | None = None
    k: int | None = None
    nmi_vs_ground_truth: float | None = None
    nmi_vs_best: float | None = None
    error: str = ""


def load_manifest(path) -> dict:
    with open(path) as fh:
        manifest = json.load(fh)
    base = Path(path).parent
    if not isinstance(manifest, dict):
        raise ManifestError("manifest must be a JSON object")
    nets = manifest.get("networks")
    algs = manifest.get("algorithms", [])
    if not nets:
        raise ManifestError("manifest lists no networks")
    ids = [n.get("id") for n in nets]
    if None in ids or len(set(ids)) != len(ids):
        raise ManifestError("every network needs a unique id")
    for net in nets:
        if ("path" in net) == ("spec" in net):
            raise ManifestError(f"network {net['id']}: give exactly one of path or spec")
        for key in ("path", "ground_truth"):
            if key in net and not os.path.isabs(net[key]):
                net[key] = str(base / net[key])
    alg_ids = [a.get("id") for a in algs]
    if None in alg_ids or len(set(alg_ids)) != len(alg_ids):
        raise ManifestError("every algorithm needs a unique id")
    for alg in algs:
        if alg.get("kind") not in ("combo", "louvain"):
            raise ManifestError(f"algorithm {alg['id']}: kind must be combo or louvain")
        objective = alg.get("config", {}).get("objective", "modularity")
        if alg["kind"] == "louvain" and ObjectiveKind.parse(objective) is not ObjectiveKind.MODULARITY:
            raise ManifestError(f"algorithm {alg['id']}: louvain optimizes modularity only")
    for ext in manifest.get("external_partitions", []):
        if ext.get("network_id") not in ids:
            raise ManifestError(f"external partition for unknown network {ext.get('network_id')}")
        if not os.path.isabs(ext["path"]):
            ext["path"] = str(base / ext["path"])
    manifest.setdefault("algorithms", [])
    manifest.setdefault("external_partitions", [])
    manifest.setdefault("repetitions", 1)
    manifest.setdefault("jobs", 1)
    manifest.setdefault("timeout_seconds", None)
    return manifest


def load_network(net: dict) -> tuple[Graph, Partition | None]:
    if "spec" in net:
        pg = generate(PlantedSpec(**net["spec"]))
        return pg.graph, pg.truth
    g = read_graph(net["path"])
    truth = None
    if net.get("ground_truth"):
        truth = read_partition_csv(net["ground_truth"], g.labels)
    return g, truth


def _objective_of(alg: dict) -> ObjectiveKind:
    return ObjectiveKind.parse(alg.get("config", {}).get("objective", "modularity"))


def run_algorithm(g: Graph, alg: dict, repetition: int) -> tuple[Partition, float, float, int]:
    """Run one configured algorithm; returns (partition, score, seconds, seed)."""
    config = dict(alg.get("config", {}))
    seed = int(config.pop("seed", 0)) + repetition
    start = time.perf_counter()
    if alg["kind"] == "combo":
        result = optimize(g, ComboConfig(seed=seed, **config))
        p, q = result.partition, result.score
    else:
        config.pop("objective", None)
        p, q = louvain(g, LouvainConfig(seed=seed, **config))
    return p, q, time.perf_counter() - start, seed


def _job(net: dict, alg: dict, rep: int) -> dict:
    g, _ = load_network(net)
    p, q, seconds, seed = run_algorithm(g, alg, rep)
    return {"labels": p.labels.tolist(), "score": q, "runtime": seconds, "seed": seed}


def _job_entry(queue, net, alg, rep):
    try:
        queue.put(("ok", _job(net, alg, rep)))
    except Exception:  # reported back to the collector
        queue.put(("error", traceback.format_exc(limit=3)))


def _run_jobs(jobs: list, n_workers: int, timeout: float | None) -> list:
    """Execute jobs, returning ``(status, payload)`` per job in input order."""
    results: list = [None] * len(jobs)
    if n_workers <= 1 and timeout is None:
        for i, (net, alg, rep) in enumerate(jobs):
            try:
                results[i] = ("ok", _job(net, alg, rep))
            except Exception:
                results[i] = ("error", traceback.format_exc(limit=3))
        return results
    ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
    pending = list(range(len(jobs)))
    active: dict = {}
    while pending or active:
        while pending and len(active) < max(1, n_workers):
            i = pending.pop(0)
            q = ctx.Queue()
            proc = ctx.Process(target=_job_entry, args=(q, *jobs[i]), daemon=True)
            proc.start()
            active[i] = (proc, q, time.monotonic())
        for i, (proc, q, started) in list(active.items()):
            if not q.empty():
                results[i] = q.get()
                proc.join()
                del active[i]
            elif not proc.is_alive() and q.empty():
                proc.join()
                results[i] = ("error", f"worker exited with code {proc.exitcode}")
                del active[i]
            elif timeout is not None and time.monotonic() - started > timeout:
                proc.terminate()
                proc.join()
                results[i] = ("timeout", f"exceeded {timeout} s")
                del active[i]
        time.sleep(0.01)
    return results


def normalized_ranks(values: dict, better_high: bool) -> dict:
    """Normalized rank per key; ``None`` values score 0; ties share the best rank."""
    keys = list(values)
    if len(keys) == 1:
        return {keys[0]: 1.0 if values[keys[0]] is not None else 0.0}
    out = {}
    ok = {k: v for k, v in values.items() if v is not None}
    for k in keys:
        v = values[k]
        if v is None:
            out[k] = 0.0
            continue
        if better_high:
            ahead = sum(1 for x in ok.values() if x > v + TIE_TOL)
        else:
            ahead = sum(1 for x in ok.values() if x < v - TIE_TOL)
        out[k] = 1.0 - ahead / (len(keys) - 1)
    return out


def summarize(records: list[BenchRecord], external=()) -> dict:
    """Average normalized quality/speed ranks, percent-of-max and a runtime table."""
    by_net: dict = {}
    for r in records:
        by_net.setdefault((r.network, r.objective), {}).setdefault(r.algorithm, []).append(r)
    ranks: dict = {}
    speed: dict = {}
    pct: dict = {}
    runtime_rows = []
    for (net, objective), per_alg in by_net.items():
        maximize = ObjectiveKind.parse(objective).maximize
        best_score = {}
        mean_time = {}
        for alg, runs in per_alg.items():
            scores = [r.score for r in runs if r.status == "ok"]
            best_score[alg] = (max(scores) if maximize else min(scores)) if scores else None
            times = [r.runtime for r in runs if r.status == "ok" and r.runtime is not None]
            failed = any(r.status != "ok" for r in runs)
            if alg not in external:
                mean_time[alg] = None if failed or not times else float(np.mean(times))
            if times and not failed:
                runtime_rows.append({"network": net, "n": runs[0].n, "algorithm": alg,
                                     "seconds": float(np.mean(times))})
        for alg, v in normalized_ranks(best_score, maximize).items():
            ranks.setdefault(alg, []).append(v)
        if mean_time:
            for alg, v in normalized_ranks(mean_time, better_high=False).items():
                speed.setdefault(alg, []).append(v)
        finite = [v for v in best_score.values() if v is not None]
        if finite:
            top = max(finite) if maximize else min(finite)
            for alg, v in best_score.items():
                if v is None:
                    share = 0.0
                elif maximize:
                    share = 100.0 * v / top if top > 0 else math.nan
                else:
                    share = 100.0 * top / v if v > 0 else math.nan
                pct.setdefault(alg, []).append(share)
    algorithms = sorted({r.algorithm for r in records})
    summary: dict = {"algorithms": {}, "runtime_table": sorted(
        runtime_rows, key=lambda row: (row["algorithm"], row["n"], row["network"]))}
    for alg in algorithms:
        entry = {
            "networks": len(ranks.get(alg, [])),
            "average_rank": float(np.mean(ranks[alg])) if alg in ranks else None,
            "average_speed_rank": float(np.mean(speed[alg])) if alg in speed else None,
            "average_percent_of_max": float(np.nanmean(pct[alg])) if alg in pct and not np.all(np.isnan(pct[alg])) else None,
        }
        rows = [row for row in runtime_rows if row["algorithm"] == alg]
        ns = sorted({row["n"] for row in rows})
        if len(ns) >= 2:
            slope, _ = np.polyfit(np.log([r["n"] for r in rows]), np.log([max(r["seconds"], 1e-9) for r in rows]), 1)
            entry["runtime_loglog_slope"] = float(slope)
        summary["algorithms"][alg] = entry
    return summary


def run_bench(manifest: dict, out_dir, jobs: int | None = None) -> tuple[list[BenchRecord], dict]:
    out_dir = Path(out_dir)
    (out_dir / "partitions").mkdir(parents=True, exist_ok=True)
    n_workers = int(jobs if jobs is not None else manifest.get("jobs", 1))
    timeout = manifest.get("timeout_seconds")
    reps = int(manifest.get("repetitions", 1))
    nets = manifest["networks"]
    loaded = {}
    for net in nets:
        loaded[net["id"]] = load_network(net)
    work = [(net, alg, rep) for net in nets for alg in manifest["algorithms"] for rep in range(reps)]
    outcomes = _run_jobs(work, n_workers, timeout)

    records: list[BenchRecord] = []
    partitions: dict = {}
    for (net, alg, rep), (status, payload) in zip(work, outcomes):
        g, _ = loaded[net["id"]]
        rec = BenchRecord(net["id"], alg["id"], _objective_of(alg).name.lower(), rep, None, status, g.n)
        if status == "ok":
            p = Partition(payload["labels"])
            rec.score, rec.runtime, rec.k, rec.seed = payload["score"], payload["runtime"], p.k, payload["seed"]
            partitions[id(rec)] = p
            write_partition_csv(p, out_dir / "partitions" / f"{net['id']}__{alg['id']}__{rep}.csv", g.labels)
        else:
            rec.error = str(payload).strip().splitlines()[-1] if payload else status
            log.warning("%s/%s rep %d: %s", net["id"], alg["id"], rep, rec.error)
        records.append(rec)
    for ext in manifest["external_partitions"]:
        g, _ = loaded[ext["network_id"]]
        objective = ObjectiveKind.parse(ext.get("objective", "modularity"))
        rec = BenchRecord(ext["network_id"], ext["algorithm_id"], objective.name.lower(), 0, None, "ok", g.n)
        try:
            p = read_partition_csv(ext["path"], g.labels)
            rec.score, rec.k = objective_score(g, p, objective), p.k
            partitions[id(rec)] = p
        except (OSError, ValueError) as exc:
            rec.status, rec.error = "error", str(exc)
        records.append(rec)

    for net in nets:
        g, truth = loaded[net["id"]]
        mine = [r for r in records if r.network == net["id"] and id(r) in partitions]
        for objective in {r.objective for r in mine}:
            group = [r for r in mine if r.objective == objective]
            maximize = ObjectiveKind.parse(objective).maximize
            best = max(group, key=lambda r: r.score) if maximize else min(group, key=lambda r: r.score)
            for r in group:
                r.nmi_vs_best = nmi(partitions[id(r)], partitions[id(best)])
                if truth is not None:
                    r.nmi_vs_ground_truth = nmi(partitions[id(r)], truth)

    summary = summarize(records, {e["algorithm_id"] for e in manifest["external_partitions"]})
    write_records(records, out_dir / "records.csv")
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return records, summary


def write_records(records: list[BenchRecord], path) -> None:
    names = [f.name for f in fields(BenchRecord)]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
