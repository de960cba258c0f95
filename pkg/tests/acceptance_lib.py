"""Computations behind the acceptance suite.

Every ``criterion_k`` returns ``(outputs, info)``: ``outputs`` holds only
seeded, non-timing data (JSON-ready, one record per case with an ``id``), while
``info`` carries timings and summary numbers. ``subset=True`` runs a fixed
selection of the same cases, which the determinism check repeats.
"""

from __future__ import annotations

import functools
import itertools
import json
import time

import numpy as np

from conftest import atlas
from lcmer.cli import bench_tasks, run_instance
from lcmer.graphcore import Graph, erdos_renyi, local_complement_sequence, write_graph6
from lcmer.grgs import build_grgs, build_rgs, commute_lc_plan, compare_protocols
from lcmer.ilp.edm import edm_ilp, vertex_minor_weights
from lcmer.orbit import DEFAULT_LIMIT, enumerate_orbit, is_vertex_minor, orbit_summary
from lcmer.sa import SaConfig, edm_sa
from lcmer.symplectic import lc_equivalent

BASE_SEED = 20240607
P_GRID = [0.25, 0.5, 0.75, 1.0]


def rng_for(*key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([BASE_SEED, *key]))


def eq_residual(g: Graph, h: Graph, w) -> tuple[bool, bool]:
    """Dense substitution of a witness: (linear condition is zero, quadratic holds)."""
    A, B = g.adjacency().astype(np.int64), h.adjacency().astype(np.int64)
    P, Q, R, S = (np.diag(np.array(v, dtype=np.int64)) for v in (w.p, w.q, w.r, w.s))
    lin = (A @ P @ B + A @ Q + R @ B + S) % 2
    quad = all((p * s + r * q) % 2 == 1 for p, q, r, s in zip(w.p, w.q, w.r, w.s))
    return not lin.any(), quad


def _solve_record(g: Graph, weights=None) -> tuple[dict, dict]:
    res = edm_ilp(g, weights)
    lin, quad = eq_residual(g, res.graph, res.witness)
    solve = {"g6": write_graph6(g), "h6": write_graph6(res.graph), "status": res.solution.status,
             "eq1": lin, "eq2": quad}
    return res, solve


# -- 1 and 3: ILP exactness and constraint soundness ------------------------------

def c1_cases(subset: bool) -> list[tuple[str, Graph]]:
    cases = [(f"atlas-{k}", g) for k, g in enumerate(atlas(6, connected_only=True))]
    rng = rng_for(1)
    for k in range(100):
        n = 7 if k < 50 else 8
        p = float(rng.uniform(0.2, 0.8))
        cases.append((f"random-{k}", erdos_renyi(n, p, rng)))
    if subset:
        cases = [c for i, c in enumerate(cases) if i % 25 == 0]
    return cases


@functools.cache
def criterion_1(subset: bool = False):
    records, solves = [], []
    t0 = time.perf_counter()
    for cid, g in c1_cases(subset):
        res, solve = _solve_record(g)
        size, mer, truncated = orbit_summary(g)
        assert not truncated
        records.append({"id": cid, "n": g.n, "g6": write_graph6(g),
                        "ilp": int(res.solution.objective_value), "orbit": mer,
                        "status": res.solution.status})
        solves.append({"id": cid, **solve})
    mismatches = sum(r["ilp"] != r["orbit"] or r["status"] != "optimal" for r in records)
    return records, {"mismatches": mismatches, "solves": solves,
                     "seconds": time.perf_counter() - t0}


# -- 2: symplectic test vs orbit membership -----------------------------------------

def _check_pair(a: Graph, b: Graph, truth: bool) -> bool:
    return (lc_equivalent(a, b) is not None) == truth


@functools.cache
def criterion_2(subset: bool = False):
    records = []
    for n in range(1, 8):
        graphs = [g for g in atlas(7) if g.n == n]
        if subset:
            graphs = graphs[:6]
        orbits = []
        for k, g in enumerate(graphs):
            members = list(enumerate_orbit(g).members)
            orbits.append(members)
            if n <= 5:
                pairs = list(itertools.combinations(members, 2)) + [(g, g)]
            else:
                rng = rng_for(2, n, k)
                idx = rng.integers(len(members), size=(20, 2))
                pairs = [(g, m) for m in members]
                pairs += [(members[i], members[j]) for i, j in idx]
            bad = sum(not _check_pair(a, b, True) for a, b in pairs)
            records.append({"id": f"n{n}-orbit-{k}", "pairs": len(pairs), "mismatches": bad})
        # pairs drawn from two different enumerated orbits
        rng = rng_for(2, n, 999)
        count, bad = 0, 0
        if len(orbits) > 1:
            sets = [set(o) for o in orbits]
            for _ in range(20 if subset else 200):
                i, j = rng.choice(len(orbits), size=2, replace=False)
                a = orbits[i][int(rng.integers(len(orbits[i])))]
                b = orbits[j][int(rng.integers(len(orbits[j])))]
                truth = b in sets[i] or a in sets[j]
                bad += not _check_pair(a, b, truth)
                count += 1
        records.append({"id": f"n{n}-cross", "pairs": count, "mismatches": bad})
    rng = rng_for(2, 8)
    npairs = 20 if subset else 200
    bad_cross = bad_same = crossing = 0
    for k in range(npairs):
        g = erdos_renyi(8, float(rng.uniform(0.2, 0.8)), rng)
        h = erdos_renyi(8, float(rng.uniform(0.2, 0.8)), rng)
        orb = enumerate_orbit(g)
        truth = h in orb
        crossing += not truth
        bad_cross += not _check_pair(g, h, truth)
        # and one member of the same orbit reached by a random walk
        walk = rng.integers(8, size=int(rng.integers(1, 12))).tolist()
        bad_same += not _check_pair(g, local_complement_sequence(g, walk), True)
    records.append({"id": "n8-random", "pairs": npairs, "cross_orbit": crossing, "mismatches": bad_cross})
    records.append({"id": "n8-same-orbit", "pairs": npairs, "mismatches": bad_same})
    total = sum(r["pairs"] for r in records)
    return records, {"mismatches": sum(r["mismatches"] for r in records), "pairs": total}


# -- 4: SA quality ----------------------------------------------------------------

@functools.cache
def criterion_4(subset: bool = False):
    t0 = time.perf_counter()
    ps = [round(0.1 * k, 1) for k in range(1, 10)]
    count = 30
    if subset:
        ps, count = [0.1, 0.5, 0.9], 1
    er_tasks = bench_tasks("er", [13], ps, count, BASE_SEED, ("sa", "orbit"), 100, 100.0,
                           DEFAULT_LIMIT, 10_000_000)
    bd_tasks = bench_tasks("bounded", [6, 7, 8], [5.0], 3 if subset else 30, BASE_SEED,
                           ("sa", "orbit"), 100, 100.0, DEFAULT_LIMIT, 10_000_000)
    records = []
    for task in er_tasks + bd_tasks:
        row = run_instance(task)
        records.append({"id": f"{row['model']}-{row['n']}-{row['param']}-{row['seed']}",
                        "model": row["model"], "n": row["n"], "param": row["param"],
                        "input": row["input_edges"], "sa": row["sa_edges"],
                        "exact": row["exact_edges"]})

    def ratio(rows):
        return np.mean([r["sa"] for r in rows]) / np.mean([r["exact"] for r in rows])

    er = [r for r in records if r["model"] == "er"]
    per_p = {p: ratio([r for r in er if r["param"] == p]) for p in ps}
    bounded = [r for r in records if r["model"] == "bounded"]
    per_n = {n: ratio([r for r in bounded if r["n"] == n]) for n in (6, 7, 8)}
    return records, {"er_ratio": ratio(er), "er_per_p": per_p, "bounded_ratio": ratio(bounded),
                     "bounded_per_n": per_n, "seconds": time.perf_counter() - t0}


# -- 5: SA scaling -------------------------------------------------------------------

N100_P = 2971 / 4950


@functools.cache
def criterion_5(subset: bool = False):
    graphs = [erdos_renyi(100, N100_P, rng_for(5, k)) for k in range(2 if subset else 10)]
    records, times = [], {50: 0.0, 1050: 0.0}
    for k, g in enumerate(graphs):
        rec = {"id": f"er100-{k}", "input": g.edge_count}
        for k_max in (50, 1050):
            t0 = time.perf_counter()
            r = edm_sa(g, SaConfig(k_max, 100.0, k))
            times[k_max] += time.perf_counter() - t0
            rec[f"sa_{k_max}"] = r.best_graph.edge_count
        records.append(rec)
    info = {
        "mean_input": np.mean([r["input"] for r in records]),
        "mean_50": np.mean([r["sa_50"] for r in records]),
        "mean_1050": np.mean([r["sa_1050"] for r in records]),
        "time_50": times[50], "time_1050": times[1050],
        "time_ratio": times[1050] / times[50],
    }
    return records, info


# -- 6: guided vs uniform ---------------------------------------------------------------

@functools.cache
def criterion_6(subset: bool = False):
    records = []
    for p in (0.2, 0.5, 0.8):
        for k in range(3 if subset else 30):
            g = erdos_renyi(15, p, rng_for(6, int(p * 10), k))
            guided = edm_sa(g, SaConfig(100, 100.0, k, selection="guided")).best_energy
            uniform = edm_sa(g, SaConfig(100, 100.0, k, selection="uniform")).best_energy
            records.append({"id": f"p{p}-{k}", "p": p, "guided": guided, "uniform": uniform})
    means = {p: (np.mean([r["guided"] for r in records if r["p"] == p]),
                 np.mean([r["uniform"] for r in records if r["p"] == p])) for p in (0.2, 0.5, 0.8)}
    return records, {"means": means}


# -- 7: vertex-minor reduction --------------------------------------------------------

def _no_isolated(h: Graph) -> bool:
    return all(h.degree(v) for v in range(h.n))


def c7_cases(subset: bool) -> list[tuple[str, Graph, Graph, list[int]]]:
    rng = rng_for(7)
    cases = []
    for k in range(200):
        n = int(rng.integers(2, 6))
        size = int(rng.integers(2, min(4, n) + 1))
        verts = sorted(int(v) for v in rng.choice(n, size=size, replace=False))
        g = erdos_renyi(n, float(rng.uniform(0.3, 0.9)), rng)
        h = None
        if k % 2 == 0:
            members = list(enumerate_orbit(g).members)
            cand = members[int(rng.integers(len(members)))].induced(verts)
            if _no_isolated(cand):
                h = cand
        while h is None or not _no_isolated(h):
            h = erdos_renyi(size, float(rng.uniform(0.3, 1.0)), rng)
        cases.append((f"case-{k}", g, h, verts))
    if subset:
        cases = cases[::20]
    return cases


@functools.cache
def criterion_7(subset: bool = False):
    records, solves = [], []
    for cid, g, h, verts in c7_cases(subset):
        res, solve = _solve_record(g, vertex_minor_weights(g, h, verts))
        decision = abs(res.solution.objective_value + h.edge_count) < 1e-9
        oracle = is_vertex_minor(g, h, verts)
        records.append({"id": cid, "g6": write_graph6(g), "h6": write_graph6(h), "vertices": verts,
                        "ilp": decision, "orbit": oracle, "status": res.solution.status})
        solves.append({"id": cid, **solve})
    mismatches = sum(r["ilp"] != r["orbit"] or r["status"] != "optimal" for r in records)
    positives = sum(r["orbit"] for r in records)
    return records, {"mismatches": mismatches, "positives": positives, "solves": solves}


# -- 8 and 9: gRGS ---------------------------------------------------------------------

def grgs_corpus(subset: bool):
    corpus = [(f"rgs-{m}", build_rgs(m), m) for m in (2, 3, 4)]
    for k in range(20):
        n = 5 + k % 6
        corpus.append((f"dense-{k}", build_grgs(erdos_renyi(n, 0.8, rng_for(8, k)), 1), k))
    if subset:
        corpus = corpus[:2] + corpus[3:6]
    return corpus


@functools.cache
def criterion_8(subset: bool = False):
    records = []
    for cid, grgs, seed in grgs_corpus(subset):
        plan = commute_lc_plan(grgs, SaConfig(seed=seed))
        records.append({"id": cid, "g_edges": grgs.central.edge_count, "h_edges": plan.h.edge_count,
                        "lc_sequence": plan.lc_sequence, "word": [list(x) for x in plan.word.reduced()],
                        "physical_order": plan.verified, "literal": plan.word_maps_full_graph,
                        "same_orbit": lc_equivalent(grgs.full, plan.h_grgs.full) is not None})
    return records, {
        "cases": len(records),
        "literal": sum(r["literal"] for r in records),
        "physical_order": sum(r["physical_order"] for r in records),
        "same_orbit": sum(r["same_orbit"] for r in records),
    }


@functools.cache
def criterion_9(subset: bool = False):
    records = []
    for cid, grgs, seed in grgs_corpus(subset):
        cmp = compare_protocols(grgs, P_GRID, SaConfig(seed=seed))
        ratios = {row.p: row.ratio for row in cmp.rows}
        sparser = cmp.plan.h.edge_count < grgs.central.edge_count
        cheaper = all(row.commute_resources <= row.naive_resources for row in cmp.rows)
        ordered = ratios[0.25] >= ratios[0.75] if sparser else True
        records.append({"id": cid, "csv": cmp.to_csv(), "sparser": sparser,
                        "cheaper": cheaper, "ordered": ordered})
    return records, {"violations": sum(not (r["cheaper"] and r["ordered"]) for r in records),
                     "sparser": sum(r["sparser"] for r in records)}


CRITERIA = {1: criterion_1, 2: criterion_2, 4: criterion_4, 5: criterion_5, 6: criterion_6,
            7: criterion_7, 8: criterion_8, 9: criterion_9}


def subset_outputs() -> str:
    """Canonical JSON of every criterion's subset outputs (criterion 3 reuses 1 and 7)."""
    out = {str(k): fn(True)[0] for k, fn in CRITERIA.items()}
    out["3"] = criterion_1(True)[1]["solves"] + criterion_7(True)[1]["solves"]
    return json.dumps(out, sort_keys=True)


if __name__ == "__main__":
    print(subset_outputs())
