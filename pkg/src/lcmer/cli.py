"""Command-line interface.

Exit codes: 0 success, 2 parse or validation error, 3 budget exhausted or size
cap exceeded, 4 internal verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .exceptions import GraphFormatError, OrbitTruncatedError, SizeCapError, VerificationError
from .graphcore import (
    Graph,
    WeightMatrix,
    bounded_degree,
    erdos_renyi,
    graph_to_json,
    local_complement_sequence,
    read_graph,
    write_graph6,
)
from .grgs import Grgs, build_grgs, build_rgs, compare_protocols
from .ilp.edm import edm_ilp, edm_sailp
from .ilp.lp import SOLVER_ENV, export_lp
from .ilp.model import build_edm_ilp
from .ilp.solver import OPTIMAL
from .orbit import DEFAULT_LIMIT, enumerate_orbit, exact_mer, orbit_summary
from .sa import SaConfig, edm_sa
from .symplectic import check_witness, lc_equivalent

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4

ORBIT_CAP = 12
ILP_CAP = 10
THREADS_ENV = "LCMER_THREADS"

BENCH_FIELDS = [
    "model", "n", "param", "seed", "input_edges", "sa_edges", "exact_edges",
    "sa_runtime_ms", "ilp_runtime_ms", "method",
]


class BudgetExhausted(Exception):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# -- helpers -----------------------------------------------------------------

def _load_graph(path: str) -> Graph:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return read_graph(text)


def _load_weights(path: str | None) -> WeightMatrix | None:
    return None if path is None else WeightMatrix.from_json(Path(path).read_text())


def _emit_graph(g: Graph, fmt: str) -> str:
    return graph_to_json(g) if fmt == "json" else write_graph6(g)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise SizeCapError(f"{what} refuses n={n} (cap {cap}); raise it with --max-n")


def _sa_config(args, weights=None) -> SaConfig:
    return SaConfig(args.kmax, args.t1, args.seed, weights)


def parse_grid(text: str) -> list[float]:
    """``"0.1,0.5"`` or an inclusive ``start:stop:step`` range."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"range must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 10) for k in range(max(count, 0))]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_int_range(text: str) -> list[int]:
    """``"13"``, ``"6,7,8"`` or inclusive ``"6-8"``."""
    text = text.strip()
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


# -- minimize ------------------------------------------------------------------

def _minimize(g: Graph, args, weights) -> tuple[Graph, dict]:
    method = args.method
    if method == "orbit":
        if weights is not None:
            raise ValueError("the orbit method minimises edge count only")
        _cap(g.n, args.max_n or ORBIT_CAP, "orbit")
        h, seq = exact_mer(g, args.limit)
        return h, {"lc_sequence": seq}
    if method == "sa":
        r = edm_sa(g, _sa_config(args, weights))
        return r.best_graph, {"lc_sequence": r.lc_sequence, "energy_trace": r.energy_trace,
                              "seed": args.seed}
    if args.solver == "builtin":
        _cap(g.n, args.max_n or ILP_CAP, "built-in ILP")
    if method == "ilp":
        r = edm_ilp(g, weights, args.budget, solver=args.solver)
        sol, h, w, extra = r.solution, r.graph, r.witness, {}
    else:
        r = edm_sailp(g, _sa_config(args, weights), args.budget, solver=args.solver)
        sol, h, w = r.solution, r.graph, r.witness
        extra = {"sa_lc_sequence": r.sa.lc_sequence, "sa_edges": r.sa.best_graph.edge_count}
    info = {"witness": w.to_dict(), "status": sol.status,
            "objective": sol.objective_value, "nodes": sol.nodes, **extra}
    if sol.status != OPTIMAL:
        raise BudgetExhausted(f"ILP stopped with status {sol.status}", (h, info))
    return h, info


def cmd_minimize(args) -> int:
    g = _load_graph(args.input)
    weights = _load_weights(args.weights)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        h, info = _minimize(g, args, weights)
    except BudgetExhausted as exc:
        if not args.partial:
            raise
        h, info = exc.partial
        code = EXIT_BUDGET
    runtime = (time.perf_counter() - t0) * 1000
    if "lc_sequence" in info and local_complement_sequence(g, info["lc_sequence"]) != h:
        raise VerificationError("complementation sequence does not reproduce the output")
    result = {
        "method": args.method,
        "input_edges": g.edge_count,
        "output_edges": h.edge_count,
        "runtime_ms": round(runtime, 3),
        "lc_sequence_or_witness": info.get("lc_sequence", info.get("witness")),
        **{k: v for k, v in info.items() if k not in ("lc_sequence", "witness")},
    }
    if weights is not None:
        result["output_energy"] = weights.energy(h)
    print(json.dumps(result))
    if args.out:
        _write(args.out, _emit_graph(h, args.format) + "\n")
    return code


# -- check-lc / orbit / ilp-export ---------------------------------------------

def cmd_check_lc(args) -> int:
    a, b = _load_graph(args.first), _load_graph(args.second)
    if a.n != b.n:
        raise ValueError(f"graphs have {a.n} and {b.n} vertices")
    w = lc_equivalent(a, b)
    if w is not None and not check_witness(a, b, w):
        raise VerificationError("returned witness fails substitution")
    print(json.dumps({"equivalent": w is not None, "witness": None if w is None else w.to_dict()}))
    return EXIT_OK


def cmd_orbit(args) -> int:
    g = _load_graph(args.input)
    _cap(g.n, args.max_n or ORBIT_CAP, "orbit")
    orb = enumerate_orbit(g, args.limit)
    _write(args.out, "".join(line + "\n" for line in orb.dump_lines()))
    return EXIT_BUDGET if orb.truncated else EXIT_OK


def cmd_ilp_export(args) -> int:
    g = _load_graph(args.input)
    _write(args.out, export_lp(build_edm_ilp(g, _load_weights(args.weights))))
    return EXIT_OK


# -- bench ---------------------------------------------------------------------

def _instance_seed(base: int, model: str, n: int, param: float, index: int) -> int:
    tag = 0 if model == "er" else 1
    ss = np.random.SeedSequence([base, tag, n, int(round(param * 10_000)), index])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def _key(row: dict) -> tuple:
    return (row["model"], int(row["n"]), float(row["param"]), int(row["seed"]))


def run_instance(task: tuple) -> dict:
    """One benchmark row; top level so worker processes can run it."""
    model, n, param, seed, methods, kmax, t1, limit, budget = task
    g = erdos_renyi(n, param, seed) if model == "er" else bounded_degree(n, int(param), seed)
    row = {"model": model, "n": n, "param": param, "seed": seed,
           "input_edges": g.edge_count, "sa_edges": "", "exact_edges": "",
           "sa_runtime_ms": "", "ilp_runtime_ms": "", "method": "+".join(methods)}
    if "sa" in methods:
        t0 = time.perf_counter()
        r = edm_sa(g, SaConfig(kmax, t1, seed))
        row["sa_runtime_ms"] = round((time.perf_counter() - t0) * 1000, 3)
        row["sa_edges"] = r.best_graph.edge_count
    if "orbit" in methods:
        size, min_edges, truncated = orbit_summary(g, limit)
        if truncated:
            raise OrbitTruncatedError(f"orbit of instance seed={seed} exceeds {limit} members")
        row["exact_edges"] = min_edges
    for m in ("ilp", "sailp"):
        if m in methods:
            t0 = time.perf_counter()
            if m == "ilp":
                res = edm_ilp(g, None, budget)
                sol, h = res.solution, res.graph
            else:
                res = edm_sailp(g, SaConfig(kmax, t1, seed), budget)
                sol, h = res.solution, res.graph
            row["ilp_runtime_ms"] = round((time.perf_counter() - t0) * 1000, 3)
            if sol.status != OPTIMAL:
                raise BudgetExhausted(f"instance {model} n={n} seed={seed}: {sol.status}")
            if row["exact_edges"] != "" and row["exact_edges"] != h.edge_count:
                raise VerificationError("ILP optimum disagrees with the orbit oracle")
            row["exact_edges"] = h.edge_count
    return row


def bench_tasks(model, ns, params, count, seed, methods, kmax, t1, limit, budget) -> list[tuple]:
    tasks = []
    for n in ns:
        for param in params:
            for index in range(count):
                s = _instance_seed(seed, model, n, param, index)
                tasks.append((model, n, param, s, tuple(methods), kmax, t1, limit, budget))
    return tasks


def cmd_bench(args) -> int:
    methods = [m for m in args.methods.split(",") if m]
    bad = set(methods) - {"sa", "orbit", "ilp", "sailp"}
    if bad:
        raise ValueError(f"unknown bench methods {sorted(bad)}")
    params = parse_grid(args.params)
    if args.model == "bounded":
        params = [float(int(p)) for p in params]
    tasks = bench_tasks(args.model, parse_int_range(args.n), params, args.count, args.seed,
                        methods, args.kmax, args.t1, args.limit, args.budget)
    out = Path(args.out) if args.out else None
    done = set()
    if out is not None and out.exists() and out.stat().st_size:
        with out.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != BENCH_FIELDS:
                raise ValueError(f"{out} exists with a different header")
            done = {_key(r) for r in reader}
    todo = [t for t in tasks if (t[0], t[1], float(t[2]), t[3]) not in done]
    fh = out.open("a", newline="") if out is not None else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS, lineterminator="\n")
        if not done:
            writer.writeheader()
        threads = args.threads or int(os.environ.get(THREADS_ENV, "1"))
        if threads > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for row in pool.map(run_instance, todo):
                    writer.writerow(row)
                    fh.flush()
        else:
            for task in todo:
                writer.writerow(run_instance(task))
                fh.flush()
    finally:
        if out is not None:
            fh.close()
    return EXIT_OK


# -- grgs ------------------------------------------------------------------------

def cmd_grgs(args) -> int:
    if (args.central is None) == (args.rgs is None):
        raise ValueError("give exactly one of --central or --rgs")
    if args.rgs is not None:
        grgs = build_rgs(args.rgs)
    else:
        text = Path(args.central).read_text()
        if text.lstrip().startswith("{") and '"central"' in text:
            grgs = Grgs.from_json(text)
        else:
            grgs = build_grgs(read_graph(text), args.leaves)
    p_grid = parse_grid(args.p_grid)
    if not p_grid:
        raise ValueError("empty --p-grid")
    cmp = compare_protocols(grgs, p_grid, _sa_config(args), args.photons_per_ghz)
    _write(args.out, cmp.to_csv())
    plan = cmp.plan
    summary = {
        "central_edges": grgs.central.edge_count,
        "h_edges": plan.h.edge_count,
        "lc_sequence": plan.lc_sequence,
        "word": plan.word.to_dict()["reduced"][: grgs.central.n],
        "verified": plan.verified,
        "word_maps_full_graph": plan.word_maps_full_graph,
        "photons_per_ghz": cmp.photons_per_ghz,
        "model": "simplified fusion model: full rebuild on failure, no boosting or loss",
    }
    print(json.dumps(summary), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _add_sa_flags(p):
    p.add_argument("--kmax", type=int, default=100, help="annealing iterations")
    p.add_argument("--t1", type=float, default=100.0, help="initial temperature")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcmer", description="Minimum-edge LC-equivalent graph states.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimize", help="edge-minimise one graph")
    p.add_argument("input", help="graph6 or JSON graph file ('-' for stdin)")
    p.add_argument("--method", choices=["sa", "ilp", "sailp", "orbit"], default="sa")
    _add_sa_flags(p)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="orbit member limit")
    p.add_argument("--budget", type=int, default=10_000_000, help="ILP node budget")
    p.add_argument("--solver", choices=["builtin", "external"], default="builtin",
                   help=f"ILP solver; external runs the program named by ${SOLVER_ENV}")
    p.add_argument("--weights", help="weight matrix JSON")
    p.add_argument("--out", help="write the minimised graph here")
    p.add_argument("--format", choices=["graph6", "json"], default="graph6")
    p.add_argument("--max-n", type=int, help="override the size cap of orbit/ILP")
    p.add_argument("--partial", action="store_true", help="print the incumbent when the budget runs out")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("check-lc", help="test two graphs for LC-equivalence")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_check_lc)

    p = sub.add_parser("orbit", help="dump the labelled LC orbit as JSON lines")
    p.add_argument("input")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--out")
    p.add_argument("--max-n", type=int)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("ilp-export", help="write the edge-minimisation ILP in LP format")
    p.add_argument("input")
    p.add_argument("--weights")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ilp_export)

    p = sub.add_parser("bench", help="benchmark on random graphs, CSV output")
    p.add_argument("--model", choices=["er", "bounded"], default="er")
    p.add_argument("--n", default="13", help="vertex counts: 13, 6,7,8 or 6-8")
    p.add_argument("--params", default="0.1:0.9:0.1", help="p values (er) or d_lim values (bounded)")
    p.add_argument("--count", type=int, default=30, help="graphs per (n, param)")
    p.add_argument("--methods", default="sa,orbit")
    _add_sa_flags(p)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--budget", type=int, default=10_000_000)
    p.add_argument("--out", help="CSV path; existing rows are kept and skipped")
    p.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("grgs", help="compare naive and Commute-LC gRGS construction")
    p.add_argument("--central", help="central graph file, or gRGS JSON")
    p.add_argument("--rgs", type=int, help="use the complete-core RGS with 2m core vertices")
    p.add_argument("--leaves", type=int, default=1, help="leaves per central vertex")
    p.add_argument("--p-grid", default="0.25,0.5,0.75,1.0")
    p.add_argument("--photons-per-ghz", type=int, default=1,
                   help="multiply resource counts by photons per GHZ-3 state")
    _add_sa_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grgs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (SizeCapError, OrbitTruncatedError, BudgetExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (GraphFormatError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
