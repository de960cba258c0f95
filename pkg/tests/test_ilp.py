import collections
import re
import sys
import threading
from pathlib import Path

import numpy as np
import pytest

from conftest import atlas
from lcmer.exceptions import VerificationError
from lcmer.graphcore import Graph, WeightMatrix, erdos_renyi
from lcmer.ilp.edm import edm_ilp, edm_sailp, is_vertex_minor_ilp, vertex_minor_weights
from lcmer.ilp.lp import SOLVER_ENV, export_lp, read_lp, read_solution, solve_external
from lcmer.ilp.model import (
    INTEGER,
    IlpModel,
    build_edm_ilp,
    graph_from_solution,
    identity_assignment,
    model_size,
    witness_from_solution,
)
from lcmer.ilp.solver import (
    BUDGET_EXHAUSTED,
    CANCELLED,
    INFEASIBLE,
    OPTIMAL,
    solve_builtin,
)
from lcmer.orbit import exact_mer, is_vertex_minor
from lcmer.sa import SaConfig
from lcmer.symplectic import check_witness

SCIPY_SOLVER = f"{sys.executable} {Path(__file__).parent / 'helpers' / 'scipy_milp_solver.py'}"


def families(model):
    return collections.Counter(re.match(r"[A-Z]+", v.name).group() for v in model.variables)


# -- model ----------------------------------------------------------------------

def test_k2_model_counts():
    m = build_edm_ilp(Graph.complete(2))
    assert families(m) == {"AH": 1, "P": 2, "Q": 2, "R": 2, "S": 2,
                           "ZPS": 2, "ZRQ": 2, "ZP": 2, "ZR": 2, "B": 4}


@pytest.mark.parametrize("n", range(1, 11))
def test_model_size_formula(n):
    m = build_edm_ilp(erdos_renyi(n, 0.5, n))
    assert (len(m.variables), len(m.constraints)) == model_size(n)
    fam = families(m)
    assert fam["AH"] == n * (n - 1) // 2
    assert fam["ZP"] == fam["ZR"] == n * (n - 1)
    assert fam["B"] == n * n


def test_b_bounds_follow_degree():
    g = Graph.star(5, 0)
    m = build_edm_ilp(g)
    for v in m.variables:
        if v.name.startswith("B_"):
            i = int(v.name.split("_")[1])
            assert v.kind == INTEGER and (v.lower, v.upper) == (0, (g.degree(i) + 3) // 2)


def test_single_vertex_model():
    m = build_edm_ilp(Graph.empty(1))
    assert not any(v.name.startswith("AH") for v in m.variables)
    assert m.objective == []
    sol = solve_builtin(m)
    assert sol.status == OPTIMAL and sol.objective_value == 0
    assert sol.value(m, "S_0") == 0
    with pytest.raises(ValueError):
        build_edm_ilp(Graph.empty(0))


def test_identity_assignment_is_feasible():
    for g in atlas(5):
        m = build_edm_ilp(g)
        vals = identity_assignment(m, g)
        assert m.check(vals) == []
        # B equals half the integer left side under the identity map
        A = g.adjacency().astype(int)
        lhs = A + A  # A_G Q + R A_H with Q = R = I and A_H = A_G
        for i in range(g.n):
            for j in range(g.n):
                assert vals[m.var(f"B_{i}_{j}")] == lhs[i, j] // 2


def test_weighted_objective_and_mismatch():
    g = Graph.complete(3)
    w = np.array([[0, 2, -1], [2, 0, 0], [-1, 0, 0]], dtype=float)
    m = build_edm_ilp(g, WeightMatrix(w))
    names = {m.variables[v].name: c for c, v in m.objective}
    assert names == {"AH_0_1": 2.0, "AH_0_2": -1.0}
    with pytest.raises(ValueError):
        build_edm_ilp(g, WeightMatrix.uniform(4))


def test_model_bookkeeping_errors():
    m = IlpModel()
    x = m.add_var("x")
    with pytest.raises(ValueError):
        m.add_var("x")
    with pytest.raises(ValueError):
        m.add_constraint([(1, x + 1)], "=", 0)
    with pytest.raises(ValueError):
        m.add_constraint([(1, x)], "<", 0)
    with pytest.raises(ValueError):
        m.add_var("y", 0, 2)
    c = m.add_constraint([(1, x), (2, x)], "<=", 3)
    assert c.terms == ((3, x),)


# -- built-in solver ---------------------------------------------------------------

def test_k5_optimum_is_star():
    res = edm_ilp(Graph.complete(5))
    assert res.optimal and res.solution.objective_value == 4
    assert res.graph.edge_count == 4


def test_c5_optimum_is_five():
    res = edm_ilp(Graph.cycle(5))
    assert res.optimal and res.solution.objective_value == 5


def test_exact_on_small_graphs():
    for g in atlas(5):
        if g.n < 1:
            continue
        res = edm_ilp(g)
        assert res.optimal
        assert res.graph.edge_count == exact_mer(g)[0].edge_count
        assert check_witness(g, res.graph, res.witness)


def test_generic_model():
    # min -x - 2y - 3z  s.t. x + y + z <= 2, y + z >= 1, integer w in [0, 3], w = x + y
    m = IlpModel()
    x, y, z = m.add_var("x"), m.add_var("y"), m.add_var("z")
    w = m.add_var("w", 0, 3, INTEGER)
    m.add_constraint([(1, x), (1, y), (1, z)], "<=", 2)
    m.add_constraint([(1, y), (1, z)], ">=", 1)
    m.add_constraint([(1, w), (-1, x), (-1, y)], "=", 0)
    m.objective = [(-1.0, x), (-2.0, y), (-3.0, z)]
    sol = solve_builtin(m)
    assert sol.status == OPTIMAL and sol.objective_value == -5
    assert [sol.assignment[v] for v in (x, y, z, w)] == [0, 1, 1, 1]


def test_infeasible_model():
    m = IlpModel()
    x, y = m.add_var("x"), m.add_var("y")
    m.add_constraint([(1, x), (1, y)], "=", 3)
    sol = solve_builtin(m)
    assert sol.status == INFEASIBLE and sol.assignment == {}


def test_budget_and_cancel_keep_incumbent():
    g = erdos_renyi(7, 0.7, 3)
    m = build_edm_ilp(g)
    init = identity_assignment(m, g)
    sol = solve_builtin(m, budget=1, initial=init)
    assert sol.status == BUDGET_EXHAUSTED and sol.objective_value <= g.edge_count
    ev = threading.Event()
    ev.set()
    sol = solve_builtin(m, initial=init, cancel=ev)
    assert sol.status == CANCELLED and sol.objective_value == g.edge_count
    bad = dict(init)
    bad[m.var("Q_0")] ^= 1
    with pytest.raises(ValueError):
        solve_builtin(m, initial=bad)


def test_no_incumbent_raises():
    with pytest.raises(VerificationError):
        edm_ilp(erdos_renyi(7, 0.7, 3), budget=1, warm_start=False)


def test_solution_decoding_is_sound():
    rng = np.random.default_rng(8)
    for _ in range(10):
        g = erdos_renyi(int(rng.integers(4, 8)), 0.6, rng)
        res = edm_ilp(g)
        assert graph_from_solution(res.model, res.solution, g.n) == res.graph
        w = witness_from_solution(res.model, res.solution, g.n)
        assert w.is_valid() and check_witness(g, res.graph, w)
        assert res.model.check(res.solution.assignment) == []


def test_sailp_not_worse_than_sa():
    for seed in range(5):
        g = erdos_renyi(8, 0.7, seed)
        r = edm_sailp(g, SaConfig(seed=seed))
        assert r.graph.edge_count <= r.sa.best_energy
        assert r.graph.edge_count == exact_mer(g)[0].edge_count
        assert check_witness(r.sa.best_graph, r.graph, r.witness)


# -- vertex minors -----------------------------------------------------------------

def test_vertex_minor_weights_path():
    w = vertex_minor_weights(Graph.path(3), Graph.complete(2), [0, 2])
    expected = np.zeros((3, 3))
    expected[0, 2] = expected[2, 0] = -1
    assert np.array_equal(w.w, expected)
    assert is_vertex_minor_ilp(Graph.path(3), Graph.complete(2), [0, 2])


def test_vertex_minor_negative_and_trivial():
    assert not is_vertex_minor_ilp(Graph.empty(3), Graph.complete(2), [0, 2])
    g = erdos_renyi(5, 0.5, 6)
    assert is_vertex_minor_ilp(g, g)


def test_vertex_minor_weights_isolated_vertex():
    h = Graph.from_edges(3, [(0, 1)])
    w = vertex_minor_weights(Graph.complete(4), h, [0, 1, 3])
    assert w[3, 0] == 0 and w[3, 1] == 1 and w[0, 1] == -1
    w = vertex_minor_weights(Graph.complete(4), h, [0, 1, 3], isolated_partner={2: 1})
    assert w[3, 1] == 0 and w[3, 0] == 1
    with pytest.raises(ValueError):
        vertex_minor_weights(Graph.complete(4), h, [0, 1, 3], isolated_partner={2: 2})
    with pytest.raises(ValueError):
        vertex_minor_weights(Graph.complete(4), h, [0, 1, 1])


def test_vertex_minor_agrees_with_orbit():
    rng = np.random.default_rng(12)
    for _ in range(30):
        g = erdos_renyi(int(rng.integers(3, 6)), 0.5, rng)
        k = int(rng.integers(2, min(4, g.n) + 1))
        verts = sorted(rng.choice(g.n, size=k, replace=False).tolist())
        h = erdos_renyi(k, 0.5, rng)
        if any(h.degree(v) == 0 for v in range(k)):
            continue
        assert is_vertex_minor_ilp(g, h, verts) == is_vertex_minor(g, h, verts)


# -- LP text and external bridge -----------------------------------------------------

def test_lp_round_trip():
    g = erdos_renyi(5, 0.5, 1)
    m = build_edm_ilp(g)
    text = export_lp(m)
    back = read_lp(text)
    assert [(v.name, v.lower, v.upper, v.kind) for v in back.variables] == \
        [(v.name, v.lower, v.upper, v.kind) for v in m.variables]
    assert back.constraints == m.constraints
    assert back.objective == m.objective
    assert export_lp(back) == text


def test_lp_is_deterministic_and_named():
    g = erdos_renyi(4, 0.5, 2)
    text = export_lp(build_edm_ilp(g))
    assert text == export_lp(build_edm_ilp(g))
    for name in ("AH_0_1", "P_0", "ZP_0_1", "ZR_1_0", "ZPS_3", "ZRQ_3", "B_2_3"):
        assert re.search(rf"\b{name}\b", text)
    assert text.startswith("\\ edm_n4\nMinimize\n obj: + 1 AH_0_1")
    assert text.rstrip().endswith("End")


def test_lp_single_vertex_and_weighted():
    text = export_lp(build_edm_ilp(Graph.empty(1)))
    assert " obj: 0 P_0" in text
    assert read_lp(text).objective == []
    w = WeightMatrix([[0, 0.5], [0.5, 0]])
    back = read_lp(export_lp(build_edm_ilp(Graph.complete(2), w)))
    assert back.objective == [(0.5, 0)]


@pytest.mark.parametrize("text", [
    "x + y\n",
    "Minimize\n obj: + 1 x\nEnd\n",
    "Minimize\n obj: 0\nSubject To\n c0: + 1 x ? 2\nEnd\n",
])
def test_lp_parse_errors(text):
    with pytest.raises(ValueError):
        read_lp(text)


def test_read_solution():
    m = build_edm_ilp(Graph.complete(2))
    sol = read_solution(m, "# comment\nAH_0_1 1\nQ_0 1.0\n")
    assert sol.value(m, "AH_0_1") == 1 and sol.value(m, "Q_0") == 1 and sol.value(m, "P_0") == 0
    assert sol.objective_value == 1
    for bad in ("nope 1\n", "AH_0_1 0.5\n", "AH_0_1\n"):
        with pytest.raises(ValueError):
            read_solution(m, bad)


def test_external_bridge_k5(monkeypatch):
    pytest.importorskip("scipy")
    monkeypatch.setenv(SOLVER_ENV, SCIPY_SOLVER)
    res = edm_ilp(Graph.complete(5), solver="external")
    assert res.solution.objective_value == 4
    assert check_witness(Graph.complete(5), res.graph, res.witness)


def test_external_bridge_errors(monkeypatch, tmp_path):
    m = build_edm_ilp(Graph.complete(3))
    monkeypatch.delenv(SOLVER_ENV, raising=False)
    with pytest.raises(RuntimeError):
        solve_external(m)
    with pytest.raises(RuntimeError):
        solve_external(m, f"{sys.executable} -c 'import sys; sys.exit(3)'")
    with pytest.raises(RuntimeError):
        solve_external(m, f"{sys.executable} -c 'pass'")
    # a solver that reports all zeros violates the witness constraints
    script = tmp_path / "zeros.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write('')\n")
    with pytest.raises(VerificationError):
        solve_external(m, f"{sys.executable} {script}")
    with pytest.raises(ValueError):
        edm_ilp(Graph.complete(3), solver="other")
