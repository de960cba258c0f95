"""Edge minimisation through the ILP, the SA-preconditioned variant, and the
weighted vertex-minor test."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..exceptions import VerificationError
from ..graphcore import Graph, WeightMatrix
from ..sa import SaConfig, SaResult, edm_sa
from ..symplectic import SymplecticWitness, check_witness
from .lp import solve_external
from .model import (
    IlpModel,
    IlpSolution,
    build_edm_ilp,
    graph_from_solution,
    identity_assignment,
    witness_from_solution,
)
from .solver import OPTIMAL, solve_builtin

DEFAULT_BUDGET = 10_000_000


@dataclass
class EdmIlpResult:
    graph: Graph
    solution: IlpSolution
    witness: SymplecticWitness
    model: IlpModel

    @property
    def optimal(self) -> bool:
        return self.solution.status == OPTIMAL


def edm_ilp(
    g: Graph,
    weights: WeightMatrix | None = None,
    budget: int = DEFAULT_BUDGET,
    *,
    solver: str = "builtin",
    warm_start: bool = True,
    cancel: threading.Event | None = None,
) -> EdmIlpResult:
    """Solve the edge-minimisation ILP for ``g`` and certify the answer.

    The embedded witness is substituted back into the LC conditions for
    ``(g, result)``; a failure raises :class:`VerificationError`.
    """
    model = build_edm_ilp(g, weights)
    if solver == "builtin":
        initial = identity_assignment(model, g) if warm_start else None
        sol = solve_builtin(model, budget, initial=initial, cancel=cancel)
    elif solver == "external":
        sol = solve_external(model)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    if not sol.assignment:
        raise VerificationError(f"no feasible point found (status {sol.status})")
    h = graph_from_solution(model, sol, g.n)
    w = witness_from_solution(model, sol, g.n)
    if not check_witness(g, h, w):
        raise VerificationError("solution witness does not certify LC-equivalence")
    return EdmIlpResult(h, sol, w, model)


class SailpResult(NamedTuple):
    graph: Graph
    solution: IlpSolution
    sa: SaResult
    witness: SymplecticWitness


def edm_sailp(g: Graph, cfg: SaConfig | None = None, budget: int = DEFAULT_BUDGET,
              *, solver: str = "builtin", cancel: threading.Event | None = None) -> SailpResult:
    """Anneal first, then solve the ILP from the annealed graph.

    The SA output seeds the incumbent, so the returned objective never exceeds
    the SA energy. The witness relates the SA graph to the returned graph.
    """
    cfg = cfg or SaConfig(weights=None)
    sa = edm_sa(g, cfg)
    res = edm_ilp(sa.best_graph, cfg.weights, budget, solver=solver, cancel=cancel)
    return SailpResult(res.graph, res.solution, sa, res.witness)


def vertex_minor_weights(
    g: Graph,
    h: Graph,
    vertices: Sequence[int] | None = None,
    isolated_partner: dict[int, int] | None = None,
) -> WeightMatrix:
    """Weights whose minimum reaches ``-|E(h)|`` iff ``h`` is a vertex-minor of ``g``.

    Vertex ``k`` of ``h`` sits at ``vertices[k]`` of ``g``. Edges of ``h`` cost
    -1, non-edges inside the chosen set cost +1, everything else 0. For an
    isolated vertex ``k`` of ``h`` one incident pair ``(k, isolated_partner[k])``
    (indices into ``h``) is set to 0; by default the partner is the lowest other
    vertex of ``h``.
    """
    if vertices is None:
        vertices = list(range(h.n))
    vertices = list(vertices)
    if len(vertices) != h.n:
        raise ValueError("need one vertex of g per vertex of h")
    if len(set(vertices)) != h.n or any(not 0 <= v < g.n for v in vertices):
        raise ValueError("vertices must be distinct vertices of g")
    w = np.zeros((g.n, g.n))
    for a in range(h.n):
        for b in range(a + 1, h.n):
            i, j = vertices[a], vertices[b]
            w[i, j] = w[j, i] = -1.0 if h.has_edge(a, b) else 1.0
    isolated_partner = dict(isolated_partner or {})
    for k in range(h.n):
        if h.degree(k) or h.n < 2:
            continue
        partner = isolated_partner.get(k, 0 if k != 0 else 1)
        if partner == k or not 0 <= partner < h.n:
            raise ValueError(f"invalid partner {partner} for isolated vertex {k}")
        i, j = vertices[k], vertices[partner]
        w[i, j] = w[j, i] = 0.0
    return WeightMatrix(w)


def is_vertex_minor_ilp(g: Graph, h: Graph, vertices: Sequence[int] | None = None,
                        budget: int = DEFAULT_BUDGET, **kwargs) -> bool:
    """Decide the labelled vertex-minor question with the weighted ILP."""
    w = vertex_minor_weights(g, h, vertices, **kwargs)
    res = edm_ilp(g, w, budget)
    if not res.optimal:
        raise RuntimeError(f"solver stopped early with status {res.solution.status}")
    return abs(res.solution.objective_value + h.edge_count) < 1e-9
