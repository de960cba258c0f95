"""Generalised repeater graph states, LC-gate bookkeeping and fusion costs.

A gRGS is a central graph ``G`` with leaf qubits hanging off its vertices.
Edge minimisation of ``G`` gives an LC-equivalent ``H``; building ``H+L`` and
applying the local Cliffords that turn ``H`` into ``G`` is cheaper than
building ``G+L`` directly.

The fusion estimator is a deliberately simple model: every vertex of degree
``d`` is a GHZ state grown from ``max(1, d - 1)`` three-qubit GHZ states by a
balanced merge tree, and every edge costs one fusion between the pieces it
joins. A fusion succeeds with probability ``p`` and both inputs are rebuilt on
failure, so a fusion node costs ``(r_left + r_right) / p`` resource states and
``(f_left + f_right + 1) / p`` fusions in expectation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

from .exceptions import VerificationError
from .graphcore import Graph, components, graph_from_dict, graph_to_dict, local_complement
from .sa import SaConfig, edm_sa
from .symplectic import (
    StabilizerTableau,
    SymplecticWitness,
    apply_cz,
    apply_local,
    same_stabilizer_state,
)

# -- construction -------------------------------------------------------------


@dataclass(frozen=True)
class Grgs:
    central: Graph
    leaves: tuple[int, ...]
    full: Graph

    @property
    def n_central(self) -> int:
        return self.central.n

    def leaf_edges(self) -> list[tuple[int, int]]:
        """``(central vertex, leaf vertex)`` pairs of the full graph."""
        out = []
        nxt = self.central.n
        for v, k in enumerate(self.leaves):
            for _ in range(k):
                out.append((v, nxt))
                nxt += 1
        return out

    def with_central(self, central: Graph) -> "Grgs":
        return build_grgs(central, self.leaves)

    def to_json(self) -> str:
        return json.dumps({"central": graph_to_dict(self.central), "leaves": list(self.leaves)})

    @classmethod
    def from_json(cls, text: str) -> "Grgs":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "central" not in obj:
            raise ValueError("gRGS JSON needs a 'central' graph")
        central = graph_from_dict(obj["central"])
        return build_grgs(central, obj.get("leaves", 1))


def build_grgs(central: Graph, leaves: int | Sequence[int] = 1) -> Grgs:
    """Attach ``leaves[v]`` pendant vertices to each central vertex ``v``.

    Leaf vertices follow the central ones, grouped by their central vertex.
    """
    n = central.n
    if isinstance(leaves, int):
        leaves = [leaves] * n
    leaves = tuple(int(k) for k in leaves)
    if len(leaves) != n:
        raise ValueError(f"need one leaf count per central vertex ({n}), got {len(leaves)}")
    if any(k < 0 for k in leaves):
        raise ValueError("leaf counts must be non-negative")
    edges = list(central.edges())
    nxt = n
    for v, k in enumerate(leaves):
        for _ in range(k):
            edges.append((v, nxt))
            nxt += 1
    return Grgs(central, leaves, Graph.from_edges(nxt, edges))


def build_rgs(m: int) -> Grgs:
    """Repeater graph state: complete core on ``2m`` vertices, one leaf each."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return build_grgs(Graph.complete(2 * m), 1)


# -- local Clifford words -----------------------------------------------------

# 2x2 maps on (z, x); gate names as used in the complementation rule
_GATES = {
    "S": ((1, 1), (0, 1)),
    "HSH": ((1, 0), (1, 1)),
    "H": ((0, 1), (1, 0)),
}
_ID = ((1, 0), (0, 1))


def _mul(m1, m2):
    (a, b), (c, d) = m1
    (e, f), (g, h) = m2
    return (((a & e) ^ (b & g), (a & f) ^ (b & h)), ((c & e) ^ (d & g), (c & f) ^ (d & h)))


def _word_matrix(labels) -> tuple:
    m = _ID
    for lab in labels:
        m = _mul(_GATES[lab], m)
    return m


# shortest time-ordered gate word for each of the six single-qubit classes
_REDUCED = {}
for _word in [(), ("S",), ("HSH",), ("H",), ("HSH", "S"), ("S", "HSH")]:
    _REDUCED[_word_matrix(_word)] = _word
assert len(_REDUCED) == 6


@dataclass(frozen=True)
class CliffordWord:
    """Time-ordered single-qubit gate labels, one tuple per qubit."""

    gates: tuple[tuple[str, ...], ...]

    @property
    def n(self) -> int:
        return len(self.gates)

    @classmethod
    def from_lc_sequence(cls, g: Graph, seq: Sequence[int], n_total: int | None = None) -> "CliffordWord":
        """Gates realising the complementations ``seq`` applied to ``g`` in order.

        Each complementation at ``v`` contributes HSH on ``v`` and S on every
        current neighbour of ``v``. Qubits beyond ``g.n`` (up to ``n_total``)
        receive no gates.
        """
        n_total = g.n if n_total is None else n_total
        if n_total < g.n:
            raise ValueError("n_total must cover the graph's qubits")
        gates: list[list[str]] = [[] for _ in range(n_total)]
        for v in seq:
            gates[v].append("HSH")
            for u in g.neighbors(v):
                gates[u].append("S")
            g = local_complement(g, v)
        return cls(tuple(tuple(x) for x in gates))

    def blocks(self):
        return [_word_matrix(labels) for labels in self.gates]

    def reduced(self) -> tuple[tuple[str, ...], ...]:
        """Per-qubit gates collapsed to the shortest equivalent word."""
        return tuple(_REDUCED[m] for m in self.blocks())

    def is_identity(self) -> bool:
        return all(m == _ID for m in self.blocks())

    def to_witness(self) -> SymplecticWitness:
        q, s, p, r = [], [], [], []
        for (a, b), (c, d) in self.blocks():
            q.append(a), s.append(b), p.append(c), r.append(d)
        return SymplecticWitness(p, q, r, s)

    def apply(self, t: StabilizerTableau) -> StabilizerTableau:
        return apply_local(t, self.blocks())

    def to_dict(self) -> dict:
        return {"gates": [list(x) for x in self.gates], "reduced": [list(x) for x in self.reduced()]}


@dataclass
class CommuteLcPlan:
    grgs: Grgs
    h: Graph
    word: CliffordWord
    lc_sequence: list[int]
    h_grgs: Grgs
    verified: bool
    word_maps_full_graph: bool


def commute_lc_plan(grgs: Grgs, sa_cfg: SaConfig | None = None) -> CommuteLcPlan:
    """Minimise the central graph and derive the gates turning ``H`` back into ``G``.

    The word acts on central qubits only. It is verified on stabilizer
    tableaux in the order the gates act physically: the word applied to ``H``
    (leaves still unattached), followed by the leaf-attaching controlled-Z
    gates, must give ``G+L``; otherwise :class:`VerificationError` is raised.

    ``word_maps_full_graph`` records whether the same word also maps the
    graph state of ``H+L`` onto ``G+L``. That holds only when ``H+L`` and
    ``G+L`` are LC-equivalent, which is typically not the case.
    """
    sa = edm_sa(grgs.central, sa_cfg or SaConfig())
    h = sa.best_graph
    back = list(reversed(sa.lc_sequence))
    n_full = grgs.full.n
    word = CliffordWord.from_lc_sequence(h, back, n_full)
    h_grgs = grgs.with_central(h)
    target = StabilizerTableau.from_graph(grgs.full)

    bare = Graph(n_full, list(h.rows) + [0] * (n_full - h.n), check=False)
    staged = apply_cz(word.apply(StabilizerTableau.from_graph(bare)), grgs.leaf_edges())
    central_ok = same_stabilizer_state(
        apply_local(StabilizerTableau.from_graph(h), word.blocks()[: h.n]),
        StabilizerTableau.from_graph(grgs.central),
    )
    if not (central_ok and same_stabilizer_state(staged, target)):
        raise VerificationError("Clifford word does not reproduce the target gRGS")
    full_ok = same_stabilizer_state(word.apply(StabilizerTableau.from_graph(h_grgs.full)), target)
    return CommuteLcPlan(grgs, h, word, back, h_grgs, True, full_ok)


# -- fusion cost model -------------------------------------------------------


@dataclass(frozen=True)
class FusionNode:
    """Node of a fusion tree.

    ``kind`` is ``"ghz3"`` (one resource state), ``"fusion"`` (two children
    joined by one fusion), ``"closure"`` (one fusion inside a single piece,
    closing a cycle) or ``"forest"`` (independent pieces, costs summed).
    """

    kind: str
    expected_resources: float
    expected_fusions: float
    children: tuple["FusionNode", ...] = field(default=(), repr=False)
    label: str = ""

    @classmethod
    def ghz3(cls, label: str = "") -> "FusionNode":
        return cls("ghz3", 1.0, 0.0, (), label)

    @classmethod
    def fuse(cls, left: "FusionNode", right: "FusionNode", p: float, label: str = "") -> "FusionNode":
        r = (left.expected_resources + right.expected_resources) / p
        f = (left.expected_fusions + right.expected_fusions + 1) / p
        return cls("fusion", r, f, (left, right), label)

    @classmethod
    def close(cls, child: "FusionNode", p: float, label: str = "") -> "FusionNode":
        return cls("closure", child.expected_resources / p, (child.expected_fusions + 1) / p,
                   (child,), label)

    @classmethod
    def forest(cls, parts: Sequence["FusionNode"]) -> "FusionNode":
        return cls("forest", sum(x.expected_resources for x in parts),
                   sum(x.expected_fusions for x in parts), tuple(parts), "forest")

    def leaf_count(self) -> int:
        if self.kind == "ghz3":
            return 1
        return sum(c.leaf_count() for c in self.children)

    def fusion_count(self) -> int:
        own = 1 if self.kind in ("fusion", "closure") else 0
        return own + sum(c.fusion_count() for c in self.children)

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)


def _balanced(pieces: list[FusionNode], p: float, label: str) -> FusionNode:
    if len(pieces) == 1:
        return pieces[0]
    mid = len(pieces) // 2
    return FusionNode.fuse(_balanced(pieces[:mid], p, label), _balanced(pieces[mid:], p, label), p, label)


def _star(v: int, d: int, p: float) -> FusionNode:
    k = max(1, d - 1)
    return _balanced([FusionNode.ghz3(f"v{v}") for _ in range(k)], p, f"star {v}")


HUFFMAN = "huffman"
SEQUENTIAL = "sequential"


def fusion_plan(target: Graph, p: float, pairing: str = HUFFMAN) -> FusionNode:
    """Fusion tree for ``target`` with expected costs at success probability ``p``.

    With ``pairing="huffman"`` the next edge fusion always joins the two
    cheapest pieces an edge connects; ``"sequential"`` takes edges in sorted
    order. Edges inside one piece become closure fusions as soon as they
    appear. Disconnected targets are planned per component and summed.
    """
    if not 0 < p <= 1:
        raise ValueError(f"fusion success probability must lie in (0, 1], got {p}")
    if pairing not in (HUFFMAN, SEQUENTIAL):
        raise ValueError(f"unknown pairing {pairing!r}")
    if target.n < 1:
        raise ValueError("target has no vertices")
    comps = components(target)
    if len(comps) > 1:
        return FusionNode.forest([fusion_plan(target.induced(c), p, pairing) for c in comps])

    owner = list(range(target.n))
    piece = {v: _star(v, target.degree(v), p) for v in range(target.n)}

    def find(v):
        while owner[v] != v:
            owner[v] = owner[owner[v]]
            v = owner[v]
        return v

    pending = list(target.edges())
    while pending:
        closed = [e for e in pending if find(e[0]) == find(e[1])]
        for a, b in closed:
            root = find(a)
            piece[root] = FusionNode.close(piece[root], p, f"edge {a}-{b}")
        pending = [e for e in pending if find(e[0]) != find(e[1])]
        if not pending:
            break
        if pairing == SEQUENTIAL:
            k = 0
        else:
            def cost(e):
                x, y = piece[find(e[0])], piece[find(e[1])]
                return (x.expected_resources + y.expected_resources,
                        x.expected_fusions + y.expected_fusions)
            k = min(range(len(pending)), key=lambda i: cost(pending[i]))
        a, b = pending.pop(k)
        ra, rb = find(a), find(b)
        merged = FusionNode.fuse(piece.pop(ra), piece.pop(rb), p, f"edge {a}-{b}")
        root = min(ra, rb)
        owner[max(ra, rb)] = root
        piece[root] = merged
    (root_node,) = piece.values()
    return root_node


# -- protocol comparison -------------------------------------------------------

CSV_HEADER = ["p", "naive_resources", "commute_resources", "naive_fusions", "commute_fusions", "ratio"]


@dataclass(frozen=True)
class ComparisonRow:
    p: float
    naive_resources: float
    commute_resources: float
    naive_fusions: float
    commute_fusions: float

    @property
    def ratio(self) -> float:
        return self.naive_resources / self.commute_resources

    def as_list(self) -> list[float]:
        return [self.p, self.naive_resources, self.commute_resources,
                self.naive_fusions, self.commute_fusions, self.ratio]


@dataclass
class ProtocolComparison:
    plan: CommuteLcPlan
    rows: list[ComparisonRow]
    photons_per_ghz: int = 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow([repr(float(x)) for x in row.as_list()])
        return buf.getvalue()


def compare_protocols(
    grgs: Grgs,
    p_grid: Sequence[float],
    sa_cfg: SaConfig | None = None,
    photons_per_ghz: int = 1,
) -> ProtocolComparison:
    """Expected costs of building ``G+L`` directly versus building ``H+L``.

    Local Clifford gates are free. Resource counts are multiplied by
    ``photons_per_ghz`` to express them in single photons.
    """
    if photons_per_ghz < 1:
        raise ValueError("photons_per_ghz must be >= 1")
    plan = commute_lc_plan(grgs, sa_cfg)
    rows = []
    for p in p_grid:
        naive = fusion_plan(grgs.full, p)
        commute = fusion_plan(plan.h_grgs.full, p)
        rows.append(ComparisonRow(
            float(p),
            naive.expected_resources * photons_per_ghz,
            commute.expected_resources * photons_per_ghz,
            naive.expected_fusions,
            commute.expected_fusions,
        ))
    return ProtocolComparison(plan, rows, photons_per_ghz)
