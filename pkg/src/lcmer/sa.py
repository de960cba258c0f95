"""Edge minimisation by simulated annealing over local complementations.

The state is a labelled graph; a move complements the neighbourhood of one
vertex. Vertices are proposed with a bias towards large ``M_v = C(v) * deg(v)``
(clustering coefficient times degree), which measures how many edges a
complementation at ``v`` can remove. The cutoff on ``M_v`` tightens as the
schedule progresses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphcore import Graph, WeightMatrix, make_rng

GUIDED = "guided"
UNIFORM = "uniform"


def temperature(k: int, t1: float) -> float:
    """Logarithmic cooling ``t1 / log2(k + 1)``."""
    if k < 1:
        raise ValueError(f"iteration index must be >= 1, got {k}")
    return t1 / math.log2(k + 1)


@dataclass(frozen=True)
class SaConfig:
    k_max: int = 100
    t1: float = 100.0
    seed: int | None = 0
    weights: WeightMatrix | None = None
    selection: str = GUIDED

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise ValueError(f"k_max must be a positive integer, got {self.k_max}")
        if not self.t1 > 0:
            raise ValueError(f"t1 must be positive, got {self.t1}")
        if self.selection not in (GUIDED, UNIFORM):
            raise ValueError(f"selection must be {GUIDED!r} or {UNIFORM!r}")


@dataclass
class SaResult:
    best_graph: Graph
    best_energy: float
    lc_sequence: list[int]
    energy_trace: list[float] = field(repr=False)
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "best_edges": self.best_graph.edge_count,
            "best_energy": self.best_energy,
            "lc_sequence": list(self.lc_sequence),
            "energy_trace": list(self.energy_trace),
            "seed": self.seed,
        }


def _metric(rows: list[int]) -> list[float]:
    # M_v = C(v) * d = 2 e_N / (d - 1). IEEE division is correctly rounded, so
    # equal rationals map to equal floats and unique values are exact.
    out = []
    for nb in rows:
        d = nb.bit_count()
        if d < 2:
            out.append(0.0)
            continue
        e2 = 0
        m = nb
        while m:
            low = m & -m
            e2 += (rows[low.bit_length() - 1] & nb).bit_count()
            m ^= low
        out.append(e2 / (d - 1))
    return out


def _candidates(rows: list[int], k: int, k_max: int, rng: np.random.Generator) -> list[int]:
    metric = _metric(rows)
    unique = sorted(set(metric))
    c = int(k / k_max * len(unique))
    eligible = unique[c + 1:] or unique[-1:]
    picked = eligible[int(rng.integers(len(eligible)))]
    return [v for v, x in enumerate(metric) if x == picked]


def candidate_vertices(g: Graph, k: int, k_max: int, seed=None) -> list[int]:
    """Vertices sharing one ``M_v`` value drawn above the cutoff for step ``k``.

    With ``l`` unique values in ascending order, the cutoff index is
    ``int(k / k_max * l)`` and any value at a higher index may be drawn; when
    none remains the maximum is used.
    """
    if g.n < 1:
        raise ValueError("graph has no vertices")
    if not 1 <= k <= k_max:
        raise ValueError(f"need 1 <= k <= k_max, got k={k}, k_max={k_max}")
    return _candidates(list(g.rows), k, k_max, make_rng(seed))


def _complement_in_place(rows: list[int], v: int) -> None:
    nb = rows[v]
    m = nb
    while m:
        low = m & -m
        rows[low.bit_length() - 1] ^= nb ^ low
        m ^= low


def _edge_delta(rows: list[int], v: int) -> int:
    # complementing N(v) turns its e_N edges into C(d,2) - e_N
    nb = rows[v]
    d = nb.bit_count()
    e2 = 0
    m = nb
    while m:
        low = m & -m
        e2 += (rows[low.bit_length() - 1] & nb).bit_count()
        m ^= low
    return d * (d - 1) // 2 - e2


def _weighted_energy(rows: list[int], w: list[list[float]]) -> float:
    total = 0.0
    for i, r in enumerate(rows):
        m = r >> (i + 1)
        j = i + 1
        while m:
            if m & 1:
                total += w[i][j]
            m >>= 1
            j += 1
    return total


def edm_sa(g: Graph, cfg: SaConfig | None = None) -> SaResult:
    """Anneal towards an orbit member of ``g`` with few edges (or low weight).

    Returns the best state visited, including the input itself, with the
    complementation sequence leading there from ``g``.
    """
    cfg = cfg or SaConfig()
    n = g.n
    weighted = cfg.weights is not None
    if weighted and cfg.weights.n != n:
        raise ValueError(f"weight matrix is {cfg.weights.n}x{cfg.weights.n}, graph has {n} vertices")
    rng = make_rng(cfg.seed)
    rows = list(g.rows)
    w = cfg.weights.w.tolist() if weighted else None
    energy = _weighted_energy(rows, w) if weighted else g.edge_count
    best, best_rows, best_len = energy, list(rows), 0
    path: list[int] = []
    trace: list[float] = []
    for k in range(1, cfg.k_max + 1):
        if n == 0:
            trace.append(energy)
            continue
        if cfg.selection == GUIDED:
            cand = _candidates(rows, k, cfg.k_max, rng)
            v = cand[int(rng.integers(len(cand)))]
        else:
            v = int(rng.integers(n))
        if rows[v].bit_count() < 2:
            trace.append(energy)
            continue
        if weighted:
            _complement_in_place(rows, v)
            new = _weighted_energy(rows, w)
            _complement_in_place(rows, v)
        else:
            new = energy + _edge_delta(rows, v)
        delta = new - energy
        if delta <= 0 or rng.random() < math.exp(-delta / temperature(k, cfg.t1)):
            _complement_in_place(rows, v)
            path.append(v)
            energy = new
            if energy < best:
                best, best_rows, best_len = energy, list(rows), len(path)
        trace.append(energy)
    return SaResult(Graph(n, best_rows, check=False), best, path[:best_len], trace, cfg.seed)
