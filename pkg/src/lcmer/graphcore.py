"""Graphs over GF(2): local complementation, vertex metrics, generators, I/O.

A :class:`Graph` keeps its adjacency as one Python ``int`` per vertex, bit
``j`` of ``rows[i]`` set iff ``{i, j}`` is an edge. Local complementation at
``v`` is then an XOR of the neighbourhood mask into each neighbour's row.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exceptions import GraphFormatError
from .gf2 import Gf2Matrix


class Graph:
    """Simple undirected graph on vertices ``0..n-1``. Immutable."""

    __slots__ = ("n", "rows", "_hash")

    def __init__(self, n: int, rows: Iterable[int] | None = None, *, check: bool = True):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        rows = tuple(rows) if rows is not None else (0,) * n
        if len(rows) != n:
            raise ValueError(f"expected {n} rows, got {len(rows)}")
        if check:
            full = (1 << n) - 1
            for i, r in enumerate(rows):
                if r & ~full or (r >> i) & 1:
                    raise ValueError(f"row {i} has a self-loop or out-of-range bit")
                m = r
                while m:
                    low = m & -m
                    j = low.bit_length() - 1
                    if not (rows[j] >> i) & 1:
                        raise ValueError(f"adjacency is not symmetric at ({i}, {j})")
                    m ^= low
        self.n = n
        self.rows = rows
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        rows = [0] * n
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ValueError("self-loops are not allowed")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls(n, rows, check=False)

    @classmethod
    def from_adjacency(cls, adj) -> "Graph":
        a = np.asarray(adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        a = a.astype(np.int64) % 2
        if np.any(a != a.T) or np.any(np.diag(a)):
            raise ValueError("adjacency must be symmetric with zero diagonal")
        n = a.shape[0]
        rows = []
        for i in range(n):
            r = 0
            for j in np.flatnonzero(a[i]):
                r |= 1 << int(j)
            rows.append(r)
        return cls(n, rows, check=False)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n, check=False)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, [full ^ (1 << i) for i in range(n)], check=False)

    @classmethod
    def star(cls, n: int, centre: int = 0) -> "Graph":
        return cls.from_edges(n, [(centre, v) for v in range(n) if v != centre])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    # -- queries ------------------------------------------------------------
    @property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def neighbors(self, v: int) -> list[int]:
        return _bits(self.rows[v])

    def has_edge(self, i: int, j: int) -> bool:
        return bool((self.rows[i] >> j) & 1)

    def edges(self) -> list[tuple[int, int]]:
        """Edges ``(i, j)`` with ``i < j`` in lexicographic order."""
        out = []
        for i, r in enumerate(self.rows):
            for j in _bits(r >> (i + 1)):
                out.append((i, i + 1 + j))
        return out

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for i, j in self.edges():
            a[i, j] = a[j, i] = 1
        return a

    def to_gf2(self) -> Gf2Matrix:
        return Gf2Matrix(self.n, self.n, self.rows)

    def key(self) -> str:
        """Labelled adjacency bit-string of the upper triangle (row-major)."""
        return "".join(
            "1" if (self.rows[i] >> j) & 1 else "0"
            for i in range(self.n)
            for j in range(i + 1, self.n)
        )

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph, relabelled to ``0..len(vertices)-1`` in the given order."""
        idx = list(vertices)
        rows = []
        for a in idx:
            r = 0
            for k, b in enumerate(idx):
                if (self.rows[a] >> b) & 1:
                    r |= 1 << k
            rows.append(r)
        return Graph(len(idx), rows, check=False)

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        return len(components(self)) == 1

    def union(self, other: "Graph") -> "Graph":
        """Disjoint union, ``other``'s vertices shifted by ``self.n``."""
        shift = self.n
        return Graph(self.n + other.n, list(self.rows) + [r << shift for r in other.rows], check=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.rows))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edges()})"

    def __getstate__(self):
        return (self.n, self.rows)

    def __setstate__(self, state):
        self.n, self.rows = state
        self._hash = None


def _bits(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def components(g: Graph) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest vertex."""
    seen = 0
    comps = []
    for s in range(g.n):
        if (seen >> s) & 1:
            continue
        comp = 1 << s
        frontier = 1 << s
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nxt |= g.rows[v]
            frontier = nxt & ~comp
            comp |= frontier
        seen |= comp
        comps.append(_bits(comp))
    return comps


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for n={g.n}")


def local_complement(g: Graph, v: int) -> Graph:
    """Complement the subgraph induced on the neighbourhood of ``v``."""
    _check_vertex(g, v)
    nb = g.rows[v]
    if nb & (nb - 1) == 0:
        return g
    rows = list(g.rows)
    m = nb
    while m:
        low = m & -m
        u = low.bit_length() - 1
        rows[u] ^= nb ^ low
        m ^= low
    return Graph(g.n, rows, check=False)


def local_complement_sequence(g: Graph, seq: Iterable[int]) -> Graph:
    for v in seq:
        g = local_complement(g, v)
    return g


def neighbour_edge_count(g: Graph, v: int) -> int:
    """Number of edges among the neighbours of ``v``."""
    nb = g.rows[v]
    total = 0
    m = nb
    while m:
        low = m & -m
        total += (g.rows[low.bit_length() - 1] & nb).bit_count()
        m ^= low
    return total // 2


def clustering_coefficient(g: Graph, v: int) -> Fraction:
    """Local clustering coefficient of ``v``; 0 for vertices of degree < 2."""
    _check_vertex(g, v)
    d = g.degree(v)
    if d < 2:
        return Fraction(0)
    return Fraction(neighbour_edge_count(g, v), d * (d - 1) // 2)


# -- random generators ------------------------------------------------------

def make_rng(seed) -> np.random.Generator:
    """The artifact-wide generator: numpy PCG64 seeded from ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    """G(n, p): each unordered pair is an edge independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def is_graphical(seq: Sequence[int]) -> bool:
    """Erdős–Gallai test for a degree sequence of a simple graph."""
    d = sorted((int(x) for x in seq), reverse=True)
    n = len(d)
    if any(x < 0 or x > n - 1 for x in d):
        return False
    if sum(d) % 2:
        return False
    prefix = 0
    for k in range(1, n + 1):
        prefix += d[k - 1]
        tail = sum(min(x, k) for x in d[k:])
        if prefix > k * (k - 1) + tail:
            return False
    return True


def havel_hakimi(seq: Sequence[int]) -> Graph:
    """Realise a graphical degree sequence; vertex ``i`` gets degree ``seq[i]``.

    Repeatedly connects the vertex of largest residual degree (lowest index on
    ties) to the next-largest residual vertices.
    """
    n = len(seq)
    residual = [int(x) for x in seq]
    rows = [0] * n
    while True:
        order = sorted(range(n), key=lambda i: (-residual[i], i))
        v = order[0]
        d = residual[v]
        if d == 0:
            break
        targets = order[1 : d + 1]
        if len(targets) < d or residual[targets[-1]] == 0:
            raise ValueError(f"degree sequence {list(seq)} is not graphical")
        residual[v] = 0
        for u in targets:
            residual[u] -= 1
            rows[u] |= 1 << v
            rows[v] |= 1 << u
    return Graph(n, rows, check=False)


def _is_bridge(rows: list[int], a: int, b: int) -> bool:
    rows = list(rows)
    rows[a] &= ~(1 << b)
    rows[b] &= ~(1 << a)
    seen = 1 << a
    frontier = 1 << a
    while frontier:
        nxt = 0
        for v in _bits(frontier):
            nxt |= rows[v]
        frontier = nxt & ~seen
        seen |= frontier
        if (seen >> b) & 1:
            return False
    return True


def connect_by_swaps(g: Graph) -> Graph:
    """Join components by degree-preserving double edge swaps.

    Takes a non-bridge edge ``(a, b)`` in one component and any edge ``(c, d)``
    in another and rewires them to ``(a, c), (b, d)``. Requires every vertex to
    have degree >= 1 and ``edge_count >= n - 1``.
    """
    rows = list(g.rows)
    while True:
        cur = Graph(g.n, rows, check=False)
        comps = components(cur)
        if len(comps) <= 1:
            return cur
        donor = None
        for comp in comps:
            for a in comp:
                for b in _bits(rows[a]):
                    if a < b and not _is_bridge(rows, a, b):
                        donor = (comp, a, b)
                        break
                if donor:
                    break
            if donor:
                break
        if donor is None:
            raise ValueError("cannot connect: degree sequence is a forest with several trees")
        comp, a, b = donor
        other = next(c for c in comps if c is not comp)
        c = other[0]
        d = _bits(rows[c])[0]
        for x, y in ((a, b), (c, d)):
            rows[x] &= ~(1 << y)
            rows[y] &= ~(1 << x)
        for x, y in ((a, c), (b, d)):
            rows[x] |= 1 << y
            rows[y] |= 1 << x


def bounded_degree(n: int, d_lim: int, seed=None, max_tries: int = 1000) -> Graph:
    """Random connected graph with every degree in ``[1, d_lim]``.

    Degrees are drawn uniformly from ``1..min(d_lim, n-1)``; an odd sum is fixed
    by incrementing one entry still below the cap (decrementing one above 1 if
    none is). Sequences failing Erdős–Gallai or with fewer than ``n-1`` edges
    are redrawn. The Havel–Hakimi realisation is then connected by swaps.
    """
    if n < 2:
        raise ValueError("bounded_degree needs n >= 2")
    if d_lim < 1:
        raise ValueError("d_lim must be >= 1")
    cap = min(d_lim, n - 1)
    rng = make_rng(seed)
    for _ in range(max_tries):
        seq = rng.integers(1, cap + 1, size=n).tolist()
        if sum(seq) % 2:
            below = [i for i in range(n) if seq[i] < cap]
            if below:
                seq[below[int(rng.integers(len(below)))]] += 1
            else:
                above = [i for i in range(n) if seq[i] > 1]
                if not above:
                    continue
                seq[above[int(rng.integers(len(above)))]] -= 1
        if sum(seq) < 2 * (n - 1) or not is_graphical(seq):
            continue
        return connect_by_swaps(havel_hakimi(seq))
    raise RuntimeError(f"no connectable graphical sequence found in {max_tries} tries")


# -- weights -----------------------------------------------------------------

class WeightMatrix:
    """Symmetric real edge-cost matrix with zero diagonal."""

    __slots__ = ("w",)

    def __init__(self, w):
        w = np.array(w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight matrix must be square")
        if not np.allclose(w, w.T) or np.any(np.diag(w) != 0):
            raise ValueError("weight matrix must be symmetric with zero diagonal")
        w.setflags(write=False)
        self.w = w

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def __getitem__(self, idx):
        return self.w[idx]

    def energy(self, g: Graph) -> float:
        return float(sum(self.w[i, j] for i, j in g.edges()))

    @classmethod
    def uniform(cls, n: int) -> "WeightMatrix":
        return cls(np.ones((n, n)) - np.eye(n))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "w": self.w.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "WeightMatrix":
        obj = json.loads(text)
        w = cls(obj["w"])
        if "n" in obj and obj["n"] != w.n:
            raise GraphFormatError("weight matrix size does not match 'n'")
        return w


# -- serialisation -----------------------------------------------------------

_G6_HEADER = ">>graph6<<"


def write_graph6(g: Graph) -> str:
    """Encode in McKay's graph6 format (no header, no trailing newline)."""
    n = g.n
    if n < 63:
        out = [chr(n + 63)]
    elif n < 258048:
        out = ["~"] + [chr(((n >> s) & 63) + 63) for s in (12, 6, 0)]
    else:
        out = ["~", "~"] + [chr(((n >> s) & 63) + 63) for s in (30, 24, 18, 12, 6, 0)]
    bits = [(g.rows[i] >> j) & 1 for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    for k in range(0, len(bits), 6):
        val = 0
        for b in bits[k : k + 6]:
            val = (val << 1) | b
        out.append(chr(val + 63))
    return "".join(out)


def parse_graph6(text: str) -> Graph:
    """Decode a graph6 string. Rejects bad bytes, wrong length and dirty padding."""
    s = text.strip()
    if s.startswith(_G6_HEADER):
        s = s[len(_G6_HEADER):]
    if not s:
        raise GraphFormatError("empty graph6 string")
    data = [ord(c) - 63 for c in s]
    if any(x < 0 or x > 63 for x in data):
        raise GraphFormatError("graph6 contains bytes outside 63..126")
    if data[0] != 63:
        n, pos = data[0], 1
    elif len(data) >= 2 and data[1] == 63:
        if len(data) < 8:
            raise GraphFormatError("truncated graph6 size field")
        n, pos = 0, 8
        for x in data[2:8]:
            n = (n << 6) | x
    else:
        if len(data) < 4:
            raise GraphFormatError("truncated graph6 size field")
        n, pos = 0, 4
        for x in data[1:4]:
            n = (n << 6) | x
    nbits = n * (n - 1) // 2
    need = -(-nbits // 6)
    body = data[pos:]
    if len(body) < need:
        raise GraphFormatError(f"truncated graph6 bit field for n={n}")
    if len(body) > need:
        raise GraphFormatError(f"graph6 bit field too long for n={n}")
    bits = []
    for x in body:
        bits.extend((x >> s) & 1 for s in range(5, -1, -1))
    if any(bits[nbits:]):
        raise GraphFormatError("non-zero graph6 padding bits")
    rows = [0] * n
    k = 0
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
            k += 1
    return Graph(n, rows, check=False)


def graph_to_dict(g: Graph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in g.edges()]}


def graph_from_dict(obj: dict) -> Graph:
    try:
        n = int(obj["n"])
        edges = [(int(a), int(b)) for a, b in obj["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph JSON: {exc}") from exc
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise GraphFormatError(f"bad edge ({a}, {b}) for n={n}")
    return Graph.from_edges(n, edges)


def graph_to_json(g: Graph) -> str:
    return json.dumps(graph_to_dict(g))


def graph_from_json(text: str) -> Graph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from exc
    return graph_from_dict(obj)


def read_graph(text: str) -> Graph:
    """Parse either the JSON graph schema or a graph6 line."""
    s = text.strip()
    if s.startswith("{"):
        return graph_from_json(s)
    return parse_graph6(s)
