"""Brute-force enumeration of labelled LC orbits.

Members are packed into one integer each (row ``u`` of the adjacency matrix in
bits ``u*n .. u*n+n-1``), so local complementation at ``v`` becomes

    key ^ nb * spread(nb) ^ diag(nb)

with ``nb`` the neighbourhood mask of ``v``: the product lays ``nb`` into the
row of every neighbour, the diagonal term clears the self-loops it creates.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .exceptions import OrbitTruncatedError
from .graphcore import Graph, local_complement_sequence, write_graph6

DEFAULT_LIMIT = 5_000_000


class _Packer:
    def __init__(self, n: int):
        self.n = n
        self.mask = (1 << n) - 1
        nbytes = (n + 7) // 8
        self.spread = []
        self.diag = []
        for k in range(nbytes):
            sp = [0] * 256
            dg = [0] * 256
            for byte in range(1, 256):
                low = byte & -byte
                b = low.bit_length() - 1
                u = 8 * k + b
                prev = byte ^ low
                if u < n:
                    sp[byte] = sp[prev] | (1 << (u * n))
                    dg[byte] = dg[prev] | (1 << (u * (n + 1)))
                else:
                    sp[byte] = sp[prev]
                    dg[byte] = dg[prev]
            self.spread.append(sp)
            self.diag.append(dg)

    def pack(self, g: Graph) -> int:
        key = 0
        for u, r in enumerate(g.rows):
            key |= r << (u * self.n)
        return key

    def unpack(self, key: int) -> Graph:
        n, m = self.n, self.mask
        return Graph(n, [(key >> (u * n)) & m for u in range(n)], check=False)

    def lc(self, key: int, v: int) -> int:
        nb = (key >> (v * self.n)) & self.mask
        if nb & (nb - 1) == 0:
            return key
        sp = dg = 0
        k = 0
        x = nb
        while x:
            byte = x & 255
            if byte:
                sp |= self.spread[k][byte]
                dg |= self.diag[k][byte]
            x >>= 8
            k += 1
        return key ^ (nb * sp) ^ dg


@dataclass
class OrbitResult:
    """Labelled LC orbit of ``seed`` (possibly truncated).

    ``parent`` maps every member's packed key to ``(predecessor key, vertex)``;
    the seed maps to ``None``.
    """

    seed: Graph
    parent: dict[int, tuple[int, int] | None]
    truncated: bool
    min_edges: int
    _packer: _Packer = field(repr=False)

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def size(self) -> int:
        return len(self.parent)

    def __contains__(self, g: Graph) -> bool:
        return g.n == self.seed.n and self._packer.pack(g) in self.parent

    @property
    def members(self) -> Iterator[Graph]:
        for key in self.parent:
            yield self._packer.unpack(key)

    def path_to(self, g: Graph) -> list[int]:
        """Complementation sequence from the seed to member ``g``."""
        key = self._packer.pack(g)
        if key not in self.parent:
            raise KeyError("graph is not an enumerated member")
        seq = []
        link = self.parent[key]
        while link is not None:
            key, v = link
            seq.append(v)
            link = self.parent[key]
        seq.reverse()
        return seq

    def dump_lines(self) -> Iterator[str]:
        """JSON-lines dump: one graph6 string per member, then a summary record."""
        for g in self.members:
            yield json.dumps(write_graph6(g))
        yield json.dumps(
            {"size": self.size, "min_edges": self.min_edges, "truncated": self.truncated}
        )


def enumerate_orbit(g: Graph, limit: int = DEFAULT_LIMIT) -> OrbitResult:
    """Breadth-first closure of ``g`` under local complementation.

    Stops with ``truncated=True`` as soon as more than ``limit`` distinct
    members would be stored.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    n = g.n
    pk = _Packer(n)
    start = pk.pack(g)
    parent: dict[int, tuple[int, int] | None] = {start: None}
    min_edges = start.bit_count() // 2
    queue = deque([start])
    truncated = False
    while queue and not truncated:
        key = queue.popleft()
        for v in range(n):
            nxt = pk.lc(key, v)
            if nxt in parent:
                continue
            if len(parent) >= limit:
                truncated = True
                break
            parent[nxt] = (key, v)
            e = nxt.bit_count() // 2
            if e < min_edges:
                min_edges = e
            queue.append(nxt)
    return OrbitResult(g, parent, truncated, min_edges, pk)


def _row_dtype(n: int):
    for dt in (np.uint8, np.uint16, np.uint32, np.uint64):
        if n <= np.iinfo(dt).bits:
            return dt
    raise ValueError("vectorised orbit sweep supports at most 64 vertices")


_HASH_WEIGHTS = np.random.Generator(np.random.PCG64(0x5EED)).integers(
    1, 2**63, size=64, dtype=np.uint64) | np.uint64(1)


def _row_hash(arr: np.ndarray, weights: np.ndarray) -> np.ndarray:
    h = np.zeros(len(arr), dtype=np.uint64)
    for u in range(arr.shape[1]):
        h ^= (arr[:, u].astype(np.uint64) + np.uint64(u + 1)) * weights[u]
        h ^= h >> np.uint64(29)
    return h


def _dedup_exact(cand: np.ndarray, visited: np.ndarray):
    """Rows of ``cand`` absent from ``visited``, deduplicated by raw bytes."""
    width = cand.dtype.itemsize * cand.shape[1]

    def keys(arr):
        return np.ascontiguousarray(arr).view(np.dtype((np.void, width))).ravel()

    ck, first = np.unique(keys(cand), return_index=True)
    old = np.unique(keys(visited))
    pos = np.searchsorted(old, ck)
    pos[pos == len(old)] = 0
    return cand[first[old[pos] != ck]]


def orbit_summary(g: Graph, limit: int = DEFAULT_LIMIT, *,
                  _hash_weights: np.ndarray | None = None) -> tuple[int, int, bool]:
    """``(size, min_edges, truncated)`` of the orbit of ``g`` without parent links.

    Level-synchronous BFS on numpy row arrays. Members are grouped by a 64-bit
    hash of their rows and every hash match is confirmed on the rows
    themselves; a collision switches that level to byte-wise deduplication.
    Truncation follows :func:`enumerate_orbit`.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    weights = _HASH_WEIGHTS if _hash_weights is None else _hash_weights
    n = g.n
    if n == 0:
        return 1, 0, False
    dt = _row_dtype(n)
    frontier = np.array([g.rows], dtype=dt).reshape(1, n)
    vis_rows = frontier.copy()
    vis_hash = _row_hash(vis_rows, weights)
    min_edges = g.edge_count
    bits = np.array([1 << u for u in range(n)], dtype=dt)
    shifts = np.arange(n, dtype=dt)
    while len(frontier):
        children = []
        for v in range(n):
            nb = frontier[:, v:v + 1]
            mask = (nb >> shifts) & dt(1)
            mask[:, v] = 0
            children.append(frontier ^ ((nb ^ bits) * mask))
        cand = np.concatenate(children)
        ch = _row_hash(cand, weights)
        uh, first, inv = np.unique(ch, return_index=True, return_inverse=True)
        reps = cand[first]
        exact = np.array_equal(reps[inv.ravel()], cand)
        if exact:
            pos = np.searchsorted(vis_hash, uh)
            pos[pos == len(vis_hash)] = 0
            seen = vis_hash[pos] == uh
            exact = np.array_equal(vis_rows[pos[seen]], reps[seen])
        if exact:
            new, new_hash = reps[~seen], uh[~seen]
        else:
            new = _dedup_exact(cand, vis_rows)
            new_hash = _row_hash(new, weights)
        if len(vis_rows) + len(new) > limit:
            return len(vis_rows), min_edges, True
        if len(new):
            e = int(np.bitwise_count(new).sum(axis=1).min()) // 2
            min_edges = min(min_edges, e)
            order = np.argsort(new_hash, kind="stable")
            at = np.searchsorted(vis_hash, new_hash[order])
            vis_rows = np.insert(vis_rows, at, new[order], axis=0)
            vis_hash = np.insert(vis_hash, at, new_hash[order])
        frontier = new
    return len(vis_rows), min_edges, False


def _require_closed(orb: OrbitResult) -> None:
    if orb.truncated:
        raise OrbitTruncatedError(
            f"orbit of {orb.seed!r} exceeded {orb.size} members before closure"
        )


def exact_mer(g: Graph, limit: int = DEFAULT_LIMIT) -> tuple[Graph, list[int]]:
    """Minimum-edge member of the orbit of ``g`` and a sequence reaching it.

    Ties on edge count go to the lexicographically smallest upper-triangle
    bit-string.
    """
    orb = enumerate_orbit(g, limit)
    _require_closed(orb)
    pk = orb._packer
    best = None
    best_key = None
    for key in orb.parent:
        if key.bit_count() // 2 != orb.min_edges:
            continue
        cand = pk.unpack(key)
        s = cand.key()
        if best is None or s < best_key:
            best, best_key = cand, s
    assert best is not None and best.edge_count == orb.min_edges
    seq = orb.path_to(best)
    assert local_complement_sequence(g, seq) == best
    return best, seq


def lc_path(g: Graph, h: Graph, limit: int = DEFAULT_LIMIT) -> list[int] | None:
    """Shortest complementation sequence turning ``g`` into labelled ``h``."""
    if g.n != h.n:
        raise ValueError("graphs must have the same vertex count")
    n = g.n
    pk = _Packer(n)
    start, target = pk.pack(g), pk.pack(h)
    parent: dict[int, tuple[int, int] | None] = {start: None}
    queue = deque([start])
    found = start == target
    while queue and not found:
        key = queue.popleft()
        for v in range(n):
            nxt = pk.lc(key, v)
            if nxt in parent:
                continue
            if len(parent) >= limit:
                raise OrbitTruncatedError("limit reached before the target or closure")
            parent[nxt] = (key, v)
            if nxt == target:
                found = True
                break
            queue.append(nxt)
    if not found:
        return None
    seq = []
    link = parent[target]
    while link is not None:
        key, v = link
        seq.append(v)
        link = parent[key]
    seq.reverse()
    return seq


def is_vertex_minor(
    g: Graph, h: Graph, vertices: Sequence[int] | None = None, limit: int = DEFAULT_LIMIT
) -> bool:
    """Whether some orbit member of ``g`` induces exactly ``h`` on ``vertices``.

    Vertex ``k`` of ``h`` is identified with ``vertices[k]`` of ``g``
    (default: the first ``h.n`` vertices).
    """
    if vertices is None:
        vertices = list(range(h.n))
    vertices = list(vertices)
    if len(vertices) != h.n:
        raise ValueError("need one vertex of g per vertex of h")
    if len(set(vertices)) != len(vertices) or any(not 0 <= v < g.n for v in vertices):
        raise ValueError("vertices must be distinct vertices of g")
    orb = enumerate_orbit(g, limit)
    for member in orb.members:
        if member.induced(vertices) == h:
            return True
    _require_closed(orb)
    return False
