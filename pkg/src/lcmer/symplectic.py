"""Binary-symplectic stabilizer tools and Bouchet's LC-equivalence test.

Pauli strings are vectors in F_2^{2n}; a graph state on ``g`` is the column
span of the tableau ``[A_g; I]``. A local Clifford is a block matrix whose four
``n x n`` blocks are diagonal, one invertible 2x2 binary matrix per qubit.

Two graphs ``G`` and ``H`` are LC-equivalent iff there are diagonal binary
``P, Q, R, S`` with

    A_G P A_H + A_G Q + R A_H + S = 0  (mod 2)
    p_i s_i + r_i q_i = 1              for every qubit i.

Note the ``R A_H`` term scales rows of ``A_H``. With this orientation the
identity witness is ``q = r = 1, p = s = 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .gf2 import Gf2Matrix
from .graphcore import Graph, components


@dataclass(frozen=True)
class SymplecticWitness:
    p: tuple[int, ...]
    q: tuple[int, ...]
    r: tuple[int, ...]
    s: tuple[int, ...]

    def __post_init__(self):
        lens = {len(self.p), len(self.q), len(self.r), len(self.s)}
        if len(lens) != 1:
            raise ValueError("witness vectors must have equal length")
        for name in "pqrs":
            object.__setattr__(self, name, tuple(int(x) & 1 for x in getattr(self, name)))

    @property
    def n(self) -> int:
        return len(self.p)

    @classmethod
    def identity(cls, n: int) -> "SymplecticWitness":
        return cls((0,) * n, (1,) * n, (1,) * n, (0,) * n)

    @classmethod
    def from_bits(cls, v: int, n: int) -> "SymplecticWitness":
        """Unpack a solution vector ordered ``p_0..p_{n-1}, q_.., r_.., s_..``."""
        def part(k):
            return tuple((v >> (k * n + i)) & 1 for i in range(n))
        return cls(part(0), part(1), part(2), part(3))

    def to_bits(self) -> int:
        v = 0
        for k, vec in enumerate((self.p, self.q, self.r, self.s)):
            for i, b in enumerate(vec):
                if b:
                    v |= 1 << (k * self.n + i)
        return v

    def is_valid(self) -> bool:
        return all((p * s + r * q) % 2 == 1 for p, q, r, s in zip(self.p, self.q, self.r, self.s))

    def block(self, i: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """The 2x2 single-qubit map applied to qubit ``i`` (rows: Z-part, X-part)."""
        return ((self.q[i], self.s[i]), (self.p[i], self.r[i]))

    def to_dict(self) -> dict:
        return {"p": list(self.p), "q": list(self.q), "r": list(self.r), "s": list(self.s)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SymplecticWitness":
        obj = json.loads(text)
        return cls(obj["p"], obj["q"], obj["r"], obj["s"])


@dataclass(frozen=True)
class StabilizerTableau:
    """Generators as columns of ``[z_block; x_block]``.

    For a graph state the top block is ``A_g`` and the bottom block ``I``.
    """

    z_block: Gf2Matrix
    x_block: Gf2Matrix

    @property
    def n(self) -> int:
        return self.z_block.nrows

    @classmethod
    def from_graph(cls, g: Graph) -> "StabilizerTableau":
        return cls(g.to_gf2(), Gf2Matrix.identity(g.n))

    def stacked(self) -> Gf2Matrix:
        n = self.n
        return Gf2Matrix(2 * n, n, list(self.z_block.rows) + list(self.x_block.rows))

    def symplectic_gram(self, other: "StabilizerTableau") -> Gf2Matrix:
        """``K_self^T Omega K_other``: entry (i, j) is the commutator of generators i, j."""
        return self.z_block.T @ other.x_block + self.x_block.T @ other.z_block

    def is_valid(self) -> bool:
        return self.stacked().rank() == self.n and self.symplectic_gram(self).is_zero()


def _check_sizes(*graphs: Graph) -> int:
    ns = {g.n for g in graphs}
    if len(ns) != 1:
        raise ValueError(f"graph sizes differ: {sorted(ns)}")
    return ns.pop()


def bouchet_system(ga: Graph, gb: Graph) -> Gf2Matrix:
    """Coefficient matrix (n^2 x 4n) of the linear part of the LC condition.

    Row ``i*n + j`` is entry (i, j) of ``A_G P A_H + A_G Q + R A_H + S``;
    columns are ``p_0..p_{n-1}, q_.., r_.., s_..``.
    """
    n = _check_sizes(ga, gb)
    A, B = ga.rows, gb.rows
    rows = []
    for i in range(n):
        for j in range(n):
            row = 0
            for a in range(n):
                if (A[i] >> a) & 1 and (B[a] >> j) & 1:
                    row |= 1 << a
            if (A[i] >> j) & 1:
                row |= 1 << (n + j)
            if (B[i] >> j) & 1:
                row |= 1 << (2 * n + i)
            if i == j:
                row |= 1 << (3 * n + i)
            rows.append(row)
    return Gf2Matrix(n * n, 4 * n, rows)


def check_witness(ga: Graph, gb: Graph, w: SymplecticWitness) -> bool:
    """Direct substitution of ``w`` into both LC conditions for ``(ga, gb)``."""
    n = _check_sizes(ga, gb)
    if w.n != n or not w.is_valid():
        return False
    A, B = ga.rows, gb.rows
    for i in range(n):
        for j in range(n):
            acc = 0
            for a in range(n):
                acc ^= ((A[i] >> a) & 1) & w.p[a] & ((B[a] >> j) & 1)
            acc ^= ((A[i] >> j) & 1) & w.q[j]
            acc ^= w.r[i] & ((B[i] >> j) & 1)
            acc ^= w.s[i] if i == j else 0
            if acc:
                return False
    return True


def lc_equivalent(ga: Graph, gb: Graph) -> SymplecticWitness | None:
    """Witness of LC-equivalence between ``ga`` and ``gb``, or ``None``.

    Local complementation never merges or splits components, so both graphs
    must have the same component vertex sets; each component pair is then
    solved separately. Within a connected pair only the null-space basis
    vectors and sums of basis pairs are tested against the quadratic
    condition, which suffices by Bouchet's theorem.
    """
    n = _check_sizes(ga, gb)
    comps = components(ga)
    if comps != components(gb):
        return None
    p, q, r, s = [0] * n, [0] * n, [0] * n, [0] * n
    for comp in comps:
        sub = _connected_witness(ga.induced(comp), gb.induced(comp))
        if sub is None:
            return None
        for k, v in enumerate(comp):
            p[v], q[v], r[v], s[v] = sub.p[k], sub.q[k], sub.r[k], sub.s[k]
    return SymplecticWitness(p, q, r, s)


def _connected_witness(ga: Graph, gb: Graph) -> SymplecticWitness | None:
    n = ga.n
    basis = bouchet_system(ga, gb).nullspace()
    candidates = list(basis)
    candidates.extend(u ^ v for u, v in combinations(basis, 2))
    for v in candidates:
        w = SymplecticWitness.from_bits(v, n)
        if w.is_valid():
            return w
    return None


def symplectic_matrix(w: SymplecticWitness) -> Gf2Matrix:
    """The 2n x 2n local Clifford acting on ``[z; x]`` column vectors."""
    n = w.n
    rows = [0] * (2 * n)
    for i in range(n):
        (a, b), (c, d) = w.block(i)
        rows[i] = (a << i) | (b << (n + i))
        rows[n + i] = (c << i) | (d << (n + i))
    return Gf2Matrix(2 * n, 2 * n, rows)


def omega(n: int) -> Gf2Matrix:
    return Gf2Matrix(2 * n, 2 * n, [1 << (n + i) for i in range(n)] + [1 << i for i in range(n)])


def apply_witness(g: Graph, w: SymplecticWitness) -> StabilizerTableau:
    """Tableau of the state obtained by applying ``w``'s local Clifford to ``|g>``.

    If ``w`` certifies ``(g, h)`` the result spans the stabilizer group of ``|h>``.
    """
    if w.n != g.n:
        raise ValueError("witness size does not match graph")
    if not w.is_valid():
        raise ValueError("witness violates p_i s_i + r_i q_i = 1")
    return apply_local(StabilizerTableau.from_graph(g), [w.block(i) for i in range(g.n)])


Block = tuple[tuple[int, int], tuple[int, int]]


def apply_local(t: StabilizerTableau, blocks: Sequence[Block]) -> StabilizerTableau:
    """Apply one 2x2 map per qubit; ``((a, b), (c, d))`` sends ``(z, x)`` to
    ``(a z + b x, c z + d x)``."""
    if len(blocks) != t.n:
        raise ValueError("need one block per qubit")
    n = t.n
    z_rows, x_rows = [], []
    for i, ((a, b), (c, d)) in enumerate(blocks):
        zi, xi = t.z_block.rows[i], t.x_block.rows[i]
        z_rows.append((zi if a else 0) ^ (xi if b else 0))
        x_rows.append((zi if c else 0) ^ (xi if d else 0))
    return StabilizerTableau(Gf2Matrix(n, n, z_rows), Gf2Matrix(n, n, x_rows))


def apply_cz(t: StabilizerTableau, pairs) -> StabilizerTableau:
    """Apply controlled-Z gates; each adds the partner's X-part to a qubit's Z-part."""
    z_rows = list(t.z_block.rows)
    x_rows = t.x_block.rows
    for a, b in pairs:
        if a == b:
            raise ValueError("controlled-Z needs two distinct qubits")
        z_rows[a] ^= x_rows[b]
        z_rows[b] ^= x_rows[a]
    return StabilizerTableau(Gf2Matrix(t.n, t.n, z_rows), t.x_block)


def tableau_to_graph(t: StabilizerTableau) -> Graph | None:
    """Graph whose state the tableau stabilizes, if the X-block is invertible."""
    if not t.is_valid():
        raise ValueError("tableau is rank-deficient or not self-commuting")
    n = t.n
    inv = _inverse(t.x_block)
    if inv is None:
        return None
    adj = t.z_block @ inv
    for i in range(n):
        if (adj.rows[i] >> i) & 1:
            return None
    if adj != adj.T:
        return None
    return Graph(n, adj.rows, check=False)


def _inverse(m: Gf2Matrix) -> Gf2Matrix | None:
    n = m.nrows
    aug = Gf2Matrix(n, 2 * n, [r | (1 << (n + i)) for i, r in enumerate(m.rows)])
    red, pivots = aug.rref()
    if pivots[:n] != list(range(n)):
        return None
    return Gf2Matrix(n, n, [r >> n for r in red.rows])


def same_stabilizer_state(t1: StabilizerTableau, t2: StabilizerTableau) -> bool:
    """Whether the two generator sets span the same group (signs ignored)."""
    if t1.n != t2.n:
        raise ValueError("tableau sizes differ")
    return t1.stacked().column_space_key() == t2.stacked().column_space_key()


def is_symplectic(m: Gf2Matrix) -> bool:
    n = m.nrows // 2
    return (m.T @ omega(n) @ m) == omega(n)


def witness_blocks(witnesses: Sequence[SymplecticWitness]) -> set[tuple[int, int, int, int]]:
    return {(w.p[i], w.q[i], w.r[i], w.s[i]) for w in witnesses for i in range(w.n)}
