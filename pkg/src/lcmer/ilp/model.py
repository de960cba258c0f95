"""Integer linear program data model and the edge-minimisation ILP builder."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..graphcore import Graph, WeightMatrix
from ..symplectic import SymplecticWitness

BINARY = "binary"
INTEGER = "integer"


@dataclass(frozen=True)
class IlpVariable:
    id: int
    name: str
    lower: int
    upper: int
    kind: str = BINARY
    priority: int = 0

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"{self.name}: lower bound exceeds upper bound")
        if self.kind == BINARY and (self.lower, self.upper) != (0, 1):
            raise ValueError(f"{self.name}: binary variables have bounds (0, 1)")


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[int, int], ...]
    relation: str
    rhs: int

    def __post_init__(self):
        if self.relation not in ("<=", "=", ">="):
            raise ValueError(f"unknown relation {self.relation!r}")

    @classmethod
    def make(cls, terms: Iterable[tuple[int, int]], relation: str, rhs: int) -> "LinearConstraint":
        """Merge duplicate variables and drop zero coefficients."""
        acc: dict[int, int] = {}
        for coef, vid in terms:
            acc[vid] = acc.get(vid, 0) + coef
        merged = tuple((c, v) for v, c in acc.items() if c != 0)
        return cls(merged, relation, rhs)

    def activity(self, values: Sequence[int] | dict) -> int:
        return sum(c * values[v] for c, v in self.terms)

    def satisfied(self, values) -> bool:
        a = self.activity(values)
        if self.relation == "=":
            return a == self.rhs
        if self.relation == "<=":
            return a <= self.rhs
        return a >= self.rhs


@dataclass
class IlpModel:
    """Minimisation problem over bounded integer variables."""

    variables: list[IlpVariable] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: list[tuple[float, int]] = field(default_factory=list)
    sense: str = "min"
    name: str = "model"
    _by_name: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, lower: int = 0, upper: int = 1, kind: str = BINARY,
                priority: int = 0) -> int:
        if name in self._by_name:
            raise ValueError(f"duplicate variable name {name}")
        vid = len(self.variables)
        self.variables.append(IlpVariable(vid, name, lower, upper, kind, priority))
        self._by_name[name] = vid
        return vid

    def add_constraint(self, terms, relation: str, rhs: int) -> LinearConstraint:
        c = LinearConstraint.make(terms, relation, rhs)
        for _, v in c.terms:
            if not 0 <= v < len(self.variables):
                raise ValueError(f"constraint uses undeclared variable {v}")
        self.constraints.append(c)
        return c

    def var(self, name: str) -> int:
        return self._by_name[name]

    def has_var(self, name: str) -> bool:
        return name in self._by_name

    def objective_value(self, values) -> float:
        return float(sum(c * values[v] for c, v in self.objective))

    def check(self, values) -> list[int]:
        """Indices of violated constraints (bounds included as index -1)."""
        bad = [k for k, c in enumerate(self.constraints) if not c.satisfied(values)]
        for var in self.variables:
            if not var.lower <= values[var.id] <= var.upper:
                bad.append(-1)
                break
        return bad


@dataclass
class IlpSolution:
    assignment: dict[int, int]
    objective_value: float
    status: str
    nodes: int = 0

    def value(self, model: IlpModel, name: str) -> int:
        return self.assignment[model.var(name)]


# -- edge-minimisation model --------------------------------------------------

# The built-in solver branches on higher priorities first, then by declaration
# order: edge variables (which carry the objective), then witness bits. Product
# and B variables are left to propagation.
PRIORITY_BRANCH = 1


def ah_name(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"AH_{i}_{j}"


def build_edm_ilp(g: Graph, weights: WeightMatrix | None = None) -> IlpModel:
    """Edge-minimisation ILP: find ``H`` LC-equivalent to ``g`` of minimum cost.

    Variables (binary unless noted): ``AH_i_j`` for i<j; ``P_a, Q_a, R_a, S_a``;
    ``ZP_a_j = P_a AH_aj`` and ``ZR_i_j = R_i AH_ij`` for i != j;
    ``ZPS_a = P_a S_a``; ``ZRQ_a = R_a Q_a``; integer ``B_i_j``.
    """
    n = g.n
    if n < 1:
        raise ValueError("graph must have at least one vertex")
    if weights is not None and weights.n != n:
        raise ValueError(f"weight matrix is {weights.n}x{weights.n}, graph has {n} vertices")
    A = g.rows
    m = IlpModel(name=f"edm_n{n}")
    ah = {}
    for i in range(n):
        for j in range(i + 1, n):
            ah[i, j] = ah[j, i] = m.add_var(ah_name(i, j), priority=PRIORITY_BRANCH)
    P = [m.add_var(f"P_{a}", priority=PRIORITY_BRANCH) for a in range(n)]
    Q = [m.add_var(f"Q_{a}", priority=PRIORITY_BRANCH) for a in range(n)]
    R = [m.add_var(f"R_{a}", priority=PRIORITY_BRANCH) for a in range(n)]
    S = [m.add_var(f"S_{a}", priority=PRIORITY_BRANCH) for a in range(n)]
    ZP = {(a, j): m.add_var(f"ZP_{a}_{j}") for a in range(n) for j in range(n) if a != j}
    ZR = {(i, j): m.add_var(f"ZR_{i}_{j}") for i in range(n) for j in range(n) if i != j}
    ZPS = [m.add_var(f"ZPS_{a}") for a in range(n)]
    ZRQ = [m.add_var(f"ZRQ_{a}") for a in range(n)]
    B = {}
    for i in range(n):
        hi = (A[i].bit_count() + 3) // 2
        for j in range(n):
            B[i, j] = m.add_var(f"B_{i}_{j}", 0, hi, INTEGER)

    # entry (i, j) of A_G P A_H + A_G Q + R A_H + S equals 2 B_ij
    for i in range(n):
        for j in range(n):
            terms = [(1, ZP[a, j]) for a in range(n) if a != j and (A[i] >> a) & 1]
            if (A[i] >> j) & 1:
                terms.append((1, Q[j]))
            if i != j:
                terms.append((1, ZR[i, j]))
            else:
                terms.append((1, S[i]))
            terms.append((-2, B[i, j]))
            m.add_constraint(terms, "=", 0)

    def product(y, x, z):
        m.add_constraint([(1, y), (-1, x)], "<=", 0)
        m.add_constraint([(1, y), (-1, z)], "<=", 0)
        m.add_constraint([(1, y), (-1, x), (-1, z)], ">=", -1)

    for (a, j), y in ZP.items():
        product(y, P[a], ah[a, j])
    for (i, j), y in ZR.items():
        product(y, R[i], ah[i, j])
    for a in range(n):
        product(ZPS[a], P[a], S[a])
    for a in range(n):
        product(ZRQ[a], R[a], Q[a])
    for a in range(n):
        m.add_constraint([(1, ZPS[a]), (1, ZRQ[a])], "=", 1)

    for i in range(n):
        for j in range(i + 1, n):
            c = 1.0 if weights is None else float(weights[i, j])
            if c != 0:
                m.objective.append((c, ah[i, j]))
    return m


def model_size(n: int) -> tuple[int, int]:
    """Closed-form (variable count, constraint count) of ``build_edm_ilp`` on n vertices."""
    nvars = n * (n - 1) // 2 + 4 * n + 2 * n * (n - 1) + 2 * n + n * n
    ncons = n * n + 3 * 2 * n * (n - 1) + 3 * 2 * n + n
    return nvars, ncons


def graph_from_solution(model: IlpModel, sol: IlpSolution, n: int) -> Graph:
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if sol.assignment[model.var(ah_name(i, j))]
    ]
    return Graph.from_edges(n, edges)


def witness_from_solution(model: IlpModel, sol: IlpSolution, n: int) -> SymplecticWitness:
    def vec(prefix):
        return [sol.assignment[model.var(f"{prefix}_{a}")] for a in range(n)]
    return SymplecticWitness(vec("P"), vec("Q"), vec("R"), vec("S"))


def identity_assignment(model: IlpModel, g: Graph) -> dict[int, int]:
    """The always-feasible point ``A_H = A_G`` with the identity witness."""
    n = g.n
    vals = {v.id: 0 for v in model.variables}
    for i, j in g.edges():
        vals[model.var(ah_name(i, j))] = 1
    for a in range(n):
        vals[model.var(f"Q_{a}")] = 1
        vals[model.var(f"R_{a}")] = 1
        vals[model.var(f"ZRQ_{a}")] = 1
    for i in range(n):
        for j in range(n):
            if i != j and g.has_edge(i, j):
                vals[model.var(f"ZR_{i}_{j}")] = 1
                vals[model.var(f"B_{i}_{j}")] = 1
    return vals
