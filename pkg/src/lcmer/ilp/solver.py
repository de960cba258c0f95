"""Exact depth-first branch-and-bound for small pure-integer programs.

Besides plain bound propagation on every linear row, the solver recognises two
structures that the edge-minimisation ILP is made of and propagates them more
strongly:

* parity rows ``sum(odd * x) + c * B = rhs`` where ``B`` is an integer with an
  even coefficient that occurs nowhere else and whose bounds never bind; such a
  row only constrains the parity of the binary sum and is handled by Gaussian
  elimination over GF(2);
* product gadgets ``y <= x, y <= z, y >= x + z - 1`` (``y = x AND z``); once
  ``x`` is known to be 1 the gadget contributes the linear equation ``y = z``
  to the GF(2) system, and ``y = 0`` once either factor is 0.

Branching picks the unfixed binary with the highest ``priority`` (lowest id on
ties) and tries 0 before 1, except for variables with a negative objective
coefficient. Non-binary integers left open at a leaf are enumerated.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from .model import BINARY, IlpModel, IlpSolution

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
BUDGET_EXHAUSTED = "budget_exhausted"
CANCELLED = "cancelled"

_EPS = 1e-9


class _Conflict(Exception):
    pass


@dataclass
class _Parity:
    mask: int  # binary variables with odd coefficient
    rhs: int  # parity of the constant side
    int_var: int
    int_coef: int
    terms: tuple  # (coef, var) of the binary part
    full_rhs: int


class _Structure:
    def __init__(self, model: IlpModel):
        nv = len(model.variables)
        self.nv = nv
        self.lo0 = [v.lower for v in model.variables]
        self.hi0 = [v.upper for v in model.variables]
        self.binary = [v.kind == BINARY or (v.lower, v.upper) == (0, 1) for v in model.variables]
        for v in model.variables:
            if v.lower is None or v.upper is None or math.isinf(v.lower) or math.isinf(v.upper):
                raise ValueError(f"variable {v.name} is unbounded")
        self.cost = [0.0] * nv
        for c, v in model.objective:
            self.cost[v] += c
        occurrences = [0] * nv
        for con in model.constraints:
            for _, v in con.terms:
                occurrences[v] += 1

        cons = model.constraints
        used = [False] * len(cons)

        # product gadgets y = x AND z
        le_pairs: dict[tuple[int, int], int] = {}
        for k, con in enumerate(cons):
            if con.relation == "<=" and con.rhs == 0 and len(con.terms) == 2:
                (c1, v1), (c2, v2) = con.terms
                if (c1, c2) == (1, -1) and self.binary[v1] and self.binary[v2]:
                    le_pairs[(v1, v2)] = k
        self.gadgets: list[tuple[int, int, int]] = []
        for k, con in enumerate(cons):
            if con.relation == ">=" and con.rhs == -1 and len(con.terms) == 3:
                coefs = sorted(con.terms)
                if [c for c, _ in coefs] != [-1, -1, 1]:
                    continue
                x, z, y = coefs[0][1], coefs[1][1], coefs[2][1]
                if (y, x) in le_pairs and (y, z) in le_pairs and self.binary[y]:
                    self.gadgets.append((y, x, z))
                    used[k] = used[le_pairs[(y, x)]] = used[le_pairs[(y, z)]] = True

        # parity rows
        self.parity: list[_Parity] = []
        for k, con in enumerate(cons):
            if con.relation != "=" or used[k]:
                continue
            ints = [(c, v) for c, v in con.terms if not self.binary[v]]
            bins = [(c, v) for c, v in con.terms if self.binary[v]]
            if len(ints) != 1:
                continue
            c_int, v_int = ints[0]
            if c_int % 2 or occurrences[v_int] != 1 or self.cost[v_int] != 0:
                continue
            if any(c % 2 == 0 for c, _ in bins):
                continue
            smin = sum(c for c, _ in bins if c < 0)
            smax = sum(c for c, _ in bins if c > 0)
            vals = [(con.rhs - s) / c_int for s in (smin, smax)]
            if min(vals) < self.lo0[v_int] - _EPS or max(vals) > self.hi0[v_int] + _EPS:
                continue
            mask = 0
            for _, v in bins:
                mask |= 1 << v
            self.parity.append(_Parity(mask, con.rhs & 1, v_int, c_int, tuple(bins), con.rhs))
            used[k] = True

        self.generic = [con for k, con in enumerate(cons) if not used[k]]
        self.watch: list[list[int]] = [[] for _ in range(nv)]
        for k, con in enumerate(self.generic):
            for _, v in con.terms:
                self.watch[v].append(k)
        self.gadget_watch: list[list[int]] = [[] for _ in range(nv)]
        for k, (y, x, z) in enumerate(self.gadgets):
            for v in (y, x, z):
                self.gadget_watch[v].append(k)
        self.parity_ints = {p.int_var for p in self.parity}
        self.bin_ids = [v for v in range(nv) if self.binary[v]]

        self.branch_order = sorted(
            (v.id for v in model.variables if self.binary[v.id] and v.id not in self.parity_ints),
            key=lambda vid: (-model.variables[vid].priority, vid),
        )
        self.open_ints = [
            v.id for v in model.variables if not self.binary[v.id] and v.id not in self.parity_ints
        ]


class _Xor:
    """Incrementally maintained reduced row-echelon GF(2) system.

    Every stored row contains exactly one pivot bit. Fixed variables are
    substituted out of the rows rather than stored as unit rows, keeping the
    system as small as the number of open parity relations.
    """

    __slots__ = ("rows", "pivmask", "fixed", "ones")

    def __init__(self, rows=None, pivmask=0, fixed=0, ones=0):
        self.rows: dict[int, tuple[int, int]] = rows if rows is not None else {}
        self.pivmask = pivmask
        self.fixed = fixed
        self.ones = ones

    def copy(self) -> "_Xor":
        return _Xor(dict(self.rows), self.pivmask, self.fixed, self.ones)

    def insert(self, mask: int, rhs: int, units: list[int]) -> None:
        rhs ^= (mask & self.ones).bit_count() & 1
        mask &= ~self.fixed
        rows = self.rows
        m = mask & self.pivmask
        while m:
            low = m & -m
            pm, pr = rows[low.bit_length() - 1]
            mask ^= pm
            rhs ^= pr
            m ^= low
        if not mask:
            if rhs:
                raise _Conflict
            return
        low = mask & -mask
        t = low.bit_length() - 1
        for k, (rm, rr) in rows.items():
            if rm & low:
                rm ^= mask
                rr ^= rhs
                rows[k] = (rm, rr)
                if rm & (rm - 1) == 0:
                    units.append(k)
        rows[t] = (mask, rhs)
        self.pivmask |= low
        if mask == low:
            units.append(t)

    def fix(self, v: int, val: int, units: list[int]) -> None:
        bit = 1 << v
        if self.fixed & bit:
            return
        self.fixed |= bit
        if val:
            self.ones |= bit
        rows = self.rows
        if self.pivmask & bit:
            mask, rhs = rows.pop(v)
            self.pivmask ^= bit
            mask ^= bit
            rhs ^= val
            if mask:
                self.insert(mask, rhs, units)
            elif rhs:
                raise _Conflict
            return
        for k, (rm, rr) in rows.items():
            if rm & bit:
                rm ^= bit
                rr ^= val
                rows[k] = (rm, rr)
                if rm & (rm - 1) == 0:
                    units.append(k)


class _Search:
    def __init__(self, st: _Structure, budget: int, cancel):
        self.st = st
        self.budget = budget
        self.cancel = cancel
        self.nodes = 0
        self.best_val = math.inf
        self.best: list[int] | None = None

    # -- propagation -----------------------------------------------------------
    def propagate(self, lo, hi, xor: _Xor, changed: list[int], units: list[int] | None = None) -> None:
        st = self.st
        binary = st.binary
        queue = list(changed)
        units = units if units is not None else []
        while queue or units:
            while units:
                t = units.pop()
                row = xor.rows.get(t)
                if row is None or row[0] != 1 << t:
                    continue
                rhs = row[1]
                if lo[t] == hi[t]:
                    if lo[t] != rhs:
                        raise _Conflict
                else:
                    lo[t] = hi[t] = rhs
                    queue.append(t)
            while queue:
                v = queue.pop()
                if binary[v] and lo[v] == hi[v]:
                    xor.fix(v, lo[v], units)
                for k in st.gadget_watch[v]:
                    self._gadget(k, lo, hi, xor, queue, units)
                for k in st.watch[v]:
                    self._bounds(st.generic[k], lo, hi, queue)

    def _set(self, v, val, lo, hi, queue):
        if lo[v] == hi[v]:
            if lo[v] != val:
                raise _Conflict
            return
        if val < lo[v] or val > hi[v]:
            raise _Conflict
        lo[v] = hi[v] = val
        queue.append(v)

    def _gadget(self, k, lo, hi, xor, queue, units):
        y, x, z = self.st.gadgets[k]
        if lo[y] == 1:
            self._set(x, 1, lo, hi, queue)
            self._set(z, 1, lo, hi, queue)
        elif hi[x] == 0 or hi[z] == 0:
            self._set(y, 0, lo, hi, queue)
        elif lo[x] == 1 and lo[z] == 1:
            self._set(y, 1, lo, hi, queue)
        elif hi[y] == 0:
            if lo[x] == 1:
                self._set(z, 0, lo, hi, queue)
            elif lo[z] == 1:
                self._set(x, 0, lo, hi, queue)
        elif lo[x] == 1:
            xor.insert((1 << y) | (1 << z), 0, units)
        elif lo[z] == 1:
            xor.insert((1 << y) | (1 << x), 0, units)

    def _bounds(self, con, lo, hi, queue):
        amin = amax = 0
        for c, v in con.terms:
            if c > 0:
                amin += c * lo[v]
                amax += c * hi[v]
            else:
                amin += c * hi[v]
                amax += c * lo[v]
        rel, rhs = con.relation, con.rhs
        if rel in ("<=", "=") and amin > rhs:
            raise _Conflict
        if rel in (">=", "=") and amax < rhs:
            raise _Conflict
        for c, v in con.terms:
            if lo[v] == hi[v]:
                continue
            if c > 0:
                vmin, vmax = c * lo[v], c * hi[v]
            else:
                vmin, vmax = c * hi[v], c * lo[v]
            nlo, nhi = lo[v], hi[v]
            if rel in ("<=", "="):
                # c*x <= rhs - (amin - vmin)
                bound = rhs - (amin - vmin)
                if c > 0:
                    nhi = min(nhi, math.floor(bound / c))
                else:
                    nlo = max(nlo, math.ceil(bound / c))
            if rel in (">=", "="):
                bound = rhs - (amax - vmax)
                if c > 0:
                    nlo = max(nlo, math.ceil(bound / c))
                else:
                    nhi = min(nhi, math.floor(bound / c))
            if nlo > nhi:
                raise _Conflict
            if (nlo, nhi) != (lo[v], hi[v]):
                lo[v], hi[v] = nlo, nhi
                queue.append(v)

    # -- search ------------------------------------------------------------------
    def bound(self, lo, hi) -> float:
        total = 0.0
        for v, c in enumerate(self.st.cost):
            if c > 0:
                total += c * lo[v]
            elif c < 0:
                total += c * hi[v]
        return total

    def run(self, lo, hi):
        st = self.st
        xor = _Xor()
        try:
            units: list[int] = []
            for p in st.parity:
                xor.insert(p.mask, p.rhs, units)
            self.propagate(lo, hi, xor, list(range(st.nv)), units)
        except _Conflict:
            return
        stack = [(lo, hi, xor)]
        while stack:
            if self.cancel is not None and self.cancel.is_set():
                raise _Cancelled
            lo, hi, xor = stack.pop()
            self.nodes += 1
            if self.nodes > self.budget:
                raise _Budget
            if self.bound(lo, hi) >= self.best_val - _EPS:
                continue
            var = next((v for v in st.branch_order if lo[v] != hi[v]), None)
            if var is None:
                var = next((v for v in st.open_ints if lo[v] != hi[v]), None)
                if var is None:
                    self._accept(lo, hi)
                    continue
                values = range(hi[var], lo[var] - 1, -1)
            else:
                values = (0, 1) if st.cost[var] >= 0 else (1, 0)
                values = values[::-1]  # stack is LIFO: push preferred value last
            for val in values:
                nlo, nhi, nxor = list(lo), list(hi), xor.copy()
                nlo[var] = nhi[var] = val
                try:
                    self.propagate(nlo, nhi, nxor, [var])
                except _Conflict:
                    continue
                stack.append((nlo, nhi, nxor))

    def _accept(self, lo, hi):
        st = self.st
        vals = list(lo)
        for p in st.parity:
            s = sum(c * vals[v] for c, v in p.terms)
            rem = p.full_rhs - s
            if rem % p.int_coef:
                return
            b = rem // p.int_coef
            if not st.lo0[p.int_var] <= b <= st.hi0[p.int_var]:
                return
            vals[p.int_var] = b
        obj = sum(c * vals[v] for v, c in enumerate(st.cost) if c)
        if obj < self.best_val - _EPS:
            self.best_val = obj
            self.best = vals


class _Budget(Exception):
    pass


class _Cancelled(Exception):
    pass


def solve_builtin(
    model: IlpModel,
    budget: int = 10_000_000,
    *,
    initial: dict[int, int] | None = None,
    cancel: threading.Event | None = None,
) -> IlpSolution:
    """Solve ``model`` to proven optimality within ``budget`` search nodes.

    ``initial`` is an optional feasible assignment used as the first incumbent.
    ``cancel`` is polled once per node; a set event stops the search with the
    best incumbent and status ``"cancelled"``.
    """
    st = _Structure(model)
    search = _Search(st, budget, cancel)
    if initial is not None:
        vals = [initial[v.id] for v in model.variables]
        if model.check(vals):
            raise ValueError("initial assignment is infeasible")
        search.best_val = model.objective_value(vals)
        search.best = vals
    status = OPTIMAL
    try:
        search.run(list(st.lo0), list(st.hi0))
    except _Budget:
        status = BUDGET_EXHAUSTED
    except _Cancelled:
        status = CANCELLED
    if search.best is None:
        if status == OPTIMAL:
            status = INFEASIBLE
        return IlpSolution({}, math.inf, status, search.nodes)
    assignment = {v.id: int(search.best[v.id]) for v in model.variables}
    return IlpSolution(assignment, model.objective_value(search.best), status, search.nodes)
