"""External-solver stand-in: ``python scipy_milp_solver.py model.lp solution.txt``.

Reads the LP file with the package parser and solves it with HiGHS through
scipy.optimize.milp, so the bridge is exercised against an unrelated solver.
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from lcmer.ilp.lp import read_lp


def main(lp_path, sol_path):
    model = read_lp(open(lp_path).read())
    nv = len(model.variables)
    c = np.zeros(nv)
    for coef, v in model.objective:
        c[v] += coef
    A = np.zeros((len(model.constraints), nv))
    lo = np.full(len(model.constraints), -np.inf)
    hi = np.full(len(model.constraints), np.inf)
    for k, con in enumerate(model.constraints):
        for coef, v in con.terms:
            A[k, v] += coef
        if con.relation in ("=", ">="):
            lo[k] = con.rhs
        if con.relation in ("=", "<="):
            hi[k] = con.rhs
    bounds = Bounds([v.lower for v in model.variables], [v.upper for v in model.variables])
    cons = [LinearConstraint(A, lo, hi)] if len(A) else []
    res = milp(c, constraints=cons, integrality=np.ones(nv), bounds=bounds)
    if res.status != 0:
        print(res.message, file=sys.stderr)
        return 1
    with open(sol_path, "w") as fh:
        for var, x in zip(model.variables, res.x):
            fh.write(f"{var.name} {int(round(x))}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
