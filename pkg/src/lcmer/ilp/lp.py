"""LP text format export/import and the external solver bridge.

The writer emits the CPLEX LP dialect understood by most MILP solvers:
``Minimize``, ``Subject To``, ``Bounds``, ``Binaries``, ``Generals``, ``End``.
Solutions come back as plain ``name value`` lines.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from pathlib import Path

from ..exceptions import VerificationError
from .model import BINARY, INTEGER, IlpModel, IlpSolution

SOLVER_ENV = "LCMER_ILP_SOLVER"

_TERMS_PER_LINE = 8
_SECTIONS = ("minimize", "subject to", "bounds", "binaries", "generals", "end")


def _num(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def _expr(terms, names) -> list[str]:
    parts = []
    for coef, vid in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} {names[vid]}")
    return [" ".join(parts[k:k + _TERMS_PER_LINE]) for k in range(0, len(parts), _TERMS_PER_LINE)]


def export_lp(model: IlpModel) -> str:
    """Render ``model`` as LP text; output depends only on the model."""
    names = [v.name for v in model.variables]
    out = [f"\\ {model.name}", "Minimize"]
    obj = [(c, v) for c, v in model.objective if c != 0]
    if obj:
        lines = _expr(obj, names)
        out.append(" obj: " + lines[0])
        out.extend("   " + ln for ln in lines[1:])
    elif names:
        out.append(f" obj: 0 {names[0]}")
    else:
        out.append(" obj:")
    out.append("Subject To")
    for k, con in enumerate(model.constraints):
        lines = _expr(con.terms, names) or [f"0 {names[0]}"]
        out.append(f" c{k}: " + lines[0])
        out.extend("   " + ln for ln in lines[1:])
        out[-1] += f" {con.relation} {_num(con.rhs)}"
    out.append("Bounds")
    for v in model.variables:
        if v.kind == INTEGER:
            out.append(f" {v.lower} <= {v.name} <= {v.upper}")
    bins = [v.name for v in model.variables if v.kind == BINARY]
    gens = [v.name for v in model.variables if v.kind == INTEGER]
    for header, group in (("Binaries", bins), ("Generals", gens)):
        if group:
            out.append(header)
            out.extend(" " + " ".join(group[k:k + 10]) for k in range(0, len(group), 10))
    out.append("End")
    return "\n".join(out) + "\n"


_TERM = re.compile(r"([+-])\s*([0-9.eE+-]+)\s+([A-Za-z_][A-Za-z0-9_]*)")


def _parse_terms(text: str, ids: dict[str, int]) -> list[tuple[float, int]]:
    terms = []
    pos = 0
    text = text.strip()
    if text and text[0] not in "+-":
        text = "+ " + text
    for m in _TERM.finditer(text):
        if text[pos:m.start()].strip():
            raise ValueError(f"cannot parse LP expression near {text[pos:m.start()]!r}")
        sign, coef, name = m.groups()
        if name not in ids:
            raise ValueError(f"undeclared variable {name}")
        c = float(coef)
        terms.append(((-c if sign == "-" else c), ids[name]))
        pos = m.end()
    if text[pos:].strip():
        raise ValueError(f"trailing text in LP expression: {text[pos:]!r}")
    return terms


def read_lp(text: str) -> IlpModel:
    """Parse LP text in the dialect written by :func:`export_lp`."""
    sections: dict[str, list[str]] = {s: [] for s in _SECTIONS}
    name = "model"
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("\\"):
            if current is None and line[1:].strip():
                name = line[1:].strip()
            continue
        if not line:
            continue
        if line.lower() in _SECTIONS:
            current = line.lower()
            continue
        if current is None:
            raise ValueError(f"text before the first section: {line!r}")
        sections[current].append(line)

    # statements may continue over several lines; each starts with "label:"
    def statements(lines):
        out = []
        for ln in lines:
            if re.match(r"^[A-Za-z_][A-Za-z0-9_]*\s*:", ln) or not out:
                out.append(ln)
            else:
                out[-1] += " " + ln
        return out

    bins = " ".join(sections["binaries"]).split()
    gens = " ".join(sections["generals"]).split()
    bounds = {}
    for ln in sections["bounds"]:
        m = re.fullmatch(r"(-?\d+)\s*<=\s*(\w+)\s*<=\s*(-?\d+)", ln)
        if not m:
            raise ValueError(f"unsupported bound line {ln!r}")
        bounds[m.group(2)] = (int(m.group(1)), int(m.group(3)))
    model = IlpModel(name=name)
    for v in bins:
        model.add_var(v)
    for v in gens:
        if v not in bounds:
            raise ValueError(f"general variable {v} has no finite bounds")
        model.add_var(v, *bounds[v], kind=INTEGER)
    ids = model._by_name
    for st in statements(sections["minimize"]):
        expr = st.split(":", 1)[1]
        model.objective = [(c, v) for c, v in _parse_terms(expr, ids) if c != 0]
    for st in statements(sections["subject to"]):
        body = st.split(":", 1)[1]
        m = re.fullmatch(r"(.*?)(<=|>=|=)\s*(-?[0-9.eE+]+)\s*", body)
        if not m:
            raise ValueError(f"cannot parse constraint {st!r}")
        terms = [(int(c), v) for c, v in _parse_terms(m.group(1), ids)]
        model.add_constraint(terms, m.group(2), int(float(m.group(3))))
    return model


def read_solution(model: IlpModel, text: str, status: str = "optimal") -> IlpSolution:
    """Map ``name value`` lines back onto ``model``; unlisted variables are 0."""
    values = {v.id: 0 for v in model.variables}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 'name value', got {line!r}")
        name, val = parts
        if not model.has_var(name):
            raise ValueError(f"solution names unknown variable {name}")
        x = float(val)
        if abs(x - round(x)) > 1e-6:
            raise ValueError(f"non-integral value {x} for {name}")
        values[model.var(name)] = int(round(x))
    vals = [values[v.id] for v in model.variables]
    return IlpSolution(values, model.objective_value(vals), status)


def solve_external(model: IlpModel, executable: str | None = None,
                   timeout: float | None = None) -> IlpSolution:
    """Solve through an external program named by ``executable`` or ``$LCMER_ILP_SOLVER``.

    The program is called as ``<executable> model.lp solution.txt`` and must
    write ``name value`` lines to the second path; exit status 0 means solved.
    The returned assignment is checked against every constraint.
    """
    executable = executable or os.environ.get(SOLVER_ENV)
    if not executable:
        raise RuntimeError(f"no external solver configured; set {SOLVER_ENV}")
    with tempfile.TemporaryDirectory(prefix="lcmer_") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "solution.txt"
        lp_path.write_text(export_lp(model))
        proc = subprocess.run(
            shlex.split(executable) + [str(lp_path), str(sol_path)],
            capture_output=True, text=True, timeout=timeout,
        )
        if proc.returncode != 0:
            raise RuntimeError(
                f"external solver exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        if not sol_path.exists():
            raise RuntimeError("external solver wrote no solution file")
        sol = read_solution(model, sol_path.read_text())
    vals = [sol.assignment[v.id] for v in model.variables]
    if model.check(vals):
        raise VerificationError("external solver returned an infeasible assignment")
    return sol
