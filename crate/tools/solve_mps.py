#!/usr/bin/env python3
"""MPS solver adapter backed by scipy's HiGHS bindings.

Usage: solve_mps.py INPUT.mps OUTPUT.sol

Reads the free-format MPS dialect produced by the `ctop` writers (one
row/value pair per COLUMNS line, INTORG/INTEND markers for integer columns,
RHS entry on the objective row carrying a negated constant) and writes the
solution dialect the `ctop` adapter parses:

    =status= optimal | infeasible | unbounded | iteration-limit
    =obj= <objective>
    <name> <value>

Continuous models are solved with dual simplex so the returned point is a
vertex; models with integer columns go through the HiGHS MIP solver.
"""

import sys

import numpy as np
from scipy import optimize, sparse

INF = float("inf")


def parse_mps(path):
    rows = []          # (name, sense) excluding objective
    row_index = {}
    obj_row = None
    cols = []          # (name, integer)
    col_index = {}
    entries = []       # (row_i, col_i, value)
    obj = {}           # col_i -> coeff
    rhs = {}           # row_i -> value
    obj_constant = 0.0
    bounds = {}        # col_i -> [lo, hi]
    integer_mode = False
    section = None

    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            parts = line.split()
            if section == "ROWS":
                kind, name = parts[0], parts[1]
                if kind == "N":
                    obj_row = name
                else:
                    row_index[name] = len(rows)
                    rows.append((name, kind))
            elif section == "COLUMNS":
                if len(parts) >= 3 and parts[1] == "'MARKER'":
                    integer_mode = parts[2] == "'INTORG'"
                    continue
                name, row, value = parts[0], parts[1], float(parts[2])
                if name not in col_index:
                    col_index[name] = len(cols)
                    cols.append((name, integer_mode))
                ci = col_index[name]
                if row == obj_row:
                    obj[ci] = obj.get(ci, 0.0) + value
                else:
                    entries.append((row_index[row], ci, value))
            elif section == "RHS":
                row, value = parts[1], float(parts[2])
                if row == obj_row:
                    obj_constant = -value
                else:
                    rhs[row_index[row]] = value
            elif section == "BOUNDS":
                kind, name = parts[0], parts[2]
                ci = col_index[name]
                b = bounds.setdefault(ci, [0.0, INF])
                if kind == "UP":
                    b[1] = float(parts[3])
                elif kind == "LO":
                    b[0] = float(parts[3])
                elif kind == "FX":
                    b[0] = b[1] = float(parts[3])
                elif kind == "MI":
                    b[0] = -INF
                elif kind == "PL":
                    b[1] = INF
                elif kind == "BV":
                    b[0], b[1] = 0.0, 1.0
                else:
                    raise ValueError(f"unsupported bound kind {kind}")
            elif section in ("NAME", "ENDATA"):
                continue

    n = len(cols)
    m = len(rows)
    c = np.zeros(n)
    for ci, v in obj.items():
        c[ci] = v
    lo = np.zeros(n)
    hi = np.full(n, INF)
    for ci, (l, h) in bounds.items():
        lo[ci], hi[ci] = l, h
    data = np.array([e[2] for e in entries])
    ij = (
        np.array([e[0] for e in entries], dtype=np.int64),
        np.array([e[1] for e in entries], dtype=np.int64),
    )
    a = sparse.csr_matrix((data, ij), shape=(m, n)) if entries else sparse.csr_matrix((m, n))
    b = np.zeros(m)
    for ri, v in rhs.items():
        b[ri] = v
    senses = np.array([r[1] for r in rows])
    integrality = np.array([1 if integer else 0 for _, integer in cols])
    names = [name for name, _ in cols]
    return c, obj_constant, a, b, senses, lo, hi, integrality, names


def main():
    if len(sys.argv) != 3:
        sys.exit("usage: solve_mps.py INPUT.mps OUTPUT.sol")
    c, const, a, b, senses, lo, hi, integrality, names = parse_mps(sys.argv[1])

    status_map = {0: "optimal", 1: "iteration-limit", 2: "infeasible", 3: "unbounded"}
    if integrality.any():
        lb = np.where(senses == "G", b, np.where(senses == "E", b, -INF))
        ub = np.where(senses == "L", b, np.where(senses == "E", b, INF))
        res = optimize.milp(
            c,
            constraints=optimize.LinearConstraint(a, lb, ub),
            bounds=optimize.Bounds(lo, hi),
            integrality=integrality,
        )
        status = status_map.get(res.status, "iteration-limit")
    else:
        le = senses == "L"
        ge = senses == "G"
        eq = senses == "E"
        a_ub = sparse.vstack([a[le], -a[ge]]) if (le.any() or ge.any()) else None
        b_ub = np.concatenate([b[le], -b[ge]]) if a_ub is not None else None
        a_eq = a[eq] if eq.any() else None
        b_eq = b[eq] if a_eq is not None else None
        res = optimize.linprog(
            c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=np.column_stack([lo, hi]),
            method="highs-ds",
        )
        status = status_map.get(res.status, "iteration-limit")

    with open(sys.argv[2], "w") as out:
        out.write(f"=status= {status}\n")
        if status == "optimal":
            out.write(f"=obj= {float(res.fun) + const!r}\n")
            for name, value in zip(names, res.x):
                out.write(f"{name} {float(value)!r}\n")


if __name__ == "__main__":
    main()
