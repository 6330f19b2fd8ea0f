#!/usr/bin/env python3
"""MIP backend: reads an LP file, solves it with HiGHS via scipy, writes a
plain-text solution file.

Usage: highs_solve.py MODEL.lp OUT.sol [--gap G] [--time T] [--polish 0|1]

The LP dialect covered here is the one common to CPLEX-style writers:
Minimize/Maximize, Subject To, Bounds, Binaries/Generals, End. SOS sections
are rejected (this backend has no native SOS support; the caller is expected
to reformulate).

Solution file format:
    status optimal|infeasible|limit|error
    objective <float>
    gap <float>
    var <name> <float>        (one line per column)
"""

import argparse
import re
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

TOKEN = re.compile(r"<=|>=|=|:|[+-]|[A-Za-z_][A-Za-z0-9_.#()\[\]]*|[0-9.][0-9.eE+-]*")

SECTIONS = {
    "minimize": "objective",
    "maximize": "objective",
    "subject": "constraints",
    "st": "constraints",
    "bounds": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "bin": "binaries",
    "generals": "generals",
    "general": "generals",
    "gen": "generals",
    "sos": "sos",
    "end": "end",
}


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return tok in ("inf", "infinity")


def to_float(tok):
    t = tok.lower()
    if t in ("inf", "infinity", "+inf", "+infinity"):
        return np.inf
    if t in ("-inf", "-infinity"):
        return -np.inf
    return float(tok)


class LpModel:
    def __init__(self):
        self.names = []
        self.index = {}
        self.obj = {}
        self.maximize = False
        self.rows = []  # (terms dict, sense, rhs)
        self.lower = {}
        self.upper = {}
        self.integer = set()

    def var(self, name):
        if name not in self.index:
            self.index[name] = len(self.names)
            self.names.append(name)
        return self.index[name]


def tokenize(path):
    toks = []
    with open(path) as fh:
        for line in fh:
            line = line.split("\\", 1)[0]
            toks.extend(TOKEN.findall(line))
    return toks


def parse(path):
    toks = tokenize(path)
    m = LpModel()
    i = 0
    section = None
    n = len(toks)

    def lookahead_keyword(j):
        t = toks[j].lower()
        if t == "subject" and j + 1 < n and toks[j + 1].lower() == "to":
            return "constraints", j + 2
        if t == "s" and j + 2 < n and toks[j + 1] == "." :
            return None, j  # not produced by our writer
        if t in SECTIONS and t != "subject":
            # 'free' etc. are handled inside sections; only treat as a section
            # header when it makes sense
            return SECTIONS[t], j + 1
        return None, j

    while i < n:
        kind, j = lookahead_keyword(i)
        if kind:
            section = kind
            i = j
            if section == "objective":
                m.maximize = toks[j - 1].lower() == "maximize"
            if section == "sos":
                raise SystemExit("SOS sections are not supported by this backend")
            if section == "end":
                break
            continue
        if section == "objective":
            i = parse_row(m, toks, i, objective=True)
        elif section == "constraints":
            i = parse_row(m, toks, i, objective=False)
        elif section == "bounds":
            i = parse_bound(m, toks, i)
        elif section == "binaries":
            v = m.var(toks[i])
            m.integer.add(v)
            m.lower[v] = 0.0
            m.upper[v] = 1.0
            i += 1
        elif section == "generals":
            m.integer.add(m.var(toks[i]))
            i += 1
        else:
            raise SystemExit(f"unexpected token '{toks[i]}' outside any section")
    return m


def parse_row(m, toks, i, objective):
    n = len(toks)
    # optional 'name:' prefix
    if i + 1 < n and toks[i + 1] == ":":
        i += 2
    terms = {}
    sign = 1.0
    coef = None
    while i < n:
        t = toks[i]
        if t == "+":
            sign, i = 1.0, i + 1
        elif t == "-":
            sign, i = -sign if coef is None else -1.0, i + 1
        elif t in ("<=", ">=", "="):
            sense = t
            i += 1
            neg = 1.0
            if toks[i] == "-":
                neg, i = -1.0, i + 1
            elif toks[i] == "+":
                i += 1
            rhs = neg * to_float(toks[i])
            i += 1
            m.rows.append((terms, sense, rhs))
            return i
        elif is_number(t):
            coef = (coef if coef is not None else 1.0) * to_float(t)
            i += 1
        else:
            low = t.lower()
            if low in SECTIONS or (low == "subject"):
                break
            v = m.var(t)
            c = sign * (coef if coef is not None else 1.0)
            terms[v] = terms.get(v, 0.0) + c
            sign, coef = 1.0, None
            i += 1
    if objective:
        m.obj = terms
        return i
    raise SystemExit("constraint without relational operator")


def parse_bound(m, toks, i):
    n = len(toks)
    # forms: "lo <= x <= hi" | "x free" | "x <= hi" | "x >= lo" | "x = v"
    def num_at(j):
        sign = 1.0
        if toks[j] in ("+", "-"):
            sign = -1.0 if toks[j] == "-" else 1.0
            j += 1
        return sign * to_float(toks[j]), j + 1

    if is_number(toks[i]) or toks[i] in ("+", "-"):
        lo, i = num_at(i)
        assert toks[i] == "<="
        v = m.var(toks[i + 1])
        i += 2
        m.lower[v] = lo
        if i < n and toks[i] == "<=":
            hi, i = num_at(i + 1)
            m.upper[v] = hi
        return i
    name = toks[i]
    if i + 1 < n and toks[i + 1].lower() == "free":
        v = m.var(name)
        m.lower[v] = -np.inf
        m.upper[v] = np.inf
        return i + 2
    v = m.var(name)
    op = toks[i + 1]
    val, i = num_at(i + 2)
    if op == "<=":
        m.upper[v] = val
    elif op == ">=":
        m.lower[v] = val
    elif op == "=":
        m.lower[v] = val
        m.upper[v] = val
    return i


def build_arrays(m):
    nv = len(m.names)
    c = np.zeros(nv)
    for v, coef in m.obj.items():
        c[v] = coef
    if m.maximize:
        c = -c
    lb = np.zeros(nv)
    ub = np.full(nv, np.inf)
    for v, b in m.lower.items():
        lb[v] = b
    for v, b in m.upper.items():
        ub[v] = b
    rows, cols, vals = [], [], []
    clb, cub = [], []
    for r, (terms, sense, rhs) in enumerate(m.rows):
        for v, coef in terms.items():
            rows.append(r)
            cols.append(v)
            vals.append(coef)
        if sense == "<=":
            clb.append(-np.inf)
            cub.append(rhs)
        elif sense == ">=":
            clb.append(rhs)
            cub.append(np.inf)
        else:
            clb.append(rhs)
            cub.append(rhs)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(m.rows), nv))
    integrality = np.zeros(nv)
    for v in m.integer:
        integrality[v] = 1
    return c, A, np.array(clb), np.array(cub), lb, ub, integrality


def run(m, args):
    c, A, clb, cub, lb, ub, integrality = build_arrays(m)
    options = {
        "presolve": True,
        "time_limit": args.time,
        "mip_rel_gap": args.gap,
        "disp": False,
    }
    cons = LinearConstraint(A, clb, cub) if A.shape[0] else None
    res = milp(
        c,
        constraints=cons,
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )

    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    if res.status == 0:
        status = "optimal"
    elif res.status == 2:
        status = "infeasible"
    elif res.status == 1 or (res.status == 4 and res.x is not None):
        status = "limit"
    else:
        status = "error"

    x = res.x
    if status == "optimal" and args.polish and integrality.any():
        # fix integers at the incumbent and re-solve so the continuous part
        # is an LP-optimal vertex (exact zeros at bounds, tight maxima)
        lb2, ub2 = lb.copy(), ub.copy()
        ivars = integrality > 0
        rounded = np.round(x[ivars])
        lb2[ivars] = rounded
        ub2[ivars] = rounded
        res2 = milp(c, constraints=cons, integrality=np.zeros_like(integrality),
                    bounds=Bounds(lb2, ub2), options=options)
        if res2.status == 0:
            x = res2.x
            # keep integer coordinates exactly integral in the report
            x[ivars] = rounded

    obj = float(c @ x) if x is not None else 0.0
    if m.maximize:
        obj = -obj
    return status, obj, gap, x


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("sol")
    ap.add_argument("--gap", type=float, default=1e-4)
    ap.add_argument("--time", type=float, default=600.0)
    ap.add_argument("--polish", type=int, default=1)
    args = ap.parse_args()

    m = parse(args.lp)
    status, obj, gap, x = run(m, args)

    with open(args.sol, "w") as fh:
        fh.write(f"status {status}\n")
        fh.write(f"objective {obj!r}\n")
        fh.write(f"gap {gap!r}\n")
        if x is not None and status in ("optimal", "limit"):
            for name, idx in m.index.items():
                fh.write(f"var {name} {float(x[idx])!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
