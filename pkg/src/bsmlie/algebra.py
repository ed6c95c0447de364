"""Generator catalogs, commutators and bracket-table verification."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from .jet import SymmetryReport, VectorField, check_symmetry, sampling_box
from .model import (CASES, DRAW_RANGES, ModelParams, alpha_expr, beta, f0, g_expr, k, m, mu,
                    r, random_params, rho, t, x, y, U)

__all__ = [
    "GeneratorCatalog", "generators", "commutator", "bracket_table",
    "CellReport", "TableReport", "verify_bracket_table", "jacobi_check", "closure_check",
    "render_table", "combination_X",
]

HALF = E.HALF


@dataclass(frozen=True)
class GeneratorCatalog:
    case: str
    fields: tuple
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i):
        return self.fields[i]

    @property
    def names(self):
        return [f.name for f in self.fields]


def _vf(name, t_=0, x_=0, y_=0, u_=0):
    return VectorField(E.as_expr(t_), E.as_expr(x_), E.as_expr(y_), E.as_expr(u_), name=name)


def combination_X(fields, case: str) -> VectorField:
    """2g X1 + (g^2 rho k / beta + 2r) X2 - g (g - 4r) X3 / 2."""
    g = g_expr(case)
    X1, X2, X3 = fields[:3]
    return (2 * g) * X1 + (g ** 2 * rho * k / beta + 2 * r) * X2 + (-HALF * g * (g - 4 * r)) * X3


def generators(case: str) -> GeneratorCatalog:
    """Symbolic generators of the symmetry algebra for one volatility case."""
    if isinstance(case, ModelParams):
        case = case.case
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    X1 = _vf("X1", t_=1)
    X2 = _vf("X2", x_=x)
    X3 = _vf("X3", u_=U)
    a = alpha_expr(case)
    if case == "const":
        ea = E.exp(a * t)
        X4 = _vf("X4", y_=E.exp(-a * t))
        X5 = _vf("X5",
                 x_=f0 ** 2 * (rho ** 2 + a * t) * x,
                 y_=f0 * rho * beta,
                 u_=HALF * a * (t * (f0 ** 2 - 2 * r) + 2 * E.ln(x)) * U)
        X6 = _vf("X6",
                 x_=2 * beta * f0 ** 2 * rho * ea * x,
                 y_=beta ** 2 * f0 * ea,
                 u_=-2 * ea * (a * f0 * (m - y) + beta * rho * (r - mu)) * U)
        return GeneratorCatalog(case, (X1, X2, X3, X4, X5, X6))
    if case == "hyp":
        g = g_expr(case)
        em, ep = E.exp(-g * t), E.exp(g * t)
        X4 = _vf("X4", t_=em, x_=em * r * x, y_=-HALF * g * (y - m) * em, u_=em * r * U)
        X5 = _vf("X5", t_=ep,
                 x_=ep * x / beta * (rho * g * k + beta * r),
                 y_=ep * HALF * g * (y - m),
                 u_=ep * U / (2 * beta ** 2) * (g ** 2 * (y - m) ** 2 + beta ** 2 * (2 * r - g)))
        fields = (X1, X2, X3, X4, X5)
        return GeneratorCatalog(case, fields, {"X": combination_X(fields, case).with_name("X")})
    X4 = _vf("X4", t_=t, x_=(rho * k + 2 * beta * r * t) * x / (2 * beta),
             y_=(y - m) / 2, u_=r * t * U)
    X5 = _vf("X5", t_=t ** 2, x_=x * t / beta * (rho * k + beta * r * t), y_=t * (y - m),
             u_=U / (2 * beta ** 2) * ((y - m) ** 2 + beta ** 2 * (2 * r * t ** 2 - t)))
    return GeneratorCatalog(case, (X1, X2, X3, X4, X5))


def commutator(A: VectorField, B: VectorField) -> VectorField:
    """[A, B]^i = A(B^i) - B(A^i)."""
    comps = [E.add(A.apply(b), E.neg(B.apply(a))) for a, b in zip(A.components, B.components)]
    name = f"[{A.name},{B.name}]" if A.name and B.name else ""
    return VectorField.from_components(comps, name=name)


def bracket_table(case: str) -> dict:
    """Stated brackets as coefficient vectors: (i, j) -> [c_1, ..., c_n] for i < j (1-based)."""
    n = 6 if case == "const" else 5
    a = alpha_expr(case)
    table = {}

    def put(i, j, **coeffs):
        vec = [E.ZERO] * n
        for key, c in coeffs.items():
            vec[int(key[1:]) - 1] = E.as_expr(c)
        table[(i, j)] = vec

    if case == "const":
        put(1, 4, X4=-a)
        put(1, 5, X2=f0 ** 2 * a, X3=a * (HALF * f0 ** 2 - r))
        put(1, 6, X6=a)
        put(2, 5, X3=a)
        put(4, 6, X3=2 * a * f0)
    elif case == "hyp":
        g = g_expr(case)
        put(1, 4, X4=-g)
        put(1, 5, X5=g)
        put(4, 5, X1=2 * g, X2=g ** 2 * rho * k / beta + 2 * r, X3=-HALF * g * (g - 4 * r))
    else:
        put(1, 4, X1=1, X2=r, X3=r)
        put(1, 5, X3=-HALF, X4=2)
        put(4, 5, X5=1)
    full = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            full[(i, j)] = table.get((i, j), [E.ZERO] * n)
    return full


def _combine(cat: GeneratorCatalog, coeffs) -> VectorField:
    out = VectorField()
    for c, X in zip(coeffs, cat.fields):
        if not (isinstance(c, E.Const) and c.value == 0):
            out = out + c * X
    return out


def _param_box(case: str) -> dict:
    box = {"t": (0.1, 1.0), "x": (0.5, 2.0), "y": (0.2, 1.5), "u": (-2.0, 2.0)}
    names = ("r", "rho", "m", "mu", "alpha", "beta", "k" if case != "const" else "f0")
    for nme in names:
        if case == "hyp-g0" and nme == "alpha":
            continue
        box[nme] = DRAW_RANGES[nme]
    # keep y - m away from 0 under varying m
    box["m"] = (-0.1, 0.1)
    return box


@dataclass
class CellReport:
    i: int
    j: int
    passed: bool
    exact: bool
    probabilistic: bool
    numeric_draws: list
    stated: str
    computed: list
    max_residual: float

    def as_dict(self) -> dict:
        return {"cell": [self.i, self.j], "passed": self.passed, "exact": self.exact,
                "symbolic_zero_test": self.probabilistic, "numeric_draws": self.numeric_draws,
                "stated": self.stated, "max_residual": self.max_residual,
                **({"computed": self.computed} if not self.passed else {})}


@dataclass
class TableReport:
    case: str
    cells: list
    seed: int
    draws: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def as_dict(self) -> dict:
        return {"case": self.case, "passed": self.passed, "seed": self.seed,
                "random_draws": self.draws, "cells": [c.as_dict() for c in self.cells]}


def _fmt_combo(coeffs) -> str:
    parts = [f"({E.to_infix(c)})*X{i + 1}" for i, c in enumerate(coeffs)
             if not (isinstance(c, E.Const) and c.value == 0)]
    return " + ".join(parts) if parts else "0"


def verify_bracket_table(case: str, draws: int = 5, seed: int = 42, trials: int = 200,
                         tol: float = 1e-9) -> TableReport:
    """Check every cell: exact expansion, symbolic zero test, default and random parameters."""
    cat = generators(case)
    table = bracket_table(case)
    rng = np.random.default_rng(seed)
    param_sets = [ModelParams.for_case(case)] + [random_params(case, rng) for _ in range(draws)]
    pbox = _param_box(case)
    cells = []
    for (i, j), coeffs in table.items():
        got = commutator(cat[i - 1], cat[j - 1])
        want = _combine(cat, coeffs)
        diffs = [E.add(a, E.neg(b)) for a, b in zip(got.components, want.components)]
        exact = all(E.expand(d) == E.ZERO for d in diffs)
        worst = 0.0
        prob = True
        for d in diffs:
            z = E.is_probably_zero(d, pbox, trials=trials, seed=seed, tol=tol)
            prob &= z.is_zero
            worst = max(worst, z.max_rel)
        numeric = []
        for p in param_sets:
            ok = True
            box = {"t": (0.1, 1.0), "x": (0.5, 2.0), "y": (p.m + 0.2, p.m + 1.5), "u": (-2, 2)}
            for d in diffs:
                z = E.is_probably_zero(d, box, p.bindings(), trials=20, seed=seed, tol=tol)
                ok &= z.is_zero
                worst = max(worst, z.max_rel)
            numeric.append(bool(ok))
        passed = prob and all(numeric)
        cells.append(CellReport(i, j, passed, exact, prob, numeric, _fmt_combo(coeffs),
                                [E.to_infix(E.expand(c)) for c in got.components], worst))
    return TableReport(case, cells, seed, draws)


def jacobi_check(case: str, triples: int = 20, seed: int = 42, trials: int = 50,
                 tol: float = 1e-9) -> list:
    """Jacobi identity on random triples; returns [(i, j, k, passed, max_rel)]."""
    cat = generators(case)
    n = len(cat)
    rng = np.random.default_rng(seed)
    pbox = _param_box(case)
    memo = {}

    def br(A, B):
        key = (A, B)
        if key not in memo:
            memo[key] = commutator(A, B)
        return memo[key]

    out = []
    for _ in range(triples):
        i, j, l = (int(v) for v in rng.choice(n, size=3, replace=False))
        A, B, C = cat[i], cat[j], cat[l]
        J = br(br(A, B), C) + br(br(B, C), A) + br(br(C, A), B)
        ok, worst = True, 0.0
        for c in J.components:
            z = E.is_probably_zero(c, pbox, trials=trials, seed=seed, tol=tol)
            ok &= z.is_zero
            worst = max(worst, z.max_rel)
        out.append((i + 1, j + 1, l + 1, bool(ok), worst))
    return out


def closure_check(case: str, params: ModelParams | None = None, seed: int = 42,
                  trials: int = 200) -> list:
    """Every nonzero bracket of two generators is itself a symmetry."""
    params = params or ModelParams.for_case(case)
    cat = generators(case)
    reports = []
    n = len(cat)
    for i in range(n):
        for j in range(i + 1, n):
            B = commutator(cat[i], cat[j])
            if all(E.expand(c) == E.ZERO for c in B.components):
                continue
            reports.append(check_symmetry(B, params, trials=trials, seed=seed))
    return reports


def _display(c: E.Expr, case: str) -> E.Expr:
    """Coefficient rewritten with the symbol g where the case defines it."""
    if case != "hyp":
        return c
    alpha = E.param("alpha")
    g = E.param("g")
    return E.expand(E.substitute(c, {alpha: HALF * g - rho * beta * (mu - r) / k}))


def render_table(case: str, report: TableReport | None = None) -> str:
    """Text table of the stated brackets, row i column j = [Xi, Xj]."""
    table = bracket_table(case)
    n = 6 if case == "const" else 5
    status = {}
    if report is not None:
        status = {(c.i, c.j): c.passed for c in report.cells}

    def cell(i, j):
        if i == j:
            return "0"
        key = (min(i, j), max(i, j))
        coeffs = [_display(c, case) for c in table[key]]
        if i > j:
            coeffs = [E.expand(E.neg(c)) for c in coeffs]
        txt = _fmt_short(coeffs)
        return txt + (" !" if key in status and not status[key] else "")

    rows = [[f"X{i}"] + [cell(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]
    head = ["[ , ]"] + [f"X{j}" for j in range(1, n + 1)]
    widths = [max(len(r[c]) for r in rows + [head]) for c in range(n + 1)]
    lines = [" | ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    for row in rows:
        lines.append(" | ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    if case == "hyp":
        lines.append("g = 2(alpha + rho beta (mu - r)/k)")
    if status and not all(status.values()):
        lines.append("! computed bracket differs from the stated entry")
    return "\n".join(lines)


def _fmt_short(coeffs) -> str:
    out = ""
    for i, c in enumerate(coeffs):
        if isinstance(c, E.Const) and c.value == 0:
            continue
        name = f"X{i + 1}"
        if isinstance(c, E.Const) and abs(c.value) == 1:
            term, neg = name, c.value < 0
        else:
            txt = E.to_infix(c)
            neg = txt.startswith("-") and isinstance(c, (E.Mul, E.Const))
            body = txt[1:] if neg else txt
            wrap = isinstance(c, E.Add)
            term = f"({body})*{name}" if wrap else f"{body}*{name}"
        if not out:
            out = ("-" if neg else "") + term
        else:
            out += (" - " if neg else " + ") + term
    return out or "0"
