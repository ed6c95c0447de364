"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` or `python3 tests/test_acceptance.py`.
The summary lines are also repeated at the end of every pytest session.
"""
import csv
import io
import contextlib
import time
from pathlib import Path

import numpy as np

from bsmlie import expr as E
from bsmlie import fd
from bsmlie import specfun as S
from bsmlie.algebra import generators, jacobi_check, verify_bracket_table
from bsmlie.cli import main
from bsmlie.jet import check_symmetry
from bsmlie.model import CASES, ModelParams, PARAM_SYMS, domain_box, t, x
from bsmlie.solutions.catalog import CASE_IDS
from bsmlie.solutions.verify import (ansatz_consistency_check, build_solution, pde_residual_terms,
                                     verify_case)

RESULTS = {}
FIXTURES = Path(__file__).parent / "data" / "specfun_fixtures.csv"


def _record(n, title, ok, detail, elapsed):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.1f} s)  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def _timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# --- 1 ----------------------------------------------------------------------

EXPECTED_COUNTS = {"const": 6, "hyp": 5, "hyp-g0": 5}


def criterion_1():
    bad, total = [], 0
    for case in CASES:
        cat = generators(case)
        if len(cat) != EXPECTED_COUNTS[case]:
            bad.append(f"{case}: {len(cat)} generators")
        p = ModelParams.for_case(case)
        for X in cat:
            total += 1
            rep = check_symmetry(X, p, trials=200, seed=42, tol=1e-9)
            if not rep.passed:
                bad.append(f"{case}:{rep.field} max_rel={rep.max_residual:.2e}")
    return not bad, f"{total} generators" + (f"; failing {bad}" if bad else "")


def test_criterion_1_symmetry_certification():
    ok, detail, dt = _timed(criterion_1)
    ok = ok and dt < 10
    assert _record(1, "symmetry certification", ok, detail, dt)


# --- 2 ----------------------------------------------------------------------

def criterion_2():
    bad, cells = [], 0
    for case in CASES:
        rep = verify_bracket_table(case, draws=5, seed=42)
        cells += len(rep.cells)
        bad += [f"{case}[X{c.i},X{c.j}]" for c in rep.cells if not (c.passed and c.exact)]
        jac = jacobi_check(case, triples=20, seed=42)
        bad += [f"{case} Jacobi({i},{j},{k})" for i, j, k, ok, _ in jac if not ok]
    return not bad, f"{cells} cells, 60 Jacobi triples" + (f"; failing {bad}" if bad else "")


def test_criterion_2_bracket_tables():
    ok, detail, dt = _timed(criterion_2)
    ok = ok and dt < 10
    assert _record(2, "bracket tables", ok, detail, dt)


# --- 3 ----------------------------------------------------------------------

def criterion_3():
    problems = []
    for cid in CASE_IDS:
        sol = build_solution(cid)
        ac = ansatz_consistency_check(sol, seed=42)
        if not ac["passed"]:
            problems.append(f"{cid} consistency")
        rep = verify_case(cid, seed=42)
        flagged = rep.status == "suspected-misprint"
        cf = rep.tiers["closed_form_ode"]
        if cf["applicable"] and not cf["passed"] and not flagged:
            problems.append(f"{cid} closed-form unflagged")
        if not flagged and not rep.tiers["full_pde"]["passed"]:
            problems.append(f"{cid} full PDE")
        if rep.status == "failed":
            problems.append(f"{cid} failed: {rep.message}")
    return not problems, f"{len(CASE_IDS)} cases" + (f"; {problems}" if problems else "")


def test_criterion_3_solution_catalog():
    ok, detail, dt = _timed(criterion_3)
    ok = ok and dt < 30
    assert _record(3, "solution catalog", ok, detail, dt)


# --- 4 ----------------------------------------------------------------------

_ODES = {
    "KummerM": ((0.35, 1.45), lambda a, b, z, w, d1, d2: (z * d2, (b - z) * d1, -a * w)),
    "KummerU": ((0.35, 0.55), lambda a, b, z, w, d1, d2: (z * d2, (b - z) * d1, -a * w)),
    "WhittakerM": ((0.3, 0.35),
                   lambda k, m, z, w, d1, d2: (d2, (-0.25 + k / z) * w, (0.25 - m * m) / z ** 2 * w)),
    "WhittakerW": ((0.3, 0.35),
                   lambda k, m, z, w, d1, d2: (d2, (-0.25 + k / z) * w, (0.25 - m * m) / z ** 2 * w)),
    "BesselJ": ((0.6,), lambda n, z, w, d1, d2: (z * z * d2, z * d1, (z * z - n * n) * w)),
    "BesselY": ((0.6,), lambda n, z, w, d1, d2: (z * z * d2, z * d1, (z * z - n * n) * w)),
}


def criterion_4():
    bad, worst = [], 0.0
    with FIXTURES.open() as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        c = lambda k: complex(float(r[k + "_re"]), float(r[k + "_im"]))
        f = getattr(S, r["function"])
        got = (f(c("p1"), c("z")) if r["function"].startswith("bessel")
               else f(c("p1"), c("p2"), c("z"))).value
        rel = abs(got - c("value")) / abs(c("value"))
        worst = max(worst, rel)
        if rel > 1e-9:
            bad.append(f"{r['function']} z={c('z')}")
    zs = E.var("z")
    rng = np.random.default_rng(42)
    ode_worst = 0.0
    for name, (params, ode) in _ODES.items():
        e = E.special(name, [E.as_expr(p) for p in params], zs)
        d1 = E.differentiate(e, zs)
        d2 = E.differentiate(d1, zs)
        pts = rng.uniform(0.3, 45.0, 20) + 1j * rng.uniform(-2, 2, 20)
        for z in pts:
            terms = ode(*params, z, *(E.eval_numeric(q, {"z": z}) for q in (e, d1, d2)))
            res = abs(sum(terms)) / sum(abs(v) for v in terms)
            ode_worst = max(ode_worst, res)
            if res > 1e-8:
                bad.append(f"{name} ODE z={z:.3g}")
    detail = f"{len(rows)} fixtures max_rel={worst:.1e}, 120 ODE points max={ode_worst:.1e}"
    return len(rows) == 50 and not bad, detail + (f"; failing {bad}" if bad else "")


def test_criterion_4_special_functions():
    ok, detail, dt = _timed(criterion_4)
    assert _record(4, "special functions", ok, detail, dt)


# --- 5 ----------------------------------------------------------------------

def criterion_5():
    bad, fd_worst = [], 0.0
    rng = np.random.default_rng(42)
    for case in CASES:
        p = ModelParams.for_case(case)
        box = domain_box(p)
        env = {**p.bindings(), **{n: rng.uniform(*box[n], 50) for n in ("t", "x", "y")}}
        for label, u in (("x", x), ("exp(rt)", E.exp(PARAM_SYMS["r"] * t))):
            terms = pde_residual_terms(u, case, env)
            rel = np.abs(terms.sum(axis=0)) / np.maximum(np.abs(terms).sum(axis=0), 1e-300)
            if rel.max() >= 1e-12:
                bad.append(f"{case} u={label} residual {rel.max():.1e}")
        u = fd.manufactured("x", p)
        for nx, ny, nt in ((3, 3, 3), (7, 19, 5), (41, 41, 40), (30, 12, 3)):
            grid = fd.GridSpec(y_range=(p.m + 0.2, p.m + 1.5), nx=nx, ny=ny, nt=nt)
            sol = fd.solve(p, grid, lambda X, Y: u(grid.t_range[1], X, Y), u)
            X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
            err = float(np.abs(sol.final - u(grid.t_range[0], X, Y)).max())
            fd_worst = max(fd_worst, err)
            if err >= 1e-10:
                bad.append(f"{case} FD u=x on {nx}x{ny}x{nt}: {err:.1e}")
    return not bad, f"FD u=x max err {fd_worst:.1e}" + (f"; {bad}" if bad else "")


def test_criterion_5_exact_solutions():
    ok, detail, dt = _timed(criterion_5)
    assert _record(5, "exact-solution sanity", ok, detail, dt)


# --- 6 ----------------------------------------------------------------------

def criterion_6():
    rep = fd.convergence_order("2.1-2", ModelParams.for_case("const"))
    ok = rep.orders is not None and all(1.8 <= o <= 2.2 for o in rep.orders)
    orders = "none" if rep.orders is None else ", ".join(f"{o:.3f}" for o in rep.orders)
    return ok, f"case 2.1-2 levels {rep.levels[-1]} errors {rep.errors[-1]:.2e} orders {orders}"


def test_criterion_6_convergence():
    ok, detail, dt = _timed(criterion_6)
    ok = ok and dt < 60
    assert _record(6, "ADI convergence order", ok, detail, dt)


# --- 7 ----------------------------------------------------------------------

RUNS = (["verify-symmetries", "--all"], ["brackets", "--all"], ["solutions", "--all"],
        ["converge", "--case", "2.1-2", "--format", "csv"])


def _capture(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        main(list(argv) + ["--seed", "42"])
    return buf.getvalue().encode()


def criterion_7():
    diffs = [" ".join(a) for a in RUNS if _capture(a) != _capture(a)]
    return not diffs, f"{len(RUNS)} commands run twice" + (f"; differ: {diffs}" if diffs else "")


def test_criterion_7_determinism():
    ok, detail, dt = _timed(criterion_7)
    assert _record(7, "determinism", ok, detail, dt)


if __name__ == "__main__":
    for n, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                            criterion_6, criterion_7), start=1):
        ok, detail, dt = _timed(fn)
        _record(n, fn.__name__, ok, detail, dt)
