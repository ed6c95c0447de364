"""Build catalog solutions and run the verification tiers.

Tiers, in order:

* reduction: the ansatz turns the PDE into A w'' + B w' + C w with the ratios
  A : B : C depending on (t, x, y) only through h.
* ansatz_consistency: for random cubic test functions w, the PDE value is a
  fixed multiple of the displayed ODE value (ratio spread < 1e-6).
* closed_form_ode: the closed-form w satisfies the displayed ODE (< 1e-8).
* full_pde: u itself satisfies the PDE (< 1e-6 relative to the term sizes).

A failing tier marks the case "suspected-misprint" and names the formula it
implicates; exceptions from the numerical machinery mark it "failed".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .. import expr as E
from .. import specfun
from ..model import ModelParams, build_equation, domain_box, t, x, y, JETS
from .catalog import CASE_PARAMS, CONSTANTS, H, SolutionSpec, get_spec
from .quadrature import LinearFirstOrder, QuadratureError

__all__ = [
    "Solution", "build_solution", "reduced_coefficients", "reduced_ode_residual",
    "reduced_ode_relative", "ansatz_consistency_check", "reduction_check",
    "closed_form_ode_check", "full_pde_check", "verify_case", "CaseReport", "TOLERANCES",
    "derived_first_order_q", "pde_residual_terms", "ParameterDegeneracy",
]

W, DW, D2W = E.slot("w"), E.slot("dw"), E.slot("d2w")

TOLERANCES = {
    "reduction": 1e-9,
    "ansatz_consistency": 1e-6,
    "closed_form_ode": 1e-8,
    "full_pde": 1e-6,
}
TIER_POINTS = {"ansatz_consistency": 20, "closed_form_ode": 20, "full_pde": 50}


class ParameterDegeneracy(ValueError):
    pass


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------

@dataclass
class Solution:
    spec: SolutionSpec
    params: ModelParams
    values: dict                  # case parameters, constants and derived roots
    box: dict

    @property
    def bindings(self) -> dict:
        return {**self.params.bindings(), **self.values}

    def u_expr(self) -> E.Expr:
        return self.spec.u_expr()

    def quadrature(self, q: E.Expr | None = None) -> LinearFirstOrder:
        """w(t) for first-order cases; q defaults to the displayed -a0/a1."""
        if q is None:
            a0, a1, _ = self.spec.ode
            q = -a0 / a1
        return LinearFirstOrder(q, self.box["t"][0], self.values.get("C", 1.0), self.bindings)

    def w(self, hv, w_solver: LinearFirstOrder | None = None) -> np.ndarray:
        hv = np.asarray(hv)
        hv = np.real(hv).astype(float) if self.spec.h == t else hv.astype(complex)
        if self.spec.closed_form is not None and w_solver is None:
            return E.evaluate(self.spec.closed_form, {**self.bindings, "h": hv})
        w_solver = w_solver or self.quadrature()
        return w_solver(np.real(hv))

    def evaluate(self, tv, xv, yv, w_solver: LinearFirstOrder | None = None) -> np.ndarray:
        env = {**self.bindings, "t": tv, "x": xv, "y": yv}
        if self.spec.closed_form is not None and w_solver is None:
            return E.evaluate(self.u_expr(), env)
        P = E.evaluate(self.spec.prefactor, env)
        hv = E.evaluate(self.spec.h, env)
        return P * self.w(hv, w_solver)


def _check_degeneracy(spec: SolutionSpec, params: ModelParams, box: dict):
    lo, hi = box["t"]
    if spec.case_id == "2.1-4":
        vals = [params.rho ** 2 + params.alpha * tt for tt in (lo, hi)]
    elif spec.case_id == "2.1-5":
        vals = [params.alpha * tt - params.rho ** 2 for tt in (lo, hi)]
    else:
        return
    if min(vals) * max(vals) <= 0 or min(abs(v) for v in vals) < 1e-6:
        raise ParameterDegeneracy(
            f"{spec.case_id}: the t-range {box['t']} reaches the pole of the ansatz")


def _roots(spec: SolutionSpec, env: dict) -> tuple:
    a0, a1, a2 = (complex(E.evaluate(c, {**env, "h": 1.0}, shape=())) for c in spec.ode)
    if spec.source == "indicial":
        poly = [a2, a1 - a2, a0]      # a2 l(l-1) + a1 l + a0
    else:
        poly = [a2, a1, a0]
    if abs(a2) < 1e-12:
        raise ParameterDegeneracy(f"{spec.case_id}: leading coefficient vanishes")
    r1, r2 = np.roots(poly)
    if abs(r1 - r2) < 1e-8 * max(1.0, abs(r1)):
        raise ParameterDegeneracy(f"{spec.case_id}: repeated root, logarithmic case unsupported")
    # order the roots deterministically
    r1, r2 = sorted((complex(r1), complex(r2)), key=lambda z: (round(z.real, 12), z.imag))
    return r1, r2


def build_solution(case_id: str, params: ModelParams | None = None,
                   case_params: Mapping | None = None, constants: Mapping | None = None,
                   box: Mapping | None = None) -> Solution:
    spec = get_spec(case_id)
    if params is None:
        params = ModelParams.for_case(spec.family)
    if params.case != spec.family:
        raise ValueError(f"{case_id} belongs to the {spec.family!r} case, got {params.case!r}")
    case_params = dict(case_params or {})
    unknown = set(case_params) - set(spec.free_params)
    if unknown:
        raise ValueError(f"{case_id}: unknown case parameters {sorted(unknown)}")
    values = {n: float(case_params.get(n, CASE_PARAMS[n][0])) for n in spec.free_params}
    consts = dict(constants or {})
    unknown = set(consts) - set(spec.constants)
    if unknown:
        raise ValueError(f"{case_id}: unknown constants {sorted(unknown)}")
    values.update({n: consts.get(n, CONSTANTS[n]) for n in spec.constants})
    full_box = dict(domain_box(params))
    if spec.box:
        full_box.update(spec.box)
    if box:
        full_box.update(box)
    _check_degeneracy(spec, params, full_box)
    if spec.source in ("indicial", "characteristic"):
        l1, l2 = _roots(spec, {**params.bindings(), **values})
        values["lam1"], values["lam2"] = l1, l2
    return Solution(spec, params, values, full_box)


# ---------------------------------------------------------------------------
# reduction machinery
# ---------------------------------------------------------------------------

def _chain(e: E.Expr, v: E.Sym, h_v: E.Expr) -> E.Expr:
    """d/dv with w = w(h(t, x, y)); d2w is never differentiated for a 2nd-order PDE."""
    if e.depends_on("d2w"):
        raise E.DifferentiationError("third derivative of w requested")
    return E.add(E.differentiate(e, v),
                 E.mul(E.differentiate(e, W), h_v, DW),
                 E.mul(E.differentiate(e, DW), h_v, D2W))


def reduced_coefficients(spec: SolutionSpec, family: str) -> tuple:
    """(C, B, A) with PDE[P w(h)] = A w'' + B w' + C w."""
    hv = {v.name: E.differentiate(spec.h, v) for v in (t, x, y)}
    u = spec.prefactor * W
    ut, ux, uy = (_chain(u, v, hv[v.name]) for v in (t, x, y))
    jets = {"u": u, "u_t": ut, "u_x": ux, "u_y": uy,
            "u_xx": _chain(ux, x, hv["x"]), "u_xy": _chain(ux, y, hv["y"]),
            "u_yy": _chain(uy, y, hv["y"])}
    delta = E.substitute(build_equation(family), jets)
    return tuple(E.differentiate(delta, s) for s in (W, DW, D2W))


def _points(box: dict, n: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {v: rng.uniform(*box[v], n) for v in ("t", "x", "y")}


def _is_zero_coeff(c: E.Expr, sol: Solution) -> bool:
    if isinstance(c, E.Const):
        return c.value == 0
    return E.is_probably_zero(c, {v: sol.box[v] for v in ("t", "x", "y")}, sol.bindings,
                              trials=20, seed=1).is_zero


def reduction_check(sol: Solution, seed: int = 42, trials: int = 200) -> dict:
    """Cross products grad(coefficient ratio) x grad(h) must vanish."""
    coeffs = reduced_coefficients(sol.spec, sol.params.case)
    order = max(i for i in range(3) if not _is_zero_coeff(coeffs[i], sol)) \
        if any(not _is_zero_coeff(c, sol) for c in coeffs) else -1
    if order < 0:
        return {"passed": True, "order": 0, "max_residual": 0.0}
    lead = coeffs[order]
    grad_h = [E.differentiate(sol.spec.h, v) for v in (t, x, y)]
    worst, ok, witness = 0.0, True, None
    box = {v: sol.box[v] for v in ("t", "x", "y")}
    for i in range(order):
        ratio = coeffs[i] / lead
        g = [E.differentiate(ratio, v) for v in (t, x, y)]
        cross = [g[1] * grad_h[2] - g[2] * grad_h[1],
                 g[2] * grad_h[0] - g[0] * grad_h[2],
                 g[0] * grad_h[1] - g[1] * grad_h[0]]
        for c in cross:
            z = E.is_probably_zero(c, box, sol.bindings, trials=trials, seed=seed,
                                   tol=TOLERANCES["reduction"])
            worst = max(worst, z.max_rel)
            if not z.is_zero:
                ok = False
                witness = witness or z.witness
    out = {"passed": bool(ok), "order": order, "max_residual": worst}
    if witness:
        out["witness"] = witness
    return out


def _poly_derivs(cs, hv):
    c0, c1, c2, c3 = cs
    return (c0 + c1 * hv + c2 * hv ** 2 + c3 * hv ** 3,
            c1 + 2 * c2 * hv + 3 * c3 * hv ** 2,
            2 * c2 + 6 * c3 * hv)


def ansatz_consistency_check(sol: Solution, seed: int = 42, n_tests: int = 5,
                             points: int = TIER_POINTS["ansatz_consistency"]) -> dict:
    """PDE[P w_test(h)] / ODE[w_test] must not depend on w_test."""
    spec = sol.spec
    if spec.ode is None:
        red = reduction_check(sol, seed=seed)
        return {"applicable": False, "passed": red["passed"], "reason": "no displayed ODE",
                "reduction": red}
    coeffs = reduced_coefficients(spec, sol.params.case)
    rng = np.random.default_rng(seed)
    tests = rng.uniform(-1, 1, (n_tests, 4))
    env = sol.bindings
    spreads, factors = [], []
    draws = 0
    while len(spreads) < points and draws < 10:
        pts = _points(sol.box, 2 * points, seed + 1 + draws)
        draws += 1
        penv = {**env, **pts}
        hv = E.evaluate(spec.h, penv)
        pde_c = [E.evaluate(c, penv) for c in coeffs]
        ode_c = [E.evaluate(c, {**env, "h": hv}) for c in spec.ode]
        for j in range(hv.size):
            ratios = []
            for cs in tests:
                w0, w1, w2 = _poly_derivs(cs, hv[j])
                lhs = pde_c[0][j] * w0 + pde_c[1][j] * w1 + pde_c[2][j] * w2
                rhs = ode_c[0][j] * w0 + ode_c[1][j] * w1 + ode_c[2][j] * w2
                scale = abs(ode_c[0][j] * w0) + abs(ode_c[1][j] * w1) + abs(ode_c[2][j] * w2)
                if abs(rhs) < 1e-12 * max(scale, 1.0) or not np.isfinite(lhs):
                    ratios = None
                    break
                ratios.append(lhs / rhs)
            if ratios is None:
                continue
            ratios = np.array(ratios)
            mean = ratios.mean()
            spreads.append(float(np.max(np.abs(ratios - mean)) / abs(mean)))
            factors.append(complex(mean))
            if len(spreads) == points:
                break
    if not spreads:
        raise E.InconclusiveError(f"{spec.case_id}: no point gave a well-defined ratio")
    spread = max(spreads)
    f0 = factors[0]
    return {"applicable": True, "passed": bool(spread < TOLERANCES["ansatz_consistency"]),
            "max_spread": spread, "points": len(spreads),
            "factor_at_first_point": [f0.real, f0.imag]}


def reduced_ode_residual(spec: SolutionSpec, w_candidate: E.Expr, hv, bindings: Mapping):
    """Left side of the displayed ODE for w_candidate(h), analytic derivatives."""
    parts = _ode_parts(spec, w_candidate, hv, bindings)
    return parts.sum(axis=0)


def _ode_parts(spec, w_candidate, hv, bindings):
    if spec.ode is None:
        raise ValueError(f"{spec.case_id} has no displayed ODE")
    env = {**bindings, "h": np.asarray(hv)}
    lead = spec.ode[2] if not (isinstance(spec.ode[2], E.Const) and spec.ode[2].value == 0) \
        else spec.ode[1]
    lv = E.evaluate(lead, env)
    if np.any(np.abs(lv) < 1e-12):
        raise E.SingularityError("singular point of the reduced ODE")
    d1 = E.differentiate(w_candidate, H)
    d2 = E.differentiate(d1, H)
    return np.array([E.evaluate(c * w, env) for c, w in zip(spec.ode, (w_candidate, d1, d2))])


def reduced_ode_relative(spec, w_candidate, hv, bindings):
    parts = _ode_parts(spec, w_candidate, hv, bindings)
    return np.abs(parts.sum(axis=0)) / np.maximum(np.abs(parts).sum(axis=0), 1e-300)


def closed_form_ode_check(sol: Solution, seed: int = 42,
                          points: int = TIER_POINTS["closed_form_ode"]) -> dict:
    spec = sol.spec
    if spec.ode is None:
        return {"applicable": False, "passed": None, "reason": "no displayed ODE"}
    if spec.closed_form is None:
        return {"applicable": False, "passed": None, "reason": "no closed form (quadrature)"}
    pts = _points(sol.box, points, seed + 101)
    hv = E.evaluate(spec.h, {**sol.bindings, **pts})
    rel = reduced_ode_relative(spec, spec.closed_form, hv, sol.bindings)
    worst = float(np.max(rel)) if np.all(np.isfinite(rel)) else float("inf")
    return {"applicable": True, "passed": bool(worst < TOLERANCES["closed_form_ode"]),
            "max_residual": worst, "points": points, "source": spec.source}


def pde_residual_terms(u: E.Expr, family: str, env: Mapping) -> np.ndarray:
    """Individual terms of the PDE applied to u, stacked along axis 0."""
    delta = build_equation(family)
    jets = {"u": u, "u_t": E.differentiate(u, t), "u_x": E.differentiate(u, x),
            "u_y": E.differentiate(u, y)}
    jets["u_xx"] = E.differentiate(jets["u_x"], x)
    jets["u_xy"] = E.differentiate(jets["u_x"], y)
    jets["u_yy"] = E.differentiate(jets["u_y"], y)
    return _terms(delta, jets, env)


def _terms(delta, jet_vals, env):
    out = []
    for name, val in jet_vals.items():
        coef = E.differentiate(delta, E.jet(name[2:] if name != "u" else ""))
        v = val if isinstance(val, np.ndarray) else E.evaluate(val, env)
        out.append(E.evaluate(coef, env) * v)
    return np.array(out)


def full_pde_check(sol: Solution, seed: int = 42, points: int = TIER_POINTS["full_pde"],
                   w_solver: LinearFirstOrder | None = None) -> dict:
    spec = sol.spec
    pts = _points(sol.box, points, seed + 202)
    env = {**sol.bindings, **pts}
    if spec.closed_form is not None and w_solver is None:
        terms = pde_residual_terms(sol.u_expr(), sol.params.case, env)
        route = "closed-form"
    else:
        w_solver = w_solver or sol.quadrature()
        coeffs = reduced_coefficients(spec, sol.params.case)
        tv = pts["t"]
        wv, dwv = w_solver(tv), w_solver.derivative(tv)
        # slot route: evaluate the pieces of A w'' + B w' + C w separately
        terms = np.array([E.evaluate(coeffs[0], env) * wv, E.evaluate(coeffs[1], env) * dwv])
        route = "quadrature"
    total = terms.sum(axis=0)
    scale = np.abs(terms).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.abs(total) / scale
    worst = float(np.max(rel)) if np.all(np.isfinite(rel)) else float("inf")
    return {"passed": bool(worst < TOLERANCES["full_pde"]), "max_residual": worst,
            "points": points, "route": route}


def derived_first_order_q(sol: Solution, x0: float = 1.0, y0: float | None = None) -> E.Expr:
    """q(h) = -C/B from the actual reduction, frozen at (x0, y0)."""
    if y0 is None:
        y0 = float(np.mean(sol.box["y"]))
    C_, B_, _ = reduced_coefficients(sol.spec, sol.params.case)
    q = -C_ / B_
    return E.substitute(q, {"x": x0, "y": y0, "t": H})


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class CaseReport:
    case_id: str
    status: str
    implicated: list
    tiers: dict
    params: dict
    case_params: dict
    seed: int
    message: str = ""

    def as_dict(self) -> dict:
        d = {"case": self.case_id, "status": self.status, "implicated": self.implicated,
             "tiers": self.tiers, "params": self.params, "case_params": self.case_params,
             "seed": self.seed, "tolerances": TOLERANCES}
        if self.message:
            d["message"] = self.message
        return d


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def verify_case(case_id: str, params: ModelParams | None = None,
                case_params: Mapping | None = None, constants: Mapping | None = None,
                seed: int = 42) -> CaseReport:
    spec = get_spec(case_id)
    try:
        sol = build_solution(case_id, params, case_params, constants)
    except (ParameterDegeneracy, ValueError) as err:
        return CaseReport(case_id, "failed", [], {}, {}, {}, seed, str(err))
    values = {k: _jsonable(v) for k, v in sol.values.items()}
    tiers = {}
    try:
        tiers["reduction"] = reduction_check(sol, seed=seed)
        tiers["ansatz_consistency"] = ansatz_consistency_check(sol, seed=seed)
        tiers["closed_form_ode"] = closed_form_ode_check(sol, seed=seed)
        tiers["full_pde"] = full_pde_check(sol, seed=seed)
    except (E.ExprError, specfun.SpecFunError, QuadratureError) as err:
        return CaseReport(case_id, "failed", [], tiers, sol.params.as_dict(), values, seed,
                          f"{type(err).__name__}: {err}")
    implicated = []
    if not tiers["reduction"]["passed"]:
        implicated.append("ansatz")
    elif tiers["ansatz_consistency"]["applicable"] and not tiers["ansatz_consistency"]["passed"]:
        implicated.append("reduced-ode")
    cf = tiers["closed_form_ode"]
    pde_ok = tiers["full_pde"]["passed"]
    if cf["applicable"] and not cf["passed"]:
        if pde_ok:
            if "reduced-ode" not in implicated:
                implicated.append("reduced-ode")
        else:
            implicated.append("closed-form")
    elif not pde_ok and not implicated:
        implicated.append("closed-form")
    status = "verified" if not implicated else "suspected-misprint"
    return CaseReport(case_id, status, implicated, tiers, sol.params.as_dict(), values, seed)
