import dataclasses
import threading

import numpy as np
import pytest

from bsmlie import expr as E
from bsmlie.model import ModelParams, random_params
from bsmlie.solutions import CASE_IDS, get_spec
from bsmlie.solutions import catalog
from bsmlie.solutions.quadrature import LinearFirstOrder
from bsmlie.solutions.verify import (ParameterDegeneracy, Solution, ansatz_consistency_check,
                                     build_solution, closed_form_ode_check,
                                     derived_first_order_q, full_pde_check, reduction_check,
                                     verify_case)

# status of every entry as printed, at default parameters
EXPECTED = {
    "2.1-1": ["reduced-ode"], "2.1-2": [], "2.1-3": [], "2.1-4": ["reduced-ode"],
    "2.1-5": ["ansatz"], "2.2-1": ["closed-form"], "2.2-2": ["reduced-ode"],
    "2.2-3": ["reduced-ode"], "2.2-4": ["closed-form"], "2.2-5": ["reduced-ode"],
    "2.2-6": ["reduced-ode"], "2.3-1": [], "2.3-2": ["closed-form"],
    "2.3-3": ["ansatz", "closed-form"], "2.3-4": ["reduced-ode"],
}
CONSISTENT_ANSATZ = ["2.1-2", "2.1-3", "2.2-1", "2.2-4", "2.3-1", "2.3-2"]


def test_catalog_has_fifteen_cases():
    assert len(CASE_IDS) == 15
    fams = [get_spec(c).family for c in CASE_IDS]
    assert fams.count("const") == 5 and fams.count("hyp") == 6 and fams.count("hyp-g0") == 4


@pytest.fixture(scope="module")
def reports():
    return {c: verify_case(c) for c in CASE_IDS}


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_case_status(reports, case_id):
    rep = reports[case_id]
    assert rep.implicated == EXPECTED[case_id]
    assert rep.status == ("verified" if not EXPECTED[case_id] else "suspected-misprint")


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_flagged_cases_log_residuals(reports, case_id):
    d = reports[case_id].as_dict()
    assert set(d["tiers"]) == {"reduction", "ansatz_consistency", "closed_form_ode", "full_pde"}
    cf = d["tiers"]["closed_form_ode"]
    if cf["applicable"]:
        assert np.isfinite(cf["max_residual"])
    assert "max_residual" in d["tiers"]["full_pde"]


@pytest.mark.parametrize("case_id", ["2.1-2", "2.1-3", "2.3-1"])
def test_verified_cases_pass_all_tiers(reports, case_id):
    tiers = reports[case_id].tiers
    assert tiers["ansatz_consistency"]["max_spread"] < 1e-6
    assert tiers["closed_form_ode"]["max_residual"] < 1e-8
    assert tiers["full_pde"]["max_residual"] < 1e-6


@pytest.mark.parametrize("case_id", CONSISTENT_ANSATZ)
def test_ansatz_consistency_at_random_draws(case_id):
    fam = get_spec(case_id).family
    rng = np.random.default_rng(5)
    for _ in range(3):
        sol = build_solution(case_id, random_params(fam, rng))
        assert ansatz_consistency_check(sol)["passed"]


@pytest.mark.parametrize("case_id", [c for c in CASE_IDS if "C1" in get_spec(c).constants])
def test_linearity_in_constants(case_id):
    s1 = build_solution(case_id)
    c = {k: 2 * s1.values[k] for k in ("C1", "C2")}
    s2 = build_solution(case_id, constants=c)
    rng = np.random.default_rng(2)
    pts = {n: rng.uniform(*s1.box[n], 10) for n in ("t", "x", "y")}
    u1 = s1.evaluate(pts["t"], pts["x"], pts["y"])
    u2 = s2.evaluate(pts["t"], pts["x"], pts["y"])
    assert np.allclose(u2, 2 * u1, rtol=1e-12, atol=0)


def test_sign_flip_in_prefactor_is_caught():
    spec = get_spec("2.3-2")
    phi = spec.aux["phi"]
    # prefactor carries exp(phi); dividing by exp(2 phi) flips the sign of phi
    bad = dataclasses.replace(spec, prefactor=spec.prefactor / E.exp(2 * phi))
    sol = build_solution("2.3-2")
    mutant = Solution(bad, sol.params, sol.values, sol.box)
    assert reduction_check(sol)["passed"]
    assert ansatz_consistency_check(sol)["passed"]
    red = reduction_check(mutant)
    cons = ansatz_consistency_check(mutant)
    assert not (red["passed"] and cons["passed"])


def test_quadrature_reproduces_closed_form():
    sol = build_solution("2.1-2")
    assert sol.spec.h == catalog.t
    solver = sol.quadrature()
    tv = np.linspace(*sol.box["t"], 7)
    quad = solver(tv)
    exact = sol.w(tv)
    ratio = quad / exact
    assert np.allclose(ratio, ratio[0], rtol=1e-9)


def test_quadrature_full_pde_route():
    sol = build_solution("2.1-2")
    rep = full_pde_check(sol, w_solver=sol.quadrature())
    assert rep["route"] == "quadrature" and rep["passed"]


def test_case_2_1_4_displayed_q_fails_and_derived_q_passes():
    sol = build_solution("2.1-4")
    shown = full_pde_check(sol)
    assert not shown["passed"]
    q = derived_first_order_q(sol)
    fixed = full_pde_check(sol, w_solver=sol.quadrature(q))
    assert fixed["max_residual"] < 1e-6


def test_quadrature_is_thread_safe():
    solver = LinearFirstOrder(lambda s: -0.3 * s, 0.0)
    ts = np.linspace(0.1, 2.0, 40)
    want = np.exp(-0.15 * ts ** 2)
    out = {}

    def work(i):
        out[i] = solver(ts[::-1] if i % 2 else ts)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    for i, v in out.items():
        got = v[::-1] if i % 2 else v
        assert np.allclose(got, want, rtol=1e-9)


def test_unknown_case_parameters_rejected():
    with pytest.raises(ValueError):
        build_solution("2.1-2", case_params={"zeta": 1.0})
    with pytest.raises(ValueError):
        build_solution("2.1-2", constants={"C7": 1.0})


def test_wrong_family_rejected():
    with pytest.raises(ValueError):
        build_solution("2.2-1", ModelParams.for_case("const"))


def test_degenerate_time_range_rejected():
    # rho^2 + alpha t vanishes at t = 0.5 when alpha = -0.18
    with pytest.raises(ParameterDegeneracy):
        build_solution("2.1-4", ModelParams.for_case("const", alpha=-0.18))


@pytest.mark.parametrize("case_id", [c for c in CASE_IDS if get_spec(c).source == "indicial"])
def test_euler_roots_are_indicial_roots(case_id):
    sol = build_solution(case_id)
    # a2 = c2 h^2, a1 = c1 h, a0 = c0, so h = 1 exposes the constants
    c0, c1, c2 = (complex(E.eval_numeric(c, {**sol.bindings, "h": 1.0})) for c in sol.spec.ode)
    for lam in (sol.values["lam1"], sol.values["lam2"]):
        assert abs(c2 * lam * (lam - 1) + c1 * lam + c0) < 1e-12 * (abs(c0) + abs(c1) + abs(c2))


def test_case_2_1_5_does_not_reduce():
    sol = build_solution("2.1-5")
    red = reduction_check(sol)
    assert not red["passed"] and "witness" in red
