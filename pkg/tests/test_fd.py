import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsmlie import fd
from bsmlie.model import CASES, ModelParams


def _grid(p, nx=41, ny=41, nt=40, **kw):
    return fd.GridSpec(y_range=(p.m + 0.2, p.m + 1.5), nx=nx, ny=ny, nt=nt, **kw)


def _solve_exact(p, grid, name):
    u = fd.manufactured(name, p)
    sol = fd.solve(p, grid, lambda X, Y: u(grid.t_range[1], X, Y), u)
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    return np.abs(sol.final - u(grid.t_range[0], X, Y)).max()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(CASES), st.integers(3, 30), st.integers(3, 30), st.integers(3, 40))
def test_u_equals_x_is_reproduced_on_any_adi_grid(case, nx, ny, nt):
    p = ModelParams.for_case(case)
    assert _solve_exact(p, _grid(p, nx, ny, nt), "x") < 1e-10


@pytest.mark.parametrize("case", CASES)
def test_u_equals_x_explicit(case):
    p = ModelParams.for_case(case)
    g = _grid(p, 15, 15, 10, scheme="explicit")
    nt = int(np.ceil(10 * fd.explicit_stability_number(p, g))) + 1
    assert _solve_exact(p, _grid(p, 15, 15, nt, scheme="explicit"), "x") < 1e-10


@pytest.mark.parametrize("case", CASES)
def test_exp_rt_on_40_by_40_by_100(case):
    p = ModelParams.for_case(case)
    assert _solve_exact(p, _grid(p, 40, 40, 100), "exp-rt") < 1e-8


def test_zero_data_stays_zero():
    p = ModelParams.for_case("hyp")
    g = _grid(p, 21, 21, 10, )
    sol = fd.solve(p, g, np.zeros((21, 21)), lambda t, X, Y: 0.0 * X, retain="all")
    assert sol.values.shape == (11, 21, 21)
    assert np.all(sol.values == 0)


def test_explicit_stability_bound_enforced():
    p = ModelParams.for_case("const")
    g = _grid(p, 41, 41, 5, scheme="explicit")
    assert fd.explicit_stability_number(p, g) > 1
    with pytest.raises(ValueError, match="stability"):
        fd.solve(p, g, lambda X, Y: X, lambda t, X, Y: X)


def test_blowup_detected():
    p = ModelParams.for_case("const")
    g = _grid(p, 11, 11, 5)
    with pytest.raises(fd.FDInstability):
        fd.solve(p, g, lambda X, Y: 1e13 * X, lambda t, X, Y: 1e13 * X)


@pytest.mark.parametrize("kw", [{"nx": 2}, {"nt": 1}, {"scheme": "cn"}, {"x_range": (0.0, 1.0)}])
def test_grid_validation(kw):
    with pytest.raises(ValueError):
        fd.GridSpec(**kw)


def test_pole_inside_y_range_rejected():
    p = ModelParams.for_case("hyp")
    g = fd.GridSpec(y_range=(-0.5, 1.0), nx=5, ny=5, nt=3)
    with pytest.raises(ValueError, match="pole"):
        fd.solve(p, g, lambda X, Y: X, lambda t, X, Y: X)


def test_thomas_matches_dense_solve():
    rng = np.random.default_rng(4)
    n, m = 9, 3
    lo, up = rng.uniform(-1, 0, (n, m)), rng.uniform(-1, 0, (n, m))
    di = 3 + rng.uniform(0, 1, (n, m))
    rhs = rng.normal(size=(n, m))
    out = fd.thomas(lo, di, up, rhs)
    for j in range(m):
        A = np.diag(di[:, j]) + np.diag(lo[1:, j], -1) + np.diag(up[:-1, j], 1)
        assert np.allclose(A @ out[:, j], rhs[:, j], atol=1e-13)


def test_u_equals_x_ladder_is_exact():
    rep = fd.convergence_order("x", ModelParams.for_case("const"))
    assert rep.exact and rep.orders is None


@pytest.mark.parametrize("case,family", [("2.1-2", "const"), ("2.3-1", "hyp-g0")])
def test_adi_ladder_is_second_order(case, family):
    rep = fd.convergence_order(case, ModelParams.for_case(family))
    assert rep.monotone
    assert all(1.8 <= o <= 2.2 for o in rep.orders), rep.orders
    assert rep.levels[-1][:2] == (81, 81)


def test_first_order_stencil_is_detected():
    rep = fd.convergence_order("2.1-2", ModelParams.for_case("const"), x_stencil="forward")
    assert rep.monotone
    assert rep.orders[0] > rep.orders[1]
    assert rep.orders[-1] < 1.5


def test_non_monotone_errors_get_no_order_claim():
    levels = ((11, 11, 10), (11, 11, 10), (21, 21, 20))
    rep = fd.convergence_order("exp-rt", ModelParams.for_case("const"), levels=levels)
    assert not rep.exact and not rep.monotone and rep.orders is None
    assert len(rep.errors) == 3


def test_ladder_needs_three_levels():
    with pytest.raises(ValueError):
        fd.convergence_order("x", ModelParams.for_case("const"), levels=((5, 5, 5), (9, 9, 9)))


def test_stage_boundary_modes_agree_on_affine_data():
    p = ModelParams.for_case("const")
    g = _grid(p, 17, 13, 9)
    u = fd.manufactured("x", p)
    for mode in ("consistent", "frame"):
        sol = fd.solve(p, g, lambda X, Y: u(1.0, X, Y), u, stage_bc=mode)
        assert np.abs(sol.final - g.x[:, None]).max() < 1e-10
    with pytest.raises(ValueError):
        fd.solve(p, g, lambda X, Y: X, u, stage_bc="ghost")


def test_consistent_stage_boundaries_beat_frame_data_on_exp_rt():
    p = ModelParams.for_case("hyp")
    g = _grid(p, 40, 40, 100)
    u = fd.manufactured("exp-rt", p)
    errs = {}
    for mode in ("consistent", "frame"):
        sol = fd.solve(p, g, lambda X, Y: u(1.0, X, Y), u, stage_bc=mode)
        errs[mode] = np.abs(sol.final - np.exp(p.r * 0.1)).max()
    assert errs["consistent"] < 0.1 * errs["frame"]
