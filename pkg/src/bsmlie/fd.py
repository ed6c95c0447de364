"""Finite differences for the equation as a terminal-value problem.

With tau = T - t the equation reads u_tau = A u where A = A0 + A1 + A2:
A0 is the mixed term, A1 collects the x-derivatives, A2 the y-derivatives, and
the reaction term -r u is split evenly between A1 and A2.  Central second-order
stencils on a uniform grid; Dirichlet data on all four sides.

Schemes:
* ``adi``: modified Craig-Sneyd splitting (theta = 1/3).  The mixed term is
  always explicit, each direction is solved implicitly with a tridiagonal sweep.
  Second order in time.  Intermediate stages receive boundary values from the
  stage recurrence itself (see _FrameActions), which removes the O(dt^2)
  boundary mismatch of taking new-time data for every stage.
* ``explicit``: forward Euler, guarded by the bound
  dt * max(f^2 x^2 / hx^2 + beta^2 / hy^2 + |rho beta x f| / (hx hy) + r) <= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .model import ModelParams

__all__ = [
    "GridSpec", "FDSolution", "FDInstability", "solve", "convergence_order",
    "manufactured", "ConvergenceReport", "explicit_stability_number", "thomas",
    "DEFAULT_LADDER",
]

THETA = 1.0 / 3.0
BLOWUP = 1e12
DEFAULT_LADDER = ((21, 21, 20), (41, 41, 40), (81, 81, 80))


class FDInstability(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple = (0.5, 2.0)
    y_range: tuple = (0.2, 1.5)
    t_range: tuple = (0.1, 1.0)
    nx: int = 41
    ny: int = 41
    nt: int = 40
    scheme: str = "adi"
    x_stencil: str = "central"     # "forward" gives a first-order u_x (harness check)

    def __post_init__(self):
        if min(self.nx, self.ny, self.nt) < 3:
            raise ValueError("Nx, Ny, Nt must all be >= 3")
        if self.scheme not in ("adi", "explicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.x_stencil not in ("central", "forward"):
            raise ValueError(f"unknown x stencil {self.x_stencil!r}")
        for lo, hi in (self.x_range, self.y_range, self.t_range):
            if not hi > lo:
                raise ValueError("empty range")
        if self.x_range[0] <= 0:
            raise ValueError("x must stay positive")

    @property
    def x(self):
        return np.linspace(*self.x_range, self.nx)

    @property
    def y(self):
        return np.linspace(*self.y_range, self.ny)

    @property
    def t(self):
        return np.linspace(*self.t_range, self.nt + 1)

    @property
    def hx(self):
        return (self.x_range[1] - self.x_range[0]) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y_range[1] - self.y_range[0]) / (self.ny - 1)

    @property
    def dt(self):
        return (self.t_range[1] - self.t_range[0]) / self.nt

    def as_dict(self):
        return {"x_range": list(self.x_range), "y_range": list(self.y_range),
                "t_range": list(self.t_range), "nx": self.nx, "ny": self.ny, "nt": self.nt,
                "scheme": self.scheme, "x_stencil": self.x_stencil}


@dataclass
class FDSolution:
    values: np.ndarray       # (levels, nx, ny)
    times: np.ndarray
    grid: GridSpec
    params: ModelParams
    case_id: str | None = None

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def _coefficients(params: ModelParams, grid: GridSpec):
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    if params.hyperbolic:
        if grid.y_range[0] <= params.m <= grid.y_range[1]:
            raise ValueError("the y-range contains the pole y = m of f = k/(y - m)")
        f = params.vol.k / (Y - params.m)
    else:
        f = np.full_like(Y, params.vol.f0)
    drift = params.alpha * (params.m - Y) - params.beta * params.rho * (params.mu - params.r) / f
    return {
        "xx": 0.5 * f ** 2 * X ** 2, "xy": params.rho * params.beta * X * f,
        "yy": np.full_like(X, 0.5 * params.beta ** 2), "x": params.r * X, "y": drift,
        "f": f, "X": X,
    }


def explicit_stability_number(params: ModelParams, grid: GridSpec) -> float:
    c = _coefficients(params, grid)
    f, X = c["f"], c["X"]
    hx, hy = grid.hx, grid.hy
    lam = (f ** 2 * X ** 2 / hx ** 2 + params.beta ** 2 / hy ** 2
           + np.abs(params.rho * params.beta * X * f) / (hx * hy) + params.r)
    return float(grid.dt * lam.max())


class _Operators:
    """Interior action of A0, A1, A2 and the tridiagonal bands of A1, A2."""

    def __init__(self, params: ModelParams, grid: GridSpec):
        c = _coefficients(params, grid)
        hx, hy = grid.hx, grid.hy
        I = (slice(1, -1), slice(1, -1))
        self.cxx, self.cxy, self.cyy = c["xx"][I], c["xy"][I], c["yy"][I]
        self.cx, self.cy = c["x"][I], c["y"][I]
        half_r = 0.5 * params.r
        self.mix = self.cxy / (4 * hx * hy)
        if grid.x_stencil == "central":
            lo = self.cxx / hx ** 2 - self.cx / (2 * hx)
            up = self.cxx / hx ** 2 + self.cx / (2 * hx)
            di = -2 * self.cxx / hx ** 2 - half_r
        else:
            lo = self.cxx / hx ** 2
            up = self.cxx / hx ** 2 + self.cx / hx
            di = -2 * self.cxx / hx ** 2 - self.cx / hx - half_r
        self.x_bands = (lo, di, up)
        self.y_bands = (self.cyy / hy ** 2 - self.cy / (2 * hy),
                        -2 * self.cyy / hy ** 2 - half_r,
                        self.cyy / hy ** 2 + self.cy / (2 * hy))

    def A0(self, V):
        return self.mix * (V[2:, 2:] - V[2:, :-2] - V[:-2, 2:] + V[:-2, :-2])

    def A1(self, V):
        lo, di, up = self.x_bands
        return lo * V[:-2, 1:-1] + di * V[1:-1, 1:-1] + up * V[2:, 1:-1]

    def A2(self, V):
        lo, di, up = self.y_bands
        return lo * V[1:-1, :-2] + di * V[1:-1, 1:-1] + up * V[1:-1, 2:]

    def A(self, V):
        return self.A0(V) + self.A1(V) + self.A2(V)


def thomas(lo, di, up, rhs):
    """Solve tridiagonal systems along axis 0; all inputs shaped (n, m)."""
    n = rhs.shape[0]
    c = np.empty_like(rhs)
    d = np.empty_like(rhs)
    c[0] = up[0] / di[0]
    d[0] = rhs[0] / di[0]
    for i in range(1, n):
        den = di[i] - lo[i] * c[i - 1]
        c[i] = up[i] / den
        d[i] = (rhs[i] - lo[i] * d[i - 1]) / den
    out = np.empty_like(rhs)
    out[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        out[i] = d[i] - c[i] * out[i + 1]
    return out


def _implicit(ops: _Operators, direction: str, rhs_int, Vnew, k):
    """Solve (I - k A_dir) Y = rhs on the interior; Vnew carries the boundary values."""
    if direction == "x":
        lo, di, up = ops.x_bands
        r = rhs_int.copy()
        r[0] += k * lo[0] * Vnew[0, 1:-1]
        r[-1] += k * up[-1] * Vnew[-1, 1:-1]
        return thomas(-k * lo, 1 - k * di, -k * up, r)
    lo, di, up = ops.y_bands
    r = rhs_int.copy()
    r[:, 0] += k * lo[:, 0] * Vnew[1:-1, 0]
    r[:, -1] += k * up[:, -1] * Vnew[1:-1, -1]
    return thomas((-k * lo).T, (1 - k * di).T, (-k * up).T, r.T).T


def _with_boundary(interior, frame):
    V = frame.copy()
    V[1:-1, 1:-1] = interior
    return V


class _FrameActions:
    """(g, A0 g, A1 g, A2 g) at the boundary nodes for a boundary function g.

    Derivatives use central differences at spacings h and h/2 combined by
    Richardson extrapolation, so the stage values track the exact operator to
    fourth order in h while constants and affine data stay exact.
    """

    def __init__(self, params: ModelParams, grid: GridSpec, boundary: Callable):
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        mask = np.zeros(X.shape, dtype=bool)
        mask[0], mask[-1], mask[:, 0], mask[:, -1] = True, True, True, True
        self.mask = mask
        c = _coefficients(params, grid)
        self.c = {n: c[n][mask] for n in ("xx", "xy", "yy", "x", "y")}
        self.r = params.r
        self.x, self.y = X[mask], Y[mask]
        self.hx, self.hy = grid.hx, grid.hy
        self.boundary = boundary
        self.shape = X.shape
        lo_y = self.y.min() - self.hy
        self.valid = bool(self.x.min() - self.hx > 0 and not (
            params.hyperbolic and min(lo_y, self.y.max() + self.hy) <= params.m
            <= max(lo_y, self.y.max() + self.hy)))

    def _ops(self, vals, sx, sy, g):
        gxp, gxm, gyp, gym, gpp, gpm, gmp, gmm = vals
        c = self.c
        a0 = c["xy"] * (gpp - gpm - gmp + gmm) / (4 * sx * sy)
        a1 = c["xx"] * (gxp - 2 * g + gxm) / sx ** 2 + c["x"] * (gxp - gxm) / (2 * sx) \
            - 0.5 * self.r * g
        a2 = c["yy"] * (gyp - 2 * g + gym) / sy ** 2 + c["y"] * (gyp - gym) / (2 * sy) \
            - 0.5 * self.r * g
        return a0, a1, a2

    def __call__(self, tv):
        # one boundary call for every stencil point so evaluators can share work
        offsets = [(0.0, 0.0)]
        for f in (1.0, 0.5):
            sx, sy = f * self.hx, f * self.hy
            offsets += [(sx, 0), (-sx, 0), (0, sy), (0, -sy),
                        (sx, sy), (sx, -sy), (-sx, sy), (-sx, -sy)]
        xs = np.concatenate([self.x + dx for dx, _ in offsets])
        ys = np.concatenate([self.y + dy for _, dy in offsets])
        vals = np.asarray(self.boundary(tv, xs, ys), dtype=float) * np.ones_like(xs)
        vals = vals.reshape(len(offsets), -1)
        g = vals[0]
        coarse = self._ops(vals[1:9], self.hx, self.hy, g)
        fine = self._ops(vals[9:17], 0.5 * self.hx, 0.5 * self.hy, g)
        out = []
        for v in [g] + [(4 * f - c_) / 3 for f, c_ in zip(fine, coarse)]:
            full = np.zeros(self.shape)
            full[self.mask] = v
            out.append(full)
        return out


def solve(params: ModelParams, grid: GridSpec, terminal, boundary: Callable,
          retain: str = "final", case_id: str | None = None,
          stage_bc: str = "consistent") -> FDSolution:
    """March backward from t = T to t = t0.

    ``terminal`` is an (nx, ny) array or a callable f(X, Y); ``boundary(t, X, Y)``
    gives the Dirichlet data.  With ``stage_bc='consistent'`` the intermediate ADI
    stages get boundary values from the same stage recurrence applied to the
    boundary function (see _FrameActions); ``'frame'`` uses the
    data at the new time level for every stage.
    """
    if stage_bc not in ("consistent", "frame"):
        raise ValueError(f"unknown stage_bc {stage_bc!r}")
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    ts = grid.t
    U = np.array(terminal(X, Y) if callable(terminal) else terminal, dtype=float)
    if U.shape != X.shape:
        raise ValueError(f"terminal data has shape {U.shape}, grid is {X.shape}")
    if grid.scheme == "explicit":
        nu = explicit_stability_number(params, grid)
        if nu > 1:
            raise ValueError(f"explicit scheme violates its stability bound ({nu:.3g} > 1); "
                             "increase nt")
    ops = _Operators(params, grid)
    ghost = None
    if grid.scheme == "adi" and stage_bc == "consistent":
        ghost = _FrameActions(params, grid, boundary)
        ghost = ghost if ghost.valid else None
    dt = grid.dt
    kept = [U.copy()]
    times = [ts[-1]]

    def frame(tv):
        B = np.asarray(boundary(tv, X, Y), dtype=float)
        return np.broadcast_to(B, X.shape)

    F_old = frame(ts[-1])
    U = U.copy()
    U[0], U[-1], U[:, 0], U[:, -1] = F_old[0], F_old[-1], F_old[:, 0], F_old[:, -1]
    g_old = ghost(ts[-1]) if ghost is not None else None
    for n in range(grid.nt, 0, -1):
        F_new = frame(ts[n - 1])
        if grid.scheme == "explicit":
            Ui = U[1:-1, 1:-1] + dt * ops.A(U)
        elif ghost is not None:
            g_new = ghost(ts[n - 1])
            Ui = _mcs_step(ops, U, _stage_frames(g_old, g_new, dt), dt)
            g_old = g_new
        else:
            Ui = _mcs_step(ops, U, [F_new] * 5, dt)
        U = _with_boundary(Ui, F_new)
        if not np.all(np.isfinite(U)) or np.abs(U).max() > BLOWUP:
            raise FDInstability(f"solution exceeded {BLOWUP:g} at t = {ts[n - 1]:.6g}")
        if retain == "all":
            kept.append(U.copy())
            times.append(ts[n - 1])
    if retain != "all":
        kept.append(U.copy())
        times.append(ts[0])
    return FDSolution(np.array(kept), np.array(times), grid, params, case_id)


def _stage_frames(old, new, dt):
    """Boundary values of Y1, Y2 (with Y2 reused explicitly), Yt1, Yt2."""
    k = THETA * dt
    g, a0, a1, a2 = old
    _, b0, b1, b2 = new
    y0 = g + dt * (a0 + a1 + a2)
    y1 = y0 + k * (b1 - a1)
    y2 = y1 + k * (b2 - a2)
    yt0 = y0 + k * (b0 - a0) + (0.5 - THETA) * dt * ((b0 + b1 + b2) - (a0 + a1 + a2))
    yt1 = yt0 + k * (b1 - a1)
    yt2 = yt1 + k * (b2 - a2)
    return [y1, y2, y2, yt1, yt2]


def _mcs_step(ops: _Operators, U, frames, dt):
    """One modified Craig-Sneyd step; frames carry the boundary of each implicit stage."""
    f1, f2, f2x, ft1, ft2 = frames
    k = THETA * dt
    A0u, A1u, A2u = ops.A0(U), ops.A1(U), ops.A2(U)
    Y0 = U[1:-1, 1:-1] + dt * (A0u + A1u + A2u)
    Y1 = _implicit(ops, "x", Y0 - k * A1u, f1, k)
    Y2 = _implicit(ops, "y", Y1 - k * A2u, f2, k)
    Y2f = _with_boundary(Y2, f2x)
    A0y = ops.A0(Y2f)
    Yh0 = Y0 + k * (A0y - A0u)
    Yt0 = Yh0 + (0.5 - THETA) * dt * (ops.A(Y2f) - (A0u + A1u + A2u))
    Yt1 = _implicit(ops, "x", Yt0 - k * A1u, ft1, k)
    return _implicit(ops, "y", Yt1 - k * A2u, ft2, k)


# ---------------------------------------------------------------------------
# manufactured solutions and convergence
# ---------------------------------------------------------------------------

def manufactured(name: str, params: ModelParams, part: str = "real", **kw) -> Callable:
    """u(t, X, Y) for 'x', 'exp-rt' or a catalog case id."""
    if name == "x":
        return lambda tv, X, Y: np.broadcast_to(X, np.broadcast(X, Y).shape).astype(float)
    if name == "exp-rt":
        return lambda tv, X, Y: np.exp(params.r * tv) * np.ones(np.broadcast(X, Y).shape)
    from .solutions.verify import build_solution
    sol = build_solution(name, params, **kw)
    take = np.real if part == "real" else np.imag

    def u(tv, X, Y):
        T = np.broadcast_to(np.asarray(tv, dtype=float), np.broadcast(X, Y).shape)
        return take(sol.evaluate(T, X, Y))
    return u


@dataclass
class ConvergenceReport:
    case: str
    levels: list
    errors: list
    orders: list | None
    exact: bool
    monotone: bool
    scheme: str
    x_stencil: str

    def as_dict(self) -> dict:
        return {"case": self.case, "levels": [list(l) for l in self.levels],
                "errors": self.errors, "orders": self.orders, "exact": self.exact,
                "monotone": self.monotone, "scheme": self.scheme, "x_stencil": self.x_stencil}


def convergence_order(case: str, params: ModelParams, levels=DEFAULT_LADDER,
                      scheme: str = "adi", x_stencil: str = "central",
                      x_range=(0.5, 2.0), y_range=None, t_range=(0.1, 1.0),
                      exact_tol: float = 1e-10, **case_kw) -> ConvergenceReport:
    """Max-norm errors at t0 along a refinement ladder and log2 ratios between levels."""
    if len(levels) < 3:
        raise ValueError("a ladder needs at least three levels")
    if y_range is None:
        y_range = (params.m + 0.2, params.m + 1.5)
    u = manufactured(case, params, **case_kw)
    errors = []
    for nx, ny, nt in levels:
        grid = GridSpec(tuple(x_range), tuple(y_range), tuple(t_range), nx, ny, nt, scheme,
                        x_stencil)
        sol = solve(params, grid, lambda X, Y: u(t_range[1], X, Y), u, case_id=case)
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        errors.append(float(np.max(np.abs(sol.final - u(t_range[0], X, Y)))))
    exact = max(errors) < exact_tol
    monotone = all(e1 > e2 for e1, e2 in zip(errors, errors[1:]))
    orders = None
    if monotone and not exact:
        orders = [math.log2(e1 / e2) for e1, e2 in zip(errors, errors[1:])]
    return ConvergenceReport(case, [tuple(l) for l in levels], errors, orders, exact,
                             monotone, scheme, x_stencil)
