"""The Black-Scholes-Merton equation with stochastic volatility.

Equation, with u = u(t, x, y) and volatility profile f(y):

    u_t + f^2 x^2 u_xx / 2 + rho beta x f u_xy + beta^2 u_yy / 2 + r x u_x
        + (alpha (m - y) - beta rho (mu - r) / f) u_y - r u = 0

Two profiles are supported: f = f0 (constant) and f = k / (y - m).  For the
hyperbolic profile the drift collapses to g (m - y) / 2 with
g = 2 (alpha + rho beta (mu - r) / k); tuning alpha so that g = 0 gives a third
case with a different symmetry algebra.

Parameters appear in expressions as symbols; numeric values enter through
:meth:`ModelParams.bindings`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

import numpy as np

from . import expr as E

__all__ = [
    "ConstVol", "HyperbolicVol", "ModelParams", "ParamError",
    "t", "x", "y", "U", "JETS", "PARAM_SYMS",
    "build_equation", "drift_identity_check", "alpha_expr", "g_expr", "f_expr",
    "default_params", "random_params", "DEFAULT_BOX", "domain_box", "CASES",
    "JET_BOX",
]

t, x, y = E.var("t x y")
U = E.jet("")
JETS = {n: E.jet(n) for n in ("", "t", "x", "y", "xx", "xy", "yy")}

PARAM_NAMES = ("r", "rho", "m", "mu", "alpha", "beta", "f0", "k")
PARAM_SYMS = {n: E.param(n) for n in PARAM_NAMES}
r, rho, m, mu, alpha, beta, f0, k = (PARAM_SYMS[n] for n in PARAM_NAMES)

CASES = ("const", "hyp", "hyp-g0")

# ranges for random parameter draws
DRAW_RANGES = {
    "r": (0.01, 0.1), "rho": (-0.8, 0.8), "m": (-0.5, 0.5), "mu": (0.0, 0.2),
    "alpha": (0.5, 2.0), "beta": (0.2, 0.8), "f0": (0.3, 1.0), "k": (0.5, 1.5),
}
JET_BOX = (-2.0, 2.0)


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class ConstVol:
    f0: float


@dataclass(frozen=True)
class HyperbolicVol:
    k: float


@dataclass(frozen=True)
class ModelParams:
    r: float = 0.05
    rho: float = 0.3
    m: float = 0.0
    mu: float = 0.1
    alpha: float = 1.2
    beta: float = 0.4
    vol: Union[ConstVol, HyperbolicVol] = field(default_factory=lambda: ConstVol(0.5))

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ParamError(f"|rho| must be < 1, got {self.rho}")
        if self.beta == 0:
            raise ParamError("beta must be nonzero")
        if isinstance(self.vol, ConstVol):
            if self.vol.f0 == 0:
                raise ParamError("f0 must be nonzero")
        elif isinstance(self.vol, HyperbolicVol):
            if self.vol.k == 0:
                raise ParamError("k must be nonzero")
        else:
            raise ParamError(f"unknown volatility case {self.vol!r}")

    # -- derived ---------------------------------------------------------
    @property
    def hyperbolic(self) -> bool:
        return isinstance(self.vol, HyperbolicVol)

    def _drift_ratio(self) -> float:
        return self.rho * self.beta * (self.mu - self.r) / self.vol.k

    @property
    def g(self) -> float:
        if not self.hyperbolic:
            raise ParamError("g is only defined for the hyperbolic profile")
        return 2 * (self.alpha + self._drift_ratio())

    @property
    def case(self) -> str:
        if not self.hyperbolic:
            return "const"
        return "hyp-g0" if self.g == 0 else "hyp"

    def tuned_g0(self) -> "ModelParams":
        """Same parameters with alpha chosen so that g vanishes."""
        if not self.hyperbolic:
            raise ParamError("g = 0 tuning needs the hyperbolic profile")
        return replace(self, alpha=-self._drift_ratio())

    def bindings(self) -> dict:
        d = {"r": self.r, "rho": self.rho, "m": self.m, "mu": self.mu,
             "alpha": self.alpha, "beta": self.beta}
        if self.hyperbolic:
            d["k"] = self.vol.k
        else:
            d["f0"] = self.vol.f0
        return d

    def as_dict(self) -> dict:
        d = self.bindings()
        d["vol_case"] = "hyperbolic" if self.hyperbolic else "const"
        if self.hyperbolic:
            d["g"] = self.g
        d["case"] = self.case
        return d

    # -- construction ----------------------------------------------------
    @classmethod
    def for_case(cls, case: str, **overrides) -> "ModelParams":
        """Default parameters for 'const', 'hyp' or 'hyp-g0', with overrides."""
        if case not in CASES:
            raise ParamError(f"unknown case {case!r}; expected one of {CASES}")
        base = {"r": 0.05, "rho": 0.3, "m": 0.0, "mu": 0.1, "alpha": 1.2, "beta": 0.4}
        f0v = overrides.pop("f0", 0.5)
        kv = overrides.pop("k", 0.8)
        unknown = set(overrides) - set(base)
        if unknown:
            raise ParamError(f"unknown parameter keys: {sorted(unknown)}")
        base.update({n: float(v) for n, v in overrides.items()})
        if case == "const":
            return cls(vol=ConstVol(float(f0v)), **base)
        p = cls(vol=HyperbolicVol(float(kv)), **base)
        if case == "hyp-g0":
            p = p.tuned_g0()
        elif p.g == 0:
            raise ParamError("these parameters give g = 0; use case 'hyp-g0'")
        return p

    @classmethod
    def from_mapping(cls, case: str, data: Mapping) -> "ModelParams":
        allowed = set(PARAM_NAMES)
        unknown = set(data) - allowed
        if unknown:
            raise ParamError(f"unknown parameter keys: {sorted(unknown)}")
        return cls.for_case(case, **dict(data))

    @classmethod
    def from_json(cls, case: str, path) -> "ModelParams":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ParamError("parameter file must hold a JSON object")
        return cls.from_mapping(case, data)


def default_params(case: str = "const") -> ModelParams:
    return ModelParams.for_case(case)


def random_params(case: str, rng: np.random.Generator) -> ModelParams:
    vals = {n: float(rng.uniform(*DRAW_RANGES[n])) for n in PARAM_NAMES}
    return ModelParams.for_case(case, **vals)


DEFAULT_BOX = {"t": (0.1, 1.0), "x": (0.5, 2.0), "y": (0.2, 1.5)}


def domain_box(params: ModelParams) -> dict:
    """Default sampling box; y is measured from the mean level m."""
    lo, hi = DEFAULT_BOX["y"]
    return {"t": DEFAULT_BOX["t"], "x": DEFAULT_BOX["x"], "y": (params.m + lo, params.m + hi)}


# ---------------------------------------------------------------------------
# symbolic pieces
# ---------------------------------------------------------------------------

def alpha_expr(case: str) -> E.Expr:
    """alpha, or its tuned value -rho beta (mu - r) / k when g = 0."""
    if case == "hyp-g0":
        return -rho * beta * (mu - r) / k
    return alpha


def g_expr(case: str) -> E.Expr:
    if case == "const":
        raise ParamError("g is only defined for the hyperbolic profile")
    return 2 * (alpha_expr(case) + rho * beta * (mu - r) / k)


def f_expr(case: str) -> E.Expr:
    return f0 if case == "const" else k / (y - m)


def build_equation(params_or_case) -> E.Expr:
    """Left side of the equation as an Expr in jet coordinates; u_t enters with coefficient 1."""
    case = params_or_case.case if isinstance(params_or_case, ModelParams) else params_or_case
    if case not in CASES:
        raise ParamError(f"unknown case {case!r}")
    f = f_expr(case)
    a = alpha_expr(case)
    J = JETS
    return E.add(
        J["t"],
        E.HALF * f ** 2 * x ** 2 * J["xx"],
        rho * beta * x * f * J["xy"],
        E.HALF * beta ** 2 * J["yy"],
        r * x * J["x"],
        (a * (m - y) - beta * rho * (mu - r) / f) * J["y"],
        -r * J[""],
    )


def drift_identity_check(params: ModelParams, trials: int = 200, seed: int = 42) -> E.ZeroTest:
    """alpha (m - y) - beta rho (mu - r)(y - m)/k equals g (m - y)/2 identically in y."""
    if not params.hyperbolic:
        raise ParamError("drift identity applies to the hyperbolic profile")
    case = params.case
    lhs = alpha_expr(case) * (m - y) - beta * rho * (mu - r) * (y - m) / k
    rhs = E.HALF * g_expr(case) * (m - y)
    return E.is_probably_zero(lhs - rhs, {"y": domain_box(params)["y"]},
                              params.bindings(), trials=trials, seed=seed)
