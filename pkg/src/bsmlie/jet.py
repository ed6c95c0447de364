"""Point vector fields, their second prolongation, and the symmetry test."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import expr as E
from .model import JET_BOX, ModelParams, build_equation, domain_box, t, x, y, U

__all__ = [
    "VectorField", "JetPoint", "ProlongationError", "SymmetryReport",
    "total_derivative", "prolong2", "determining_expression", "check_symmetry",
    "jet_order", "JET2",
]

INDEP = {"t": t, "x": x, "y": y}
JET2 = ("t", "x", "y", "xx", "xy", "yy")


class ProlongationError(E.ExprError):
    pass


def _as_field_expr(e) -> E.Expr:
    e = E.as_expr(e)
    for s in e.free:
        if s.kind == "jet" and s.name != "u":
            raise ValueError(f"vector field coefficient contains derivative {s.name}")
    return e


@dataclass(frozen=True)
class VectorField:
    """xi_t d/dt + xi_x d/dx + xi_y d/dy + eta d/du."""

    xi_t: E.Expr = E.ZERO
    xi_x: E.Expr = E.ZERO
    xi_y: E.Expr = E.ZERO
    eta: E.Expr = E.ZERO
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for f in ("xi_t", "xi_x", "xi_y", "eta"):
            object.__setattr__(self, f, _as_field_expr(getattr(self, f)))

    @property
    def components(self) -> tuple:
        return (self.xi_t, self.xi_x, self.xi_y, self.eta)

    @classmethod
    def from_components(cls, comps, name: str = "") -> "VectorField":
        return cls(*comps, name=name)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField.from_components(
            [E.add(a, b) for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-1) * other

    def __rmul__(self, c) -> "VectorField":
        c = E.as_expr(c)
        return VectorField.from_components([E.mul(c, a) for a in self.components])

    def __neg__(self):
        return (-1) * self

    def apply(self, f: E.Expr) -> E.Expr:
        """Action on a function of (t, x, y, u)."""
        parts = [E.mul(c, E.differentiate(f, v))
                 for c, v in zip(self.components, (t, x, y, U))]
        return E.add(*parts)

    def is_zero(self) -> bool:
        """Exact test: every coefficient expands to the zero constant."""
        return all(E.expand(c) == E.ZERO for c in self.components)

    def with_name(self, name: str) -> "VectorField":
        return VectorField(*self.components, name=name)

    def __repr__(self):
        return (f"VectorField({self.name or '?'}: t={E.to_prefix(self.xi_t)}, "
                f"x={E.to_prefix(self.xi_x)}, y={E.to_prefix(self.xi_y)}, "
                f"u={E.to_prefix(self.eta)})")


@dataclass(frozen=True)
class JetPoint:
    t: float
    x: float
    y: float
    u: float = 0.0
    u_t: float = 0.0
    u_x: float = 0.0
    u_y: float = 0.0
    u_xx: float = 0.0
    u_xy: float = 0.0
    u_yy: float = 0.0

    def __post_init__(self):
        if not self.x > 0:
            raise ValueError("jet points need x > 0")

    def bindings(self) -> dict:
        return dict(self.__dict__)


def jet_order(name: str) -> int:
    return 0 if name == "u" else len(name) - 2


def _index(name: str) -> str:
    return "" if name == "u" else name[2:]


def total_derivative(e: E.Expr, v) -> E.Expr:
    """D_v e, treating the jet symbols as derivatives of u(t, x, y)."""
    v = v.name if isinstance(v, E.Sym) else v
    if v not in INDEP:
        raise ValueError(f"total derivative along {v!r}")
    parts = [E.differentiate(e, v)]
    for s in sorted(e.free, key=lambda s: s.name):
        if s.kind == "jet":
            parts.append(E.mul(E.differentiate(e, s), E.jet(_index(s.name) + v)))
    return E.add(*parts)


def prolong2(X: VectorField) -> dict:
    """Prolonged coefficients eta^J for J in t, x, y, xx, xy, yy."""
    xi = {"t": X.xi_t, "x": X.xi_x, "y": X.xi_y}
    Q = E.add(X.eta, *[E.neg(E.mul(xi[i], E.jet(i))) for i in "txy"])
    DQ = {"": Q}
    out = {}
    for J in JET2:
        base = DQ[J[:-1]] if len(J) > 1 else Q
        d = total_derivative(base, J[-1])
        DQ[J] = d
        out[J] = E.add(d, *[E.mul(xi[i], E.jet(J + i)) for i in "txy"])
    for J, c in out.items():
        high = [s.name for s in c.free if s.kind == "jet" and jet_order(s.name) > 2]
        if high:
            raise ProlongationError(
                f"eta^{J} kept third-order symbols {sorted(high)} after normalisation")
    return out


def _substitute_on_shell(expr: E.Expr, delta: E.Expr) -> E.Expr:
    """Restrict to Delta = 0 by eliminating u_t and its spatial derivatives."""
    ut = E.jet("t")
    solved = E.add(ut, E.neg(delta))
    subs = {ut.name: solved}
    # derivatives of u_t along x, y that may appear in eta^xx, eta^xy, eta^yy
    for K in ("x", "y", "xx", "xy", "yy"):
        name = E.jet("t" + K).name
        if any(s.name == name for s in expr.free):
            d = solved
            for c in K:
                d = total_derivative(d, c)
            subs[name] = d
    left = [s.name for s in expr.free if s.kind == "jet" and s.name.startswith("u_t")
            and s.name not in subs]
    if left:
        raise ProlongationError(f"cannot eliminate {sorted(left)} on the solution manifold")
    return E.substitute(expr, subs)


def determining_expression(X: VectorField, delta: E.Expr) -> E.Expr:
    """pr2 X applied to Delta, restricted to Delta = 0."""
    eta = prolong2(X)
    parts = [X.apply(delta)]
    for J, c in eta.items():
        parts.append(E.mul(c, E.differentiate(delta, E.jet(J))))
    return _substitute_on_shell(E.add(*parts), delta)


@dataclass
class SymmetryReport:
    field: str
    passed: bool
    max_residual: float
    seed: int
    trials: int
    valid: int
    witness: dict | None = None
    residual: complex | None = None

    def as_dict(self) -> dict:
        d = {"field": self.field, "passed": self.passed, "max_residual": self.max_residual,
             "seed": self.seed, "trials": self.trials, "valid_samples": self.valid}
        if self.witness is not None:
            d["witness"] = self.witness
            d["residual"] = [self.residual.real, self.residual.imag]
        return d


def sampling_box(params: ModelParams, expr: E.Expr | None = None) -> dict:
    box = dict(domain_box(params))
    names = E.free_names(expr, "jet") if expr is not None else \
        {E.jet(j).name for j in ("",) + JET2}
    for n in names:
        box[n] = JET_BOX
    return box


def check_symmetry(X: VectorField, params: ModelParams, trials: int = 200, seed: int = 42,
                   tol: float = 1e-9) -> SymmetryReport:
    delta = build_equation(params)
    det = determining_expression(X, delta)
    res = E.is_probably_zero(det, sampling_box(params, det), params.bindings(),
                             trials=trials, seed=seed, tol=tol)
    return SymmetryReport(X.name or "X", res.is_zero, res.max_rel, seed, trials, res.valid,
                          res.witness, res.residual)
