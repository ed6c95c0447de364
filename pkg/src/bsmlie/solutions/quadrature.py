"""w' = q(t) w solved as C exp(int_{t0}^t q) by adaptive quadrature."""
from __future__ import annotations

import threading
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

from .. import expr as E

__all__ = ["LinearFirstOrder", "solve_linear_first_order", "QuadratureError"]


class QuadratureError(RuntimeError):
    pass


class LinearFirstOrder:
    """Callable w(t); integrals are cached per evaluation node."""

    def __init__(self, q, t0: float, C: complex = 1.0, bindings: Mapping | None = None,
                 var: str = "h", tol: float = 1e-10):
        self.t0 = float(t0)
        self.C = complex(C)
        self.tol = tol
        if isinstance(q, E.Expr):
            env = {n: complex(v) for n, v in (bindings or {}).items()}
            extra = E.free_names(q) - set(env) - {var}
            if extra:
                raise E.EvaluationError(f"unbound symbols in q: {sorted(extra)}")
            self._q = lambda s: complex(E.evaluate(q, {**env, var: s}, shape=()))
            self.q_expr = q
        else:
            self._q = lambda s: complex(q(s))
            self.q_expr = None
        self._cache: dict = {self.t0: 0j}
        self._lock = threading.Lock()

    def q(self, s):
        return np.vectorize(self._q, otypes=[complex])(s)

    def _piece(self, lo, hi):
        parts = []
        for take in (np.real, np.imag):
            val, err = integrate.quad(lambda s: take(self._q(s)), lo, hi,
                                      epsabs=self.tol, epsrel=self.tol, limit=200)
            if not np.isfinite(val) or err > 1e3 * self.tol * max(1.0, abs(val)):
                raise QuadratureError(f"quadrature did not converge on [{lo}, {hi}] (err {err:.2e})")
            parts.append(val)
        return complex(parts[0], parts[1])

    def integral(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        with self._lock:
            todo = sorted(set(float(v) for v in ts.ravel()) - set(self._cache))
            for s in todo:
                # integrate from the nearest cached node
                base = min(self._cache, key=lambda c: abs(c - s))
                self._cache[s] = self._cache[base] + self._piece(base, s)
            return np.array([self._cache[float(v)] for v in ts.ravel()]).reshape(ts.shape)

    def __call__(self, ts) -> np.ndarray:
        return self.C * np.exp(self.integral(ts))

    def derivative(self, ts) -> np.ndarray:
        return self.q(np.asarray(ts, dtype=float)) * self(ts)


def solve_linear_first_order(q, t0: float, C: complex = 1.0, bindings: Mapping | None = None,
                             var: str = "h", tol: float = 1e-10) -> LinearFirstOrder:
    return LinearFirstOrder(q, t0, C, bindings, var, tol)
