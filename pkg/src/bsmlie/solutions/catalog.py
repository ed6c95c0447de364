"""The fifteen invariant solutions, transcribed as printed.

Each entry is u = P(t, x, y) * w(h(t, x, y)).  ``ode`` holds the coefficients
(a0, a1, a2) of the displayed reduced equation a2 w'' + a1 w' + a0 w = 0 as
expressions in the reduction variable ``h``; ``closed_form`` is the displayed
w(h) when there is one.  For the Euler and constant-coefficient cases the
closed form is built from the roots of the displayed equation (``lam1``,
``lam2`` are bound numerically); the one first-order equation without a closed
form is integrated by quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .. import expr as E
from ..model import alpha, beta, f0, g_expr, k, m, mu, r, rho, t, x, y

__all__ = ["SolutionSpec", "CATALOG", "CASE_IDS", "get_spec", "H", "CASE_PARAMS"]

H = E.var("h")
half = E.HALF
exp, ln, sqrt = E.exp, E.ln, E.sqrt
KM, KU = E.kummer_m, E.kummer_u
WM, WW = E.whittaker_m, E.whittaker_w
BJ, BY = E.bessel_j, E.bessel_y

k1, k2, a, b, p = E.param("k1 k2 a b p")
C, C1, C2 = E.param("C C1 C2")
lam1, lam2 = E.param("lam1 lam2")

# defaults and admissible ranges for the free parameters of the reductions
CASE_PARAMS = {
    "k1": (0.37, (-1.0, 1.0)),
    "k2": (0.61, (-1.0, 2.0)),
    "k": (0.45, (-1.0, 1.0)),
    "a": (0.23, (-0.5, 0.5)),
    "b": (0.7, (0.1, 1.5)),
    "p": (1.3, (0.5, 2.0)),
}
CONSTANTS = {"C": 1.0, "C1": 1.0, "C2": 0.7}


@dataclass(frozen=True)
class SolutionSpec:
    case_id: str
    family: str                     # const | hyp | hyp-g0
    subalgebra: str
    free_params: tuple              # names of reduction parameters
    prefactor: E.Expr               # P(t, x, y)
    h: E.Expr                       # reduction variable h(t, x, y)
    ode: tuple | None               # (a0, a1, a2) in H, or None when not displayed
    closed_form: E.Expr | None      # w(H)
    source: str                     # displayed | indicial | characteristic | quadrature
    constants: tuple = ()
    aux: dict = field(default_factory=dict)
    box: dict | None = None         # overrides of the default (t, x, y) box
    note: str = ""

    @property
    def order(self) -> int:
        if self.ode is None:
            return 0
        for i in (2, 1, 0):
            c = self.ode[i]
            if not (isinstance(c, E.Const) and c.value == 0):
                return i
        return 0

    @property
    def ansatz(self) -> E.Expr:
        """u with the abstract slot w standing for w(h)."""
        return self.prefactor * E.slot("w")

    def u_expr(self) -> E.Expr:
        if self.closed_form is None:
            raise ValueError(f"{self.case_id} has no closed form; use the quadrature evaluator")
        return self.prefactor * E.substitute(self.closed_form, {H: self.h})


def _euler_w():
    return C1 * H ** lam1 + C2 * H ** lam2


# ---------------------------------------------------------------------------
# constant volatility
# ---------------------------------------------------------------------------

def _c1():
    z = (k2 * rho * beta * f0 ** 2 + beta * rho * (r - mu) - alpha * f0 * (H - m)) ** 2 \
        / (alpha * beta ** 2 * f0 ** 2)
    gam = (k2 * (1 - k2) * f0 ** 2 + 2 * r * (1 - k2) - 2 * k1) / (4 * alpha)
    ode = (((k2 - 1) * (f0 ** 2 * k2 + 2 * r) + 2 * k1),
           2 * (rho * beta * f0 ** 2 * k2 + alpha * (m - H) * f0 + beta * rho * (r - mu)),
           beta ** 2 * f0)
    w = C1 * KM(gam, half, z) + C2 * KU(gam, half, z)
    return SolutionSpec("2.1-1", "const", "{X1 + k1 X3, X2 + k2 X3}", ("k1", "k2"),
                        exp(k1 * t) * x ** k2, y, ode, w, "displayed", ("C1", "C2"),
                        {"z": z, "gamma": gam})


def _c2():
    ea = exp(alpha * t)
    ode = ((beta ** 2 * k ** 2 * f0 * exp(2 * alpha * H)
            + 2 * k * beta * rho * (k2 * f0 ** 2 + alpha * m * f0 / (rho * beta) - (mu - r))
            * exp(alpha * H)
            + (k2 - 1) * f0 * (k2 * f0 ** 2 + 2 * r)),
           2 * f0, E.ZERO)
    w = C * exp(-beta ** 2 * k ** 2 / (4 * alpha) * exp(2 * alpha * H)
                - k * beta * rho / (alpha * f0) * exp(alpha * H)
                * (f0 ** 2 * k2 + alpha * f0 * m / (beta * rho) - mu + r)
                - half * H * (k2 - 1) * (f0 ** 2 * k2 + 2 * r))
    return SolutionSpec("2.1-2", "const", "{X2 + k2 X3, X4 + k X3}", ("k2", "k"),
                        exp(k * ea * y) * x ** k2, t, ode, w, "displayed", ("C",))


def _c3():
    P = exp(alpha / beta ** 2 * y ** 2
            - ((2 * alpha * f0 * m + k * exp(-alpha * t)) / (beta ** 2 * f0)
               + 2 * rho * (r - mu + f0 ** 2 * k2) / (beta * f0)) * y) * x ** k2
    inner = k2 * beta * f0 ** 2 * rho + alpha * f0 * m + beta * rho * (r - mu)
    ode = ((f0 ** 2 * beta ** 2 * (2 * alpha + (k2 - 1) * (f0 ** 2 * k2 + 2 * r))
            + 2 * k * inner * exp(-alpha * H) + k ** 2 * exp(-2 * alpha * H)),
           2 * beta ** 2 * f0 ** 2, E.ZERO)
    w = C * exp(1 / (4 * alpha * beta ** 2 * f0 ** 2)
                * (k ** 2 * exp(-2 * alpha * H) + 4 * k * inner * exp(-alpha * H)
                   - 2 * H * alpha * beta ** 2 * f0 ** 2
                   * (2 * alpha + (k2 - 1) * (f0 ** 2 * k2 + 2 * r))))
    return SolutionSpec("2.1-3", "const", "{X2 + k2 X3, X6 + k X3}", ("k2", "k"),
                        P, t, ode, w, "displayed", ("C",))


def _c4():
    psi = -(2 * k * beta * rho * f0 * exp(alpha * t) + (2 * r - f0 ** 2) * t * alpha) \
        / (2 * f0 ** 2 * (rho ** 2 + alpha * t))
    P = exp(k * y * exp(alpha * t) + alpha * ln(x) ** 2 / (2 * f0 ** 2 * (rho ** 2 + alpha * t))) \
        * x ** psi
    T = H
    c0 = (4 * exp(2 * alpha * T) * k ** 2 * f0 ** 2 * beta ** 2 * (alpha ** 2 * T ** 2 + rho ** 2 - rho ** 4)
          + 4 * exp(alpha * T) * (
              k * f0 * alpha ** 2 * (beta * f0 ** 2 * rho + 2 * f0 * alpha * m - 2 * rho * beta * mu) * T ** 2
              + k * alpha * rho ** 2 * f0 * (beta * f0 ** 2 * rho + 4 * alpha * f0 * m
                                             + 2 * beta * rho * (r - 2 * mu)) * T
              + (2 * k * f0 ** 2 * alpha * m * rho ** 4
                 - 2 * k * beta * rho ** 3 * f0 * (rho ** 2 * (mu - r) + r) - 1))
          - (alpha ** 2 * (2 * r + f0 ** 2) ** 2 * T ** 2
             + 2 * alpha * (f0 ** 4 * rho ** 2 + 2 * f0 ** 2 * (2 * r * rho ** 2 - alpha)
                            + 4 * r ** 2 * rho ** 2) * T
             + 4 * f0 ** 2 * rho ** 2 * (2 * r * rho ** 2 - alpha)))
    ode = (c0, 8 * f0 ** 2 * (rho ** 2 + alpha * T) ** 2, E.ZERO)
    return SolutionSpec("2.1-4", "const", "{X5, X4 + k X3}", ("k",), P, t, ode, None,
                        "quadrature", ("C",), {"psi": psi})


def _c5():
    psi = ((t * (r - half * f0 ** 2) * beta - 2 * rho * f0 * (m - y)) * alpha
           + 2 * beta * rho ** 2 * (mu - r)) / (f0 ** 2 * (rho ** 2 - alpha * t) * beta)
    phi = alpha * beta ** 2 * ln(x) ** 2 - 2 * y * f0 * (
        (rho ** 2 + alpha * t) * (2 * m - y) * alpha * f0
        + alpha * beta * rho * (f0 ** 2 - 2 * mu) * t + 2 * rho ** 3 * beta * (r - mu))
    xi = E.Const(Fraction(1, 8)) * (
        alpha * beta ** 2 * (alpha * H - rho ** 2) * ((2 * r + f0 ** 2) ** 2 - 8 * f0 ** 2 * alpha)
        + rho ** 2 * (beta * rho * (f0 ** 2 - 4 * mu + 2 * r) + 4 * alpha * f0 * m) ** 2)
    w = C * exp(xi / (alpha * beta ** 2 * f0 ** 2 * (alpha * H - rho ** 2))) \
        / sqrt(alpha * H - rho ** 2)
    return SolutionSpec("2.1-5", "const", "{X5, X6}", (), x ** psi * exp(phi), t, None, w,
                        "displayed", ("C",), {"psi": psi, "phi": phi, "xi": xi})


# ---------------------------------------------------------------------------
# hyperbolic volatility, g != 0
# ---------------------------------------------------------------------------

def _h1():
    g = g_expr("hyp")
    s = H - m
    ode = (2 * (a + r * (b - 1)) * s ** 2 + k ** 2 * b * (b - 1),
           (2 * beta * rho * b * k - g * s ** 2) * s,
           beta ** 2 * s ** 2)
    gam = -half + k * b * rho / beta
    kap = ((beta + 2 * k * b * rho) * g + 4 * beta * (a + r * (b - 1))) / (4 * g * beta)
    nu = sqrt(beta ** 2 + 4 * k * (k - rho * beta) * b - 4 * k ** 2 * b ** 2 * (1 - rho ** 2)) \
        / (4 * beta)
    Z = g * s ** 2 / (2 * beta ** 2)
    w = exp(g * s ** 2 / (4 * beta ** 2)) * s ** gam * (C1 * WM(kap, nu, Z) + C2 * WW(kap, nu, Z))
    return SolutionSpec("2.2-1", "hyp", "{X1 + a X3, X2 + b X3}", ("a", "b"),
                        exp(a * t) * x ** b, y, ode, w, "displayed", ("C1", "C2"),
                        {"gamma": gam, "kappa": kap, "nu": nu, "Z": Z})


def _h2():
    g = g_expr("hyp")
    h = x ** g * (y - m) ** (2 * r)
    ode = (a * k ** 2 * (a - r),
           -r * (k ** 2 * g * (2 * a - g * (r + 1)) + 4 * r * rho * beta * (a - g * (r + 1)) * k
                 - 2 * r ** 2 * beta ** 2 * (2 * r - 1)) * H,
           r ** 2 * (4 * beta ** 2 * r ** 2 + g ** 2 * k ** 2 + 4 * r * k * g * rho * beta) * H ** 2)
    return SolutionSpec("2.2-2", "hyp", "{X1 + a X3, X4}", ("a",),
                        exp(a * t) * x ** (1 - a / r), h, ode, _euler_w(), "indicial",
                        ("C1", "C2"))


def _h3():
    g = g_expr("hyp")
    gam = 2 * r * (b - 1) / g
    h = exp(g * t) * (y - m) ** 2
    ode = (b * (k ** 2 * g ** 2 + 4 * r ** 2 * beta ** 2 + 4 * k * g * r * rho * beta)
           - 2 * r * beta ** 2 * (2 * r + g),
           2 * g * beta * (g * (2 * b * k * rho + beta) + 4 * r * beta * (b - 1)) * H,
           4 * beta ** 2 * g ** 2 * H ** 2)
    return SolutionSpec("2.2-3", "hyp", "{X2 + b X3, X4}", ("b",),
                        x ** b * (y - m) ** gam, h, ode, _euler_w(), "indicial", ("C1", "C2"),
                        {"gamma": gam})


def _h4():
    g = g_expr("hyp")
    h = (y - m) ** 2 * exp(-g * t)
    phi = -(g ** 2 * y * (2 * m - y) + 2 * p * beta ** 2 * exp(-g * t)) / (2 * g * beta ** 2)
    gam_a = -((g - 2 * r + 2 * r * b) * beta + 2 * b * rho * k * g) / (g * beta)
    c0 = (2 * p * g ** 2 * H + 6 * g * beta ** 2 * r * b - 8 * beta ** 2 * r ** 2 * b
          + 4 * beta ** 2 * r ** 2 * b ** 2 - 6 * g * beta ** 2 * r + k ** 2 * b ** 2 * g ** 2
          - k ** 2 * b * g ** 2 + 4 * b ** 2 * rho * beta * k * g * r + 2 * g ** 2 * beta ** 2
          + 4 * beta ** 2 * r ** 2 + 4 * g ** 2 * beta * b * rho * k - 4 * b * rho * beta * r * k * g)
    ode = (c0,
           -2 * beta * g * (g * beta + 2 * b * rho * k * g + 4 * beta * r * (b - 1)) * H,
           4 * g ** 2 * beta ** 2 * H ** 2)
    gam_b = ((4 * r * (b - 1) + 3 * g) * beta + 2 * b * k * g * rho) / (4 * g * beta)
    n = sqrt(4 * (rho ** 2 - 1) * k ** 2 * b ** 2 - 4 * k * (4 * beta * rho - k) * b + beta ** 2) \
        / (2 * beta)
    arg = sqrt(2 * p * H) / beta
    w = H ** gam_b * (C1 * BJ(n, arg) + C2 * BY(n, arg))
    return SolutionSpec("2.2-4", "hyp", "{X2 + b X3, X5 + p X3}", ("b", "p"),
                        x ** b * (y - m) ** gam_a * exp(phi), h, ode, w, "displayed",
                        ("C1", "C2"),
                        {"phi": phi, "gamma_ansatz": gam_a, "gamma_bessel": gam_b, "n": n})


def _h5():
    g = g_expr("hyp")
    h = exp(g * t) * x ** (-a * g) * (y - m) ** (2 * (1 - a * r))
    A = 4 * beta ** 2 * r ** 2 + 4 * k * g * r * rho * beta + k ** 2 * g ** 2
    ode = (2 * r * beta ** 2 * (2 * r + g),
           g * (g * A * a ** 2 + (k ** 2 * g ** 2 + 8 * beta ** 2 * r ** 2 + 4 * k * g * r * rho * beta
                                  - 6 * g * r * beta ** 2 - 4 * k * g ** 2 * rho * beta) * a
                + 2 * g * beta ** 2) * H,
           g ** 2 * (A * a ** 2 - 4 * beta * (g * k * rho + 2 * beta * r) * a + 4 * beta ** 2) * H ** 2)
    return SolutionSpec("2.2-5", "hyp", "{X2 + a X1, X4}", ("a",),
                        (y - m) ** (-2 * r / g), h, ode, _euler_w(), "indicial", ("C1", "C2"))


def _h6():
    g = g_expr("hyp")
    gam = 2 * (a * g * k * rho + a * r * beta - beta)
    h = (y - m) ** gam * exp(beta * g * t) / x ** (a * beta * g)
    P = (y - m) ** (-1 + 2 * r / g) * exp(g * y * (y - 2 * m) / (2 * beta ** 2))
    ode = ((g - r) * (g - 2 * r),
           g ** 3 * beta * (4 * g * (a * r - 1) ** 2 * beta ** 3
                            + 2 * (a * r - 1) * (2 * a * g ** 2 * k * rho + 4 * r - 3 * g) * beta ** 2
                            + a * g * k * (a * k * g ** 2 + 4 * rho * (r - g)) * beta
                            + k ** 2 * g ** 2 * a) * H,
           g ** 4 * beta ** 2 * (a ** 2 * (4 * r ** 2 * beta ** 2 + 4 * r * g * k * beta * rho + k ** 2 * g ** 2)
                                 - 4 * a * beta * (g * k * rho + 2 * beta * r) + 4 * beta ** 2) * H ** 2)
    return SolutionSpec("2.2-6", "hyp", "{X2 + a X1, X5}", ("a",), P, h, ode, _euler_w(),
                        "indicial", ("C1", "C2"), {"gamma": gam})


# ---------------------------------------------------------------------------
# hyperbolic volatility, g = 0
# ---------------------------------------------------------------------------

def _z1():
    s = H - m
    ode = (2 * (a + r * (b - 1)) * s ** 2 + k ** 2 * b * (b - 1),
           2 * beta * rho * b * k * s,
           beta ** 2 * s ** 2)
    z = 2 * sqrt((2 - 2 * b) * r - 2 * a) * s / beta
    nu = sqrt(4 * b * (1 - b + b * rho ** 2) * k ** 2 + beta * (beta - 4 * b * k * rho)) / (2 * beta)
    w = s ** (-b * k * rho / beta) * (C1 * WM(0, nu, z) + C2 * WW(0, nu, z))
    return SolutionSpec("2.3-1", "hyp-g0", "{X1 + a X3, X2 + b X3}", ("a", "b"),
                        exp(a * t) * x ** b, y, ode, w, "displayed", ("C1", "C2"),
                        {"z": z, "nu": nu})


def _z2():
    h = t / (y - m) ** 2
    phi = r * (b - 1) * (2 * m - y) * t * y / (y - m) ** 2
    gam = -b * rho * k / beta
    ode = (4 * m ** 4 * r ** 2 * beta ** 2 * (b - 1) ** 2 * H ** 2
           + 6 * r * m ** 2 * beta ** 2 * (b - 1) * H
           + (k ** 2 * b + 2 * m ** 2 * r) * (b - 1) + b * k * rho * (beta - b * k * rho),
           2 * (4 * r * m ** 2 * beta ** 2 * (b - 1) * H ** 2 + 3 * beta ** 2 * H + 1),
           4 * beta ** 2 * H ** 2)
    gp = (beta + sqrt(4 * (rho ** 2 - 1) * k ** 2 * b ** 2 + 4 * k * (k - 4 * rho * beta) * b
                      + beta ** 2)) / (4 * beta)
    arg = 1 / (2 * beta ** 2 * H)
    w = exp(-m ** 2 * H * r * (b - 1)) * H ** (-gp) \
        * (C1 * KM(gp, 2 * gp + half, arg) + C2 * KU(gp, 2 * gp + half, arg))
    return SolutionSpec("2.3-2", "hyp-g0", "{X2 + b X3, X4}", ("b",),
                        x ** b * (y - m) ** gam * exp(phi), h, ode, w, "displayed", ("C1", "C2"),
                        {"phi": phi, "gamma": gam, "gamma_kummer": gp})


def _z3():
    h = t / (y - m)
    phi = y * (y - m) / (2 * beta * t) - r * (b - 1) * t * y / (y - m)
    gam = -half - b * rho * k / beta
    ode = (4 * beta ** 4 * r ** 2 * m ** 2 * (b - 1) ** 2 * H ** 4
           - 12 * beta ** 4 * r * m * (b - 1) * H ** 3
           + beta ** 2 * (4 * k * b * (k * (b - 1) - k * b * rho ** 2 - rho * beta)
                          + 4 * m ** 2 * r * (b - 1) + 3 * beta ** 2) * H ** 2
           - 2 * beta ** 2 * m * H + m ** 2,
           -4 * beta ** 2 * H ** 2 * (2 * beta ** 2 * r * m * (b - 1) * H ** 2 - 3 * beta ** 2 * H + m),
           4 * beta ** 4 * H ** 4)
    q = (4 * (1 - rho ** 2) * b ** 2 * k ** 2 + 3 * beta ** 2 - 4 * k ** 2 * b
         + 4 * b * k * beta * rho) / (4 * beta ** 2)
    l1 = -1 + sqrt(1 - q)
    l2 = -1 - sqrt(1 - q)
    w = (C1 * H ** l1 + C2 * H ** l2) * exp(m * (2 * r * beta ** 2 * (b - 1) * H ** 2 - 1)
                                             / (beta ** 2 * H))
    return SolutionSpec("2.3-3", "hyp-g0", "{X2 + b X3, X5}", ("b",),
                        x ** b * (y - m) ** gam * exp(phi), h, ode, w, "displayed", ("C1", "C2"),
                        {"phi": phi, "gamma": gam, "lambda1": l1, "lambda2": l2})


def _z4():
    h = k * rho * ln(y - m) + beta * (r * t - ln(x))
    P = x * sqrt(r * t) * exp((y - m) ** 2 / (2 * beta ** 2 * t)) * (y - m) ** (-1 - k * rho / beta)
    ode = ((beta + k * rho) * (2 * beta - k * rho),
           k * beta * (k + beta * rho - 2 * k * rho ** 2),
           k ** 2 * beta ** 2 * (1 - rho ** 2))
    w = C1 * exp(lam1 * H) + C2 * exp(lam2 * H)
    return SolutionSpec("2.3-4", "hyp-g0", "{X4, X5}", (), P, h, ode, w, "characteristic",
                        ("C1", "C2"))


_BUILDERS = {
    "2.1-1": _c1, "2.1-2": _c2, "2.1-3": _c3, "2.1-4": _c4, "2.1-5": _c5,
    "2.2-1": _h1, "2.2-2": _h2, "2.2-3": _h3, "2.2-4": _h4, "2.2-5": _h5, "2.2-6": _h6,
    "2.3-1": _z1, "2.3-2": _z2, "2.3-3": _z3, "2.3-4": _z4,
}
CASE_IDS = tuple(_BUILDERS)
_CACHE: dict = {}


def get_spec(case_id: str) -> SolutionSpec:
    if case_id not in _BUILDERS:
        raise KeyError(f"unknown case {case_id!r}; known: {', '.join(CASE_IDS)}")
    if case_id not in _CACHE:
        _CACHE[case_id] = _BUILDERS[case_id]()
    return _CACHE[case_id]


class _Catalog(dict):
    def __missing__(self, key):
        return get_spec(key)


CATALOG = _Catalog()
