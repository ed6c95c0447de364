"""Arbitrary-precision reference values by direct summation of defining series.

Only mpmath's number types, gamma and trig functions are used; the series and
the function relations are summed here so the oracle shares no code path with
the package under test.
"""
from __future__ import annotations

import mpmath as mp

DIGITS = 50


def _dps(z) -> int:
    # headroom for cancellation: terms of size e^|z| summing to O(1) values
    return DIGITS + 10 + int(abs(complex(z)) / 2.302585) * 2


def _c(v):
    return mp.mpc(complex(v)) if not isinstance(v, mp.mpc) else v


def series_1f1(a, b, z):
    """sum_n (a)_n / ((b)_n n!) z^n, summed until terms are below 10^-(dps+5)."""
    a, b, z = _c(a), _c(b), _c(z)
    term = mp.mpc(1)
    total = mp.mpc(1)
    n = 0
    eps = mp.mpf(10) ** (-(mp.mp.dps + 5))
    small = 0
    while small < 3:
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        n += 1
        small = small + 1 if abs(term) <= eps * max(abs(total), eps) else 0
        if n > 200000:
            raise RuntimeError("oracle series did not converge")
    return total


def kummer_m(a, b, z) -> complex:
    with mp.workdps(_dps(z)):
        return complex(series_1f1(a, b, z))


def _u(a, b, z):
    a, b, z = _c(a), _c(b), _c(z)
    t1 = mp.gamma(1 - b) / mp.gamma(a - b + 1) * series_1f1(a, b, z)
    t2 = mp.gamma(b - 1) / mp.gamma(a) * z ** (1 - b) * series_1f1(a - b + 1, 2 - b, z)
    return t1 + t2


def kummer_u(a, b, z) -> complex:
    """Two-series connection formula, non-integer b; 1/Gamma(a) taken as 0 at poles."""
    with mp.workdps(_dps(z) * 2):
        a_, b_, z_ = _c(a), _c(b), _c(z)
        t1 = mp.gamma(1 - b_) * mp.rgamma(a_ - b_ + 1) * series_1f1(a_, b_, z_)
        t2 = mp.gamma(b_ - 1) * mp.rgamma(a_) * z_ ** (1 - b_) * \
            series_1f1(a_ - b_ + 1, 2 - b_, z_)
        return complex(t1 + t2)


def whittaker_m(kappa, nu, z) -> complex:
    with mp.workdps(_dps(z)):
        k, n, zz = _c(kappa), _c(nu), _c(z)
        pre = mp.exp(-zz / 2) * zz ** (n + mp.mpf(1) / 2)
        return complex(pre * series_1f1(n - k + mp.mpf(1) / 2, 1 + 2 * n, zz))


def whittaker_w(kappa, nu, z) -> complex:
    with mp.workdps(_dps(z) * 2):
        k, n, zz = _c(kappa), _c(nu), _c(z)
        pre = mp.exp(-zz / 2) * zz ** (n + mp.mpf(1) / 2)
        a, b = n - k + mp.mpf(1) / 2, 1 + 2 * n
        t1 = mp.gamma(1 - b) * mp.rgamma(a - b + 1) * series_1f1(a, b, zz)
        t2 = mp.gamma(b - 1) * mp.rgamma(a) * zz ** (1 - b) * series_1f1(a - b + 1, 2 - b, zz)
        return complex(pre * (t1 + t2))


def _j(n, z):
    n, z = _c(n), _c(z)
    half = z / 2
    q = -half * half
    term = mp.rgamma(n + 1)
    total = term
    eps = mp.mpf(10) ** (-(mp.mp.dps + 5))
    k, small = 0, 0
    while small < 3:
        term *= q / ((k + 1) * (n + k + 1))
        total += term
        k += 1
        small = small + 1 if abs(term) <= eps * max(abs(total), eps) else 0
        if k > 200000:
            raise RuntimeError("oracle Bessel series did not converge")
    return half ** n * total


def bessel_j(n, z) -> complex:
    with mp.workdps(_dps(z)):
        return complex(_j(n, z))


def bessel_y(n, z) -> complex:
    """(J_n cos n pi - J_{-n}) / sin n pi, non-integer n."""
    with mp.workdps(_dps(z) * 2):
        nn = _c(n)
        return complex((_j(nn, z) * mp.cos(nn * mp.pi) - _j(-nn, z)) / mp.sin(nn * mp.pi))


FUNCTIONS = {
    "kummer_m": kummer_m, "kummer_u": kummer_u,
    "whittaker_m": whittaker_m, "whittaker_w": whittaker_w,
    "bessel_j": lambda n, _unused, z: bessel_j(n, z),
    "bessel_y": lambda n, _unused, z: bessel_y(n, z),
}
