"""Complex evaluation of Kummer, Whittaker and Bessel functions.

Each public function returns a :class:`SpecFunResult` carrying the value, an
error estimate, the number of terms used and a method tag.  Power series are
summed in double precision; when the running term magnitudes show that
cancellation has eaten too many digits the same series is re-summed in
multiprecision (``mpmath.mpc``) with enough guard digits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sps

__all__ = [
    "SpecFunResult", "SpecFunError",
    "kummer_m", "kummer_u", "whittaker_m", "whittaker_w", "bessel_j", "bessel_y",
    "evaluate", "evaluate_array", "BIGZ",
]

EPS = 2.220446049250313e-16
BIGZ = 30.0          # Kummer asymptotic threshold on |z|
BIGZ_BESSEL = 25.0   # Bessel asymptotic threshold on |z|
MAXTERMS = 10000
INT_TOL = 1e-10      # distance to a non-positive integer treated as degenerate
Y_INT_TOL = 1e-8
TARGET = 1e-13       # wanted relative accuracy before falling back to multiprecision


class SpecFunError(ValueError):
    pass


@dataclass(frozen=True)
class SpecFunResult:
    value: complex
    err: float
    terms: int
    method: str

    def __complex__(self):
        return complex(self.value)


def _near_nonpos_int(v: complex, tol: float = INT_TOL) -> bool:
    v = complex(v)
    if abs(v.imag) > tol or v.real > tol:
        return False
    return abs(v.real - round(v.real)) < tol


def _near_int(v: complex, tol: float) -> bool:
    v = complex(v)
    return abs(v.imag) < tol and abs(v.real - round(v.real)) < tol


def _terminates(a: complex):
    """Return n when a is (numerically) the non-positive integer -n, else None."""
    if _near_nonpos_int(a, 1e-14):
        return int(round(-complex(a).real))
    return None


# ---------------------------------------------------------------------------
# Kummer M
# ---------------------------------------------------------------------------

def _m_series(a, b, z):
    s = 1 + 0j
    term = 1 + 0j
    amax = 1.0
    small = 0
    n = 0
    while n < MAXTERMS:
        term *= (a + n) / ((b + n) * (n + 1)) * z
        n += 1
        s += term
        at = abs(term)
        amax = max(amax, at)
        if term == 0:
            break
        if at < 1e-16 * abs(s):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise SpecFunError("Kummer M series did not converge within 10000 terms")
    return s, amax, n


def _m_series_mp(a, b, z, dps):
    with mpmath.workdps(dps):
        a, b, z = mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(z)
        s = mpmath.mpc(1)
        term = mpmath.mpc(1)
        tiny = mpmath.mpf(10) ** (-dps)
        small = 0
        n = 0
        while n < 4 * MAXTERMS:
            term *= (a + n) / ((b + n) * (n + 1)) * z
            n += 1
            s += term
            if term == 0:
                break
            if abs(term) < tiny * abs(s):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        else:
            raise SpecFunError("Kummer M multiprecision series did not converge")
        return complex(s), n


def _m_by_series(a, b, z):
    s, amax, n = _m_series(a, b, z)
    scale = amax / max(abs(s), 1e-300)
    if scale * EPS * 10 < TARGET:
        return SpecFunResult(s, 10 * EPS * amax, n, "series")
    dps = 20 + int(math.log10(scale) + 1)
    v, n = _m_series_mp(a, b, z, dps)
    return SpecFunResult(v, abs(v) * 1e-15, n, "series-mp")


def _asym_sum(p, q, w):
    """sum_s (p)_s (q)_s / s! * w^s truncated at the smallest term."""
    s = 1 + 0j
    term = 1 + 0j
    best = 1.0
    n = 0
    while n < 200:
        nxt = term * (p + n) * (q + n) / (n + 1) * w
        if abs(nxt) > best and n > 2:
            break
        term = nxt
        n += 1
        s += term
        best = abs(term)
        if best < 1e-17 * abs(s) or term == 0:
            break
    return s, best, n


def _m_asymptotic(a, b, z):
    """Large-|z| expansion with the exponentially small companion kept."""
    ra, rba = sps.rgamma(a), sps.rgamma(b - a)
    gb = sps.gamma(b)
    s1, e1, n1 = _asym_sum(b - a, 1 - a, 1 / z)
    s2, e2, n2 = _asym_sum(a, a - b + 1, -1 / z)
    if z.imag > 0:
        phase = cmath.exp(1j * math.pi * a)
    elif z.imag < 0:
        phase = cmath.exp(-1j * math.pi * a)
    else:
        phase = cmath.cos(math.pi * a)
    t1 = cmath.exp(z) * z ** (a - b) * ra
    t2 = phase * z ** (-a) * rba
    v = gb * (t1 * s1 + t2 * s2)
    err = abs(gb) * (abs(t1) * e1 + abs(t2) * e2) + abs(v) * 1e-15
    return SpecFunResult(v, err, n1 + n2, "asymptotic"), max(e1, e2)


def kummer_m(a, b, z) -> SpecFunResult:
    """Confluent hypergeometric 1F1(a; b; z)."""
    a, b, z = complex(a), complex(b), complex(z)
    if _near_nonpos_int(b):
        raise SpecFunError(f"Kummer M: b={b} is too close to a non-positive integer")
    if z == 0:
        return SpecFunResult(1 + 0j, 0.0, 0, "series")
    n = _terminates(a)
    if n is not None:
        # polynomial; sum exactly
        return _m_by_series(a, b, z)
    if z.real < 0:
        # Kummer transformation keeps the series free of alternating cancellation
        inner = kummer_m(b - a, b, -z)
        f = cmath.exp(z)
        return SpecFunResult(f * inner.value, abs(f) * inner.err, inner.terms,
                             inner.method + "+kummer")
    if abs(z) > BIGZ:
        res, tail = _m_asymptotic(a, b, z)
        if res.err <= TARGET * abs(res.value) and math.isfinite(abs(res.value)):
            return res
    return _m_by_series(a, b, z)


# ---------------------------------------------------------------------------
# Kummer U
# ---------------------------------------------------------------------------

def _u_terminating(a, b, z, n):
    # z^{-a} 2F0(a, a-b+1; ; -1/z) ends after n+1 terms
    s = 1 + 0j
    term = 1 + 0j
    q = a - b + 1
    w = -1 / z
    for k in range(n):
        term *= (a + k) * (q + k) / (k + 1) * w
        s += term
    v = z ** (-a) * s
    return SpecFunResult(v, abs(v) * 1e-15, n + 1, "series")


def _u_connection(a, b, z, dps=None):
    if dps is None:
        m1 = kummer_m(a, b, z)
        m2 = kummer_m(a - b + 1, 2 - b, z)
        c1 = sps.gamma(1 - b) * sps.rgamma(a - b + 1)
        c2 = sps.gamma(b - 1) * sps.rgamma(a) * z ** (1 - b)
        t1, t2 = c1 * m1.value, c2 * m2.value
        v = t1 + t2
        err = abs(c1) * m1.err + abs(c2) * m2.err + 4 * EPS * (abs(t1) + abs(t2))
        return SpecFunResult(v, err, m1.terms + m2.terms, "connection-formula"), \
            (abs(t1) + abs(t2)) / max(abs(v), 1e-300)
    with mpmath.workdps(dps):
        A, B, Z = mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(z)
        v = (mpmath.gamma(1 - B) * mpmath.rgamma(A - B + 1) * _mp_series_value(A, B, Z)
             + mpmath.gamma(B - 1) * mpmath.rgamma(A) * Z ** (1 - B)
             * _mp_series_value(A - B + 1, 2 - B, Z))
        v = complex(v)
    return SpecFunResult(v, abs(v) * 1e-15, 0, "connection-formula-mp"), 1.0


def _mp_series_value(a, b, z):
    s = mpmath.mpc(1)
    term = mpmath.mpc(1)
    tiny = mpmath.mpf(10) ** (-mpmath.mp.dps)
    small = 0
    n = 0
    while n < 4 * MAXTERMS:
        term *= (a + n) / ((b + n) * (n + 1)) * z
        n += 1
        s += term
        if term == 0:
            break
        if abs(term) < tiny * abs(s):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return s


def kummer_u(a, b, z) -> SpecFunResult:
    """Tricomi confluent hypergeometric U(a, b, z), principal branch."""
    a, b, z = complex(a), complex(b), complex(z)
    if z == 0:
        raise SpecFunError("Kummer U has a branch point at z = 0")
    for p in (a, a - b + 1):
        n = _terminates(p)
        if n is not None:
            return _u_terminating(a, b, z, n)
    if abs(z) > BIGZ and abs(cmath.phase(z)) < 0.75 * math.pi:
        s, tail, n = _asym_sum(a, a - b + 1, -1 / z)
        if tail <= TARGET * abs(s):
            v = z ** (-a) * s
            return SpecFunResult(v, abs(z ** (-a)) * tail + abs(v) * 1e-15, n, "asymptotic")
    if _near_int(b, INT_TOL):
        raise SpecFunError(f"Kummer U: integer b={b} is not supported (logarithmic case)")
    res, cancel = _u_connection(a, b, z)
    if cancel * EPS * 2 < TARGET:
        return res
    dps = 25 + int(math.log10(cancel) + 1)
    res, _ = _u_connection(a, b, z, dps=dps)
    return res


# ---------------------------------------------------------------------------
# Whittaker
# ---------------------------------------------------------------------------

def whittaker_m(kappa, nu, z) -> SpecFunResult:
    kappa, nu, z = complex(kappa), complex(nu), complex(z)
    if _near_nonpos_int(1 + 2 * nu):
        raise SpecFunError(f"Whittaker M: 1+2nu={1 + 2 * nu} is a non-positive integer")
    inner = kummer_m(nu - kappa + 0.5, 1 + 2 * nu, z)
    f = cmath.exp(-z / 2) * z ** (nu + 0.5)
    return SpecFunResult(f * inner.value, abs(f) * inner.err, inner.terms, inner.method)


def whittaker_w(kappa, nu, z) -> SpecFunResult:
    kappa, nu, z = complex(kappa), complex(nu), complex(z)
    inner = kummer_u(nu - kappa + 0.5, 1 + 2 * nu, z)
    f = cmath.exp(-z / 2) * z ** (nu + 0.5)
    return SpecFunResult(f * inner.value, abs(f) * inner.err, inner.terms, inner.method)


# ---------------------------------------------------------------------------
# Bessel
# ---------------------------------------------------------------------------

def _j_series(n, z):
    w = -(z * z) / 4
    term = complex(sps.rgamma(n + 1))
    s = term
    amax = abs(term)
    small = 0
    k = 0
    while k < MAXTERMS:
        k += 1
        term *= w / (k * (n + k))
        s += term
        at = abs(term)
        amax = max(amax, at)
        if term == 0:
            break
        if at < 1e-16 * abs(s):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise SpecFunError("Bessel series did not converge")
    return s, amax, k


def _j_series_mp(n, z, dps):
    with mpmath.workdps(dps):
        n, z = mpmath.mpc(n), mpmath.mpc(z)
        w = -(z * z) / 4
        term = mpmath.rgamma(n + 1)
        s = term
        tiny = mpmath.mpf(10) ** (-dps)
        small = 0
        k = 0
        while k < 4 * MAXTERMS:
            k += 1
            term *= w / (k * (n + k))
            s += term
            if term == 0:
                break
            if abs(term) < tiny * abs(s):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        return complex(s * (z / 2) ** n), k


def _j_by_series(n, z):
    s, amax, k = _j_series(n, z)
    pre = (z / 2) ** n if z != 0 else (1.0 if n == 0 else 0.0)
    scale = amax / max(abs(s), 1e-300)
    if scale * EPS * 10 < TARGET:
        v = pre * s
        return SpecFunResult(v, 10 * EPS * amax * abs(pre), k, "series")
    dps = 20 + int(math.log10(scale) + 1)
    v, k = _j_series_mp(n, z, dps)
    return SpecFunResult(v, abs(v) * 1e-15, k, "series-mp")


def _j_hankel(n, z):
    mu = 4 * n * n
    # a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k)
    P = 1 + 0j
    Q = 0j
    ak = 1 + 0j
    best = math.inf
    k = 0
    tail = 0.0
    while k < 200:
        k += 1
        nxt = ak * (mu - (2 * k - 1) ** 2) / (k * 8) / z
        if abs(nxt) > best and k > 2:
            break
        ak = nxt
        best = abs(ak)
        sign = (-1) ** (k // 2)
        if k % 2:
            Q += sign * ak
        else:
            P += sign * ak
        tail = best
        if ak == 0 or best < 1e-17:
            break
    omega = z - (n / 2 + 0.25) * math.pi
    f = cmath.sqrt(2 / (math.pi * z))
    v = f * (P * cmath.cos(omega) - Q * cmath.sin(omega))
    scale = abs(f) * (abs(cmath.cos(omega)) + abs(cmath.sin(omega)))
    return SpecFunResult(v, scale * tail + abs(v) * 1e-15, k, "asymptotic"), tail


def bessel_j(n, z) -> SpecFunResult:
    """Bessel function of the first kind J_n(z), principal branch of z^n."""
    n, z = complex(n), complex(z)
    if z == 0:
        if n == 0:
            return SpecFunResult(1 + 0j, 0.0, 0, "series")
        if n.real > 0:
            return SpecFunResult(0j, 0.0, 0, "series")
        if _near_nonpos_int(n, 1e-14):
            return SpecFunResult(0j, 0.0, 0, "series")
        raise SpecFunError(f"J_n(0) is singular for n={n}")
    if abs(z) > BIGZ_BESSEL and z.real > 0:
        res, tail = _j_hankel(n, z)
        if tail < TARGET:
            return res
    return _j_by_series(n, z)


def bessel_y(n, z) -> SpecFunResult:
    """Bessel function of the second kind for non-integer order."""
    n, z = complex(n), complex(z)
    if _near_int(n, Y_INT_TOL):
        raise SpecFunError(
            f"Y_n with near-integer order n={n} is not supported; perturb the parameters")
    if z == 0:
        raise SpecFunError("Y_n is singular at z = 0")
    j1 = bessel_j(n, z)
    j2 = bessel_j(-n, z)
    c, s = cmath.cos(math.pi * n), cmath.sin(math.pi * n)
    v = (j1.value * c - j2.value) / s
    err = (abs(c) * j1.err + j2.err) / abs(s) + 4 * EPS * (abs(j1.value * c) + abs(j2.value)) / abs(s)
    return SpecFunResult(v, err, j1.terms + j2.terms, j1.method)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_TABLE = {
    "KummerM": kummer_m, "KummerU": kummer_u,
    "WhittakerM": whittaker_m, "WhittakerW": whittaker_w,
    "BesselJ": bessel_j, "BesselY": bessel_y,
}


def evaluate(name: str, params, z) -> SpecFunResult:
    try:
        fn = _TABLE[name]
    except KeyError:
        raise SpecFunError(f"unknown special function {name!r}") from None
    return fn(*params, z)


def evaluate_array(name: str, params, z) -> np.ndarray:
    """Elementwise evaluation with broadcasting; repeated inputs are computed once."""
    arrays = np.broadcast_arrays(*[np.asarray(p, dtype=complex) for p in params],
                                 np.asarray(z, dtype=complex))
    shape = arrays[0].shape
    flat = [a.ravel() for a in arrays]
    out = np.empty(flat[0].size, dtype=complex)
    cache = {}
    for i in range(out.size):
        key = tuple(f[i] for f in flat)
        v = cache.get(key)
        if v is None:
            if not all(cmath.isfinite(c) for c in key):
                v = complex(np.nan, np.nan)
            else:
                v = evaluate(name, key[:-1], key[-1]).value
            cache[key] = v
        out[i] = v
    return out.reshape(shape)
