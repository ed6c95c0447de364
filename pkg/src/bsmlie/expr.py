"""Immutable expression trees.

Constants are exact rationals (``fractions.Fraction``); evaluation happens in
complex double precision, vectorised over numpy arrays.  Constructors perform a
light normalisation (flattening, constant folding, collection of identical terms
and powers, merging of exponentials) so that structurally equal inputs produce
identical trees.  There is no canonical form beyond that: identities are
checked numerically with :func:`is_probably_zero`, or exactly after
:func:`expand` when the expressions are polynomial in exponentials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

__all__ = [
    "Expr", "Const", "Sym", "Add", "Mul", "Pow", "Func", "Special",
    "ExprError", "DifferentiationError", "EvaluationError", "SingularityError",
    "InconclusiveError", "ZeroTest",
    "const", "sym", "param", "var", "jet", "slot", "as_expr",
    "add", "mul", "pow_", "exp", "ln", "sqrt", "neg",
    "kummer_m", "kummer_u", "whittaker_m", "whittaker_w", "bessel_j", "bessel_y",
    "differentiate", "substitute", "normalize", "expand", "evaluate",
    "eval_numeric", "is_probably_zero", "to_prefix", "to_infix", "free_names",
    "ZERO", "ONE", "HALF",
]

# symbol kinds; the order is part of the canonical sort key
KINDS = ("param", "var", "jet", "slot")
# kinds an exponent may not depend on (otherwise b**e is rewritten as exp(e*ln b))
_MOVING = frozenset({"var", "jet", "slot"})
# below this magnitude a divisor counts as a pole
POLE = 1e-300


class ExprError(Exception):
    pass


class DifferentiationError(ExprError):
    pass


class EvaluationError(ExprError):
    pass


class SingularityError(EvaluationError):
    pass


class InconclusiveError(ExprError):
    pass


class Expr:
    __slots__ = ("_hash", "_key", "_free")

    def __init__(self):
        self._hash = None
        self._key = None
        self._free = None

    # -- structure -------------------------------------------------------
    def children(self) -> tuple:
        return ()

    def rebuild(self, kids) -> "Expr":
        return self

    def _make_key(self):
        raise NotImplementedError

    def key(self):
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__,) + tuple(hash(c) for c in self._hash_parts()))
        return self._hash

    def _hash_parts(self):
        return self.children()

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._eq_parts() == other._eq_parts()

    def _eq_parts(self):
        return self.children()

    @property
    def free(self) -> frozenset:
        if self._free is None:
            out = frozenset()
            for c in self.children():
                out = out | c.free
            self._free = out
        return self._free

    def depends_on(self, name: str) -> bool:
        return any(s.name == name for s in self.free)

    def __repr__(self):
        return to_prefix(self)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else add(self, o)

    def __radd__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else add(o, self)

    def __sub__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else add(self, neg(o))

    def __rsub__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else add(o, neg(self))

    def __mul__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else mul(self, o)

    def __rmul__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else mul(o, self)

    def __truediv__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else mul(self, pow_(o, -1))

    def __rtruediv__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else mul(o, pow_(self, -1))

    def __pow__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else pow_(self, o)

    def __rpow__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else pow_(o, self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = Fraction(value)

    def _make_key(self):
        return (0, self.value)

    def _hash_parts(self):
        return (self.value,)

    def _eq_parts(self):
        return self.value

    @property
    def free(self):
        return frozenset()


class Sym(Expr):
    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: str = "param"):
        super().__init__()
        if kind not in KINDS:
            raise ExprError(f"unknown symbol kind {kind!r}")
        self.name = name
        self.kind = kind

    def _make_key(self):
        return (1, KINDS.index(self.kind), self.name)

    def _hash_parts(self):
        return (self.name, self.kind)

    def _eq_parts(self):
        return (self.name, self.kind)

    @property
    def free(self):
        return frozenset((self,))


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        super().__init__()
        self.terms = terms

    def children(self):
        return self.terms

    def rebuild(self, kids):
        return add(*kids)

    def _make_key(self):
        return (6, tuple(t.key() for t in self.terms))


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        super().__init__()
        self.factors = factors

    def children(self):
        return self.factors

    def rebuild(self, kids):
        return mul(*kids)

    def _make_key(self):
        return (5, tuple(f.key() for f in self.factors))


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exponent: Expr):
        super().__init__()
        self.base = base
        self.exp = exponent

    def children(self):
        return (self.base, self.exp)

    def rebuild(self, kids):
        return pow_(kids[0], kids[1])

    def _make_key(self):
        return (3, self.base.key(), self.exp.key())


FUNCS = ("exp", "ln")


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        super().__init__()
        self.name = name
        self.arg = arg

    def children(self):
        return (self.arg,)

    def rebuild(self, kids):
        return _FUNC_BUILDERS[self.name](kids[0])

    def _make_key(self):
        return (2, self.name, self.arg.key())

    def _hash_parts(self):
        return (self.name, self.arg)

    def _eq_parts(self):
        return (self.name, self.arg)


# name -> number of constant parameter slots
SPECIALS = {
    "KummerM": 2, "KummerU": 2, "WhittakerM": 2, "WhittakerW": 2,
    "BesselJ": 1, "BesselY": 1,
}


class Special(Expr):
    """Special function with constant parameter slots and one argument."""

    __slots__ = ("name", "params", "arg")

    def __init__(self, name: str, params: tuple, arg: Expr):
        super().__init__()
        self.name = name
        self.params = params
        self.arg = arg

    def children(self):
        return self.params + (self.arg,)

    def rebuild(self, kids):
        return special(self.name, kids[:-1], kids[-1])

    def _make_key(self):
        return (4, self.name, tuple(p.key() for p in self.params), self.arg.key())

    def _hash_parts(self):
        return (self.name,) + self.params + (self.arg,)

    def _eq_parts(self):
        return (self.name, self.params, self.arg)


ZERO = Const(0)
ONE = Const(1)
HALF = Const(Fraction(1, 2))


def _sort_key(e: Expr):
    return e.key()


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (bool, np.bool_)):
        raise ExprError("booleans are not expressions")
    if isinstance(v, (int, Fraction, np.integer)):
        return Const(v)
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ExprError(f"non-finite constant {v!r}")
        return Const(Fraction(float(v)))
    raise ExprError(f"cannot convert {type(v).__name__} to an expression")


def _coerce(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float, Fraction, np.integer, np.floating)) and not isinstance(v, bool):
        return as_expr(v)
    return None


def const(v) -> Const:
    return as_expr(v)


def sym(name: str, kind: str = "param") -> Sym:
    return Sym(name, kind)


def param(names: str):
    out = tuple(Sym(n, "param") for n in names.split())
    return out[0] if len(out) == 1 else out


def var(names: str):
    out = tuple(Sym(n, "var") for n in names.split())
    return out[0] if len(out) == 1 else out


_JET_ORDER = "txy"


def jet(index: str = "") -> Sym:
    """Jet coordinate u_<index>; ``jet('yx')`` is ``u_xy``."""
    if any(c not in _JET_ORDER for c in index):
        raise ExprError(f"bad jet index {index!r}")
    idx = "".join(sorted(index, key=_JET_ORDER.index))
    return Sym("u_" + idx if idx else "u", "jet")


def slot(name: str) -> Sym:
    return Sym(name, "slot")


def _split(term: Expr):
    """term -> (rational coefficient, core)."""
    if isinstance(term, Mul) and isinstance(term.factors[0], Const):
        rest = term.factors[1:]
        core = rest[0] if len(rest) == 1 else Mul(rest)
        return term.factors[0].value, core
    return Fraction(1), term


def _scaled(core: Expr, c: Fraction) -> Expr:
    if c == 1:
        return core
    if isinstance(core, Mul):
        return Mul((Const(c),) + core.factors)
    return Mul((Const(c), core))


def add(*args) -> Expr:
    total = Fraction(0)
    coeffs: dict = {}
    stack = [as_expr(a) for a in args]
    flat = []
    while stack:
        a = stack.pop()
        if isinstance(a, Add):
            stack.extend(a.terms)
        else:
            flat.append(a)
    for a in flat:
        if isinstance(a, Const):
            total += a.value
            continue
        c, core = _split(a)
        coeffs[core] = coeffs.get(core, 0) + c
    terms = [_scaled(core, c) for core, c in coeffs.items() if c != 0]
    if total != 0:
        terms.append(Const(total))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    terms.sort(key=_sort_key)
    return Add(tuple(terms))


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def mul(*args) -> Expr:
    coeff = Fraction(1)
    powers: dict = {}
    exp_args = []
    stack = [as_expr(a) for a in args]
    flat = []
    while stack:
        a = stack.pop()
        if isinstance(a, Mul):
            stack.extend(a.factors)
        else:
            flat.append(a)
    for f in flat:
        if isinstance(f, Const):
            coeff *= f.value
            if coeff == 0:
                return ZERO
            continue
        if isinstance(f, Func) and f.name == "exp":
            exp_args.append(f.arg)
            continue
        if isinstance(f, Pow):
            base, e = f.base, f.exp
        else:
            base, e = f, ONE
        if base in powers:
            powers[base] = add(powers[base], e)
        else:
            powers[base] = e
    factors = []
    for base, e in powers.items():
        p = pow_(base, e)
        if isinstance(p, Const):
            coeff *= p.value
        elif isinstance(p, Mul):
            # only happens for integer powers of a product; already normalised
            for q in p.factors:
                if isinstance(q, Const):
                    coeff *= q.value
                else:
                    factors.append(q)
        else:
            factors.append(p)
    if exp_args:
        ea = exp(add(*exp_args))
        if isinstance(ea, Const):
            coeff *= ea.value
        elif isinstance(ea, Mul):
            return mul(Const(coeff), ea, *factors)
        else:
            factors.append(ea)
    if coeff == 0:
        return ZERO
    if not factors:
        return Const(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    factors.sort(key=_sort_key)
    if coeff != 1:
        factors.insert(0, Const(coeff))
    return Mul(tuple(factors))


def _is_int(e: Expr) -> bool:
    return isinstance(e, Const) and e.value.denominator == 1


def _moving(e: Expr) -> bool:
    return any(s.kind in _MOVING for s in e.free)


def pow_(base, exponent) -> Expr:
    b = as_expr(base)
    e = as_expr(exponent)
    if isinstance(e, Const):
        if e.value == 0:
            return ONE
        if e.value == 1:
            return b
    if isinstance(b, Const):
        if b.value == 0:
            if isinstance(e, Const):
                if e.value < 0:
                    raise ZeroDivisionError("division by the constant zero")
                return ZERO
            return Pow(b, e)
        if b.value == 1:
            return ONE
        if _is_int(e):
            return Const(b.value ** int(e.value))
    if _moving(e):
        return exp(mul(e, ln(b)))
    if _is_int(e):
        if isinstance(b, Pow):
            return pow_(b.base, mul(b.exp, e))
        if isinstance(b, Mul):
            return mul(*[pow_(f, e) for f in b.factors])
        if isinstance(b, Func) and b.name == "exp":
            return exp(mul(b.arg, e))
    return Pow(b, e)


def exp(a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Const) and a.value == 0:
        return ONE
    if isinstance(a, Func) and a.name == "ln":
        return a.arg
    return Func("exp", a)


def ln(a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Const):
        if a.value == 1:
            return ZERO
        if a.value == 0:
            raise ZeroDivisionError("logarithm of the constant zero")
    return Func("ln", a)


def sqrt(a) -> Expr:
    return pow_(a, HALF)


_FUNC_BUILDERS = {"exp": exp, "ln": ln}


def special(name: str, params, arg) -> Expr:
    if name not in SPECIALS:
        raise ExprError(f"unknown special function {name!r}")
    params = tuple(as_expr(p) for p in params)
    if len(params) != SPECIALS[name]:
        raise ExprError(f"{name} takes {SPECIALS[name]} parameters")
    for p in params:
        if _moving(p):
            raise ExprError(f"{name}: parameter slots must be constant, got {to_prefix(p)}")
    return Special(name, params, as_expr(arg))


def kummer_m(a, b, z):
    return special("KummerM", (a, b), z)


def kummer_u(a, b, z):
    return special("KummerU", (a, b), z)


def whittaker_m(kappa, nu, z):
    return special("WhittakerM", (kappa, nu), z)


def whittaker_w(kappa, nu, z):
    return special("WhittakerW", (kappa, nu), z)


def bessel_j(n, z):
    return special("BesselJ", (n,), z)


def bessel_y(n, z):
    return special("BesselY", (n,), z)


def whittaker_as_kummer(node: Special) -> Expr:
    """M_{k,n}(z) = e^{-z/2} z^{n+1/2} M(n-k+1/2, 1+2n, z); W analogous with U."""
    kappa, nu = node.params
    z = node.arg
    a = nu - kappa + HALF
    b = 1 + 2 * nu
    inner = kummer_m(a, b, z) if node.name == "WhittakerM" else kummer_u(a, b, z)
    return exp(-HALF * z) * pow_(z, nu + HALF) * inner


# ---------------------------------------------------------------------------
# tree walks
# ---------------------------------------------------------------------------

def _map_tree(e: Expr, fn, memo: dict) -> Expr:
    """Post-order rebuild; ``fn(node, new_children)`` returns the replacement."""
    hit = memo.get(e)
    if hit is not None:
        return hit
    kids = e.children()
    new = tuple(_map_tree(k, fn, memo) for k in kids)
    out = fn(e, new)
    memo[e] = out
    return out


def normalize(e: Expr) -> Expr:
    """Rebuild bottom-up through the smart constructors."""
    def fn(node, kids):
        if not kids:
            return node
        return node.rebuild(kids)
    return _map_tree(e, fn, {})


def substitute(e: Expr, mapping: Mapping) -> Expr:
    """Replace symbols (by name or Sym) with expressions."""
    table = {}
    for k, v in mapping.items():
        table[k.name if isinstance(k, Sym) else k] = as_expr(v)

    def fn(node, kids):
        if isinstance(node, Sym):
            return table.get(node.name, node)
        if not kids:
            return node
        return node.rebuild(kids)
    return _map_tree(e, fn, {})


def free_names(e: Expr, kind: str | None = None) -> set:
    return {s.name for s in e.free if kind is None or s.kind == kind}


def differentiate(e: Expr, v, _memo=None) -> Expr:
    """Exact partial derivative with respect to the symbol ``v`` (name or Sym)."""
    name = v.name if isinstance(v, Sym) else v
    memo = {} if _memo is None else _memo
    return _diff(e, name, memo)


def _diff(e: Expr, v: str, memo: dict) -> Expr:
    hit = memo.get(e)
    if hit is not None:
        return hit
    if not e.depends_on(v):
        out = ZERO
    elif isinstance(e, Sym):
        out = ONE
    elif isinstance(e, Add):
        out = add(*[_diff(t, v, memo) for t in e.terms])
    elif isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            d = _diff(f, v, memo)
            if d is ZERO or (isinstance(d, Const) and d.value == 0):
                continue
            parts.append(mul(d, *fs[:i], *fs[i + 1:]))
        out = add(*parts)
    elif isinstance(e, Pow):
        b, c = e.base, e.exp
        db = _diff(b, v, memo)
        if c.depends_on(v):
            dc = _diff(c, v, memo)
            out = mul(e, add(mul(dc, ln(b)), mul(c, db, pow_(b, -1))))
        else:
            out = mul(c, pow_(b, add(c, -1)), db)
    elif isinstance(e, Func):
        da = _diff(e.arg, v, memo)
        if e.name == "exp":
            out = mul(e, da)
        else:
            out = mul(da, pow_(e.arg, -1))
    elif isinstance(e, Special):
        for p in e.params:
            if p.depends_on(v):
                raise DifferentiationError(
                    f"{e.name}: cannot differentiate with respect to {v} inside a parameter slot"
                    f" of {to_prefix(e)}")
        dz = _diff(e.arg, v, memo)
        out = mul(_special_dz(e), dz)
    else:
        raise DifferentiationError(f"unsupported node {type(e).__name__}")
    memo[e] = out
    return out


def _special_dz(e: Special) -> Expr:
    z = e.arg
    if e.name == "KummerM":
        a, b = e.params
        return a / b * kummer_m(a + 1, b + 1, z)
    if e.name == "KummerU":
        a, b = e.params
        return -a * kummer_u(a + 1, b + 1, z)
    if e.name in ("BesselJ", "BesselY"):
        (n,) = e.params
        f = bessel_j if e.name == "BesselJ" else bessel_y
        return HALF * (f(n - 1, z) - f(n + 1, z))
    if e.name in ("WhittakerM", "WhittakerW"):
        zs = Sym("__z", "var")
        rep = whittaker_as_kummer(Special(e.name, e.params, zs))
        return substitute(differentiate(rep, zs), {zs: z})
    raise DifferentiationError(f"no derivative rule for {e.name}")


def expand(e: Expr) -> Expr:
    """Distribute products over sums and expand positive integer powers of sums."""
    memo: dict = {}

    def fn(node, kids):
        if not kids:
            return node
        if isinstance(node, Mul):
            return _expand_product(kids)
        if isinstance(node, Pow):
            b, c = kids
            if isinstance(b, Add) and _is_int(c) and 0 < c.value <= 12:
                return _expand_product([b] * int(c.value))
            return pow_(b, c)
        return node.rebuild(kids)
    return _map_tree(e, fn, memo)


def _expand_product(factors) -> Expr:
    acc = [ONE]
    for f in factors:
        terms = f.terms if isinstance(f, Add) else (f,)
        acc = [mul(a, t) for a in acc for t in terms]
        acc = list(_collect(acc))
    return add(*acc)


def _collect(terms):
    s = add(*terms)
    return s.terms if isinstance(s, Add) else (s,)


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

class _Evaluator:
    def __init__(self, bindings: Mapping, shape=None):
        self.bind = {}
        for k, v in bindings.items():
            name = k.name if isinstance(k, Sym) else k
            self.bind[name] = np.asarray(v, dtype=complex)
        if shape is None:
            shapes = [a.shape for a in self.bind.values()]
            shape = np.broadcast_shapes(*shapes) if shapes else ()
        self.shape = shape
        self.bad = np.zeros(shape, dtype=bool)
        self.memo: dict = {}

    def __call__(self, e: Expr):
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        val = self._eval(e)
        self.memo[e] = val
        return val

    def _mark(self, mask):
        self.bad = self.bad | np.broadcast_to(mask, self.shape)

    def _eval(self, e: Expr):
        if isinstance(e, Const):
            return complex(e.value.numerator / e.value.denominator) if e.value.denominator != 1 \
                else complex(e.value.numerator)
        if isinstance(e, Sym):
            try:
                return self.bind[e.name]
            except KeyError:
                raise EvaluationError(f"unbound symbol {e.name!r}") from None
        if isinstance(e, Add):
            out = 0j
            for t in e.terms:
                out = out + self(t)
            return out
        if isinstance(e, Mul):
            out = 1 + 0j
            for f in e.factors:
                out = out * self(f)
            return out
        if isinstance(e, Pow):
            b = self(e.base)
            c = self(e.exp)
            with np.errstate(all="ignore"):
                if _is_int(e.exp):
                    n = int(e.exp.value)
                    if n < 0:
                        self._mark(np.abs(b) < POLE)
                    out = np.power(b, n) if n >= 0 else 1.0 / np.power(b, -n)
                else:
                    self._mark(np.abs(b) < POLE)
                    out = np.power(b, c)
            return out
        if isinstance(e, Func):
            a = self(e.arg)
            with np.errstate(all="ignore"):
                if e.name == "exp":
                    return np.exp(a)
                self._mark(np.abs(a) < POLE)
                return np.log(a)
        if isinstance(e, Special):
            from . import specfun
            ps = [self(p) for p in e.params]
            z = self(e.arg)
            try:
                return specfun.evaluate_array(e.name, ps, z)
            except specfun.SpecFunError as err:
                raise EvaluationError(f"{e.name}: {err}") from err
        raise EvaluationError(f"cannot evaluate node {type(e).__name__}")

    def finish(self, val):
        val = np.broadcast_to(np.asarray(val, dtype=complex), self.shape)
        self._mark(~np.isfinite(val))
        return val

    def add_scale(self):
        """Per point, the magnitude of the largest summand of any sum in the tree."""
        scale = np.zeros(self.shape)
        for node, val in self.memo.items():
            if isinstance(node, Add):
                for t in node.terms:
                    tv = np.abs(np.broadcast_to(self.memo[t], self.shape))
                    with np.errstate(invalid="ignore"):
                        scale = np.fmax(scale, tv)
        return scale


def evaluate(e: Expr, bindings: Mapping, shape=None) -> np.ndarray:
    """Vectorised evaluation; singular points come back as nan."""
    ev = _Evaluator(bindings, shape)
    val = ev.finish(ev(e)).copy()
    val[ev.bad] = np.nan
    return val


def eval_numeric(e: Expr, bindings: Mapping) -> complex:
    ev = _Evaluator({k: np.asarray(v) for k, v in bindings.items()}, shape=())
    val = ev.finish(ev(e))
    if bool(ev.bad):
        raise SingularityError(f"singular point while evaluating {to_prefix(e)[:80]}")
    return complex(val)


@dataclass
class ZeroTest:
    """Outcome of a randomised identity test."""

    is_zero: bool
    trials: int
    valid: int
    seed: int
    tol: float
    max_rel: float
    witness: dict | None = None
    residual: complex | None = None

    def __bool__(self):
        return self.is_zero

    def as_dict(self):
        d = {
            "is_zero": self.is_zero, "trials": self.trials, "valid": self.valid,
            "seed": self.seed, "tol": self.tol, "max_rel": self.max_rel,
        }
        if self.witness is not None:
            d["witness"] = self.witness
            d["residual"] = [self.residual.real, self.residual.imag]
        return d


def sample_box(box: Mapping, trials: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {name: rng.uniform(lo, hi, trials) for name, (lo, hi) in sorted(box.items())}


def is_probably_zero(e: Expr, box: Mapping, bindings: Mapping | None = None,
                     trials: int = 200, seed: int = 42, tol: float = 1e-9) -> ZeroTest:
    """Evaluate ``e`` at random points of ``box`` and compare with the largest summand.

    Passes iff ``|e| < tol * (1 + s)`` at every non-singular sample, where ``s``
    is the magnitude of the largest summand of any sum inside ``e``.  Raises
    :class:`InconclusiveError` when every sample is singular.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bindings = dict(bindings or {})
    pts = sample_box(box, trials, seed)
    env = {**{k.name if isinstance(k, Sym) else k: v for k, v in bindings.items()}, **pts}
    ev = _Evaluator(env, shape=(trials,))
    val = ev.finish(ev(e))
    scale = ev.add_scale()
    good = ~ev.bad
    nvalid = int(good.sum())
    if nvalid == 0:
        raise InconclusiveError("every sample point hit a singularity")
    with np.errstate(invalid="ignore"):
        rel = np.abs(val) / (1.0 + scale)
    rel = np.where(good, rel, 0.0)
    worst = int(np.argmax(rel))
    max_rel = float(rel[worst])
    ok = max_rel < tol
    res = ZeroTest(ok, trials, nvalid, seed, tol, max_rel)
    if not ok:
        res.witness = {name: float(arr[worst]) for name, arr in pts.items()}
        res.residual = complex(val[worst])
    return res


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _fmt_const(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def to_prefix(e: Expr) -> str:
    """Prefix dump, e.g. ``(+ (* 2 x) (exp (* -1 alpha t)))``; debugging only."""
    out = []

    def walk(n):
        if isinstance(n, Const):
            out.append(_fmt_const(n.value))
        elif isinstance(n, Sym):
            out.append(n.name)
        else:
            head = {Add: "+", Mul: "*", Pow: "^"}.get(type(n))
            if head is None:
                head = n.name
            out.append("(" + head)
            for c in n.children():
                out.append(" ")
                walk(c)
            out.append(")")
    walk(e)
    return "".join(out)


def to_infix(e: Expr) -> str:
    """Readable infix text, e.g. ``2*x - alpha*f0^2/2``."""
    return _infix(e, 0)


def _infix(n: Expr, prec: int) -> str:
    # precedence: 1 sum, 2 product, 3 power, 4 atom
    if isinstance(n, Const):
        txt, p = _fmt_const(n.value), (4 if n.value.denominator == 1 and n.value >= 0 else 2)
        if n.value < 0:
            p = 1
    elif isinstance(n, Sym):
        txt, p = n.name, 4
    elif isinstance(n, Add):
        parts = [_infix(n.terms[0], 1)]
        for term in n.terms[1:]:
            s = _infix(term, 1)
            parts.append(f"- {s[1:]}" if s.startswith("-") else f"+ {s}")
        txt, p = " ".join(parts), 1
    elif isinstance(n, Mul):
        coeff, num, den = Fraction(1), [], []
        for f in n.factors:
            if isinstance(f, Const):
                coeff *= f.value
            elif isinstance(f, Pow) and isinstance(f.exp, Const) and f.exp.value < 0:
                den.append(f.base if f.exp.value == -1 else Pow(f.base, Const(-f.exp.value)))
            else:
                num.append(f)
        sign = "-" if coeff < 0 else ""
        coeff = abs(coeff)
        if coeff.numerator != 1 or not num:
            num.insert(0, Const(coeff.numerator))
        if coeff.denominator != 1:
            den.insert(0, Const(coeff.denominator))
        txt = "*".join(_infix(f, 2) for f in num)
        if den:
            d = "*".join(_infix(f, 2) for f in den)
            txt += "/" + (f"({d})" if len(den) > 1 else _infix(den[0], 3))
        txt, p = sign + txt, (1 if sign else 2)
    elif isinstance(n, Pow):
        if isinstance(n.exp, Const) and n.exp.value == Fraction(1, 2):
            txt = f"sqrt({_infix(n.base, 0)})"
        elif isinstance(n.exp, Const) and n.exp.value < 0:
            txt = _infix(Mul((n,)), 0) if n.exp.value != -1 else f"1/{_infix(n.base, 3)}"
        else:
            txt = f"{_infix(n.base, 4)}^{_infix(n.exp, 4)}"
        p = 3
    elif isinstance(n, Func):
        txt, p = f"{n.name}({_infix(n.arg, 0)})", 4
    elif isinstance(n, Special):
        args = ", ".join(_infix(c, 0) for c in n.params + (n.arg,))
        txt, p = f"{n.name}({args})", 4
    else:
        txt, p = to_prefix(n), 4
    return f"({txt})" if p < prec else txt
