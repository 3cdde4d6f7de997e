"""Exact scalar expressions.

An :class:`Expr` is an element of the field of rational functions over
Q(i) in the coordinates ``x, y``, the radical ``r`` (``r**2 == x**2 + y**2``),
``hbar``, named real parameters and jet variables ``D[f, a, b]`` standing for
``d^a/dx^a d^b/dy^b f``.

Canonical form: ``num / den`` where ``den`` is free of ``r`` and ``i``, every
monomial of ``num`` has ``r`` and ``i`` degree at most one, ``gcd(num, den)``
is 1 and the graded-lex leading coefficient of ``den`` is 1.  Two expressions
are equal iff their canonical forms are identical, so zero testing is exact.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Mapping

from gmpy2 import mpq
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring

# Variables are tuples (kind, name, dx, dy); tuple order gives the variable
# order x > y > r > i > hbar > params > jets.
KIND_X, KIND_Y, KIND_R, KIND_I, KIND_HBAR, KIND_PARAM, KIND_JET = range(7)

VX = (KIND_X, "x", 0, 0)
VY = (KIND_Y, "y", 0, 0)
VR = (KIND_R, "r", 0, 0)
VI = (KIND_I, "i", 0, 0)
VHBAR = (KIND_HBAR, "hbar", 0, 0)

RESERVED = {"x", "y", "r", "i", "hbar"}

Var = tuple
Mono = tuple  # sorted tuple of (var, exp)
Poly = dict  # Mono -> mpq

ONE_MONO: Mono = ()


def param_var(name: str) -> Var:
    if name in RESERVED:
        raise ValueError(f"{name!r} is a reserved symbol, not a parameter")
    return (KIND_PARAM, name, 0, 0)


def jet_var(fid: str, dx: int = 0, dy: int = 0) -> Var:
    if dx < 0 or dy < 0:
        raise ValueError("jet derivative orders must be non-negative")
    return (KIND_JET, fid, dx, dy)


# --------------------------------------------------------------------------
# sparse polynomials

def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_exp(m: Mono, v: Var) -> int:
    for w, e in m:
        if w == v:
            return e
    return 0


def _mono_without(m: Mono, v: Var) -> Mono:
    return tuple(t for t in m if t[0] != v)


def _mono_set(m: Mono, v: Var, e: int) -> Mono:
    rest = [t for t in m if t[0] != v]
    if e:
        rest.append((v, e))
        rest.sort()
    return tuple(rest)


_X2_PLUS_Y2: Poly = {((VX, 2),): mpq(1), ((VY, 2),): mpq(1)}


def _reduce_mono(m: Mono, c) -> Poly | None:
    """Rewrite r**2 -> x**2 + y**2 and i**2 -> -1; None if m is already reduced."""
    er = ei = 0
    for v, e in m:
        if v == VR:
            er = e
        elif v == VI:
            ei = e
        elif v > VI:
            break
    if er < 2 and ei < 2:
        return None
    base = _mono_set(_mono_set(m, VR, er % 2), VI, ei % 2)
    if ei // 2 % 2:
        c = -c
    out: Poly = {base: c}
    for _ in range(er // 2):
        out = _p_mul_raw(out, _X2_PLUS_Y2)
    return out


def _p_mul_raw(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono_mul(m1, m2)
            c = out.get(m)
            if c is None:
                out[m] = c1 * c2
            else:
                c = c + c1 * c2
                if c:
                    out[m] = c
                else:
                    del out[m]
    return out


def p_reduce(a: Poly) -> Poly:
    out: Poly = {}
    dirty = False
    for m, c in a.items():
        red = _reduce_mono(m, c)
        if red is None:
            out[m] = out.get(m, 0) + c
        else:
            dirty = True
            for m2, c2 in red.items():
                out[m2] = out.get(m2, 0) + c2
    if dirty or len(out) != len(a):
        out = {m: c for m, c in out.items() if c}
    return out


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    if len(a) == 1 and ONE_MONO in a:
        return p_scale(b, a[ONE_MONO])
    if len(b) == 1 and ONE_MONO in b:
        return p_scale(a, b[ONE_MONO])
    out = _p_mul_raw(a, b)
    if any(_needs_reduce(m) for m in out):
        out = p_reduce(out)
    return out


def _needs_reduce(m: Mono) -> bool:
    for v, e in m:
        if v > VI:
            return False
        if (v == VR or v == VI) and e >= 2:
            return True
    return False


def p_add(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def p_scale(a: Poly, c) -> Poly:
    if not c:
        return {}
    if c == 1:
        return a
    return {m: v * c for m, v in a.items()}


def p_neg(a: Poly) -> Poly:
    return {m: -v for m, v in a.items()}


def p_const(c) -> Poly:
    c = mpq(c)
    return {ONE_MONO: c} if c else {}


def p_vars(a: Poly) -> set:
    out = set()
    for m in a:
        for v, _ in m:
            out.add(v)
    return out


def p_is_const(a: Poly) -> bool:
    return not a or (len(a) == 1 and ONE_MONO in a)


def p_pdiff(a: Poly, v: Var) -> Poly:
    """Partial derivative treating every variable as independent."""
    out: Poly = {}
    for m, c in a.items():
        e = _mono_exp(m, v)
        if e:
            m2 = _mono_set(m, v, e - 1)
            out[m2] = out.get(m2, 0) + c * e
    return {m: c for m, c in out.items() if c}


def p_jet_prolong(a: Poly, axis: int) -> Poly:
    """Total-derivative contribution of jet variables (axis 0: x, 1: y)."""
    out: Poly = {}
    for m, c in a.items():
        for idx, (v, e) in enumerate(m):
            if v[0] != KIND_JET:
                continue
            nv = (KIND_JET, v[1], v[2] + (axis == 0), v[3] + (axis == 1))
            rest = m[:idx] + ((v, e - 1),) + m[idx + 1:] if e > 1 else m[:idx] + m[idx + 1:]
            m2 = _mono_mul(rest, ((nv, 1),))
            out[m2] = out.get(m2, 0) + c * e
    return {m: c for m, c in out.items() if c}


def _lead_coeff(a: Poly):
    vs = sorted(p_vars(a))

    def key(m):
        exps = dict(m)
        return (sum(exps.values()), tuple(exps.get(v, 0) for v in vs))

    return a[max(a, key=key)]


@lru_cache(maxsize=64)
def _ring(n: int):
    return ring(",".join(f"v{k}" for k in range(n)), QQ, lex)[0]


def _to_sympy(a: Poly, index: Mapping[Var, int], R):
    n = len(index)
    d = {}
    for m, c in a.items():
        exps = [0] * n
        for v, e in m:
            exps[index[v]] = e
        d[tuple(exps)] = c
    return R.from_dict(d)


def _from_sympy(p, vs: list) -> Poly:
    out: Poly = {}
    for exps, c in p.items():
        out[tuple((vs[k], e) for k, e in enumerate(exps) if e)] = mpq(c)
    return out


def p_cofactors(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """(g, a/g, b/g) with g = gcd(a, b)."""
    vs = sorted(p_vars(a) | p_vars(b))
    if not vs:
        return p_const(1), a, b
    index = {v: k for k, v in enumerate(vs)}
    R = _ring(len(vs))
    g, ca, cb = _to_sympy(a, index, R).cofactors(_to_sympy(b, index, R))
    return _from_sympy(g, vs), _from_sympy(ca, vs), _from_sympy(cb, vs)


def _conj_i(a: Poly) -> Poly:
    return {m: (-c if _mono_exp(m, VI) % 2 else c) for m, c in a.items()}


def _conj_r(a: Poly) -> Poly:
    return {m: (-c if _mono_exp(m, VR) % 2 else c) for m, c in a.items()}


# --------------------------------------------------------------------------
# field elements

class Expr:
    """Immutable exact scalar in canonical ``num / den`` form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None, *, _canonical: bool = False):
        if den is None:
            den = {ONE_MONO: mpq(1)}
        if not _canonical:
            num, den = _normalize(p_reduce(num), p_reduce(den))
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, value) -> "Expr":
        return cls(p_const(value), _canonical=True)

    @classmethod
    def var(cls, v: Var) -> "Expr":
        return cls({((v, 1),): mpq(1)}, _canonical=True)

    @classmethod
    def coerce(cls, value) -> "Expr":
        if isinstance(value, Expr):
            return value
        return cls.const(value)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return p_is_const(self.num) and p_is_const(self.den)

    def is_polynomial(self) -> bool:
        return p_is_const(self.den)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self.num.get(ONE_MONO, mpq(0))

    def variables(self) -> set:
        return p_vars(self.num) | p_vars(self.den)

    def free_of(self, v: Var) -> bool:
        return v not in self.variables()

    def jets(self) -> set:
        return {v for v in self.variables() if v[0] == KIND_JET}

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            if p_is_const(self.den):
                return Expr(p_add(self.num, other.num), self.den, _canonical=True)
            return Expr(p_add(self.num, other.num), self.den)
        return Expr(p_add(p_mul(self.num, other.den), p_mul(other.num, self.den)),
                    p_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(p_neg(self.num), self.den, _canonical=True)

    def __sub__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Expr":
        return _coerce(other) - self

    def __mul__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return ZERO
        if p_is_const(self.den) and p_is_const(other.den):
            return Expr(p_mul(self.num, other.num), _canonical=True)
        return Expr(p_mul(self.num, other.num), p_mul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "Expr":
        if not self.num:
            raise ZeroDivisionError("division by zero expression")
        n = self.num
        # rationalize i, then r, so the new denominator is free of both
        ci = _conj_i(n)
        n2 = p_mul(n, ci)
        cr = _conj_r(n2)
        norm = p_mul(n2, cr)
        top = p_mul(p_mul(self.den, ci), cr)
        return Expr(top, norm)

    def __truediv__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_constant():
            c = other.constant_value()
            if not c:
                raise ZeroDivisionError("division by zero expression")
            return Expr(p_scale(self.num, 1 / c), self.den, _canonical=True)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Expr":
        return _coerce(other) / self

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            if isinstance(other, (int, mpq)) or type(other).__name__ == "Fraction":
                other = Expr.const(other)
            else:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.num)

    def __repr__(self) -> str:
        return f"Expr({self})"

    def __str__(self) -> str:
        from .grammar import format_expr
        return format_expr(self)

    # -- calculus / structure -------------------------------------------------
    def diff(self, wrt: str) -> "Expr":
        return diff(self, wrt)

    def conjugate(self) -> "Expr":
        """Complex conjugate: i -> -i; everything else is real."""
        return Expr(_conj_i(self.num), self.den, _canonical=True)

    def is_real(self) -> bool:
        return all(_mono_exp(m, VI) == 0 for m in self.num)

    def hbar_coefficients(self) -> dict[int, "Expr"]:
        """Split into powers of hbar; requires an hbar-free denominator."""
        if VHBAR in p_vars(self.den):
            raise ValueError("denominator depends on hbar")
        parts: dict[int, Poly] = {}
        for m, c in self.num.items():
            e = _mono_exp(m, VHBAR)
            parts.setdefault(e, {})[_mono_without(m, VHBAR)] = c
        return {e: Expr(p, self.den) for e, p in sorted(parts.items())}

    def hbar_degree(self) -> int:
        parts = self.hbar_coefficients()
        return max(parts) if parts else -1

    def subs(self, mapping: Mapping[Var, "Expr"]) -> "Expr":
        return _evaluate(self, lambda v: mapping.get(v))

    def substitute(self, bindings: Mapping[str, "Expr"]) -> "Expr":
        return substitute(self, bindings)


def _coerce(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, mpq)) or type(value).__name__ == "Fraction":
        return Expr.const(value)
    return NotImplemented


def _normalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return {}, {ONE_MONO: mpq(1)}
    if p_is_const(den):
        return p_scale(num, 1 / den[ONE_MONO]), {ONE_MONO: mpq(1)}
    dv = p_vars(den)
    if VR in dv or VI in dv:
        # callers only build such denominators through inverse(); be safe
        e = Expr(num, _canonical=True) * Expr(den, _canonical=True).inverse()
        return e.num, e.den
    if p_is_const(num):
        g = None
    else:
        g, num, den = p_cofactors(num, den)
    lc = _lead_coeff(den)
    if lc != 1:
        num = p_scale(num, 1 / lc)
        den = p_scale(den, 1 / lc)
    return num, den


ZERO = Expr({}, _canonical=True)
ONE = Expr.const(1)

x = Expr.var(VX)
y = Expr.var(VY)
r = Expr.var(VR)
I = Expr.var(VI)
hbar = Expr.var(VHBAR)


def const(value) -> Expr:
    return Expr.const(value)


def param(name: str) -> Expr:
    return Expr.var(param_var(name))


def jet(fid: str, dx: int = 0, dy: int = 0) -> Expr:
    return Expr.var(jet_var(fid, dx, dy))


def is_zero(e: Expr) -> bool:
    return e.is_zero()


# --------------------------------------------------------------------------
# differentiation and substitution

_R_OVER_RSQ = {"x": None, "y": None}


def _dr(wrt: str) -> Expr:
    # d r / dx = x / r = x r / (x^2 + y^2)
    cached = _R_OVER_RSQ[wrt]
    if cached is None:
        cached = (x if wrt == "x" else y) * r / (x * x + y * y)
        _R_OVER_RSQ[wrt] = cached
    return cached


def _poly_total_diff(a: Poly, wrt: str) -> Poly:
    v = VX if wrt == "x" else VY
    out = p_pdiff(a, v)
    jets = p_jet_prolong(a, 0 if wrt == "x" else 1)
    return p_add(out, jets) if jets else out


def diff(e: Expr, wrt: str) -> Expr:
    """Total derivative d/dx or d/dy (jets are prolonged, r is sqrt(x^2+y^2))."""
    if wrt not in ("x", "y"):
        raise ValueError("can only differentiate with respect to 'x' or 'y'")
    if not e.num:
        return ZERO
    dnum = _poly_total_diff(e.num, wrt)
    num_r = p_pdiff(e.num, VR)
    if p_is_const(e.den):
        out = Expr(dnum, _canonical=True)
    else:
        dden = _poly_total_diff(e.den, wrt)
        top = p_add(p_mul(dnum, e.den), p_neg(p_mul(e.num, dden)))
        out = Expr(top, p_mul(e.den, e.den))
    if num_r:
        out = out + Expr(num_r, e.den, _canonical=not bool(p_vars(e.den))) * _dr(wrt)
    return out


def diff_n(e: Expr, nx: int, ny: int) -> Expr:
    for _ in range(nx):
        e = diff(e, "x")
    for _ in range(ny):
        e = diff(e, "y")
    return e


def _eval_poly(a: Poly, lookup: Callable[[Var], Expr | None]) -> Expr:
    # split each monomial into an untouched part and a substituted part
    groups: dict[Mono, Poly] = {}
    touched: dict[Var, Expr] = {}
    for m, c in a.items():
        keep = []
        sub = []
        for v, e in m:
            if v in touched:
                val = touched[v]
            else:
                val = lookup(v)
                touched[v] = val
            (keep if val is None else sub).append((v, e))
        groups.setdefault(tuple(sub), {})[tuple(keep)] = c
    total = ZERO
    powers: dict[tuple, Expr] = {}
    for sub, rest in groups.items():
        val = Expr(rest, _canonical=not any(True for mm in rest if _needs_reduce(mm)))
        for v, e in sub:
            key = (v, e)
            if key not in powers:
                powers[key] = touched[v] ** e
            val = val * powers[key]
        total = total + val
    return total


def _evaluate(e: Expr, lookup: Callable[[Var], Expr | None]) -> Expr:
    num = _eval_poly(e.num, lookup)
    if p_is_const(e.den):
        return num / Expr(e.den, _canonical=True)
    return num / _eval_poly(e.den, lookup)


class RecursiveBindingError(ValueError):
    pass


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Replace every jet ``D[f,a,b]`` with ``f`` bound by the derivative of its binding."""
    if not bindings:
        return e
    for fid, val in bindings.items():
        if any(j[1] == fid for j in val.jets()):
            raise RecursiveBindingError(f"binding for {fid!r} refers to {fid!r} itself")
    cache: dict[Var, Expr] = {}

    def lookup(v: Var):
        if v[0] != KIND_JET or v[1] not in bindings:
            return None
        if v not in cache:
            cache[v] = diff_n(bindings[v[1]], v[2], v[3])
        return cache[v]

    return _evaluate(e, lookup)


def subs_vars(e: Expr, mapping: Mapping[Var, Expr]) -> Expr:
    return e.subs(mapping)


def expr_sum(items: Iterable[Expr]) -> Expr:
    total = ZERO
    for it in items:
        total = total + it
    return total
