"""Exact symbolic expressions with a canonical rational normal form.

Expressions live in the field of rational functions over an ordered set of
generators: registered coordinate and parameter symbols, formal function
applications f(e1, ..., em) carrying a derivative multi-index, and the four
elementary functions sin, cos, exp, log applied to expressions.  Every
Expression is kept in normal form at all times:

    num / den,  both multivariate polynomials with Fraction coefficients,
    gcd(num, den) = 1, den monic with respect to a fixed monomial order.

Equality of normal forms is therefore decidable structural equality on the
rational fragment.  No transcendental simplification is attempted beyond the
constant folds sin(0) = 0, cos(0) = 1, exp(0) = 1, log(1) = 0; identities such
as sin(x)^2 + cos(x)^2 = 1 are deliberately left to the sampling layer.

Zero testing is layered and always returns a verdict, never a bare bool:

    proved-zero      normal form is literally 0
    proved-nonzero   purely rational expression with nonzero normal form
    numeric-zero     all random samples vanish within tolerance
    numeric-nonzero  some sample exceeds tolerance (carries the witness)

Formal function symbols are interpreted by random polynomials during
sampling, with derivatives taken from the same interpretation so that
chain-rule consistent cancellations survive evaluation exactly.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from random import Random

__all__ = [
    "SymexprError", "ExprSyntaxError", "UnknownSymbolError", "DomainError",
    "PoleError", "InconclusiveSamplingError",
    "Sym", "FuncSym", "SymbolTable", "FormalApp", "ElemApp",
    "Expression", "const", "sym_expr", "formal", "elem", "parse",
    "ZeroTestConfig", "Witness", "ZeroVerdict", "is_zero",
    "CheckResult", "check_all_zero", "aggregate_status",
    "PROVED", "NUMERIC", "FAIL",
]

ELEMENTARY = ("sin", "cos", "exp", "log")


class SymexprError(Exception):
    pass


class ExprSyntaxError(SymexprError):
    def __init__(self, message, line, col):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnknownSymbolError(SymexprError):
    def __init__(self, name):
        super().__init__(f"unknown symbol '{name}'")
        self.name = name


class DomainError(SymexprError):
    pass


class PoleError(SymexprError):
    pass


class InconclusiveSamplingError(SymexprError):
    pass


# --------------------------------------------------------------------------
# symbols

class Sym:
    """A registered coordinate or parameter symbol."""

    __slots__ = ("name", "kind", "_skey")

    def __init__(self, name, kind):
        self.name = name
        self.kind = kind
        # parameters sort before coordinates so s*t prints in that order
        rank = 0 if kind == "parameter" else 1
        self._skey = (rank, name)

    @property
    def skey(self):
        return self._skey

    def __repr__(self):
        return f"Sym({self.name!r})"

    def __str__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, Sym) and other.name == self.name and other.kind == self.kind

    def __hash__(self):
        return hash(("Sym", self.name, self.kind))


class FuncSym:
    """A formal function symbol of fixed arity."""

    __slots__ = ("name", "arity")

    def __init__(self, name, arity):
        self.name = name
        self.arity = arity

    def __repr__(self):
        return f"FuncSym({self.name!r}, arity={self.arity})"

    def __eq__(self, other):
        return isinstance(other, FuncSym) and other.name == self.name and other.arity == self.arity

    def __hash__(self):
        return hash(("FuncSym", self.name, self.arity))


class SymbolTable:
    """Append-only registry of symbols; parsing refuses unregistered names."""

    def __init__(self):
        self._entries = {}

    def _register(self, name, obj):
        if name in ELEMENTARY:
            raise DomainError(f"'{name}' is reserved")
        if not name or not (name[0].isalpha() or name[0] == "_"):
            raise DomainError(f"invalid identifier '{name}'")
        existing = self._entries.get(name)
        if existing is not None:
            if existing == obj:
                return existing
            raise DomainError(f"'{name}' already registered with a different kind")
        self._entries[name] = obj
        return obj

    def coordinate(self, name):
        return self._register(name, Sym(name, "coordinate"))

    def parameter(self, name):
        return self._register(name, Sym(name, "parameter"))

    def coordinates(self, names):
        if isinstance(names, str):
            names = names.replace(",", " ").split()
        return [self.coordinate(n) for n in names]

    def function(self, name, arity):
        if arity < 1:
            raise DomainError("function arity must be at least 1")
        return self._register(name, FuncSym(name, arity))

    def lookup(self, name):
        return self._entries.get(name)


# --------------------------------------------------------------------------
# generators beyond plain symbols

class FormalApp:
    """f(e1, ..., em) with a symmetric derivative multi-index per argument."""

    __slots__ = ("func", "args", "dmi", "_skey", "_hash")

    def __init__(self, func, args, dmi):
        if len(args) != func.arity or len(dmi) != func.arity:
            raise DomainError(f"'{func.name}' expects {func.arity} arguments")
        self.func = func
        self.args = tuple(args)
        self.dmi = tuple(dmi)
        self._skey = None
        self._hash = None

    @property
    def skey(self):
        if self._skey is None:
            self._skey = (2, self.func.name, self.dmi, tuple(a.skey for a in self.args))
        return self._skey

    def __eq__(self, other):
        return (isinstance(other, FormalApp) and other.func == self.func
                and other.dmi == self.dmi and other.args == self.args)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("FormalApp", self.func, self.dmi, self.args))
        return self._hash

    def __str__(self):
        inner = ", ".join(str(a) for a in self.args)
        if any(self.dmi):
            idx = []
            for pos, k in enumerate(self.dmi, start=1):
                idx.extend([str(pos)] * k)
            return f"{self.func.name}_{{,{','.join(idx)}}}({inner})"
        return f"{self.func.name}({inner})"


class ElemApp:
    """sin/cos/exp/log applied to an expression."""

    __slots__ = ("name", "arg", "_skey", "_hash")

    def __init__(self, name, arg):
        if name not in ELEMENTARY:
            raise DomainError(f"unknown elementary function '{name}'")
        self.name = name
        self.arg = arg
        self._skey = None
        self._hash = None

    @property
    def skey(self):
        if self._skey is None:
            self._skey = (3, self.name, self.arg.skey)
        return self._skey

    def __eq__(self, other):
        return isinstance(other, ElemApp) and other.name == self.name and other.arg == self.arg

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("ElemApp", self.name, self.arg))
        return self._hash

    def __str__(self):
        return f"{self.name}({self.arg})"


# --------------------------------------------------------------------------
# polynomial layer

# a monomial is a tuple of (generator, exponent) pairs sorted by skey, exps > 0

def _mono_mul(m1, m2):
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        g1, e1 = m1[i]
        g2, e2 = m2[j]
        k1, k2 = g1.skey, g2.skey
        if k1 == k2:
            out.append((g1, e1 + e2))
            i += 1
            j += 1
        elif k1 < k2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_cmp(m1, m2):
    """Lexicographic order: earlier generator with higher exponent wins."""
    i = j = 0
    while i < len(m1) and j < len(m2):
        g1, e1 = m1[i]
        g2, e2 = m2[j]
        k1, k2 = g1.skey, g2.skey
        if k1 == k2:
            if e1 != e2:
                return 1 if e1 > e2 else -1
            i += 1
            j += 1
        elif k1 < k2:
            return 1
        else:
            return -1
    if i < len(m1):
        return 1
    if j < len(m2):
        return -1
    return 0


_MONO_KEY = cmp_to_key(_mono_cmp)


def _mono_divides(m1, m2):
    """True when every exponent of m1 fits inside m2."""
    exps = {g.skey: e for g, e in m2}
    return all(exps.get(g.skey, 0) >= e for g, e in m1)


def _mono_div(m1, m2):
    # m1 / m2 assuming divisibility
    exps = {g.skey: (g, e) for g, e in m1}
    out = []
    for g, e in m2:
        ge, ee = exps[g.skey]
        exps[g.skey] = (ge, ee - e)
    for g, e in m1:
        ge, ee = exps[g.skey]
        if ee > 0:
            out.append((ge, ee))
    return tuple(out)


class Poly:
    """Multivariate polynomial over Fraction in the generator algebra."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms):
        self.terms = terms
        self._hash = None

    @staticmethod
    def zero():
        return Poly({})

    @staticmethod
    def const(c):
        c = Fraction(c)
        return Poly({(): c}) if c else Poly({})

    @staticmethod
    def from_gen(gen):
        return Poly({((gen, 1),): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(m == () for m in self.terms)

    def constant_value(self):
        return self.terms.get((), Fraction(0))

    def __eq__(self, other):
        return isinstance(other, Poly) and other.terms == self.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def add(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            nc = out.get(m, Fraction(0)) + c
            if nc:
                out[m] = nc
            else:
                out.pop(m, None)
        return Poly(out)

    def neg(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def mul(self, other):
        if not self.terms or not other.terms:
            return Poly({})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                nc = out.get(m, Fraction(0)) + c1 * c2
                if nc:
                    out[m] = nc
                else:
                    out.pop(m, None)
        return Poly(out)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return Poly({})
        return Poly({m: cc * c for m, cc in self.terms.items()})

    def pow(self, k):
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            base = base.mul(base)
            k >>= 1
        return result

    def generators(self):
        seen = {}
        for m in self.terms:
            for g, _ in m:
                seen[g.skey] = g
        return seen

    def lead(self):
        m = max(self.terms, key=_MONO_KEY)
        return m, self.terms[m]


def _poly_div_exact(a, b):
    """Exact division a / b; internal invariant violation if it fails."""
    if b.is_zero():
        raise DomainError("polynomial division by zero")
    if b.is_constant():
        return a.scale(1 / b.constant_value())
    rem = dict(a.terms)
    out = {}
    lb, cb = b.lead()
    while rem:
        rp = Poly(rem)
        la, ca = rp.lead()
        if not _mono_divides(lb, la):
            raise DomainError("inexact polynomial division")
        qm = _mono_div(la, lb)
        qc = ca / cb
        out[qm] = out.get(qm, Fraction(0)) + qc
        piece = Poly({qm: qc}).mul(b)
        for m, c in piece.terms.items():
            nc = rem.get(m, Fraction(0)) - c
            if nc:
                rem[m] = nc
            else:
                rem.pop(m, None)
    return Poly({m: c for m, c in out.items() if c})


def _coeffs_in(p, g):
    gk = g.skey
    out = {}
    for m, c in p.terms.items():
        e = 0
        rest = []
        for gen, ee in m:
            if gen.skey == gk:
                e = ee
            else:
                rest.append((gen, ee))
        key = tuple(rest)
        bucket = out.setdefault(e, {})
        bucket[key] = bucket.get(key, Fraction(0)) + c
    return {e: Poly({m: c for m, c in t.items() if c}) for e, t in out.items()}


def _deg_in(p, g):
    gk = g.skey
    best = 0
    for m in p.terms:
        for gen, e in m:
            if gen.skey == gk and e > best:
                best = e
    return best


def _mul_gen_pow(p, g, k):
    if k == 0:
        return p
    shift = ((g, k),)
    return Poly({_mono_mul(m, shift): c for m, c in p.terms.items()})


def _rational_content(p):
    gn = 0
    ld = 1
    for c in p.terms.values():
        gn = math.gcd(gn, abs(c.numerator))
        ld = ld * c.denominator // math.gcd(ld, c.denominator)
    if gn == 0:
        return Fraction(1)
    return Fraction(gn, ld)


def _scale_primitive(p):
    """Divide out the rational content; vital against coefficient blowup."""
    if p.is_zero():
        return p
    rc = _rational_content(p)
    if rc != 1:
        return p.scale(1 / rc)
    return p


def _content_and_primitive(p, g):
    coeffs = _coeffs_in(p, g)
    content = Poly.zero()
    for c in coeffs.values():
        content = _poly_gcd(content, c)
        if content.is_constant() and not content.is_zero():
            content = Poly.const(1)
            break
    if content.is_zero():
        return Poly.const(1), _scale_primitive(p)
    return content, _scale_primitive(_poly_div_exact(p, content))


def _pseudo_rem(a, b, g):
    db = _deg_in(b, g)
    cb = _coeffs_in(b, g)
    lcb = cb[db]
    rem = a
    while not rem.is_zero():
        da = _deg_in(rem, g)
        if da < db:
            break
        ca = _coeffs_in(rem, g)
        lca = ca[da]
        rem = _scale_primitive(
            rem.mul(lcb).add(_mul_gen_pow(lca.mul(b), g, da - db).neg()))
    return rem


def _monomial_gcd_with(mono, coeffless, p):
    """gcd of a single monomial with an arbitrary polynomial, content 1."""
    mins = {g.skey: (g, e) for g, e in mono}
    for m in p.terms:
        exps = {g.skey: e for g, e in m}
        for k in list(mins):
            g, e = mins[k]
            ee = exps.get(k, 0)
            if ee < e:
                if ee == 0:
                    del mins[k]
                else:
                    mins[k] = (g, ee)
        if not mins:
            break
    out = tuple(sorted(mins.values(), key=lambda t: t[0].skey))
    return Poly({out: Fraction(1)})


def _poly_gcd(a, b):
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if a.is_constant() or b.is_constant():
        return Poly.const(1)
    if a == b:
        return a
    if len(a.terms) == 1:
        m = next(iter(a.terms))
        return _monomial_gcd_with(m, None, b)
    if len(b.terms) == 1:
        m = next(iter(b.terms))
        return _monomial_gcd_with(m, None, a)
    gens = dict(a.generators())
    gens.update(b.generators())
    g = max(gens.values(), key=lambda x: x.skey)
    ca, pa = _content_and_primitive(a, g)
    cb, pb = _content_and_primitive(b, g)
    cont = _poly_gcd(ca, cb)
    if _deg_in(pa, g) < _deg_in(pb, g):
        pa, pb = pb, pa
    while True:
        r = _pseudo_rem(pa, pb, g)
        if r.is_zero():
            res = pb
            break
        if _deg_in(r, g) == 0:
            res = Poly.const(1)
            break
        pa, pb = pb, _content_and_primitive(r, g)[1]
    if res.is_constant():
        return cont
    return cont.mul(_content_and_primitive(res, g)[1])


# --------------------------------------------------------------------------
# expressions

def _normalize(num, den):
    if den.is_zero():
        raise DomainError("zero denominator")
    if num.is_zero():
        return num, Poly.const(1)
    g = _poly_gcd(num, den)
    if not (g.is_constant() and not g.is_zero()):
        num = _poly_div_exact(num, g)
        den = _poly_div_exact(den, g)
    _, lc = den.lead()
    if lc != 1:
        num = num.scale(1 / lc)
        den = den.scale(1 / lc)
    return num, den


class Expression:
    """Immutable rational normal form; arithmetic preserves canonicity."""

    __slots__ = ("num", "den", "_hash", "_skey", "_str")

    def __init__(self, num, den):
        self.num = num
        self.den = den
        self._hash = None
        self._skey = None
        self._str = None

    @staticmethod
    def _make(num, den):
        num, den = _normalize(num, den)
        return Expression(num, den)

    # ---- predicates

    @property
    def is_zero_form(self):
        return self.num.is_zero()

    @property
    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        if not self.is_constant:
            raise DomainError("not a constant expression")
        return self.num.constant_value() / self.den.constant_value()

    @property
    def skey(self):
        if self._skey is None:
            def pkey(p):
                return tuple(sorted(
                    (tuple((g.skey, e) for g, e in m), (c.numerator, c.denominator))
                    for m, c in p.terms.items()))
            self._skey = (pkey(self.num), pkey(self.den))
        return self._skey

    def __eq__(self, other):
        return (isinstance(other, Expression)
                and other.num == self.num and other.den == self.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # ---- arithmetic

    @staticmethod
    def _coerce(v):
        if isinstance(v, Expression):
            return v
        if isinstance(v, (int, Fraction)):
            return const(v)
        return NotImplemented

    def __add__(self, other):
        other = Expression._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            # common case in elimination chains; keeps gcd inputs small
            return Expression._make(self.num.add(other.num), self.den)
        num = self.num.mul(other.den).add(other.num.mul(self.den))
        return Expression._make(num, self.den.mul(other.den))

    __radd__ = __add__

    def __neg__(self):
        return Expression(self.num.neg(), self.den)

    def __sub__(self, other):
        other = Expression._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = Expression._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.num, self.den
        c, d = other.num, other.den
        # cross-cancel before multiplying so gcd never sees the big product
        if not a.is_zero() and not d.is_constant():
            g = _poly_gcd(a, d)
            if not (g.is_constant() and not g.is_zero()):
                a = _poly_div_exact(a, g)
                d = _poly_div_exact(d, g)
        if not c.is_zero() and not b.is_constant():
            g = _poly_gcd(c, b)
            if not (g.is_constant() and not g.is_zero()):
                c = _poly_div_exact(c, g)
                b = _poly_div_exact(b, g)
        return Expression._make(a.mul(c), b.mul(d))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Expression._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise DomainError("division by zero expression")
        # reuse the cross-cancelling product on the flipped operand
        return self * Expression(other.den, other.num)

    def __rtruediv__(self, other):
        return Expression._coerce(other) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise DomainError("exponent must be an integer")
        if k < 0:
            if self.num.is_zero():
                raise DomainError("zero to a negative power")
            return Expression._make(self.den.pow(-k), self.num.pow(-k))
        return Expression._make(self.num.pow(k), self.den.pow(k))

    def normalize(self):
        """Identity by construction; kept so the invariant is spellable."""
        return self

    # ---- structure

    def free_symbols(self):
        out = set()
        _collect_syms(self.num, out)
        _collect_syms(self.den, out)
        return frozenset(out)

    def function_symbols(self):
        out = {}
        _collect_funcs(self.num, out)
        _collect_funcs(self.den, out)
        return out

    def has_applications(self):
        return _has_apps(self.num) or _has_apps(self.den)

    def depends_on(self, sym):
        """Structural occurrence test (transcendental constancy not detected)."""
        return sym in self.free_symbols()

    def max_derivative_order(self):
        return max(_max_dmi(self.num), _max_dmi(self.den))

    # ---- calculus

    def diff(self, sym):
        if not isinstance(sym, Sym):
            raise DomainError("can only differentiate in a coordinate or parameter symbol")
        dnum = _poly_diff(self.num, sym)
        if self.den.is_constant():
            return dnum / self.den.constant_value()
        dden = _poly_diff(self.den, sym)
        den_e = Expression(self.den, Poly.const(1))
        num_e = Expression(self.num, Poly.const(1))
        return (dnum * den_e - num_e * dden) / (den_e * den_e)

    def subs(self, mapping):
        """Simultaneous substitution of symbols by expressions, renormalized."""
        for k in mapping:
            if not isinstance(k, Sym):
                raise DomainError("substitution keys must be symbols")
        cache = {}
        return _subs_poly(self.num, mapping, cache) / _subs_poly(self.den, mapping, cache)

    def evaluate(self, point, interp=None, pole_radius=1e-3):
        nv = _poly_eval(self.num, point, interp, pole_radius)
        dv = _poly_eval(self.den, point, interp, pole_radius)
        if abs(dv) < pole_radius:
            raise PoleError("denominator within pole radius")
        return nv / dv

    # ---- printing

    def __str__(self):
        if self._str is None:
            if self.num.is_zero():
                self._str = "0"
            elif self.den.is_constant() and self.den.constant_value() == 1:
                self._str = _poly_str(self.num)
            else:
                self._str = f"({_poly_str(self.num)})/({_poly_str(self.den)})"
        return self._str

    def __repr__(self):
        return f"<expr {self}>"


def _collect_syms(p, out):
    for m in p.terms:
        for g, _ in m:
            if isinstance(g, Sym):
                out.add(g)
            elif isinstance(g, FormalApp):
                for a in g.args:
                    out.update(a.free_symbols())
            elif isinstance(g, ElemApp):
                out.update(g.arg.free_symbols())


def _collect_funcs(p, out):
    for m in p.terms:
        for g, _ in m:
            if isinstance(g, FormalApp):
                out[g.func.name] = g.func
                for a in g.args:
                    out.update(a.function_symbols())
            elif isinstance(g, ElemApp):
                out.update(g.arg.function_symbols())


def _has_apps(p):
    for m in p.terms:
        for g, _ in m:
            if not isinstance(g, Sym):
                return True
    return False


def _max_dmi(p):
    best = 0
    for m in p.terms:
        for g, _ in m:
            if isinstance(g, FormalApp):
                best = max(best, sum(g.dmi), *(a.max_derivative_order() for a in g.args))
            elif isinstance(g, ElemApp):
                best = max(best, g.arg.max_derivative_order())
    return best


def _gen_diff(g, sym):
    if isinstance(g, Sym):
        return const(1) if g == sym else const(0)
    if isinstance(g, FormalApp):
        total = const(0)
        for j, a in enumerate(g.args):
            da = a.diff(sym)
            if da.is_zero_form:
                continue
            bumped = list(g.dmi)
            bumped[j] += 1
            total = total + formal(g.func, g.args, tuple(bumped)) * da
        return total
    if isinstance(g, ElemApp):
        da = g.arg.diff(sym)
        if da.is_zero_form:
            return const(0)
        if g.name == "sin":
            return elem("cos", g.arg) * da
        if g.name == "cos":
            return -(elem("sin", g.arg)) * da
        if g.name == "exp":
            return _gen_expr(g) * da
        return da / g.arg  # log
    raise DomainError("unknown generator")


def _gen_expr(g):
    return Expression(Poly.from_gen(g), Poly.const(1))


def _mono_expr(m):
    e = const(1)
    for g, k in m:
        e = e * (_gen_expr(g) ** k)
    return e


def _poly_diff(p, sym):
    total = const(0)
    for m, c in p.terms.items():
        for idx, (g, k) in enumerate(m):
            dg = _gen_diff(g, sym)
            if dg.is_zero_form:
                continue
            rest = const(c * k)
            for jdx, (g2, k2) in enumerate(m):
                power = k2 - 1 if jdx == idx else k2
                if power:
                    rest = rest * (_gen_expr(g2) ** power)
            total = total + rest * dg
    return total


def _subs_gen(g, mapping, cache):
    key = g
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(g, Sym):
        out = mapping.get(g)
        out = _gen_expr(g) if out is None else Expression._coerce(out)
    elif isinstance(g, FormalApp):
        args = tuple(a.subs(mapping) for a in g.args)
        out = formal(g.func, args, g.dmi)
    else:
        out = elem(g.name, g.arg.subs(mapping))
    cache[key] = out
    return out


def _subs_poly(p, mapping, cache):
    total = const(0)
    for m, c in p.terms.items():
        piece = const(c)
        for g, k in m:
            piece = piece * (_subs_gen(g, mapping, cache) ** k)
        total = total + piece
    return total


def _poly_eval(p, point, interp, pole_radius):
    total = Fraction(0)
    for m, c in p.terms.items():
        v = c
        for g, k in m:
            v = v * _gen_value(g, point, interp, pole_radius) ** k
        total = total + v
    return total


def _gen_value(g, point, interp, pole_radius):
    if isinstance(g, Sym):
        try:
            return point[g]
        except KeyError:
            raise DomainError(f"no value bound for symbol '{g.name}'") from None
    if isinstance(g, FormalApp):
        if interp is None:
            raise DomainError("formal function requires an interpretation")
        args = [a.evaluate(point, interp, pole_radius) for a in g.args]
        return interp.partial_value(g.func, g.dmi, args)
    arg = g.arg.evaluate(point, interp, pole_radius)
    x = float(arg)
    if g.name == "sin":
        return math.sin(x)
    if g.name == "cos":
        return math.cos(x)
    if g.name == "exp":
        if x > 60.0:
            raise PoleError("exp overflow region")
        return math.exp(x)
    if x <= 0.0:
        raise PoleError("log of a non-positive value")
    return math.log(x)


# ---- constructors

_ZERO_CACHE = None
_ONE_CACHE = None


def const(v):
    global _ZERO_CACHE, _ONE_CACHE
    v = Fraction(v)
    if v == 0:
        if _ZERO_CACHE is None:
            _ZERO_CACHE = Expression(Poly.zero(), Poly.const(1))
        return _ZERO_CACHE
    if v == 1:
        if _ONE_CACHE is None:
            _ONE_CACHE = Expression(Poly.const(1), Poly.const(1))
        return _ONE_CACHE
    return Expression(Poly.const(v), Poly.const(1))


def sym_expr(sym):
    return _gen_expr(sym)


def formal(func, args, dmi=None):
    args = tuple(Expression._coerce(a) for a in args)
    if dmi is None:
        dmi = (0,) * func.arity
    return _gen_expr(FormalApp(func, args, dmi))


def elem(name, arg):
    arg = Expression._coerce(arg)
    # constant folds only; no other transcendental rewriting
    if arg.is_zero_form:
        if name == "sin":
            return const(0)
        if name in ("cos", "exp"):
            return const(1)
    if name == "log" and arg.is_constant and not arg.is_zero_form and arg.constant_value() == 1:
        return const(0)
    return _gen_expr(ElemApp(name, arg))


# ---- printing helpers

def _coeff_str(c):
    return str(c)


def _gen_pow_str(g, e):
    base = str(g)
    if isinstance(g, Sym) or isinstance(g, (FormalApp, ElemApp)):
        if e == 1:
            return base
        return f"{base}^{e}"
    return base


def _poly_str(p):
    if p.is_zero():
        return "0"
    items = sorted(p.terms.items(), key=lambda t: _MONO_KEY(t[0]), reverse=True)
    pieces = []
    for m, c in items:
        body = "*".join(_gen_pow_str(g, e) for g, e in m)
        mag = abs(c)
        if not body:
            text = _coeff_str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{_coeff_str(mag)}*{body}"
        pieces.append((c < 0, text))
    out = []
    for idx, (negative, text) in enumerate(pieces):
        if idx == 0:
            out.append(f"-{text}" if negative else text)
        else:
            out.append(f" - {text}" if negative else f" + {text}")
    return "".join(out)


# --------------------------------------------------------------------------
# parser

class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            start = i
            scol = col
            while i < n and text[i].isdigit():
                i += 1
                col += 1
            tokens.append(_Token("num", int(text[start:i]), line, scol))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            scol = col
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
                col += 1
            tokens.append(_Token("ident", text[start:i], line, scol))
            continue
        if ch in "+-*/^(),":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character '{ch}'", line, col)
    tokens.append(_Token("end", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens, table):
        self.tokens = tokens
        self.table = table
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(f"expected '{kind}'", tok.line, tok.col)
        return self.advance()

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError("trailing input", tok.line, tok.col)
        return e

    def expr(self):
        e = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance()
            rhs = self.factor()
            if op.kind == "*":
                e = e * rhs
            else:
                if rhs.is_zero_form:
                    raise ExprSyntaxError("division by zero", op.line, op.col)
                e = e / rhs
        return e

    def factor(self):
        if self.peek().kind == "-":
            self.advance()
            return -self.factor()
        return self.power()

    def power(self):
        e = self.atom()
        if self.peek().kind == "^":
            caret = self.advance()
            tok = self.peek()
            if tok.kind != "num":
                raise ExprSyntaxError("exponent must be an integer literal", tok.line, tok.col)
            self.advance()
            e = e ** tok.value
            if self.peek().kind == "^":
                nxt = self.peek()
                raise ExprSyntaxError("chained '^' needs parentheses", nxt.line, nxt.col)
        return e

    def atom(self):
        tok = self.advance()
        if tok.kind == "num":
            return const(tok.value)
        if tok.kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            name = tok.value
            if self.peek().kind == "(":
                return self.application(name, tok)
            entry = self.table.lookup(name)
            if entry is None:
                raise UnknownSymbolError(name)
            if isinstance(entry, FuncSym):
                raise ExprSyntaxError(f"'{name}' is a function and needs arguments", tok.line, tok.col)
            return sym_expr(entry)
        raise ExprSyntaxError("expected an expression", tok.line, tok.col)

    def application(self, name, tok):
        self.expect("(")
        args = [self.expr()]
        while self.peek().kind == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if name in ELEMENTARY:
            if len(args) != 1:
                raise ExprSyntaxError(f"'{name}' takes exactly one argument", tok.line, tok.col)
            return elem(name, args[0])
        entry = self.table.lookup(name)
        if entry is None:
            raise UnknownSymbolError(name)
        if not isinstance(entry, FuncSym):
            raise ExprSyntaxError(f"'{name}' is not a function", tok.line, tok.col)
        if len(args) != entry.arity:
            raise ExprSyntaxError(
                f"'{name}' expects {entry.arity} arguments, got {len(args)}", tok.line, tok.col)
        return formal(entry, tuple(args))


def parse(text, table):
    """Parse a source string into a normal-form Expression."""
    return _Parser(_tokenize(text), table).parse()


# --------------------------------------------------------------------------
# zero testing

@dataclass(frozen=True)
class ZeroTestConfig:
    samples: int = 16
    tol: float = 1e-9
    low: int = -2
    high: int = 2
    pole_radius: float = 1e-3
    seed: int = 0
    interp_degree: int = 3
    max_attempts: int = 60


DEFAULT_CONFIG = ZeroTestConfig()


@dataclass(frozen=True)
class Witness:
    point: tuple  # tuple of (Sym, Fraction) pairs, sorted by name
    value: object

    def point_dict(self):
        return dict(self.point)

    def render(self):
        pt = ", ".join(f"{s.name}={v}" for s, v in self.point)
        return f"[{pt}] -> {self.value}"


@dataclass(frozen=True)
class ZeroVerdict:
    status: str  # proved-zero | proved-nonzero | numeric-zero | numeric-nonzero
    witnesses: tuple = ()

    @property
    def is_zero(self):
        return self.status in ("proved-zero", "numeric-zero")

    @property
    def proved(self):
        return self.status.startswith("proved")

    def __str__(self):
        return self.status


class FunctionInterp:
    """Random polynomial stand-ins for formal function symbols."""

    def __init__(self, funcs, rng, degree):
        self.polys = {}
        self.degree = degree
        self._partials = {}
        for func in sorted(funcs.values(), key=lambda f: f.name):
            self.polys[func] = self._random_poly(func.arity, rng)

    def _random_poly(self, arity, rng):
        terms = {}
        for exps in _exponent_tuples(arity, self.degree):
            c = Fraction(rng.randint(-8, 8), rng.randint(1, 3))
            if c:
                terms[exps] = c
        if not terms:
            terms[(0,) * arity] = Fraction(1)
        return terms

    def partial_value(self, func, dmi, args):
        poly = self._partials.get((func, dmi))
        if poly is None:
            poly = self._differentiate(self.polys[func], dmi)
            self._partials[(func, dmi)] = poly
        total = Fraction(0)
        for exps, c in poly.items():
            v = c
            for a, e in zip(args, exps):
                v = v * a ** e
            total = total + v
        return total

    @staticmethod
    def _differentiate(poly, dmi):
        out = {}
        for exps, c in poly.items():
            coeff = c
            new = []
            dead = False
            for e, k in zip(exps, dmi):
                if e < k:
                    dead = True
                    break
                for j in range(k):
                    coeff *= (e - j)
                new.append(e - k)
            if not dead and coeff:
                key = tuple(new)
                out[key] = out.get(key, Fraction(0)) + coeff
        return out


def _exponent_tuples(arity, degree):
    if arity == 0:
        yield ()
        return
    for head in range(degree + 1):
        for tail in _exponent_tuples(arity - 1, degree - head):
            yield (head,) + tail


def _derive_seed(expr, cfg):
    digest = zlib.crc32(str(expr).encode("utf8"))
    return (cfg.seed << 32) ^ digest


def _draw_point(syms, rng, cfg, avoid_zero):
    point = {}
    for s in syms:
        while True:
            v = Fraction(rng.randint(-1999, 1999), 1000)
            if s in avoid_zero and abs(float(v)) < cfg.pole_radius:
                continue
            point[s] = v
            break
    return point


def is_zero(expr, cfg=DEFAULT_CONFIG, avoid_zero=frozenset()):
    """Layered zero test; see module docstring for the verdict ladder."""
    expr = Expression._coerce(expr)
    if expr.is_zero_form:
        return ZeroVerdict("proved-zero")
    syms = sorted(expr.free_symbols(), key=lambda s: s.name)
    rng = Random(_derive_seed(expr, cfg))
    if not expr.has_applications():
        witness = None
        for _ in range(cfg.max_attempts):
            point = _draw_point(syms, rng, cfg, avoid_zero)
            try:
                value = expr.evaluate(point, None, cfg.pole_radius)
            except (PoleError, DomainError, OverflowError, ValueError):
                continue
            if value != 0:
                witness = Witness(tuple(sorted(point.items(), key=lambda t: t[0].name)), value)
                break
        return ZeroVerdict("proved-nonzero", (witness,) if witness else ())
    funcs = expr.function_symbols()
    degree = max(cfg.interp_degree, expr.max_derivative_order() + 2)
    interp = FunctionInterp(funcs, rng, degree)
    witnesses = []
    budget = cfg.max_attempts * cfg.samples
    while len(witnesses) < cfg.samples and budget > 0:
        budget -= 1
        point = _draw_point(syms, rng, cfg, avoid_zero)
        try:
            value = expr.evaluate(point, interp, cfg.pole_radius)
        except (PoleError, DomainError, OverflowError, ValueError):
            continue
        w = Witness(tuple(sorted(point.items(), key=lambda t: t[0].name)), value)
        if abs(value) > cfg.tol:
            return ZeroVerdict("numeric-nonzero", (w,))
        witnesses.append(w)
    if not witnesses:
        raise InconclusiveSamplingError("no evaluable sample point found (persistent poles)")
    return ZeroVerdict("numeric-zero", tuple(witnesses))


# --------------------------------------------------------------------------
# certificate plumbing shared by the geometric layers

PROVED = "proved"
NUMERIC = "numeric"
FAIL = "fail"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str = ""
    witnesses: tuple = ()

    @property
    def passed(self):
        return self.status != FAIL

    @property
    def proved(self):
        return self.status == PROVED

    def render(self):
        head = f"{self.name}: {self.status}"
        if self.detail:
            head += f" ({self.detail})"
        return head


def check_all_zero(name, labeled_exprs, cfg=DEFAULT_CONFIG, avoid_zero=frozenset()):
    """Certify that every labeled expression is zero.

    Aggregation: any nonzero verdict fails the check and carries the label
    plus witness; otherwise proved when every verdict is proved-zero, and
    numeric when sampling was needed anywhere.
    """
    worst = PROVED
    witnesses = []
    detail = ""
    for label, e in labeled_exprs:
        v = is_zero(e, cfg, avoid_zero)
        if not v.is_zero:
            wit = v.witnesses[0].render() if v.witnesses else str(e)
            return CheckResult(name, FAIL, f"{label}: {v.status}, residual {e}", (wit,))
        if v.status == "numeric-zero":
            worst = NUMERIC
            witnesses.extend(v.witnesses[:1])
    if worst == NUMERIC:
        detail = "sampled"
    return CheckResult(name, worst, detail, tuple(w.render() for w in witnesses[:2]))


def aggregate_status(statuses):
    statuses = list(statuses)
    if any(s == FAIL for s in statuses):
        return FAIL
    if any(s == NUMERIC for s in statuses):
        return NUMERIC
    return PROVED
