"""Coordinate tensor calculus over exact symbolic scalars.

Multivector fields and differential forms live on a named chart and store
components on strictly increasing index tuples.  Algebra on the antisymmetric
indices is done through one shared Grassmann product with shuffle signs, so
wedge products, Schouten brackets, exterior derivatives and interior products
all route through the same merge code.

The Schouten bracket follows the convention in which it extends the Lie
bracket of vector fields with

    [P, Q] = (-1)^((p-1)(q-1)) sum_a (P d<-xi_a)(d_a Q) - sum_a (Q d<-xi_a)(d_a P)

where P, Q are written as Grassmann polynomials in odd generators xi_a,
d<-xi_a is the right derivative, and d_a differentiates coefficients in the
a-th coordinate.  Consequences used downstream: [X, Y] is the vector field
commutator, [X, f] = X(f), and the self-bracket of a bivector measures the
Jacobi defect of its bracket.

Scaling actions of the multiplicative group enter through RxAction.  A tensor
is homogeneous of degree k when the action pulls it back to s^k times itself;
contravariant tensors are pulled back by pushing forward along the inverse
scaling.  The infinitesimal version (Lie derivative along the generating
field equals k times the tensor) is always cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .symexpr import (
    CheckResult, DEFAULT_CONFIG, DomainError, Expression, FAIL, NUMERIC, PROVED,
    Poly, Sym, SymbolTable, _poly_div_exact, aggregate_status, check_all_zero,
    const, is_zero, parse, sym_expr,
)

__all__ = [
    "Chart", "chart", "Multivector", "DifferentialForm",
    "multivector", "differential_form", "d_function",
    "wedge", "exterior_d", "interior", "schouten", "lie_derivative",
    "ParametricMap", "identity_map", "RxAction", "standard_action",
    "HomogeneityResult", "homogeneity_degree",
    "NondegeneracyResult", "nondegenerate", "invert_symplectic",
    "sharp", "flat", "poisson_bracket", "hamiltonian_vf",
    "mat_mul", "mat_det", "mat_inv",
    "tensor_zero_check",
]


class Chart:
    """An ordered coordinate system backed by a symbol table."""

    def __init__(self, name, table, coords, avoid_zero=frozenset()):
        self.name = name
        self.table = table
        self.coords = tuple(coords)
        self.avoid_zero = frozenset(avoid_zero)
        self._index = {c: i for i, c in enumerate(self.coords)}
        if len(self._index) != len(self.coords):
            raise DomainError("duplicate coordinates in chart")

    @property
    def dim(self):
        return len(self.coords)

    def index(self, sym):
        try:
            return self._index[sym]
        except KeyError:
            raise DomainError(f"'{sym}' is not a coordinate of chart '{self.name}'") from None

    def sym(self, name):
        s = self.table.lookup(name)
        if not isinstance(s, Sym):
            raise DomainError(f"'{name}' is not a symbol")
        return s

    def x(self, name):
        return sym_expr(self.sym(name))

    def parse(self, text):
        return parse(text, self.table)

    def coord_exprs(self):
        return tuple(sym_expr(c) for c in self.coords)

    def __repr__(self):
        return f"Chart({self.name!r}: {' '.join(c.name for c in self.coords)})"


def chart(name, coord_names, table=None, avoid_zero=()):
    tab = table if table is not None else SymbolTable()
    coords = tab.coordinates(coord_names)
    if isinstance(avoid_zero, str):
        avoid_zero = avoid_zero.replace(",", " ").split()
    az = frozenset(c if isinstance(c, Sym) else tab.lookup(c) for c in avoid_zero)
    if None in az:
        raise DomainError("avoid_zero names an unregistered symbol")
    return Chart(name, tab, coords, az)


# --------------------------------------------------------------------------
# Grassmann index algebra shared by every antisymmetric operation

def _merge_sign(a_tuple, b_tuple):
    """Sign of sorting the concatenation of two disjoint increasing tuples."""
    inv = 0
    for b in b_tuple:
        for a in a_tuple:
            if a > b:
                inv += 1
    return -1 if inv & 1 else 1


def _gr_add(into, key, coeff):
    cur = into.get(key)
    new = coeff if cur is None else cur + coeff
    if new.is_zero_form:
        into.pop(key, None)
    else:
        into[key] = new


def _gr_mul(f, g):
    out = {}
    for a, ca in f.items():
        sa = set(a)
        for b, cb in g.items():
            if sa & set(b):
                continue
            sign = _merge_sign(a, b)
            key = tuple(sorted(a + b))
            _gr_add(out, key, ca * cb if sign > 0 else -(ca * cb))
    return out


def _right_xi_deriv(f, idx):
    out = {}
    for key, c in f.items():
        if idx not in key:
            continue
        i = key.index(idx)
        sign = 1 if (len(key) - 1 - i) % 2 == 0 else -1
        _gr_add(out, key[:i] + key[i + 1:], c if sign > 0 else -c)
    return out


def _left_xi_deriv(f, idx):
    out = {}
    for key, c in f.items():
        if idx not in key:
            continue
        i = key.index(idx)
        sign = 1 if i % 2 == 0 else -1
        _gr_add(out, key[:i] + key[i + 1:], c if sign > 0 else -c)
    return out


def _coeff_diff(f, sym):
    out = {}
    for key, c in f.items():
        dc = c.diff(sym)
        if not dc.is_zero_form:
            out[key] = dc
    return out


# --------------------------------------------------------------------------
# tensors

def _coerce_scalar(chart_, v):
    if isinstance(v, Expression):
        return v
    if isinstance(v, (int, Fraction)):
        return const(v)
    if isinstance(v, str):
        return chart_.parse(v)
    raise DomainError(f"cannot coerce {v!r} to an expression")


def _coerce_index(chart_, key):
    if isinstance(key, (Sym, str, int)):
        key = (key,)
    out = []
    for k in key:
        if isinstance(k, int):
            if not 0 <= k < chart_.dim:
                raise DomainError("coordinate index out of range")
            out.append(k)
        elif isinstance(k, Sym):
            out.append(chart_.index(k))
        else:
            out.append(chart_.index(chart_.sym(k)))
    return tuple(out)


def _sort_with_sign(idx):
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return tuple(idx), sign


class _Tensor:
    """Shared storage and linear structure; antisymmetric in all slots."""

    symbol = "?"

    def __init__(self, chart_, degree, comps):
        self.chart = chart_
        self.degree = degree
        self.comps = comps  # increasing tuples -> nonzero-form Expression

    @classmethod
    def build(cls, chart_, degree, entries):
        comps = {}
        for key, value in entries.items():
            idx = _coerce_index(chart_, key)
            if len(idx) != degree:
                raise DomainError(f"index {key} does not match degree {degree}")
            if len(set(idx)) != len(idx):
                raise DomainError(f"repeated index in {key}")
            sidx, sign = _sort_with_sign(idx)
            v = _coerce_scalar(chart_, value)
            _gr_add(comps, sidx, v if sign > 0 else -v)
        return cls(chart_, degree, comps)

    @classmethod
    def zero(cls, chart_, degree):
        return cls(chart_, degree, {})

    def component(self, key):
        idx = _coerce_index(self.chart, key)
        sidx, sign = _sort_with_sign(idx)
        c = self.comps.get(sidx)
        if c is None:
            return const(0)
        return c if sign > 0 else -c

    @property
    def is_structurally_zero(self):
        return not self.comps

    def _like(self, comps, degree=None):
        return type(self)(self.chart, self.degree if degree is None else degree, comps)

    def _require_compatible(self, other):
        if type(other) is not type(self) or other.chart is not self.chart:
            raise DomainError("tensors live on different charts or kinds")

    def __add__(self, other):
        self._require_compatible(other)
        if other.degree != self.degree:
            raise DomainError("degree mismatch in sum")
        out = dict(self.comps)
        for k, c in other.comps.items():
            _gr_add(out, k, c)
        return self._like(out)

    def __neg__(self):
        return self._like({k: -c for k, c in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        f = _coerce_scalar(self.chart, f)
        if f.is_zero_form:
            return self._like({})
        out = {}
        for k, c in self.comps.items():
            _gr_add(out, k, c * f)
        return self._like(out)

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def wedge(self, other):
        self._require_compatible(other)
        out = _gr_mul(self.comps, other.comps)
        return self._like(out, self.degree + other.degree)

    def map_coefficients(self, fn):
        out = {}
        for k, c in self.comps.items():
            _gr_add(out, k, fn(c))
        return self._like(out)

    def labeled_components(self):
        pieces = []
        for k in sorted(self.comps):
            label = "∧".join(self._slot(i) for i in k) if k else "1"
            pieces.append((label, self.comps[k]))
        return pieces

    def __eq__(self, other):
        return (type(other) is type(self) and other.chart is self.chart
                and other.degree == self.degree and other.comps == self.comps)

    def __hash__(self):
        return hash((type(self).__name__, self.chart.name, self.degree,
                     frozenset(self.comps.items())))

    def __str__(self):
        if not self.comps:
            return "0"
        bits = []
        for label, c in self.labeled_components():
            if label == "1":
                bits.append(f"{c}")
            else:
                bits.append(f"({c}) {label}")
        return " + ".join(bits)

    def __repr__(self):
        return f"<{type(self).__name__} deg {self.degree} on {self.chart.name}: {self}>"


class Multivector(_Tensor):
    def _slot(self, i):
        return f"∂{self.chart.coords[i].name}"

    def full_matrix(self):
        """Antisymmetric component matrix of a bivector."""
        if self.degree != 2:
            raise DomainError("full_matrix needs a bivector")
        n = self.chart.dim
        zero = const(0)
        m = [[zero] * n for _ in range(n)]
        for (a, b), c in self.comps.items():
            m[a][b] = c
            m[b][a] = -c
        return m

    def apply_to(self, f):
        """A vector field acting on a scalar."""
        if self.degree != 1:
            raise DomainError("only vector fields act on scalars")
        f = _coerce_scalar(self.chart, f)
        total = const(0)
        for (a,), c in self.comps.items():
            total = total + c * f.diff(self.chart.coords[a])
        return total


class DifferentialForm(_Tensor):
    def _slot(self, i):
        return f"d{self.chart.coords[i].name}"


def multivector(chart_, degree, entries):
    return Multivector.build(chart_, degree, entries)


def differential_form(chart_, degree, entries):
    return DifferentialForm.build(chart_, degree, entries)


def d_function(chart_, f):
    f = _coerce_scalar(chart_, f)
    comps = {}
    for i, c in enumerate(chart_.coords):
        df = f.diff(c)
        if not df.is_zero_form:
            comps[(i,)] = df
    return DifferentialForm(chart_, 1, comps)


def wedge(a, b):
    return a.wedge(b)


def exterior_d(alpha):
    if not isinstance(alpha, DifferentialForm):
        raise DomainError("exterior derivative applies to differential forms")
    out = {}
    for a in range(alpha.chart.dim):
        dxa = {(a,): const(1)}
        part = _gr_mul(dxa, _coeff_diff(alpha.comps, alpha.chart.coords[a]))
        for k, c in part.items():
            _gr_add(out, k, c)
    return DifferentialForm(alpha.chart, alpha.degree + 1, out)


def interior(vec, alpha):
    """Interior product of a vector field into a differential form."""
    if not isinstance(vec, Multivector) or vec.degree != 1:
        raise DomainError("interior product needs a vector field")
    if not isinstance(alpha, DifferentialForm):
        raise DomainError("interior product lands in a differential form")
    if vec.chart is not alpha.chart:
        raise DomainError("tensors live on different charts")
    if alpha.degree == 0:
        return DifferentialForm(alpha.chart, 0, {})
    out = {}
    for (a,), c in vec.comps.items():
        part = _left_xi_deriv(alpha.comps, a)
        for k, pc in part.items():
            _gr_add(out, k, c * pc)
    return DifferentialForm(alpha.chart, alpha.degree - 1, out)


def schouten(p, q):
    """Schouten bracket of multivector fields (see module docstring)."""
    if not isinstance(p, Multivector) or not isinstance(q, Multivector):
        raise DomainError("schouten bracket needs multivectors")
    if p.chart is not q.chart:
        raise DomainError("tensors live on different charts")
    deg = p.degree + q.degree - 1
    if deg < 0:
        return Multivector(p.chart, 0, {})
    sgn = -1 if ((p.degree - 1) * (q.degree - 1)) & 1 else 1
    out = {}
    for a in range(p.chart.dim):
        xa = p.chart.coords[a]
        t1 = _gr_mul(_right_xi_deriv(p.comps, a), _coeff_diff(q.comps, xa))
        for k, c in t1.items():
            _gr_add(out, k, c if sgn > 0 else -c)
        t2 = _gr_mul(_right_xi_deriv(q.comps, a), _coeff_diff(p.comps, xa))
        for k, c in t2.items():
            _gr_add(out, k, -c)
    return Multivector(p.chart, deg, out)


def lie_derivative(vec, target):
    """Lie derivative along a vector field of a tensor or scalar."""
    if not isinstance(vec, Multivector) or vec.degree != 1:
        raise DomainError("lie derivative needs a vector field")
    if isinstance(target, Multivector):
        return schouten(vec, target)
    if isinstance(target, DifferentialForm):
        # Cartan formula
        return interior(vec, exterior_d(target)) + exterior_d(interior(vec, target))
    return vec.apply_to(target)


def tensor_zero_check(name, tensor, cfg=DEFAULT_CONFIG, avoid_zero=None):
    az = tensor.chart.avoid_zero if avoid_zero is None else frozenset(avoid_zero)
    labeled = tensor.labeled_components()
    if not labeled:
        return CheckResult(name, PROVED)
    return check_all_zero(name, labeled, cfg, az)


# --------------------------------------------------------------------------
# maps between charts

class ParametricMap:
    """A smooth map written in coordinates, possibly with free parameters."""

    def __init__(self, source, target, comps, inverse=None):
        comps = tuple(_coerce_scalar(source, c) for c in comps)
        if len(comps) != target.dim:
            raise DomainError("component count does not match target dimension")
        self.source = source
        self.target = target
        self.comps = comps
        self.inverse = inverse
        if inverse is not None and (inverse.source is not target or inverse.target is not source):
            raise DomainError("inverse has mismatched charts")

    def with_inverse(self, inverse):
        return ParametricMap(self.source, self.target, self.comps, inverse)

    def substitution(self):
        return dict(zip(self.target.coords, self.comps))

    def pull_scalar(self, f):
        f = _coerce_scalar(self.target, f)
        return f.subs(self.substitution())

    def compose(self, other):
        """self after other."""
        if other.target is not self.source:
            raise DomainError("maps do not compose")
        comps = tuple(c.subs(dict(zip(self.source.coords, other.comps))) for c in self.comps)
        out = ParametricMap(other.source, self.target, comps)
        if self.inverse is not None and other.inverse is not None:
            # build the inverse directly to avoid bouncing between the pair
            icomps = tuple(c.subs(dict(zip(self.source.coords, self.inverse.comps)))
                           for c in other.inverse.comps)
            inv = ParametricMap(self.target, other.source, icomps)
            inv.inverse = out
            out.inverse = inv
        return out

    def jacobian(self):
        return [[c.diff(x) for x in self.source.coords] for c in self.comps]

    def verify_inverse(self, cfg=DEFAULT_CONFIG):
        if self.inverse is None:
            return CheckResult("inverse", FAIL, "no inverse attached")
        az = self.source.avoid_zero | self.target.avoid_zero
        labeled = []
        round1 = self.inverse.compose(self)
        for x, c in zip(self.source.coords, round1.comps):
            labeled.append((f"inv∘map [{x.name}]", c - sym_expr(x)))
        round2 = self.compose(self.inverse)
        for y, c in zip(self.target.coords, round2.comps):
            labeled.append((f"map∘inv [{y.name}]", c - sym_expr(y)))
        return check_all_zero("inverse round trip", labeled, cfg, az)

    def pushforward(self, tensor):
        """Transport a multivector field to the target chart.

        Needs the attached inverse: transformed components are still written
        in source coordinates and must be re-expressed on the target.
        """
        if not isinstance(tensor, Multivector):
            raise DomainError("pushforward applies to multivectors")
        if tensor.chart is not self.source:
            raise DomainError("tensor does not live on the source chart")
        if self.inverse is None:
            raise DomainError("pushforward needs a map with an attached inverse")
        jac = self.jacobian()
        tdim = self.target.dim
        out = {}
        for key, c in tensor.comps.items():
            acc = {(): c}
            for a in key:
                vec = {}
                for b in range(tdim):
                    e = jac[b][a]
                    if not e.is_zero_form:
                        vec[(b,)] = e
                acc = _gr_mul(acc, vec)
            for k, cc in acc.items():
                _gr_add(out, k, cc)
        back = dict(zip(self.source.coords, self.inverse.comps))
        final = {}
        for k, cc in out.items():
            _gr_add(final, k, cc.subs(back))
        return Multivector(self.target, tensor.degree, final)

    def pullback(self, tensor):
        """Transport a differential form (or scalar) back to the source chart."""
        if isinstance(tensor, Expression):
            return self.pull_scalar(tensor)
        if not isinstance(tensor, DifferentialForm):
            raise DomainError("pullback applies to differential forms")
        if tensor.chart is not self.target:
            raise DomainError("form does not live on the target chart")
        jac = self.jacobian()
        sub = self.substitution()
        out = {}
        for key, c in tensor.comps.items():
            acc = {(): c.subs(sub)}
            for a_t in key:
                cov = {}
                for b in range(self.source.dim):
                    e = jac[a_t][b]
                    if not e.is_zero_form:
                        cov[(b,)] = e
                acc = _gr_mul(acc, cov)
            for k, cc in acc.items():
                _gr_add(out, k, cc)
        return DifferentialForm(self.source, tensor.degree, out)

    def __repr__(self):
        body = ", ".join(str(c) for c in self.comps)
        return f"<map {self.source.name} -> {self.target.name}: ({body})>"


def identity_map(chart_):
    m = ParametricMap(chart_, chart_, chart_.coord_exprs())
    m.inverse = m
    return m


# --------------------------------------------------------------------------
# multiplicative-group scaling actions

class RxAction:
    """An action of the multiplicative group of nonzero reals on a chart.

    comps are the coordinates of the scaled point, written in the chart
    coordinates plus the scale parameter, which must avoid zero.
    """

    def __init__(self, chart_, param, comps):
        self.chart = chart_
        self.param = param
        self.comps = tuple(_coerce_scalar(chart_, c) for c in comps)
        if len(self.comps) != chart_.dim:
            raise DomainError("action components do not match chart dimension")

    def certify(self, cfg=DEFAULT_CONFIG):
        """Unit law and composition law, as zero checks."""
        az = self.chart.avoid_zero | {self.param}
        s = sym_expr(self.param)
        labeled = []
        for x, c in zip(self.chart.coords, self.comps):
            labeled.append((f"unit [{x.name}]", c.subs({self.param: const(1)}) - sym_expr(x)))
        second = self._fresh_param()
        r = sym_expr(second)
        inner = dict(zip(self.chart.coords, [c.subs({self.param: r}) for c in self.comps]))
        for x, c in zip(self.chart.coords, self.comps):
            lhs = c.subs(inner)
            rhs = c.subs({self.param: s * r})
            labeled.append((f"composition [{x.name}]", lhs - rhs))
        return check_all_zero("scaling action laws", labeled, cfg, az | {second})

    def _fresh_param(self):
        name = self.param.name + "_cmp"
        existing = self.chart.table.lookup(name)
        if isinstance(existing, Sym) and existing.kind == "parameter":
            return existing
        return self.chart.table.parameter(name)

    def forward_map(self):
        return ParametricMap(self.chart, self.chart, self.comps,
                             ParametricMap(self.chart, self.chart, self.inverse_comps()))

    def inverse_map(self):
        """The scaling by the reciprocal parameter, inverse attached."""
        inv = ParametricMap(self.chart, self.chart, self.inverse_comps())
        inv.inverse = ParametricMap(self.chart, self.chart, self.comps)
        return inv

    def inverse_comps(self):
        s = self.param
        recip = const(1) / sym_expr(s)
        return tuple(c.subs({s: recip}) for c in self.comps)

    def fundamental_field(self):
        """Generator of the action: the parameter derivative at the unit."""
        comps = {}
        at_one = {self.param: const(1)}
        for i, c in enumerate(self.comps):
            v = c.diff(self.param).subs(at_one)
            if not v.is_zero_form:
                comps[(i,)] = v
        return Multivector(self.chart, 1, comps)

    def pull_tensor(self, tensor):
        """Pullback under the scaling, with the parameter left free.

        Differential forms and scalars pull back along the action itself;
        multivector fields pull back by pushing forward along the inverse
        scaling, whose inverse is the action again.
        """
        if isinstance(tensor, Multivector):
            return self.inverse_map().pushforward(tensor)
        return self.forward_map().pullback(tensor)


def standard_action(chart_, fiber_sym, param):
    """Scale a single designated coordinate, fix the rest."""
    comps = []
    for c in chart_.coords:
        e = sym_expr(c)
        comps.append(sym_expr(param) * e if c == fiber_sym else e)
    return RxAction(chart_, param, comps)


# --------------------------------------------------------------------------
# homogeneity

@dataclass(frozen=True)
class HomogeneityResult:
    degree: object  # int, or None when not homogeneous or every degree
    every_degree: bool
    check: CheckResult

    @property
    def homogeneous(self):
        return self.check.passed


def _pure_param_power(ratio, param):
    """Return k when the expression is exactly param^k, else None."""
    if len(ratio.num.terms) != 1 or len(ratio.den.terms) != 1:
        return None
    (mn, cn), = ratio.num.terms.items()
    (md, cd), = ratio.den.terms.items()
    if cn != 1 or cd != 1:
        return None
    ke = 0
    for g, e in mn:
        if not (isinstance(g, Sym) and g == param):
            return None
        ke += e
    for g, e in md:
        if not (isinstance(g, Sym) and g == param):
            return None
        ke -= e
    return ke


_SCAN_RANGE = range(-6, 7)


def homogeneity_degree(tensor, action, cfg=DEFAULT_CONFIG):
    """Degree of a tensor under a scaling action, with a certificate.

    The finite check compares the parametric pullback against s^k times the
    tensor; the infinitesimal cross-check compares the Lie derivative along
    the generating field against k times the tensor.  Both must agree.
    """
    az = action.chart.avoid_zero | {action.param}
    s = sym_expr(action.param)
    if tensor.is_structurally_zero:
        return HomogeneityResult(None, True, CheckResult("homogeneity", PROVED, "zero tensor"))
    pulled = action.pull_tensor(tensor)
    candidates = []
    for key in sorted(tensor.comps):
        pc = pulled.comps.get(key)
        if pc is None:
            continue
        k = _pure_param_power(pc / tensor.comps[key], action.param)
        if k is not None:
            candidates.append(k)
        break
    for k in candidates + [k for k in _SCAN_RANGE if k not in candidates]:
        residual = pulled - tensor.scale(s ** k)
        fin = tensor_zero_check(f"finite scaling, degree {k}", residual, cfg, az)
        if not fin.passed:
            continue
        lie = lie_derivative(action.fundamental_field(), tensor)
        inf_res = lie - tensor.scale(const(k))
        inf = tensor_zero_check(f"infinitesimal scaling, degree {k}", inf_res, cfg, az)
        if not inf.passed:
            return HomogeneityResult(None, False, CheckResult(
                "homogeneity", FAIL,
                f"finite check gives degree {k} but the generator check disagrees"))
        status = aggregate_status([fin.status, inf.status])
        return HomogeneityResult(k, False, CheckResult(
            "homogeneity", status, f"degree {k}", fin.witnesses + inf.witnesses))
    return HomogeneityResult(None, False, CheckResult(
        "homogeneity", FAIL, "no integer degree in the scanned range matches"))


# --------------------------------------------------------------------------
# linear algebra over the expression field

def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = const(0)
            for k in range(m):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def _is_one_poly(p):
    return p.is_constant() and p.constant_value() == 1


def _cleared_rows(m):
    """Scale each row to polynomial entries; return rows and row factors."""
    rows = []
    factors = []
    for row in m:
        dens = []
        for e in row:
            if not _is_one_poly(e.den) and all(e.den != d for d in dens):
                dens.append(e.den)
        f = Poly.const(1)
        for d in dens:
            f = f.mul(d)
        new_row = []
        for e in row:
            q = f if _is_one_poly(e.den) else _poly_div_exact(f, e.den)
            new_row.append(e.num.mul(q))
        rows.append(new_row)
        factors.append(f)
    return rows, factors


def _bareiss_det(rows):
    """Fraction-free determinant over the polynomial ring; exact divisions only."""
    n = len(rows)
    if n == 0:
        return Poly.const(1)
    rows = [list(r) for r in rows]
    sign = 1
    prev = Poly.const(1)
    for k in range(n - 1):
        if rows[k][k].is_zero():
            piv = next((r for r in range(k + 1, n) if not rows[r][k].is_zero()), None)
            if piv is None:
                return Poly.zero()
            rows[k], rows[piv] = rows[piv], rows[k]
            sign = -sign
        pk = rows[k][k]
        for i in range(k + 1, n):
            rik = rows[i][k]
            for j in range(k + 1, n):
                t = rows[i][j].mul(pk).add(rik.mul(rows[k][j]).neg())
                rows[i][j] = t if _is_one_poly(prev) else _poly_div_exact(t, prev)
            rows[i][k] = Poly.zero()
        prev = pk
    det = rows[n - 1][n - 1]
    return det.neg() if sign < 0 else det


def mat_det(m):
    """Exact determinant over the rational-function field."""
    rows, factors = _cleared_rows(m)
    det = Expression(_bareiss_det(rows), Poly.const(1))
    for f in factors:
        if not _is_one_poly(f):
            det = det / Expression(f, Poly.const(1))
    return det


def _minor_det(rows, skip_row, skip_col):
    sub = [[e for j, e in enumerate(r) if j != skip_col]
           for i, r in enumerate(rows) if i != skip_row]
    return _bareiss_det(sub)


def mat_inv(m):
    """Exact inverse through cleared-denominator adjugate determinants."""
    n = len(m)
    rows, factors = _cleared_rows(m)
    det = _bareiss_det(rows)
    if det.is_zero():
        raise DomainError("matrix is singular as a rational function")
    det_e = Expression(det, Poly.const(1))
    out = []
    for i in range(n):
        out_row = []
        for j in range(n):
            minor = _minor_det(rows, j, i)
            num = minor.mul(factors[j])
            if (i + j) & 1:
                num = num.neg()
            out_row.append(Expression(num, Poly.const(1)) / det_e)
        out.append(out_row)
    return out


@dataclass(frozen=True)
class NondegeneracyResult:
    nondegenerate: bool
    status: str
    determinant: object
    reason: str = ""

    def as_check(self, name="nondegeneracy"):
        if self.nondegenerate:
            return CheckResult(name, self.status, f"det = {self.determinant}")
        return CheckResult(name, FAIL, self.reason)


def nondegenerate(omega, cfg=DEFAULT_CONFIG):
    """Decide nondegeneracy of a 2-form through its exact determinant."""
    if not isinstance(omega, DifferentialForm) or omega.degree != 2:
        raise DomainError("nondegeneracy applies to 2-forms")
    n = omega.chart.dim
    if n % 2 == 1:
        return NondegeneracyResult(False, FAIL, const(0), "odd-dimensional chart")
    zero = const(0)
    m = [[zero] * n for _ in range(n)]
    for (a, b), c in omega.comps.items():
        m[a][b] = c
        m[b][a] = -c
    det = mat_det(m)
    v = is_zero(det, cfg, omega.chart.avoid_zero)
    if v.is_zero:
        return NondegeneracyResult(False, FAIL, det, "determinant vanishes identically")
    status = PROVED if v.proved else NUMERIC
    return NondegeneracyResult(True, status, det)


def invert_symplectic(omega, cfg=DEFAULT_CONFIG):
    """Bivector inverse of a nondegenerate 2-form.

    Convention: the musical maps compose to the identity, raising with the
    bivector after lowering with the form.  In matrices this makes the
    bivector the negative inverse of the form matrix.
    """
    res = nondegenerate(omega, cfg)
    if not res.nondegenerate:
        raise DomainError(f"form is degenerate: {res.reason}")
    n = omega.chart.dim
    zero = const(0)
    m = [[zero] * n for _ in range(n)]
    for (a, b), c in omega.comps.items():
        m[a][b] = c
        m[b][a] = -c
    inv = mat_inv(m)
    comps = {}
    for a in range(n):
        for b in range(a + 1, n):
            e = -inv[a][b]
            if not e.is_zero_form:
                comps[(a, b)] = e
    return Multivector(omega.chart, 2, comps)


# --------------------------------------------------------------------------
# Poisson plumbing on a bivector

def sharp(biv, theta):
    """Raise a 1-form to a vector field through a bivector."""
    if biv.degree != 2 or not isinstance(biv, Multivector):
        raise DomainError("sharp needs a bivector")
    if not isinstance(theta, DifferentialForm) or theta.degree != 1:
        raise DomainError("sharp applies to 1-forms")
    full = biv.full_matrix()
    n = biv.chart.dim
    comps = {}
    for a in range(n):
        acc = const(0)
        for b in range(n):
            tb = theta.comps.get((b,))
            if tb is not None:
                acc = acc + full[a][b] * tb
        if not acc.is_zero_form:
            comps[(a,)] = acc
    return Multivector(biv.chart, 1, comps)


def flat(omega, vec):
    """Lower a vector field to a 1-form through a 2-form."""
    return interior(vec, omega)


def poisson_bracket(biv, f, g):
    f = _coerce_scalar(biv.chart, f)
    g = _coerce_scalar(biv.chart, g)
    total = const(0)
    coords = biv.chart.coords
    for (a, b), c in biv.comps.items():
        total = total + c * (f.diff(coords[a]) * g.diff(coords[b])
                             - f.diff(coords[b]) * g.diff(coords[a]))
    return total


def hamiltonian_vf(biv, h):
    """The field whose action on g is the bracket of g with h."""
    h = _coerce_scalar(biv.chart, h)
    return sharp(biv, d_function(biv.chart, h))
