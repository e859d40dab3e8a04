"""Homogeneous Poisson structures over a one-dimensional scaling fiber.

A bracket pair on a base chart is a bivector together with a vector field.
Appending a scaling coordinate t produces a bivector on the bundle chart

    (1/t) B  on base index pairs,   V  on (t, base) pairs,

which is homogeneous of degree -1 under scaling of t.  The pair satisfies the
Jacobi property exactly when this bivector has vanishing self-bracket, and in
that case sections of the bundle (functions of the base) close under the
first-order bracket

    [u, v] = B(du, dv) + u V(v) - v V(u),

which corresponds to the Poisson bracket upstairs through the degree-one lift
u -> t u.  Everything here is certified: construction functions return the
objects, and certify/check functions return explicit residual checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .symexpr import (
    CheckResult, DEFAULT_CONFIG, DomainError, FAIL, PROVED, Sym,
    aggregate_status, check_all_zero, const, is_zero, sym_expr,
)
from .tensorcalc import (
    Chart, Multivector, RxAction, chart, homogeneity_degree, multivector,
    poisson_bracket, schouten, standard_action, tensor_zero_check,
)

__all__ = [
    "JacobiPair", "jacobi_pair", "KirillovStructure", "poissonise",
    "extract_pair", "kirillov_bracket", "lift_section", "check_bracket_lift",
    "is_jacobi", "coisotropic_check", "algebroid_form_check",
]


@dataclass(frozen=True)
class JacobiPair:
    """A bivector and a vector field on a base chart."""
    chart: Chart
    bivector: Multivector
    vector: Multivector

    def __post_init__(self):
        if self.bivector.degree != 2 or self.vector.degree != 1:
            raise DomainError("a bracket pair is a bivector and a vector field")
        if self.bivector.chart is not self.chart or self.vector.chart is not self.chart:
            raise DomainError("pair members live on the wrong chart")


def jacobi_pair(chart_, bivector_entries, vector_entries):
    return JacobiPair(
        chart_,
        multivector(chart_, 2, bivector_entries),
        multivector(chart_, 1, vector_entries),
    )


def _fresh_parameter(table, base):
    name = base
    k = 1
    while True:
        hit = table.lookup(name)
        if hit is None:
            return table.parameter(name)
        if isinstance(hit, Sym) and hit.kind == "parameter":
            return hit
        k += 1
        name = f"{base}{k}"


class KirillovStructure:
    """A bivector on a bundle chart with a designated scaling coordinate.

    The defining properties (degree -1 under the scaling of t, vanishing
    self-bracket) are not assumed; certify produces them as check results.
    """

    def __init__(self, bundle, t_sym, bivector, param_name="s"):
        if bivector.chart is not bundle:
            raise DomainError("bivector lives on the wrong chart")
        if bundle.index(t_sym) != 0:
            raise DomainError("the scaling coordinate must come first")
        if t_sym not in bundle.avoid_zero:
            raise DomainError("the scaling coordinate must avoid zero")
        self.bundle = bundle
        self.t = t_sym
        self.bivector = bivector
        self.param = _fresh_parameter(bundle.table, param_name)
        self.action = standard_action(bundle, t_sym, self.param)
        self.base_coords = tuple(c for c in bundle.coords if c != t_sym)

    def certify(self, cfg=DEFAULT_CONFIG):
        """Scaling degree -1, self-bracket zero, and the action's group laws."""
        results = [self.action.certify(cfg)]
        hom = homogeneity_degree(self.bivector, self.action, cfg)
        if hom.degree == -1 or hom.every_degree:
            results.append(CheckResult("scaling degree -1", hom.check.status,
                                       hom.check.detail, hom.check.witnesses))
        else:
            results.append(CheckResult(
                "scaling degree -1", FAIL,
                f"found degree {hom.degree}" if hom.degree is not None
                else hom.check.detail))
        residual = schouten(self.bivector, self.bivector)
        results.append(tensor_zero_check("self-bracket", residual, cfg))
        return results

    def certified(self, cfg=DEFAULT_CONFIG):
        return all(r.passed for r in self.certify(cfg))


def poissonise(pair, t_name="t", param_name="s"):
    """Build the degree -1 bundle bivector of a bracket pair."""
    tab = pair.chart.table
    t = tab.coordinate(t_name)
    if t in pair.chart.coords:
        raise DomainError(f"'{t_name}' is already a base coordinate")
    bundle = Chart(pair.chart.name + "^", tab, (t,) + pair.chart.coords,
                   pair.chart.avoid_zero | {t})
    te = sym_expr(t)
    comps = {}
    for (a, b), c in pair.bivector.comps.items():
        comps[(a + 1, b + 1)] = c / te
    for (a,), c in pair.vector.comps.items():
        comps[(0, a + 1)] = c
    biv = Multivector(bundle, 2, comps)
    return KirillovStructure(bundle, t, biv, param_name)


def extract_pair(ks, cfg=DEFAULT_CONFIG):
    """Read a bracket pair back off a bundle bivector, with freeness checks.

    The base block times t and the mixed block must not depend on the scaling
    coordinate; the check certifies this before the pair is formed by
    evaluation at t = 1.
    """
    t = ks.t
    te = sym_expr(t)
    one = {t: const(1)}
    labeled = []
    b_entries = {}
    v_entries = {}
    for key, c in ks.bivector.comps.items():
        if 0 in key:
            other = key[1] if key[0] == 0 else key[0]
            labeled.append((f"mixed block ({ks.bundle.coords[other].name})", c.diff(t)))
            v_entries[other - 1] = c.subs(one)
        else:
            scaled = te * c
            names = ",".join(ks.bundle.coords[i].name for i in key)
            labeled.append((f"base block ({names})", scaled.diff(t)))
            b_entries[(key[0] - 1, key[1] - 1)] = scaled.subs(one)
    check = check_all_zero("pair extraction", labeled, cfg, ks.bundle.avoid_zero) \
        if labeled else CheckResult("pair extraction", PROVED)
    base = Chart(ks.bundle.name + "_base", ks.bundle.table, ks.base_coords,
                 ks.bundle.avoid_zero - {t})
    pair = JacobiPair(base,
                      Multivector.build(base, 2, b_entries),
                      Multivector.build(base, 1, v_entries))
    return pair, check


def kirillov_bracket(pair, u, v):
    """First-order bracket on base functions defined by the pair."""
    c = pair.chart
    u = c.parse(u) if isinstance(u, str) else u
    v = c.parse(v) if isinstance(v, str) else v
    total = poisson_bracket(pair.bivector, u, v)
    total = total + u * pair.vector.apply_to(v) - v * pair.vector.apply_to(u)
    return total


def lift_section(ks, u):
    """Degree-one lift of a base function to the bundle."""
    u = ks.bundle.parse(u) if isinstance(u, str) else u
    if u.depends_on(ks.t):
        raise DomainError("a section must not depend on the scaling coordinate")
    return sym_expr(ks.t) * u


def check_bracket_lift(ks, u, v, cfg=DEFAULT_CONFIG):
    """The lift intertwines the pair bracket with the bundle bracket."""
    pair, extraction = extract_pair(ks, cfg)
    u = ks.bundle.parse(u) if isinstance(u, str) else u
    v = ks.bundle.parse(v) if isinstance(v, str) else v
    lifted_bracket = lift_section(ks, kirillov_bracket(pair, u, v))
    upstairs = poisson_bracket(ks.bivector, lift_section(ks, u), lift_section(ks, v))
    residual = lifted_bracket - upstairs
    core = check_all_zero("bracket lift", [("residual", residual)], cfg,
                          ks.bundle.avoid_zero)
    status = aggregate_status([extraction.status, core.status])
    if core.status == FAIL:
        return core
    return CheckResult("bracket lift", status, core.detail, core.witnesses)


def is_jacobi(pair, cfg=DEFAULT_CONFIG, t_name="t", param_name="s"):
    """Jacobi property of the pair, decided upstairs.

    Returns the check together with the self-bracket of the bundle bivector,
    whose vanishing is the defining condition.
    """
    ks = poissonise(pair, t_name, param_name)
    residual = schouten(ks.bivector, ks.bivector)
    return tensor_zero_check("jacobi property", residual, cfg), residual


def coisotropic_check(ks, fiber_syms, cfg=DEFAULT_CONFIG):
    """Vanishing-ideal compatibility of a base submanifold's fiber block.

    The submanifold is cut out by the given base coordinates; both the pure
    fiber block and the mixed block with the scaling coordinate must vanish
    on it.
    """
    fiber = []
    for s in fiber_syms:
        s = ks.bundle.sym(s) if isinstance(s, str) else s
        if s == ks.t or s not in ks.bundle.coords:
            raise DomainError("coisotropic test coordinates must be base coordinates")
        fiber.append(s)
    restrict = {s: const(0) for s in fiber}
    fiber_idx = {ks.bundle.index(s) for s in fiber}
    labeled = []
    for key, c in ks.bivector.comps.items():
        a, b = key
        in_fiber = (a in fiber_idx, b in fiber_idx)
        relevant = (all(in_fiber) or (a == 0 and b in fiber_idx))
        if not relevant:
            continue
        names = ",".join(ks.bundle.coords[i].name for i in key)
        try:
            labeled.append((f"component ({names}) on the zero set", c.subs(restrict)))
        except DomainError:
            return CheckResult("coisotropic", FAIL,
                               f"component ({names}) has a pole on the zero set")
    if not labeled:
        return CheckResult("coisotropic", PROVED, "no relevant components")
    return check_all_zero("coisotropic", labeled, cfg, ks.bundle.avoid_zero)


def algebroid_form_check(biv, t_sym, base_syms, fiber_syms, cfg=DEFAULT_CONFIG):
    """Shape test for a bundle bivector over linear fiber coordinates.

    On a chart split into the scaling coordinate, base coordinates and linear
    fiber coordinates, the bivector of an anchored bracket structure has:
    no base-base or scaling-base components; mixed base-fiber components that
    are 1/t times functions of the base alone; fiber-fiber components 1/t
    times functions linear in the fiber; scaling-fiber components free of
    both t and the fiber.  Returns the check and the extracted coefficient
    blocks (anchor, structure, unit), scaled by t where applicable.
    """
    c_ = biv.chart
    t = c_.sym(t_sym) if isinstance(t_sym, str) else t_sym
    base = [c_.sym(s) if isinstance(s, str) else s for s in base_syms]
    fiber = [c_.sym(s) if isinstance(s, str) else s for s in fiber_syms]
    roles = {c_.index(t): "t"}
    for s in base:
        roles[c_.index(s)] = "base"
    for s in fiber:
        roles[c_.index(s)] = "fiber"
    if len(roles) != c_.dim:
        raise DomainError("every chart coordinate needs exactly one role")
    te = sym_expr(t)
    labeled = []
    blocks = {"anchor": {}, "structure": {}, "unit": {}}
    for key, comp in biv.comps.items():
        a, b = key
        ra, rb = roles[a], roles[b]
        kinds = frozenset((ra, rb))
        name = f"({c_.coords[a].name},{c_.coords[b].name})"
        if kinds == {"base"} or kinds == {"t", "base"}:
            labeled.append((f"forbidden block {name}", comp))
        elif kinds == {"base", "fiber"}:
            g = te * comp
            labeled.append((f"anchor block {name} scaling dependence", g.diff(t)))
            for y in fiber:
                labeled.append((f"anchor block {name} fiber dependence", g.diff(y)))
            blocks["anchor"][key] = g
        elif kinds == {"fiber"}:
            g = te * comp
            labeled.append((f"structure block {name} scaling dependence", g.diff(t)))
            euler = sum((sym_expr(y) * g.diff(y) for y in fiber), const(0)) - g
            labeled.append((f"structure block {name} fiber linearity", euler))
            blocks["structure"][key] = g
        else:  # t with fiber
            labeled.append((f"unit block {name} scaling dependence", comp.diff(t)))
            for y in fiber:
                labeled.append((f"unit block {name} fiber dependence", comp.diff(y)))
            blocks["unit"][key] = comp
    if not labeled:
        return CheckResult("anchored bracket shape", PROVED, "zero bivector"), blocks
    check = check_all_zero("anchored bracket shape", labeled, cfg, c_.avoid_zero)
    return check, blocks
