"""Coordinate groupoids and certified checks of their structure.

A groupoid is presented by explicit charts: arrows, units, a chart whose
points are the composable pairs, and one for composable triples.  All
structure maps, the two projections, the multiplication, and the sections
feeding the unit, inverse and associativity laws are coordinate maps between
these charts.  Every axiom then becomes a componentwise zero check on a free
chart, so the whole structure can be certified by the expression kernel.

On top of the raw model the module provides the pair groupoid of a chart,
groups as groupoids over a point, scaling-twisted products (the splitting
construction for a multiplicative function), groupoid actions, tangent
groupoids, and the cotangent groupoids of a pair groupoid and of a group
with rational operations.  Open subgroupoids cut out by nonvanishing
functions are handled by seeded sampling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .symexpr import (
    CheckResult, DEFAULT_CONFIG, DomainError, FAIL, InconclusiveSamplingError,
    NUMERIC, PoleError, SymbolTable, Witness, check_all_zero, const, sym_expr,
)
from .tensorcalc import (
    Chart, DifferentialForm, ParametricMap, RxAction, homogeneity_degree,
    identity_map, mat_inv,
)
from .lifts import phase_chart, tangent_chart

__all__ = [
    "PairData", "TripleData", "CoordGroupoid", "verify_groupoid",
    "morphism_check", "splitting_map_check", "pair_embed",
    "pair_groupoid", "group_groupoid",
    "MultiplicativeCocycle", "trivial_split",
    "GroupoidAction", "verify_action", "scaling_action", "t_split",
    "multiplicative_form_check", "tangent_groupoid",
    "Membership", "rx_morphism_check",
    "CotangentPairModel", "cotangent_pair_groupoid",
    "cotangent_group_groupoid",
]


# --------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class PairData:
    """Chart of composable pairs with projections, product and sections.

    The sections pick out the pairs behind the unit and inverse laws: for an
    arrow g, left_unit parametrizes (unit(tgt g), g), right_unit (g,
    unit(src g)), left_inverse (g, inv g) and right_inverse (inv g, g).
    """

    chart: Chart
    pr1: ParametricMap
    pr2: ParametricMap
    mul: ParametricMap
    left_unit: ParametricMap
    right_unit: ParametricMap
    left_inverse: ParametricMap
    right_inverse: ParametricMap


@dataclass(frozen=True)
class TripleData:
    """Chart of composable triples with the four pair-valued projections.

    p12 and p23 pick the first and last two arrows; left parametrizes the
    pair (g1 g2, g3) and right the pair (g1, g2 g3).
    """

    chart: Chart
    p12: ParametricMap
    p23: ParametricMap
    left: ParametricMap
    right: ParametricMap


def _expect(m, source, target, what):
    if m.source is not source or m.target is not target:
        raise DomainError(f"{what} has wrong endpoints")


@dataclass(frozen=True)
class CoordGroupoid:
    name: str
    arrows: Chart
    units: Chart
    src: ParametricMap
    tgt: ParametricMap
    unit: ParametricMap
    inv: ParametricMap
    pairs: PairData
    triples: TripleData

    def __post_init__(self):
        g, m = self.arrows, self.units
        _expect(self.src, g, m, "source map")
        _expect(self.tgt, g, m, "target map")
        _expect(self.unit, m, g, "unit map")
        _expect(self.inv, g, g, "inversion")
        p = self.pairs
        for f, what in ((p.pr1, "pr1"), (p.pr2, "pr2"), (p.mul, "product")):
            _expect(f, p.chart, g, what)
        for f, what in ((p.left_unit, "left unit section"),
                        (p.right_unit, "right unit section"),
                        (p.left_inverse, "left inverse section"),
                        (p.right_inverse, "right inverse section")):
            _expect(f, g, p.chart, what)
        t = self.triples
        for f, what in ((t.p12, "p12"), (t.p23, "p23"),
                        (t.left, "left bracketing"),
                        (t.right, "right bracketing")):
            _expect(f, t.chart, p.chart, what)


def _residuals(tag, f, g):
    if f.source is not g.source or f.target is not g.target:
        raise DomainError(f"{tag}: maps disagree on endpoints")
    return [(f"{tag} [{c.name}]", a - b)
            for c, a, b in zip(f.target.coords, f.comps, g.comps)]


def verify_groupoid(gpd, cfg=DEFAULT_CONFIG):
    """All groupoid axioms as zero checks, one result per axiom family."""
    g, m = gpd.arrows, gpd.units
    p, t = gpd.pairs, gpd.triples
    id_g, id_m = identity_map(g), identity_map(m)
    out = []

    def run(name, chart_, labeled):
        out.append(check_all_zero(name, labeled, cfg, chart_.avoid_zero))

    run("unit endpoints", m,
        _residuals("src∘unit", gpd.src.compose(gpd.unit), id_m)
        + _residuals("tgt∘unit", gpd.tgt.compose(gpd.unit), id_m))
    run("composability", p.chart,
        _residuals("src∘pr1 = tgt∘pr2", gpd.src.compose(p.pr1),
                   gpd.tgt.compose(p.pr2)))
    run("product endpoints", p.chart,
        _residuals("src∘mul", gpd.src.compose(p.mul), gpd.src.compose(p.pr2))
        + _residuals("tgt∘mul", gpd.tgt.compose(p.mul),
                     gpd.tgt.compose(p.pr1)))
    run("unit laws", g,
        _residuals("pr1∘left section", p.pr1.compose(p.left_unit),
                   gpd.unit.compose(gpd.tgt))
        + _residuals("pr2∘left section", p.pr2.compose(p.left_unit), id_g)
        + _residuals("left unit", p.mul.compose(p.left_unit), id_g)
        + _residuals("pr1∘right section", p.pr1.compose(p.right_unit), id_g)
        + _residuals("pr2∘right section", p.pr2.compose(p.right_unit),
                     gpd.unit.compose(gpd.src))
        + _residuals("right unit", p.mul.compose(p.right_unit), id_g))
    run("inversion endpoints", g,
        _residuals("src∘inv", gpd.src.compose(gpd.inv), gpd.tgt)
        + _residuals("tgt∘inv", gpd.tgt.compose(gpd.inv), gpd.src)
        + _residuals("involution", gpd.inv.compose(gpd.inv), id_g))
    run("inverse laws", g,
        _residuals("pr1∘left section", p.pr1.compose(p.left_inverse), id_g)
        + _residuals("pr2∘left section", p.pr2.compose(p.left_inverse),
                     gpd.inv)
        + _residuals("left inverse", p.mul.compose(p.left_inverse),
                     gpd.unit.compose(gpd.tgt))
        + _residuals("pr1∘right section", p.pr1.compose(p.right_inverse),
                     gpd.inv)
        + _residuals("pr2∘right section", p.pr2.compose(p.right_inverse),
                     id_g)
        + _residuals("right inverse", p.mul.compose(p.right_inverse),
                     gpd.unit.compose(gpd.src)))
    run("triple coherence", t.chart,
        _residuals("middle arrow", p.pr2.compose(t.p12), p.pr1.compose(t.p23))
        + _residuals("pr1∘left", p.pr1.compose(t.left), p.mul.compose(t.p12))
        + _residuals("pr2∘left", p.pr2.compose(t.left), p.pr2.compose(t.p23))
        + _residuals("pr1∘right", p.pr1.compose(t.right),
                     p.pr1.compose(t.p12))
        + _residuals("pr2∘right", p.pr2.compose(t.right),
                     p.mul.compose(t.p23)))
    run("associativity", t.chart,
        _residuals("mul∘left = mul∘right", p.mul.compose(t.left),
                   p.mul.compose(t.right)))
    return out


def morphism_check(dom, cod, arrow_map, unit_map, pair_map,
                   cfg=DEFAULT_CONFIG, name="groupoid morphism",
                   extra_avoid=()):
    """Compatibility of a triple of maps with both groupoid structures."""
    _expect(arrow_map, dom.arrows, cod.arrows, "arrow map")
    _expect(unit_map, dom.units, cod.units, "unit map")
    _expect(pair_map, dom.pairs.chart, cod.pairs.chart, "pair map")
    labeled = (
        _residuals("source", cod.src.compose(arrow_map),
                   unit_map.compose(dom.src))
        + _residuals("target", cod.tgt.compose(arrow_map),
                     unit_map.compose(dom.tgt))
        + _residuals("unit", arrow_map.compose(dom.unit),
                     cod.unit.compose(unit_map))
        + _residuals("inversion", arrow_map.compose(dom.inv),
                     cod.inv.compose(arrow_map))
        + _residuals("pr1", cod.pairs.pr1.compose(pair_map),
                     arrow_map.compose(dom.pairs.pr1))
        + _residuals("pr2", cod.pairs.pr2.compose(pair_map),
                     arrow_map.compose(dom.pairs.pr2))
        + _residuals("product", cod.pairs.mul.compose(pair_map),
                     arrow_map.compose(dom.pairs.mul)))
    az = dom.arrows.avoid_zero | dom.units.avoid_zero \
        | dom.pairs.chart.avoid_zero | frozenset(extra_avoid)
    return check_all_zero(name, labeled, cfg, az)


def splitting_map_check(dom, cod, arrow_map, unit_map, pair_map,
                        cfg=DEFAULT_CONFIG):
    return morphism_check(dom, cod, arrow_map, unit_map, pair_map, cfg,
                          name="splitting map")


def _copy_coords(tab, chart_, prefix):
    coords = [tab.coordinate(prefix + c.name) for c in chart_.coords]
    avoid = frozenset(tab.coordinate(prefix + c.name)
                      for c in chart_.avoid_zero)
    return coords, avoid


def pair_embed(gpd, prefixes=("first_", "second_")):
    """Composable pairs inside the plain product of two arrow copies."""
    tab = gpd.arrows.table
    c1, a1 = _copy_coords(tab, gpd.arrows, prefixes[0])
    c2, a2 = _copy_coords(tab, gpd.arrows, prefixes[1])
    product = Chart(gpd.name + "_product", tab, tuple(c1 + c2), a1 | a2)
    comps = tuple(gpd.pairs.pr1.comps) + tuple(gpd.pairs.pr2.comps)
    return ParametricMap(gpd.pairs.chart, product, comps)


# --------------------------------------------------------------------------
# stock constructions


def pair_groupoid(m, name=None):
    """Arrows are ordered point pairs; (x, y) runs from y to x."""
    tab = m.table
    name = name or (m.name + "_pair")
    blocks, avoids = [], []
    for prefix in ("first_", "second_", "third_", "fourth_"):
        c, a = _copy_coords(tab, m, prefix)
        blocks.append(c)
        avoids.append(a)
    b1, b2, b3, b4 = blocks
    arrows = Chart(name, tab, tuple(b1 + b2), avoids[0] | avoids[1])
    pairs_c = Chart(name + "_pairs", tab, tuple(b1 + b2 + b3),
                    avoids[0] | avoids[1] | avoids[2])
    triples_c = Chart(name + "_triples", tab, tuple(b1 + b2 + b3 + b4),
                      frozenset().union(*avoids))

    def ex(block):
        return [sym_expr(c) for c in block]

    src = ParametricMap(arrows, m, ex(b2))
    tgt = ParametricMap(arrows, m, ex(b1))
    unit = ParametricMap(m, arrows, m.coord_exprs() + m.coord_exprs())
    inv = ParametricMap(arrows, arrows, ex(b2) + ex(b1))
    pairs = PairData(
        chart=pairs_c,
        pr1=ParametricMap(pairs_c, arrows, ex(b1) + ex(b2)),
        pr2=ParametricMap(pairs_c, arrows, ex(b2) + ex(b3)),
        mul=ParametricMap(pairs_c, arrows, ex(b1) + ex(b3)),
        left_unit=ParametricMap(arrows, pairs_c, ex(b1) + ex(b1) + ex(b2)),
        right_unit=ParametricMap(arrows, pairs_c, ex(b1) + ex(b2) + ex(b2)),
        left_inverse=ParametricMap(arrows, pairs_c, ex(b1) + ex(b2) + ex(b1)),
        right_inverse=ParametricMap(arrows, pairs_c, ex(b2) + ex(b1) + ex(b2)),
    )
    triples = TripleData(
        chart=triples_c,
        p12=ParametricMap(triples_c, pairs_c, ex(b1) + ex(b2) + ex(b3)),
        p23=ParametricMap(triples_c, pairs_c, ex(b2) + ex(b3) + ex(b4)),
        left=ParametricMap(triples_c, pairs_c, ex(b1) + ex(b3) + ex(b4)),
        right=ParametricMap(triples_c, pairs_c, ex(b1) + ex(b2) + ex(b4)),
    )
    return CoordGroupoid(name, arrows, m, src, tgt, unit, inv, pairs, triples)


def group_groupoid(g, law, unit_values, inverse, name=None):
    """A group as a groupoid over a single point.

    law and inverse are callables on lists of expressions; unit_values are
    the coordinates of the identity element.
    """
    tab = g.table
    name = name or (g.name + "_grp")
    units = Chart(name + "_pt", tab, (), frozenset())
    c1, a1 = _copy_coords(tab, g, "first_")
    c2, a2 = _copy_coords(tab, g, "second_")
    c3, a3 = _copy_coords(tab, g, "third_")
    pairs_c = Chart(name + "_pairs", tab, tuple(c1 + c2), a1 | a2)
    triples_c = Chart(name + "_triples", tab, tuple(c1 + c2 + c3),
                      a1 | a2 | a3)
    e = [const(Fraction(v)) for v in unit_values]
    if len(e) != g.dim:
        raise DomainError("unit point does not match the chart")
    gx = list(g.coord_exprs())
    e1 = [sym_expr(c) for c in c1]
    e2 = [sym_expr(c) for c in c2]
    e3 = [sym_expr(c) for c in c3]
    pairs = PairData(
        chart=pairs_c,
        pr1=ParametricMap(pairs_c, g, e1),
        pr2=ParametricMap(pairs_c, g, e2),
        mul=ParametricMap(pairs_c, g, law(e1, e2)),
        left_unit=ParametricMap(g, pairs_c, e + gx),
        right_unit=ParametricMap(g, pairs_c, gx + e),
        left_inverse=ParametricMap(g, pairs_c, gx + inverse(gx)),
        right_inverse=ParametricMap(g, pairs_c, inverse(gx) + gx),
    )
    triples = TripleData(
        chart=triples_c,
        p12=ParametricMap(triples_c, pairs_c, e1 + e2),
        p23=ParametricMap(triples_c, pairs_c, e2 + e3),
        left=ParametricMap(triples_c, pairs_c, law(e1, e2) + e3),
        right=ParametricMap(triples_c, pairs_c, e1 + law(e2, e3)),
    )
    return CoordGroupoid(
        name, g, units,
        src=ParametricMap(g, units, ()),
        tgt=ParametricMap(g, units, ()),
        unit=ParametricMap(units, g, e),
        inv=ParametricMap(g, g, inverse(gx)),
        pairs=pairs, triples=triples)


# --------------------------------------------------------------------------
# multiplicative functions and split groupoids


@dataclass(frozen=True)
class MultiplicativeCocycle:
    """A scalar on arrows meant to satisfy b(gh) = b(g) b(h)."""

    gpd: CoordGroupoid
    value: object

    def check(self, cfg=DEFAULT_CONFIG):
        gpd = self.gpd
        b = gpd.arrows.parse(self.value) if isinstance(self.value, str) \
            else self.value
        p = gpd.pairs
        labeled = [
            ("product rule", p.mul.pull_scalar(b)
             - p.pr1.pull_scalar(b) * p.pr2.pull_scalar(b)),
            ("unit value", gpd.unit.pull_scalar(b) - const(1)),
            ("inverse value", gpd.inv.pull_scalar(b) * b - const(1)),
        ]
        az = p.chart.avoid_zero | gpd.arrows.avoid_zero \
            | gpd.units.avoid_zero
        return check_all_zero("multiplicative function", labeled, cfg, az)


def _fresh_coord(tab, want, exclude):
    name, n = want, 0
    while True:
        got = tab.lookup(name)
        if got is None:
            return tab.coordinate(name)
        if getattr(got, "kind", None) == "coordinate" and got not in exclude:
            return got
        n += 1
        name = f"{want}_{n}"


def trivial_split(gpd, b, r_name="r"):
    """Product with a scaling fiber, target twisted by a candidate cocycle.

    Arrows become (g, r) with source fiber r and target fiber r b(g).  The
    result is a groupoid exactly when b is multiplicative; running
    verify_groupoid on it surfaces any defect, starting with the target of
    products.
    """
    tab = gpd.arrows.table
    b = gpd.arrows.parse(b) if isinstance(b, str) else b
    taken = set(gpd.arrows.coords) | set(gpd.units.coords) \
        | set(gpd.pairs.chart.coords) | set(gpd.triples.chart.coords)
    r = _fresh_coord(tab, r_name, taken)
    re = sym_expr(r)

    def extend(chart_, suffix):
        return Chart(chart_.name + suffix, tab, chart_.coords + (r,),
                     chart_.avoid_zero | {r})

    g2 = extend(gpd.arrows, "_x")
    m2 = extend(gpd.units, "_x")
    p2 = extend(gpd.pairs.chart, "_x")
    t2 = extend(gpd.triples.chart, "_x")
    p, t = gpd.pairs, gpd.triples
    b_second = p.pr2.pull_scalar(b)
    b_third = p.pr2.compose(t.p23).pull_scalar(b)

    def lift(f, source, target, fiber):
        return ParametricMap(source, target, tuple(f.comps) + (fiber,))

    pairs = PairData(
        chart=p2,
        pr1=lift(p.pr1, p2, g2, re * b_second),
        pr2=lift(p.pr2, p2, g2, re),
        mul=lift(p.mul, p2, g2, re),
        left_unit=lift(p.left_unit, g2, p2, re),
        right_unit=lift(p.right_unit, g2, p2, re),
        left_inverse=lift(p.left_inverse, g2, p2, re * b),
        right_inverse=lift(p.right_inverse, g2, p2, re),
    )
    triples = TripleData(
        chart=t2,
        p12=lift(t.p12, t2, p2, re * b_third),
        p23=lift(t.p23, t2, p2, re),
        left=lift(t.left, t2, p2, re),
        right=lift(t.right, t2, p2, re),
    )
    return CoordGroupoid(
        gpd.name + "_split", g2, m2,
        src=lift(gpd.src, g2, m2, re),
        tgt=lift(gpd.tgt, g2, m2, re * b),
        unit=lift(gpd.unit, m2, g2, re),
        inv=lift(gpd.inv, g2, g2, re * b),
        pairs=pairs, triples=triples)


# --------------------------------------------------------------------------
# groupoid actions


@dataclass(frozen=True)
class GroupoidAction:
    """An action of a groupoid on a chart fibered over the units.

    The pairs chart parametrizes (g, p) with src g = moment p; the triples
    chart parametrizes (g, h, p), projecting into the groupoid's own pairs
    through pair12 and into the action pairs twice.
    """

    gpd: CoordGroupoid
    space: Chart
    moment: ParametricMap         # space -> units
    pairs: Chart
    arrow: ParametricMap          # pairs -> arrows
    point: ParametricMap          # pairs -> space
    act: ParametricMap            # pairs -> space
    unit_section: ParametricMap   # space -> pairs
    triples: Chart
    pair12: ParametricMap         # triples -> groupoid pairs
    pair_act: ParametricMap       # triples -> pairs     (h, p)
    act_outer: ParametricMap      # triples -> pairs     (g, h.p)
    act_mul: ParametricMap        # triples -> pairs     (g h, p)


def verify_action(action, cfg=DEFAULT_CONFIG):
    """The four action laws: moment, unit, coherence, associativity."""
    gpd = action.gpd
    id_p = identity_map(action.space)
    out = []

    def run(name, chart_, labeled):
        out.append(check_all_zero(name, labeled, cfg, chart_.avoid_zero))

    run("action moment", action.pairs,
        _residuals("composability", gpd.src.compose(action.arrow),
                   action.moment.compose(action.point))
        + _residuals("equivariance", action.moment.compose(action.act),
                     gpd.tgt.compose(action.arrow)))
    run("action unit law", action.space,
        _residuals("arrow", action.arrow.compose(action.unit_section),
                   gpd.unit.compose(action.moment))
        + _residuals("point", action.point.compose(action.unit_section), id_p)
        + _residuals("unit acts trivially",
                     action.act.compose(action.unit_section), id_p))
    run("action coherence", action.triples,
        _residuals("outer arrow", action.arrow.compose(action.act_outer),
                   gpd.pairs.pr1.compose(action.pair12))
        + _residuals("outer point", action.point.compose(action.act_outer),
                     action.act.compose(action.pair_act))
        + _residuals("product arrow", action.arrow.compose(action.act_mul),
                     gpd.pairs.mul.compose(action.pair12))
        + _residuals("product point", action.point.compose(action.act_mul),
                     action.point.compose(action.pair_act))
        + _residuals("inner arrow", action.arrow.compose(action.pair_act),
                     gpd.pairs.pr2.compose(action.pair12)))
    run("action associativity", action.triples,
        _residuals("(g h).p = g.(h.p)", action.act.compose(action.act_outer),
                   action.act.compose(action.act_mul)))
    return out


def scaling_action(gpd, character, r_name="r"):
    """Action on the trivial scaling bundle over the units by a character."""
    tab = gpd.arrows.table
    c = gpd.arrows.parse(character) if isinstance(character, str) \
        else character
    taken = set(gpd.arrows.coords) | set(gpd.units.coords) \
        | set(gpd.pairs.chart.coords) | set(gpd.triples.chart.coords)
    r = _fresh_coord(tab, r_name, taken)
    re = sym_expr(r)
    space = Chart(gpd.units.name + "_x", tab, gpd.units.coords + (r,),
                  gpd.units.avoid_zero | {r})
    pg = Chart(gpd.arrows.name + "_x", tab, gpd.arrows.coords + (r,),
               gpd.arrows.avoid_zero | {r})
    tg = Chart(gpd.pairs.chart.name + "_act", tab,
               gpd.pairs.chart.coords + (r,),
               gpd.pairs.chart.avoid_zero | {r})
    p = gpd.pairs
    c_second = p.pr2.pull_scalar(c)
    return GroupoidAction(
        gpd=gpd, space=space,
        moment=ParametricMap(space, gpd.units, gpd.units.coord_exprs()),
        pairs=pg,
        arrow=ParametricMap(pg, gpd.arrows, gpd.arrows.coord_exprs()),
        point=ParametricMap(pg, space, tuple(gpd.src.comps) + (re,)),
        act=ParametricMap(pg, space, tuple(gpd.tgt.comps) + (c * re,)),
        unit_section=ParametricMap(space, pg, tuple(gpd.unit.comps) + (re,)),
        triples=tg,
        pair12=ParametricMap(tg, p.chart, p.chart.coord_exprs()),
        pair_act=ParametricMap(tg, pg, tuple(p.pr2.comps) + (re,)),
        act_outer=ParametricMap(tg, pg,
                                tuple(p.pr1.comps) + (c_second * re,)),
        act_mul=ParametricMap(tg, pg, tuple(p.mul.comps) + (re,)),
    )


def t_split(gpd, character, r_name="r"):
    """Splitting through a scaling action: the action and the twisted product.

    With the constant character the action is trivial and the result is the
    plain direct product groupoid.
    """
    action = scaling_action(gpd, character, r_name)
    split = trivial_split(gpd, character, r_name)
    return action, split


# --------------------------------------------------------------------------
# tensors on groupoids


def multiplicative_form_check(gpd, omega, cfg=DEFAULT_CONFIG,
                              name="multiplicative form"):
    """Pull the form back along the product and along both projections."""
    if not isinstance(omega, DifferentialForm):
        raise DomainError("multiplicativity applies to differential forms")
    if omega.chart is not gpd.arrows:
        raise DomainError("form does not live on the arrow chart")
    p = gpd.pairs
    residual = p.mul.pullback(omega) - p.pr1.pullback(omega) \
        - p.pr2.pullback(omega)
    labeled = residual.labeled_components()
    if not labeled:
        return CheckResult(name, "proved", "identically zero residual")
    return check_all_zero(name, labeled, cfg, p.chart.avoid_zero)


def _tangent_map(f):
    src_t = tangent_chart(f.source)
    dst_t = tangent_chart(f.target)
    n = f.source.dim
    comps = list(f.comps)
    for a in range(f.target.dim):
        v = const(0)
        for b in range(n):
            d = f.comps[a].diff(f.source.coords[b])
            if not d.is_zero_form:
                v = v + d * sym_expr(src_t.coords[n + b])
        comps.append(v)
    return ParametricMap(src_t, dst_t, comps)


def tangent_groupoid(gpd):
    """Apply the tangent construction to every chart and structure map."""
    p, t = gpd.pairs, gpd.triples
    pairs = PairData(
        chart=tangent_chart(p.chart),
        pr1=_tangent_map(p.pr1), pr2=_tangent_map(p.pr2),
        mul=_tangent_map(p.mul),
        left_unit=_tangent_map(p.left_unit),
        right_unit=_tangent_map(p.right_unit),
        left_inverse=_tangent_map(p.left_inverse),
        right_inverse=_tangent_map(p.right_inverse))
    triples = TripleData(
        chart=tangent_chart(t.chart),
        p12=_tangent_map(t.p12), p23=_tangent_map(t.p23),
        left=_tangent_map(t.left), right=_tangent_map(t.right))
    return CoordGroupoid(
        gpd.name + "_T", tangent_chart(gpd.arrows), tangent_chart(gpd.units),
        src=_tangent_map(gpd.src), tgt=_tangent_map(gpd.tgt),
        unit=_tangent_map(gpd.unit), inv=_tangent_map(gpd.inv),
        pairs=pairs, triples=triples)


# --------------------------------------------------------------------------
# open subgroupoids by nonvanishing functions


@dataclass(frozen=True)
class Membership:
    """Arrows and units cut out by requiring listed scalars to stay nonzero."""

    gpd: CoordGroupoid
    arrow_funcs: tuple
    unit_funcs: tuple

    def closure_check(self, cfg=DEFAULT_CONFIG, samples=32):
        """Seeded sampling: members compose, invert and bound member units."""
        gpd = self.gpd
        p = gpd.pairs
        rng = random.Random((cfg.seed << 16) ^ 0x6d656d)
        jobs = [
            ("product", p.chart,
             [p.pr1.pull_scalar(f) for f in self.arrow_funcs]
             + [p.pr2.pull_scalar(f) for f in self.arrow_funcs],
             [p.mul.pull_scalar(f) for f in self.arrow_funcs]),
            ("inversion", gpd.arrows, list(self.arrow_funcs),
             [gpd.inv.pull_scalar(f) for f in self.arrow_funcs]),
            ("endpoints", gpd.arrows, list(self.arrow_funcs),
             [gpd.src.pull_scalar(f) for f in self.unit_funcs]
             + [gpd.tgt.pull_scalar(f) for f in self.unit_funcs]),
            ("unit arrows", gpd.units, list(self.unit_funcs),
             [gpd.unit.pull_scalar(f) for f in self.arrow_funcs]),
        ]
        for tag, chart_, guards, targets in jobs:
            if not targets:
                continue
            done = 0
            attempts = 0
            budget = samples * max(cfg.max_attempts, 1)
            while done < samples:
                if attempts >= budget:
                    raise InconclusiveSamplingError(
                        f"could not draw member samples for {tag}")
                attempts += 1
                point = {}
                for c in chart_.coords:
                    v = Fraction(rng.randint(-1999, 1999), 1000)
                    while c in chart_.avoid_zero and abs(v) < cfg.pole_radius:
                        v = Fraction(rng.randint(-1999, 1999), 1000)
                    point[c] = v
                try:
                    if any(abs(g.evaluate(point)) < cfg.pole_radius
                           for g in guards):
                        continue
                    values = [f.evaluate(point) for f in targets]
                except PoleError:
                    continue
                for f, v in zip(targets, values):
                    if abs(v) <= cfg.tol:
                        w = Witness(tuple(sorted(point.items(),
                                                 key=lambda kv: kv[0].name)),
                                    v)
                        return CheckResult(
                            "membership closure", FAIL,
                            f"{tag} left the subgroupoid, value {f}",
                            (w,))
                done += 1
        return CheckResult("membership closure", NUMERIC,
                           f"closed at {samples} member samples per law")


def rx_morphism_check(gpd, param, arrow_comps, unit_comps, pair_comps,
                      cfg=DEFAULT_CONFIG):
    """A parametric family of maps that scales fibers: action laws plus
    morphism compatibility for every value of the parameter."""
    action = RxAction(gpd.arrows, param, arrow_comps)
    arrow_map = ParametricMap(gpd.arrows, gpd.arrows, arrow_comps)
    unit_map = ParametricMap(gpd.units, gpd.units, unit_comps)
    pair_map = ParametricMap(gpd.pairs.chart, gpd.pairs.chart, pair_comps)
    laws = action.certify(cfg)
    laws = [laws] if isinstance(laws, CheckResult) else list(laws)
    mor = morphism_check(gpd, gpd, arrow_map, unit_map, pair_map, cfg,
                         name="scaling morphism", extra_avoid={param})
    return laws + [mor], action


# --------------------------------------------------------------------------
# cotangent groupoid of a pair groupoid


@dataclass(frozen=True)
class CotangentPairModel:
    """Covector pairs over a factor: the cotangent groupoid of pair(R^n).

    Arrows (x, y, xi, eta) compose by (x,y,xi,eta) (y,z,-eta,etp) =
    (x,z,xi,etp); the 2-form sum of d xi_i ^ dx_i + d eta_i ^ dy_i is
    multiplicative and has degree one under the fiber scaling, and the
    arrows whose two covector legs are nonzero form an open subgroupoid.
    """

    gpd: CoordGroupoid
    omega: DifferentialForm
    membership: Membership
    param: object
    n: int

    def scaling_maps(self):
        g = self.gpd
        n = self.n
        s = sym_expr(self.param)

        def scale_tail(chart_, base_slots):
            ex = list(chart_.coord_exprs())
            return ex[:base_slots] + [s * v for v in ex[base_slots:]]

        return (scale_tail(g.arrows, 2 * n), scale_tail(g.units, n),
                scale_tail(g.pairs.chart, 3 * n))

    def certify(self, cfg=DEFAULT_CONFIG):
        results = list(verify_groupoid(self.gpd, cfg))
        results.append(multiplicative_form_check(self.gpd, self.omega, cfg))
        arrows, units, pairs = self.scaling_maps()
        checks, action = rx_morphism_check(self.gpd, self.param, arrows,
                                           units, pairs, cfg)
        results.extend(checks)
        hom = homogeneity_degree(self.omega, action, cfg)
        if hom.check.passed and hom.degree == 1:
            results.append(CheckResult("form scaling degree +1",
                                       hom.check.status, hom.check.detail))
        else:
            results.append(CheckResult("form scaling degree +1", FAIL,
                                       f"degree {hom.degree}"))
        results.append(pairing_split_check(self.n, cfg))
        return results


def _indexed(base, n):
    return [base] if n == 1 else [f"{base}{i}" for i in range(1, n + 1)]


def pairing_split_check(n=1, cfg=DEFAULT_CONFIG):
    """Composing covectors respects the tangent pairing, exactly.

    For composable covector arrows over composable tangent arrows,
    <theta * theta', (v, w) composed with (w, q)> equals <theta, (v, w)> +
    <theta', (w, q)> as polynomials.
    """
    tab = SymbolTable()
    blocks = [[tab.coordinate(nm) for nm in _indexed(base, n)]
              for base in ("x", "y", "z", "xi", "eta", "etp",
                           "vx", "vy", "vz")]
    _, _, _, xi, eta, etp, vx, vy, vz = [
        [sym_expr(c) for c in b] for b in blocks]

    def pair(cov, vec):
        return sum((a * b for a, b in zip(cov, vec)), const(0))

    lhs = pair(xi, vx) + pair(etp, vz)
    rhs = (pair(xi, vx) + pair(eta, vy)) \
        + (pair([-a for a in eta], vy) + pair(etp, vz))
    return check_all_zero("tangent pairing split", [("pairing", lhs - rhs)],
                          cfg, frozenset())


def cotangent_pair_groupoid(n=1, param_name="s"):
    """Cotangent groupoid of the pair groupoid of R^n, fully explicit."""
    if n < 1:
        raise DomainError("base dimension must be at least one")
    tab = SymbolTable()

    def block(base):
        return [tab.coordinate(nm) for nm in _indexed(base, n)]

    bx, by, bz, bw = block("x"), block("y"), block("z"), block("w")
    bxi, beta, betp, betq = block("xi"), block("eta"), block("etp"), \
        block("etq")
    bu, bm = block("u"), block("m")
    arrows = Chart("ctp", tab, tuple(bx + by + bxi + beta), frozenset())
    units = Chart("ctp_units", tab, tuple(bu + bm), frozenset())
    pairs_c = Chart("ctp_pairs", tab, tuple(bx + by + bz + bxi + beta + betp),
                    frozenset())
    triples_c = Chart("ctp_triples", tab,
                      tuple(bx + by + bz + bw + bxi + beta + betp + betq),
                      frozenset())

    def E(syms):
        return [sym_expr(c) for c in syms]

    def N(syms):
        return [-sym_expr(c) for c in syms]

    def P(source, target, comps):
        return ParametricMap(source, target, comps)

    x, y, xi, eta = E(bx), E(by), E(bxi), E(beta)
    pairs = PairData(
        chart=pairs_c,
        pr1=P(pairs_c, arrows, E(bx) + E(by) + E(bxi) + E(beta)),
        pr2=P(pairs_c, arrows, E(by) + E(bz) + N(beta) + E(betp)),
        mul=P(pairs_c, arrows, E(bx) + E(bz) + E(bxi) + E(betp)),
        left_unit=P(arrows, pairs_c, x + x + y + xi + N(bxi) + eta),
        right_unit=P(arrows, pairs_c, x + y + y + xi + eta + eta),
        left_inverse=P(arrows, pairs_c, x + y + x + xi + eta + N(bxi)),
        right_inverse=P(arrows, pairs_c, y + x + y + N(beta) + N(bxi) + eta),
    )
    triples = TripleData(
        chart=triples_c,
        p12=P(triples_c, pairs_c,
              E(bx) + E(by) + E(bz) + E(bxi) + E(beta) + E(betp)),
        p23=P(triples_c, pairs_c,
              E(by) + E(bz) + E(bw) + N(beta) + E(betp) + E(betq)),
        left=P(triples_c, pairs_c,
               E(bx) + E(bz) + E(bw) + E(bxi) + E(betp) + E(betq)),
        right=P(triples_c, pairs_c,
                E(bx) + E(by) + E(bw) + E(bxi) + E(beta) + E(betq)),
    )
    u, m = E(bu), E(bm)
    gpd = CoordGroupoid(
        "ctp", arrows, units,
        src=P(arrows, units, y + N(beta)),
        tgt=P(arrows, units, x + xi),
        unit=P(units, arrows, u + u + m + N(bm)),
        inv=P(arrows, arrows, y + x + N(beta) + N(bxi)),
        pairs=pairs, triples=triples)
    omega = DifferentialForm(
        arrows, 2,
        {key: const(-1)
         for i in range(n)
         for key in ((i, 2 * n + i), (n + i, 3 * n + i))})
    # each covector leg stays away from zero, expressed by one scalar per leg
    def leg(vals):
        return sum((v * v for v in vals), const(0))

    membership = Membership(gpd,
                            arrow_funcs=(leg(xi), leg(eta)),
                            unit_funcs=(leg(m),))
    param = tab.parameter(param_name)
    return CotangentPairModel(gpd, omega, membership, param, n)


# --------------------------------------------------------------------------
# cotangent groupoid of a group


def cotangent_group_groupoid(g, law, unit_values, inverse, name=None):
    """Covectors on a group with rational operations, over the dual of its
    Lie algebra.

    Source and target transport a covector to the identity along left and
    right translation; the product covector at g h is the first factor
    pushed through the inverse transpose of the first-slot derivative of
    the law.
    """
    tab = g.table
    name = name or (g.name + "_ct")
    n = g.dim
    arrows = phase_chart(g)
    units = Chart(name + "_units", tab,
                  tuple(tab.coordinate("u_" + c.name) for c in g.coords),
                  frozenset())
    c1, a1 = _copy_coords(tab, g, "first_")
    c2, a2 = _copy_coords(tab, g, "second_")
    th = [tab.coordinate("th_" + c.name) for c in g.coords]
    c3, a3 = _copy_coords(tab, g, "third_")
    pairs_c = Chart(name + "_pairs", tab, tuple(c1 + c2 + th), a1 | a2)
    triples_c = Chart(name + "_triples", tab, tuple(c1 + c2 + c3 + th),
                      a1 | a2 | a3)
    e = [const(Fraction(v)) for v in unit_values]
    e1 = [sym_expr(c) for c in c1]
    e2 = [sym_expr(c) for c in c2]
    e3 = [sym_expr(c) for c in c3]
    the = [sym_expr(c) for c in th]
    gx = [sym_expr(c) for c in g.coords]
    pe = [sym_expr(arrows.coords[n + a]) for a in range(n)]

    prod = law(e1, e2)
    d1 = [[prod[a].diff(c1[b]) for b in range(n)] for a in range(n)]
    d2 = [[prod[a].diff(c2[b]) for b in range(n)] for a in range(n)]
    d1_inv = mat_inv(d1)
    # product covector: inverse transpose of the first-slot derivative
    pi = [sum((d1_inv[b][a] * the[b] for b in range(n)), const(0))
          for a in range(n)]
    zeta = [sum((d2[a][b] * pi[a] for a in range(n)), const(0))
            for b in range(n)]

    # source: left translation derivative at the identity, transposed
    src_rep = dict(zip(c1, gx)) | dict(zip(c2, e))
    d2_at_e = [[v.subs(src_rep) for v in row] for row in d2]
    src_comps = [sum((d2_at_e[a][b] * pe[a] for a in range(n)), const(0))
                 for b in range(n)]
    tgt_rep = dict(zip(c1, e)) | dict(zip(c2, gx))
    d1_at_e = [[v.subs(tgt_rep) for v in row] for row in d1]
    tgt_comps = [sum((d1_at_e[a][b] * pe[a] for a in range(n)), const(0))
                 for b in range(n)]

    inv_g = inverse(gx)
    di = [[inv_g[a].diff(g.coords[b]) for b in range(n)] for a in range(n)]
    di_inv = mat_inv(di)
    inv_fiber = [sum((const(-1) * di_inv[b][a] * pe[b] for b in range(n)),
                     const(0))
                 for a in range(n)]

    ue = [sym_expr(c) for c in units.coords]
    pairs = PairData(
        chart=pairs_c,
        pr1=ParametricMap(pairs_c, arrows, e1 + the),
        pr2=ParametricMap(pairs_c, arrows, e2 + zeta),
        mul=ParametricMap(pairs_c, arrows, prod + pi),
        left_unit=ParametricMap(arrows, pairs_c, e + gx + tgt_comps),
        right_unit=ParametricMap(arrows, pairs_c, gx + e + pe),
        left_inverse=ParametricMap(arrows, pairs_c, gx + inv_g + pe),
        right_inverse=ParametricMap(arrows, pairs_c,
                                    inv_g + gx + inv_fiber),
    )
    zeta3 = zeta  # same expressions read over the triple chart
    triples = TripleData(
        chart=triples_c,
        p12=ParametricMap(triples_c, pairs_c, e1 + e2 + the),
        p23=ParametricMap(triples_c, pairs_c, e2 + e3 + zeta3),
        left=ParametricMap(triples_c, pairs_c, prod + e3 + pi),
        right=ParametricMap(triples_c, pairs_c, e1 + law(e2, e3) + the),
    )
    return CoordGroupoid(
        name, arrows, units,
        src=ParametricMap(arrows, units, src_comps),
        tgt=ParametricMap(arrows, units, tgt_comps),
        unit=ParametricMap(units, arrows, e + ue),
        inv=ParametricMap(arrows, arrows, inv_g + inv_fiber),
        pairs=pairs, triples=triples)
