"""Coordinate groupoids: axioms, splittings, actions, cotangent models."""

import dataclasses
from fractions import Fraction

import pytest

from klab.symexpr import DEFAULT_CONFIG, DomainError, SymbolTable, sym_expr
from klab.tensorcalc import Chart, Multivector, ParametricMap, chart
from klab.contact import canonical_symplectic
from klab.groupoidlab import (
    CoordGroupoid, GroupoidAction, Membership, MultiplicativeCocycle,
    PairData, TripleData, cotangent_group_groupoid, cotangent_pair_groupoid,
    group_groupoid, morphism_check, multiplicative_form_check, pair_embed,
    pair_groupoid, pairing_split_check, rx_morphism_check,
    splitting_map_check, t_split, tangent_groupoid, trivial_split,
    verify_action, verify_groupoid,
)

cfg = DEFAULT_CONFIG

AXIOMS = ["unit endpoints", "composability", "product endpoints",
          "unit laws", "inversion endpoints", "inverse laws",
          "triple coherence", "associativity"]


def assert_all_proved(results):
    for r in results:
        assert r.status == "proved", f"{r.name}: {r.detail}"


def by_name(results):
    return {r.name: r for r in results}


def mul_law(u, v):
    return [u[0] * v[0]]


def mul_inverse(u):
    return [u[0] ** -1]


def affine_law(u, v):
    return [u[0] * v[0], u[0] * v[1] + u[1]]


def affine_inverse(u):
    return [u[0] ** -1, -u[1] / u[0]]


# --------------------------------------------------------------------------
# stock groupoids


def test_pair_groupoid_satisfies_every_axiom():
    gpd = pair_groupoid(chart("M", "x y"))
    results = verify_groupoid(gpd, cfg)
    assert [r.name for r in results] == AXIOMS
    assert_all_proved(results)


def test_pair_groupoid_arrow_direction():
    # the arrow (x, y) runs from y to x
    gpd = pair_groupoid(chart("M", "x"))
    assert [str(c) for c in gpd.src.comps] == ["second_x"]
    assert [str(c) for c in gpd.tgt.comps] == ["first_x"]
    assert [str(c) for c in gpd.inv.comps] == ["second_x", "first_x"]


def test_group_of_nonzero_reals_as_groupoid():
    g = chart("G", "a", avoid_zero="a")
    gpd = group_groupoid(g, mul_law, [1], mul_inverse)
    assert gpd.units.dim == 0
    assert_all_proved(verify_groupoid(gpd, cfg))


def test_affine_transformation_group_as_groupoid():
    g = chart("Aff", "a b", avoid_zero="a")
    gpd = group_groupoid(g, affine_law, [1, 0], affine_inverse)
    assert_all_proved(verify_groupoid(gpd, cfg))


def test_wrong_product_fails_product_endpoints():
    gpd = pair_groupoid(chart("M", "x"))
    p = gpd.pairs
    wrong = ParametricMap(p.chart, gpd.arrows,
                          [sym_expr(p.chart.coords[0]),
                           sym_expr(p.chart.coords[1])])
    broken = dataclasses.replace(gpd, pairs=dataclasses.replace(p, mul=wrong))
    results = by_name(verify_groupoid(broken, cfg))
    assert results["product endpoints"].status == "fail"
    assert results["composability"].status == "proved"


def test_endpoint_validation():
    gpd = pair_groupoid(chart("M", "x"))
    with pytest.raises(DomainError):
        dataclasses.replace(gpd, src=gpd.unit)


# --------------------------------------------------------------------------
# multiplicative functions and splittings


def test_constant_function_is_multiplicative():
    gpd = pair_groupoid(chart("M", "x"))
    assert MultiplicativeCocycle(gpd, "1").check(cfg).status == "proved"


def test_polynomial_twist_is_not_multiplicative():
    gpd = pair_groupoid(chart("M", "x"))
    result = MultiplicativeCocycle(gpd, "1 + first_x^2").check(cfg)
    assert result.status == "fail"
    assert "product rule" in result.detail


def test_coordinate_ratio_is_multiplicative_off_zero():
    gpd = pair_groupoid(chart("M", "x", avoid_zero="x"))
    result = MultiplicativeCocycle(gpd, "first_x / second_x").check(cfg)
    assert result.status == "proved"


def test_split_by_multiplicative_function_is_a_groupoid():
    gpd = pair_groupoid(chart("M", "x", avoid_zero="x"))
    split = trivial_split(gpd, "first_x / second_x")
    assert split.arrows.coords[-1].name == "r"
    assert split.arrows.coords[-1] in split.arrows.avoid_zero
    assert_all_proved(verify_groupoid(split, cfg))


def test_split_by_defective_twist_fails_at_product_target():
    # the twisted target of a product only matches when b is multiplicative
    gpd = pair_groupoid(chart("M", "x"))
    split = trivial_split(gpd, "1 + first_x^2")
    results = by_name(verify_groupoid(split, cfg))
    assert results["product endpoints"].status == "fail"
    assert "tgt∘mul" in results["product endpoints"].detail
    assert results["composability"].status == "proved"
    assert results["associativity"].status == "proved"


def test_repeated_splits_draw_fresh_fiber_names():
    gpd = pair_groupoid(chart("M", "x", avoid_zero="x"))
    once = trivial_split(gpd, "first_x / second_x")
    twice = trivial_split(once, "1")
    names = [c.name for c in twice.arrows.coords]
    assert names == ["first_x", "second_x", "r", "r_1"]
    assert_all_proved(verify_groupoid(twice, cfg))


# --------------------------------------------------------------------------
# scaling actions


def test_trivial_character_gives_direct_product():
    gpd = pair_groupoid(chart("M", "x"))
    action, split = t_split(gpd, "1")
    assert [r.name for r in verify_action(action, cfg)] == [
        "action moment", "action unit law", "action coherence",
        "action associativity"]
    assert_all_proved(verify_action(action, cfg))
    assert_all_proved(verify_groupoid(split, cfg))
    assert str(split.tgt.comps[-1]) == "r"


def test_ratio_character_acts_and_splits():
    gpd = pair_groupoid(chart("M", "x", avoid_zero="x"))
    action, split = t_split(gpd, "first_x / second_x")
    assert_all_proved(verify_action(action, cfg))
    assert_all_proved(verify_groupoid(split, cfg))
    want = split.arrows.parse("first_x * r / second_x")
    assert (split.tgt.comps[-1] - want).is_zero_form


def test_action_with_broken_unit_law_is_flagged():
    gpd = pair_groupoid(chart("M", "x"))
    action, _ = t_split(gpd, "1")
    r = sym_expr(action.space.coords[-1])
    crooked = ParametricMap(action.pairs, action.space,
                            tuple(gpd.tgt.comps) + (r + 1,))
    broken = dataclasses.replace(action, act=crooked)
    results = by_name(verify_action(broken, cfg))
    assert results["action unit law"].status == "fail"
    assert "unit acts trivially" in results["action unit law"].detail


def test_pair_embedding_into_arrow_product():
    gpd = pair_groupoid(chart("M", "x"))
    emb = pair_embed(gpd)
    assert [str(c) for c in emb.comps] == [
        "first_x", "second_x", "second_x", "third_x"]
    assert emb.target.dim == 4


# --------------------------------------------------------------------------
# tangent groupoids


def test_tangent_groupoid_of_pair_groupoid():
    gpd = pair_groupoid(chart("M", "x", avoid_zero="x"))
    tg = tangent_groupoid(gpd)
    assert tg.arrows.dim == 4
    assert tg.pairs.chart.dim == 6
    assert_all_proved(verify_groupoid(tg, cfg))


def test_tangent_groupoid_of_group():
    g = chart("G", "a", avoid_zero="a")
    gpd = group_groupoid(g, mul_law, [1], mul_inverse)
    tg = tangent_groupoid(gpd)
    # velocity of the product carries the usual derivation rule
    want = tg.pairs.chart.parse("first_a*d_second_a + second_a*d_first_a")
    assert (tg.pairs.mul.comps[1] - want).is_zero_form
    assert_all_proved(verify_groupoid(tg, cfg))


# --------------------------------------------------------------------------
# the cotangent groupoid of the pair groupoid of a line


def test_covector_pair_composition_components():
    model = cotangent_pair_groupoid()
    gpd = model.gpd
    assert [str(c) for c in gpd.pairs.mul.comps] == ["x", "z", "xi", "etp"]
    assert [str(c) for c in gpd.src.comps] == ["y", "-eta"]
    assert [str(c) for c in gpd.tgt.comps] == ["x", "xi"]
    assert [str(c) for c in gpd.unit.comps] == ["u", "u", "m", "-m"]
    assert [str(c) for c in gpd.inv.comps] == ["y", "x", "-eta", "-xi"]


def test_covector_pair_model_certificates():
    model = cotangent_pair_groupoid()
    results = model.certify(cfg)
    names = [r.name for r in results]
    assert names == AXIOMS + [
        "multiplicative form", "scaling action laws", "scaling morphism",
        "form scaling degree +1", "tangent pairing split"]
    assert_all_proved(results)


def test_covector_membership_closes_under_composition():
    model = cotangent_pair_groupoid()
    result = model.membership.closure_check(cfg)
    assert result.status == "numeric"
    assert "32" in result.detail


def test_membership_violation_is_witnessed():
    # xi + eta vanishes identically on unit arrows (m, -m)
    model = cotangent_pair_groupoid()
    g = model.gpd
    xi = sym_expr(g.arrows.coords[2])
    eta = sym_expr(g.arrows.coords[3])
    m = sym_expr(g.units.coords[1])
    leaky = Membership(g, arrow_funcs=(xi + eta,), unit_funcs=(m,))
    result = leaky.closure_check(cfg)
    assert result.status == "fail"
    assert "unit arrows" in result.detail
    assert result.witnesses


def test_scaling_must_extend_to_units():
    model = cotangent_pair_groupoid()
    g = model.gpd
    arrows, units, pairs = model.scaling_maps()
    flat_units = list(g.units.coord_exprs())  # forgets to scale the fiber
    result = morphism_check(
        g, g,
        ParametricMap(g.arrows, g.arrows, arrows),
        ParametricMap(g.units, g.units, flat_units),
        ParametricMap(g.pairs.chart, g.pairs.chart, pairs),
        cfg, extra_avoid={model.param})
    assert result.status == "fail"
    assert "source" in result.detail or "target" in result.detail


def test_tangent_pairing_splits_across_composition():
    assert pairing_split_check(1, cfg).status == "proved"
    assert pairing_split_check(2, cfg).status == "proved"


def test_covector_pairs_over_the_plane():
    model = cotangent_pair_groupoid(n=2)
    gpd = model.gpd
    assert gpd.arrows.dim == 8
    assert [c.name for c in gpd.arrows.coords] == [
        "x1", "x2", "y1", "y2", "xi1", "xi2", "eta1", "eta2"]
    assert_all_proved(model.certify(cfg))
    closure = model.membership.closure_check(cfg, samples=64)
    assert closure.status == "numeric"
    assert "64" in closure.detail


def test_exponential_twist_splits_numerically():
    # not rational, so certificates settle at sampled tolerance
    gpd = pair_groupoid(chart("M", "x"))
    split = trivial_split(gpd, "exp(first_x - second_x)")
    results = verify_groupoid(split, cfg)
    for r in results:
        assert r.status in ("proved", "numeric"), f"{r.name}: {r.detail}"
    assert any(r.status == "numeric" for r in results)
    s = split.arrows.table.parameter("s")
    fiber = sym_expr(split.arrows.coords[-1])
    ex = list(split.arrows.coord_exprs())
    arrow_scaled = ex[:-1] + [sym_expr(s) * fiber]
    eu = list(split.units.coord_exprs())
    unit_scaled = eu[:-1] + [sym_expr(s) * eu[-1]]
    ep = list(split.pairs.chart.coord_exprs())
    pair_scaled = ep[:-1] + [sym_expr(s) * ep[-1]]
    checks, _ = rx_morphism_check(split, s, arrow_scaled, unit_scaled,
                                  pair_scaled, cfg)
    for r in checks:
        assert r.status in ("proved", "numeric"), f"{r.name}: {r.detail}"


# --------------------------------------------------------------------------
# cotangent groupoids of groups


def test_cotangent_groupoid_of_additive_line():
    line = chart("L", "w")
    gpd = cotangent_group_groupoid(line, lambda u, v: [u[0] + v[0]], [0],
                                   lambda u: [-u[0]])
    assert [str(c) for c in gpd.src.comps] == ["p_w"]
    assert [str(c) for c in gpd.tgt.comps] == ["p_w"]
    assert_all_proved(verify_groupoid(gpd, cfg))
    form = multiplicative_form_check(gpd, canonical_symplectic(line), cfg)
    assert form.status == "proved"


def test_cotangent_groupoid_of_multiplicative_group():
    g = chart("G", "a", avoid_zero="a")
    gpd = cotangent_group_groupoid(g, mul_law, [1], mul_inverse)
    # both translations of an abelian group transport covectors alike
    assert [str(c) for c in gpd.src.comps] == ["a*p_a"]
    assert [str(c) for c in gpd.tgt.comps] == ["a*p_a"]
    assert (gpd.inv.comps[1] - gpd.arrows.parse("a^2 * p_a")).is_zero_form
    assert_all_proved(verify_groupoid(gpd, cfg))
    form = multiplicative_form_check(gpd, canonical_symplectic(g), cfg)
    assert form.status == "proved"


def test_cotangent_groupoid_of_affine_group():
    g = chart("Aff", "a b", avoid_zero="a")
    gpd = cotangent_group_groupoid(g, affine_law, [1, 0], affine_inverse)
    assert_all_proved(verify_groupoid(gpd, cfg))
    form = multiplicative_form_check(gpd, canonical_symplectic(g), cfg)
    assert form.status == "proved"


def test_cotangent_group_membership_off_zero_section():
    line = chart("L", "w")
    gpd = cotangent_group_groupoid(line, lambda u, v: [u[0] + v[0]], [0],
                                   lambda u: [-u[0]])
    p = sym_expr(gpd.arrows.coords[1])
    u = sym_expr(gpd.units.coords[0])
    member = Membership(gpd, arrow_funcs=(p,), unit_funcs=(u,))
    result = member.closure_check(cfg)
    assert result.status == "numeric"


def test_multiplicative_form_rejects_misplaced_tensors():
    model = cotangent_pair_groupoid()
    g = model.gpd
    line = chart("L", "w")
    with pytest.raises(DomainError):
        multiplicative_form_check(g, canonical_symplectic(line), cfg)
    with pytest.raises(DomainError):
        multiplicative_form_check(
            g, Multivector(g.arrows, 2, {(0, 2): sym_expr(g.arrows.coords[0])}),
            cfg)


# --------------------------------------------------------------------------
# a split groupoid isomorphic to the open cotangent pair groupoid


def _rich_base():
    tab = SymbolTable()
    u = tab.coordinate("u")
    units = Chart("N", tab, (u,), frozenset())
    x, y, z, w = tab.coordinates("x y z w")
    r, rp, rq = tab.coordinates("r rp rq")
    arrows = Chart("N_arr", tab, (x, y, r), frozenset({r}))
    prs = Chart("N_prs", tab, (x, y, z, r, rp), frozenset({r, rp}))
    trp = Chart("N_trp", tab, (x, y, z, w, r, rp, rq),
                frozenset({r, rp, rq}))
    X, Y, Z, W, R, RP, RQ, U = (sym_expr(s)
                                for s in (x, y, z, w, r, rp, rq, u))

    def P(a, b, comps):
        return ParametricMap(a, b, comps)

    return CoordGroupoid(
        "N", arrows, units,
        src=P(arrows, units, [Y]),
        tgt=P(arrows, units, [X]),
        unit=P(units, arrows, [U, U, -1]),
        inv=P(arrows, arrows, [Y, X, R ** -1]),
        pairs=PairData(
            chart=prs,
            pr1=P(prs, arrows, [X, Y, R]),
            pr2=P(prs, arrows, [Y, Z, RP]),
            mul=P(prs, arrows, [X, Z, -R * RP]),
            left_unit=P(arrows, prs, [X, X, Y, -1, R]),
            right_unit=P(arrows, prs, [X, Y, Y, R, -1]),
            left_inverse=P(arrows, prs, [X, Y, X, R, R ** -1]),
            right_inverse=P(arrows, prs, [Y, X, Y, R ** -1, R]),
        ),
        triples=TripleData(
            chart=trp,
            p12=P(trp, prs, [X, Y, Z, R, RP]),
            p23=P(trp, prs, [Y, Z, W, RP, RQ]),
            left=P(trp, prs, [X, Z, W, -R * RP, RQ]),
            right=P(trp, prs, [X, Y, W, R, -RP * RQ]),
        ))


def test_twisted_pair_model_verifies():
    base = _rich_base()
    assert_all_proved(verify_groupoid(base, cfg))
    twist = sym_expr(base.arrows.coords[2]) ** -1
    assert MultiplicativeCocycle(base, -twist).check(cfg).status == "proved"


def test_split_twisted_pairs_match_covector_pairs():
    """The split of the twisted model lands on the open covector groupoid."""
    base = _rich_base()
    r = sym_expr(base.arrows.coords[2])
    split = trivial_split(base, -(r ** -1), r_name="lam")
    assert_all_proved(verify_groupoid(split, cfg))

    model = cotangent_pair_groupoid()
    ct = model.gpd
    x, y, _, lam_s = split.arrows.coords
    X, Y, LAM = sym_expr(x), sym_expr(y), sym_expr(lam_s)
    phi = ParametricMap(split.arrows, ct.arrows, [X, Y, -LAM / r, -LAM])
    u = sym_expr(split.units.coords[0])
    phi0 = ParametricMap(split.units, ct.units, [u, LAM])
    px, py, pz, pr, prp, _ = split.pairs.chart.coords
    XP, YP, ZP = sym_expr(px), sym_expr(py), sym_expr(pz)
    RP = sym_expr(prp)
    phi2 = ParametricMap(split.pairs.chart, ct.pairs.chart,
                         [XP, YP, ZP, LAM / (sym_expr(pr) * RP),
                          LAM / RP, -LAM])
    result = splitting_map_check(split, ct, phi, phi0, phi2, cfg)
    assert result.name == "splitting map"
    assert result.status == "proved"
