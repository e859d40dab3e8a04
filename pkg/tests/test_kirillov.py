"""Bundle bivector construction and its bracket correspondence."""

import pytest

from klab.symexpr import SymbolTable, const, is_zero, sym_expr
from klab.kirillov import (
    algebroid_form_check, check_bracket_lift, coisotropic_check, extract_pair,
    is_jacobi, jacobi_pair, kirillov_bracket, lift_section, poissonise,
)
from klab.tensorcalc import chart, multivector, poisson_bracket, schouten


@pytest.fixture()
def contact_pair():
    # the pair underlying the canonical odd-dimensional bracket on (z, x, p)
    C = chart("base", "z x p")
    return jacobi_pair(C, {("x", "p"): 1, ("z", "p"): "p"}, {"z": 1})


@pytest.fixture()
def nonjacobi_pair():
    C = chart("nj", "x y z")
    return jacobi_pair(C, {("x", "y"): "y", ("y", "z"): "x"}, {})


def test_poissonise_components(contact_pair):
    ks = poissonise(contact_pair)
    K = ks.bundle
    assert [c.name for c in K.coords] == ["t", "z", "x", "p"]
    assert ks.bivector == multivector(K, 2, {
        ("x", "p"): "1/t", ("z", "p"): "p/t", ("t", "z"): 1})
    assert ks.t in K.avoid_zero


def test_certificates_for_jacobi_pair(contact_pair):
    ks = poissonise(contact_pair)
    results = ks.certify()
    assert all(r.proved for r in results), [r.render() for r in results]


def test_self_bracket_detects_jacobi_defect(nonjacobi_pair):
    check, residual = is_jacobi(nonjacobi_pair)
    assert not check.passed
    K = residual.chart
    # the only obstruction lives on the base indices, scaled down twice
    te = K.x("t")
    assert residual == multivector(K, 3, {("x", "y", "z"): "2*x/t^2"})
    scaled = residual.scale(te * te)
    assert scaled == multivector(K, 3, {("x", "y", "z"): "2*x"})


def test_jacobi_defect_matches_base_self_bracket(nonjacobi_pair):
    # with no vector part, the defect is exactly the base self-bracket over t^2
    base_defect = schouten(nonjacobi_pair.bivector, nonjacobi_pair.bivector)
    _, residual = is_jacobi(nonjacobi_pair)
    te = residual.chart.x("t")
    lifted = {(a + 1, b + 1, c + 1): comp
              for (a, b, c), comp in base_defect.comps.items()}
    assert residual.scale(te * te).comps == lifted


def test_extract_pair_round_trip(contact_pair):
    ks = poissonise(contact_pair)
    pair, check = extract_pair(ks)
    assert check.proved
    assert pair.bivector.comps == {
        k: v for k, v in contact_pair.bivector.comps.items()}
    assert pair.vector.comps == contact_pair.vector.comps


def test_extract_pair_rejects_scaling_dependence(contact_pair):
    ks = poissonise(contact_pair)
    K = ks.bundle
    bad = ks.bivector + multivector(K, 2, {("t", "x"): "t"})
    from klab.kirillov import KirillovStructure
    ks2 = KirillovStructure(K, ks.t, bad)
    _, check = extract_pair(ks2)
    assert not check.passed


def test_bracket_formula(contact_pair):
    # expanded by hand: B(du, dv) + u V(v) - v V(u)
    C = contact_pair.chart
    assert kirillov_bracket(contact_pair, "x", "p") == C.parse("1")
    assert kirillov_bracket(contact_pair, "z", "x") == C.parse("-x")
    assert kirillov_bracket(contact_pair, "z", "p").is_zero_form
    # first-order, not a derivation: bracket with 1 sees the vector part
    assert kirillov_bracket(contact_pair, "1", "x").is_zero_form
    assert kirillov_bracket(contact_pair, "1", "z") == C.parse("1")


def test_bracket_lift_correspondence_concrete(contact_pair):
    ks = poissonise(contact_pair)
    for u, v in [("z", "x*p"), ("x^2", "p"), ("z*p - x", "z + x")]:
        check = check_bracket_lift(ks, u, v)
        assert check.proved, check.render()


def test_bracket_lift_correspondence_formal(contact_pair):
    # structure functions left formal: cancellation must still be structural
    C = contact_pair.chart
    tab = C.table
    f = tab.function("u_fn", 3)
    g = tab.function("v_fn", 3)
    args = tuple(sym_expr(s) for s in C.coords)
    from klab.symexpr import formal
    u = formal(f, args)
    v = formal(g, args)
    ks = poissonise(contact_pair)
    check = check_bracket_lift(ks, u, v)
    assert check.proved, check.render()


def test_formal_pair_bracket_lift():
    # even the pair itself may be formal in the base point
    tab = SymbolTable()
    C = chart("fb", "x y", table=tab)
    B = tab.function("B_xy", 2)
    V1 = tab.function("V_x", 2)
    V2 = tab.function("V_y", 2)
    from klab.symexpr import formal
    args = tuple(sym_expr(s) for s in C.coords)
    pair = jacobi_pair(
        C,
        {("x", "y"): formal(B, args)},
        {"x": formal(V1, args), "y": formal(V2, args)},
    )
    ks = poissonise(pair)
    check = check_bracket_lift(ks, "x*y", "x - y")
    assert check.proved, check.render()


def test_lift_section_rejects_scaling_coordinate(contact_pair):
    ks = poissonise(contact_pair)
    with pytest.raises(Exception):
        lift_section(ks, "t*z")


def test_bracket_of_lifts_is_degree_one(contact_pair):
    from klab.tensorcalc import homogeneity_degree
    ks = poissonise(contact_pair)
    # brackets of two lifted sections are again lifts, so they scale linearly
    bracket = poisson_bracket(ks.bivector, lift_section(ks, "z"),
                              lift_section(ks, "x*p"))
    v = (bracket / sym_expr(ks.t)).diff(ks.t)
    assert is_zero(v).is_zero


def test_coisotropic_blocks():
    C = chart("co", "x y1 y2")
    pair = jacobi_pair(
        C,
        {("y1", "y2"): "y1", ("x", "y1"): "y2 + x*y1"},
        {"y1": "y1", "y2": "x*y2"},
    )
    ks = poissonise(pair)
    good = coisotropic_check(ks, ["y1", "y2"])
    assert good.proved, good.render()


def test_coisotropic_rejects_bad_vector_block():
    C = chart("co2", "x y1 y2")
    pair = jacobi_pair(C, {("y1", "y2"): "y1"}, {"y1": 1})
    ks = poissonise(pair)
    bad = coisotropic_check(ks, ["y1", "y2"])
    assert not bad.passed
    assert "t,y1" in bad.detail


def test_coisotropic_rejects_bad_fiber_block():
    C = chart("co3", "x y1 y2")
    pair = jacobi_pair(C, {("y1", "y2"): "x"}, {})
    ks = poissonise(pair)
    bad = coisotropic_check(ks, ["y1", "y2"])
    assert not bad.passed


def test_algebroid_shape_accepts_adapted_lift():
    # the adapted double-lift bivector of the trivial structure on one base
    # coordinate: unit block (t, xdot), anchor block (x, tdot) scaled by 1/t
    A = chart("alg", "t x tdot xdot", avoid_zero="t")
    biv = multivector(A, 2, {("t", "xdot"): 1, ("x", "tdot"): "-1/t"})
    check, blocks = algebroid_form_check(biv, "t", ["x"], ["tdot", "xdot"])
    assert check.proved, check.render()
    assert list(blocks["unit"].values()) == [A.parse("1")]
    tdot_idx = A.index(A.sym("tdot"))
    x_idx = A.index(A.sym("x"))
    assert blocks["anchor"][(x_idx, tdot_idx)] == A.parse("-1")
    assert not blocks["structure"]


def test_algebroid_shape_rejects_unadapted_lift():
    # before adapting coordinates the mixed block keeps a forbidden component
    A = chart("alg2", "t x tdot xdot", avoid_zero="t")
    biv = multivector(A, 2, {("t", "xdot"): 1, ("tdot", "x"): 1})
    check, _ = algebroid_form_check(biv, "t", ["x"], ["tdot", "xdot"])
    assert not check.passed


def test_algebroid_shape_structure_block_linearity():
    A = chart("alg3", "t x y1 y2", avoid_zero="t")
    good = multivector(A, 2, {("y1", "y2"): "(y1 + 2*y2)/t"})
    check, blocks = algebroid_form_check(good, "t", ["x"], ["y1", "y2"])
    assert check.proved
    bad = multivector(A, 2, {("y1", "y2"): "(y1^2)/t"})
    check2, _ = algebroid_form_check(bad, "t", ["x"], ["y1", "y2"])
    assert not check2.passed
