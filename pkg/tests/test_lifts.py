"""Tangent and phase lifts: charts, actions, complete lift, intertwining."""

import random

import pytest

from klab.symexpr import DomainError
from klab.tensorcalc import (
    Multivector, chart, differential_form, homogeneity_degree, multivector,
    schouten, standard_action,
)
from klab.kirillov import jacobi_pair, poissonise
from klab.lifts import (
    algebroid_reduction, intertwine_check, lifted_actions,
    linear_rx_identification, phase_action, phase_chart, sharp_map,
    tangent_action, tangent_chart, tangent_lift,
)


def bundle_chart():
    return chart("M^", "t x", avoid_zero="t")


def contact_structure():
    base = chart("J1", "z x p")
    pair = jacobi_pair(
        base,
        {("x", "p"): 1, ("z", "p"): "p"},
        {"z": 1},
    )
    return poissonise(pair)


# --------------------------------------------------------------------------
# charts


def test_tangent_chart_doubles_coordinates():
    b = bundle_chart()
    tan = tangent_chart(b)
    assert [c.name for c in tan.coords] == ["t", "x", "d_t", "d_x"]
    ph = phase_chart(b)
    assert [c.name for c in ph.coords] == ["t", "x", "p_t", "p_x"]
    # scaling coordinate keeps its nonvanishing constraint upstairs
    assert b.sym("t") in tan.avoid_zero and b.sym("t") in ph.avoid_zero


def test_extended_charts_are_cached():
    b = bundle_chart()
    assert tangent_chart(b) is tangent_chart(b)
    assert phase_chart(b) is phase_chart(b)


# --------------------------------------------------------------------------
# lifted actions


def standard_setup():
    b = bundle_chart()
    s = b.table.parameter("s")
    return b, standard_action(b, b.sym("t"), s)


def test_tangent_action_display():
    _, act = standard_setup()
    lifted = tangent_action(act)
    assert [str(c) for c in lifted.comps] == ["s*t", "x", "s*d_t", "d_x"]


def test_phase_action_display():
    # momentum of the scaled coordinate is fixed, the other picks up a power
    _, act = standard_setup()
    lifted = phase_action(act)
    assert [str(c) for c in lifted.comps] == ["s*t", "x", "p_t", "s*p_x"]


def test_shifted_lift_displays():
    _, act = standard_setup()
    assert [str(c) for c in tangent_action(act, 1).comps] == \
        ["s*t", "x", "s^2*d_t", "s*d_x"]
    assert [str(c) for c in phase_action(act, 1).comps] == \
        ["s*t", "x", "s*p_t", "s^2*p_x"]


def test_lifted_actions_satisfy_action_laws():
    _, act = standard_setup()
    for shift in (0, 1, -1):
        pair = lifted_actions(act, shift)
        assert all(r.proved for r in pair.certify())


def test_lifted_actions_on_larger_bundle():
    ks = contact_structure()
    pair = lifted_actions(ks.action)
    assert all(r.proved for r in pair.certify())


# --------------------------------------------------------------------------
# complete lift


def test_complete_lift_of_constant_bivector():
    b, _ = standard_setup()
    lam = multivector(b, 2, {("t", "x"): 1})
    dl = tangent_lift(lam)
    tan = tangent_chart(b)
    assert dl.chart is tan
    assert str(dl.component(("t", "d_x"))) == "1"
    assert str(dl.component(("x", "d_t"))) == "-1"
    assert len(dl.comps) == 2


def _vertical_lift(vec):
    tan = tangent_chart(vec.chart)
    n = vec.chart.dim
    entries = {(a + n,): c for (a,), c in vec.comps.items()}
    return Multivector.build(tan, 1, entries)


_POOL = ["1", "u", "w", "y", "u*w", "u^2", "w*y", "u + w", "2*y", "w^2 - u"]


def _random_vector(ch, rng):
    entries = {}
    for i in range(ch.dim):
        if rng.random() < 0.75:
            entries[(i,)] = ch.parse(rng.choice(_POOL))
    return Multivector.build(ch, 1, entries)


def _random_bivector(ch, rng):
    entries = {}
    for a in range(ch.dim):
        for b in range(a + 1, ch.dim):
            if rng.random() < 0.75:
                entries[(a, b)] = ch.parse(rng.choice(_POOL))
    return Multivector.build(ch, 2, entries)


def test_complete_lift_is_a_wedge_derivation():
    # d_T(X ^ Y) = d_T X ^ v(Y) + v(X) ^ d_T Y  with v the vertical lift
    ch = chart("Q", "u w y")
    rng = random.Random(7)
    for _ in range(6):
        x = _random_vector(ch, rng)
        y = _random_vector(ch, rng)
        lhs = tangent_lift(x.wedge(y))
        rhs = tangent_lift(x).wedge(_vertical_lift(y)) + \
            _vertical_lift(x).wedge(tangent_lift(y))
        assert (lhs - rhs).comps == {}


def test_complete_lift_preserves_vector_brackets():
    ch = chart("Q", "u w y")
    rng = random.Random(11)
    for _ in range(4):
        x = _random_vector(ch, rng)
        y = _random_vector(ch, rng)
        lhs = schouten(tangent_lift(x), tangent_lift(y))
        rhs = tangent_lift(schouten(x, y))
        assert (lhs - rhs).comps == {}


def test_complete_lift_commutes_with_self_bracket():
    # the bracket defect upstairs is exactly the lift of the defect below
    ch = chart("Q", "u w y")
    rng = random.Random(23)
    for _ in range(10):
        lam = _random_bivector(ch, rng)
        lhs = schouten(tangent_lift(lam), tangent_lift(lam))
        rhs = tangent_lift(schouten(lam, lam))
        assert (lhs - rhs).comps == {}


def test_complete_lift_rejects_forms():
    b, _ = standard_setup()
    alpha = differential_form(b, 1, {("t",): 1})
    with pytest.raises(DomainError):
        tangent_lift(alpha)


def test_complete_lift_keeps_scaling_degree():
    ks = contact_structure()
    lifted_act = tangent_action(ks.action)
    res = homogeneity_degree(tangent_lift(ks.bivector), lifted_act)
    assert res.degree == -1 and res.check.passed


# --------------------------------------------------------------------------
# raising map and intertwining


def test_sharp_map_components():
    b, _ = standard_setup()
    lam = multivector(b, 2, {("t", "x"): 1})
    sh = sharp_map(lam)
    assert [str(c) for c in sh.comps] == ["t", "x", "p_x", "-p_t"]
    assert sh.source is phase_chart(b) and sh.target is tangent_chart(b)


def test_sharp_map_needs_a_bivector():
    b, _ = standard_setup()
    vec = multivector(b, 1, {("t",): 1})
    with pytest.raises(DomainError):
        sharp_map(vec)


def test_intertwine_passes_for_degree_minus_one():
    b, act = standard_setup()
    assert intertwine_check(act, multivector(b, 2, {("t", "x"): 1})).proved

    c3 = chart("M3", "t x y", avoid_zero="t")
    act3 = standard_action(c3, c3.sym("t"), c3.table.parameter("s"))
    mixed = multivector(c3, 2, {("t", "y"): 1, ("x", "y"): "1/t"})
    assert intertwine_check(act3, mixed).proved

    ks = contact_structure()
    assert intertwine_check(ks.action, ks.bivector).proved


def test_intertwine_fails_off_degree():
    b, act = standard_setup()
    too_low = multivector(b, 2, {("t", "x"): "1/t"})
    r = intertwine_check(act, too_low)
    assert not r.passed and "d_t" in r.detail

    c3 = chart("M3", "t x y", avoid_zero="t")
    act3 = standard_action(c3, c3.sym("t"), c3.table.parameter("s"))
    invariant = multivector(c3, 2, {("x", "y"): 1})
    assert not intertwine_check(act3, invariant).passed


def test_intertwine_requires_matching_chart():
    b, act = standard_setup()
    other = chart("N^", "t x", avoid_zero="t")
    lam = multivector(other, 2, {("t", "x"): 1})
    with pytest.raises(DomainError):
        intertwine_check(act, lam)


# --------------------------------------------------------------------------
# invariant velocity coordinates


def test_identification_round_trip():
    b, _ = standard_setup()
    tan = tangent_chart(b)
    ident = linear_rx_identification(tan, "t", ["d_t"])
    assert [c.name for c in ident.source.coords] == ["t", "x", "d_t_inv", "d_x"]
    assert ident.verify_inverse().proved


def test_identification_rejects_scaling_coordinate():
    b, _ = standard_setup()
    tan = tangent_chart(b)
    with pytest.raises(DomainError):
        linear_rx_identification(tan, "t", ["t"])


def test_reduction_of_translation_structure():
    ks = poissonise(jacobi_pair(chart("N", "x"), {}, {"x": 1}))
    adapted, check, blocks = algebroid_reduction(ks)
    assert check.proved
    named = {tuple(adapted.chart.coords[i].name for i in key): str(c)
             for key, c in adapted.comps.items()}
    assert named == {
        ("t", "d_x"): "1",
        ("x", "d_t_inv"): "(-1)/(t)",
        ("d_t_inv", "d_x"): "(-d_t_inv)/(t)",
    }
    assert {k: str(v) for k, v in blocks["anchor"].items()} == {(1, 2): "-1"}
    assert {k: str(v) for k, v in blocks["unit"].items()} == {(0, 3): "1"}
    assert {k: str(v) for k, v in blocks["structure"].items()} == \
        {(2, 3): "-d_t_inv"}


def test_reduction_of_contact_structure():
    adapted, check, blocks = algebroid_reduction(contact_structure())
    assert check.passed
    assert blocks["anchor"] and blocks["unit"]


def test_unadapted_lift_is_not_algebroid_shaped():
    # before the identification the velocity block depends on t
    from klab.kirillov import algebroid_form_check
    ks = poissonise(jacobi_pair(chart("N", "x"), {}, {"x": 1}))
    dl = tangent_lift(ks.bivector)
    check, _ = algebroid_form_check(dl, "t", ["x"], ["d_t", "d_x"])
    assert not check.passed
