"""Contact condition, symplectisation, recovery, momentum chart embedding."""

import random

import pytest

from klab.symexpr import DomainError
from klab.tensorcalc import (
    chart, differential_form, exterior_d, lie_derivative,
)
from klab.kirillov import jacobi_pair, poissonise
from klab.contact import (
    HomogeneousSymplectic, canonical_symplectic, cotangent_embedding,
    is_contact_form, liouville_form, recover_contact_form, symplectise,
    volume_coefficient,
)


def darboux():
    base = chart("J1", "z x p")
    alpha = differential_form(base, 1, {("z",): 1, ("x",): "-p"})
    return base, alpha


# --------------------------------------------------------------------------
# symplectisation


def test_symplectisation_components():
    _, alpha = darboux()
    hs = symplectise(alpha)
    assert [c.name for c in hs.bundle.coords] == ["t", "z", "x", "p"]
    named = {tuple(hs.bundle.coords[i].name for i in k): str(v)
             for k, v in hs.omega.comps.items()}
    assert named == {("t", "z"): "1", ("t", "x"): "-p", ("x", "p"): "t"}


def test_symplectisation_certificates():
    _, alpha = darboux()
    results = hs_results = symplectise(alpha).certify()
    assert [r.name for r in results] == \
        ["scaling action laws", "closedness", "scaling degree +1",
         "nondegeneracy"]
    assert all(r.proved for r in hs_results)
    assert "t^2" in results[-1].detail


def test_symplectisation_matches_poissonisation():
    # inverting the bundle form gives the same bivector the bracket pair does
    _, alpha = darboux()
    biv = symplectise(alpha).poisson_bivector()
    ks = poissonise(jacobi_pair(chart("B", "z x p"),
                                {("x", "p"): 1, ("z", "p"): "p"}, {"z": 1}))
    assert {k: str(v) for k, v in biv.comps.items()} == \
        {k: str(v) for k, v in ks.bivector.comps.items()}


def test_symplectisation_renames_colliding_scaling_coordinate():
    w = chart("W", "t x y")
    alpha = differential_form(w, 1, {("t",): 1, ("x",): "-y"})
    hs = symplectise(alpha)
    assert [c.name for c in hs.bundle.coords] == ["t_1", "t", "x", "y"]
    assert hs.certified()


def test_euler_field_reproduces_the_form():
    _, alpha = darboux()
    hs = symplectise(alpha)
    delta = hs.action.fundamental_field()
    assert (lie_derivative(delta, hs.omega) - hs.omega).comps == {}


def test_direct_construction_validates_shape():
    b = chart("M^", "t z", avoid_zero="t")
    omega = differential_form(b, 2, {("t", "z"): 1})
    bad_order = chart("N^", "z t", avoid_zero="t")
    with pytest.raises(DomainError):
        HomogeneousSymplectic(bad_order, bad_order.sym("t"),
                              differential_form(bad_order, 2, {("z", "t"): 1}),
                              param_name="s0")
    loose = chart("L^", "t z")
    with pytest.raises(DomainError):
        HomogeneousSymplectic(loose, loose.sym("t"),
                              differential_form(loose, 2, {("t", "z"): 1}),
                              param_name="s1")
    assert HomogeneousSymplectic(b, b.sym("t"), omega).certified()


# --------------------------------------------------------------------------
# contact criterion


def test_darboux_form_is_contact():
    _, alpha = darboux()
    v = is_contact_form(alpha)
    assert v.contact and v.agree
    assert v.as_check().proved


def test_closed_form_is_not_contact_in_dimension_three():
    base, _ = darboux()
    v = is_contact_form(differential_form(base, 1, {("z",): 1}))
    assert not v.contact and v.agree


def test_volume_form_in_dimension_one():
    # with no derivative factors the criterion is plain nonvanishing, read
    # as an identity: z dz counts, only the zero coefficient is rejected
    line = chart("L", "z")
    v = is_contact_form(differential_form(line, 1, {("z",): 1}))
    assert v.contact and v.agree
    w = is_contact_form(differential_form(line, 1, {("z",): "z"},),
                        t_name="u")
    assert w.contact and w.agree
    none = is_contact_form(differential_form(line, 1, {}), t_name="u")
    assert not none.contact and none.agree


def test_even_dimension_rejected():
    plane = chart("P", "x y")
    with pytest.raises(DomainError):
        is_contact_form(differential_form(plane, 1, {("x",): 1}))


def test_five_dimensional_darboux():
    b5 = chart("J2", "z x1 x2 p1 p2")
    a5 = differential_form(b5, 1,
                           {("z",): 1, ("x1",): "-p1", ("x2",): "-p2"})
    assert str(volume_coefficient(a5)) == "-2"
    v = is_contact_form(a5)
    assert v.contact and v.agree


_POOL3 = ["0", "1", "z", "x", "p", "z + 1", "x*p", "p^2", "2"]
_POOL5 = ["0", "1", "z", "x1", "p2", "x2*p1", "3", "x1 + p1"]


def test_criteria_agree_on_random_forms_dim_three():
    base = chart("R3", "z x p")
    rng = random.Random(41)
    outcomes = set()
    for i in range(14):
        entries = {(a,): base.parse(rng.choice(_POOL3)) for a in range(3)}
        alpha = differential_form(base, 1, entries)
        v = is_contact_form(alpha, t_name=f"t{i}")
        assert v.agree, v.detail
        outcomes.add(v.contact)
    assert outcomes == {True, False}


def test_criteria_agree_on_random_forms_dim_five():
    base = chart("R5", "z x1 x2 p1 p2")
    rng = random.Random(43)
    for i in range(8):
        entries = {(a,): base.parse(rng.choice(_POOL5)) for a in range(5)}
        alpha = differential_form(base, 1, entries)
        v = is_contact_form(alpha, t_name=f"u{i}")
        assert v.agree, v.detail


# --------------------------------------------------------------------------
# recovery


def test_recovery_round_trip():
    base, alpha = darboux()
    back, check = recover_contact_form(symplectise(alpha))
    assert check.proved
    assert back.chart is base
    assert (back - alpha).comps == {}


def test_recovery_flags_inhomogeneous_coefficients():
    b = chart("M^", "t z", avoid_zero="t")
    omega = differential_form(b, 2, {("t", "z"): "t^2"})
    hs = HomogeneousSymplectic(b, b.sym("t"), omega, param_name="s2")
    _, check = recover_contact_form(hs)
    assert not check.passed
    assert "scaling dependence" in check.detail


# --------------------------------------------------------------------------
# momentum chart


def test_tautological_form_differential():
    base, _ = darboux()
    assert (exterior_d(liouville_form(base)) -
            canonical_symplectic(base)).comps == {}


def test_cotangent_embedding_darboux():
    _, alpha = darboux()
    emb, check = cotangent_embedding(symplectise(alpha))
    assert [str(c) for c in emb.comps] == ["z", "x", "p", "t", "-p*t", "0"]
    assert [c.name for c in emb.target.coords] == \
        ["z", "x", "p", "p_z", "p_x", "p_p"]
    assert check.proved


def test_cotangent_embedding_on_the_line():
    line = chart("L", "z")
    emb, check = cotangent_embedding(
        symplectise(differential_form(line, 1, {("z",): 1}), t_name="v"))
    assert [str(c) for c in emb.comps] == ["z", "v"]
    assert check.proved


def test_cotangent_embedding_recovers_when_needed():
    # a directly built bundle form still embeds, via recovery
    b = chart("D^", "t z", avoid_zero="t")
    omega = differential_form(b, 2, {("t", "z"): 1})
    hs = HomogeneousSymplectic(b, b.sym("t"), omega, param_name="s3")
    emb, check = cotangent_embedding(hs)
    assert [str(c) for c in emb.comps] == ["z", "t"]
    assert check.proved
