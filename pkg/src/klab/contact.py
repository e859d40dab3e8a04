"""Contact structures as homogeneous symplectic structures one floor up.

A 1-form on an odd-dimensional chart is contact exactly when the 2-form

    omega = dt ^ alpha + t d(alpha)

on the scaling bundle is nondegenerate.  omega is d(t alpha), so it is closed
by construction and scales with degree one.  This module builds the bundle
form, decides the contact condition along two independent routes (the top
volume coefficient downstairs, the determinant upstairs), recovers alpha back
from a homogeneous symplectic form, and realizes the bundle inside a momentum
chart carrying the canonical symplectic form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .symexpr import (
    CheckResult, DEFAULT_CONFIG, DomainError, FAIL, NUMERIC, PROVED,
    check_all_zero, const, is_zero, sym_expr,
)
from .tensorcalc import (
    Chart, DifferentialForm, ParametricMap, exterior_d, interior,
    invert_symplectic, homogeneity_degree, nondegenerate, standard_action,
    tensor_zero_check,
)
from .kirillov import _fresh_parameter
from .lifts import phase_chart

__all__ = [
    "symplectise", "HomogeneousSymplectic", "volume_coefficient",
    "ContactVerdict", "is_contact_form", "recover_contact_form",
    "liouville_form", "canonical_symplectic", "cotangent_embedding",
]


def _bundle_coordinate(tab, base, want):
    name = want
    n = 0
    while True:
        existing = tab.lookup(name)
        if existing is None:
            return tab.coordinate(name)
        if getattr(existing, "kind", None) == "coordinate" \
                and existing not in base.coords:
            return existing
        n += 1
        name = f"{want}_{n}"


class HomogeneousSymplectic:
    """A closed nondegenerate 2-form of scaling degree one on a bundle chart."""

    def __init__(self, bundle, t_sym, omega, param_name="s", alpha=None,
                 source=None):
        if not isinstance(omega, DifferentialForm) or omega.degree != 2:
            raise DomainError("expected a 2-form")
        if omega.chart is not bundle:
            raise DomainError("form lives on the wrong chart")
        if bundle.index(t_sym) != 0:
            raise DomainError("the scaling coordinate must come first")
        if t_sym not in bundle.avoid_zero:
            raise DomainError("the scaling coordinate must avoid zero")
        self.bundle = bundle
        self.t = t_sym
        self.omega = omega
        self.param = _fresh_parameter(bundle.table, param_name)
        self.action = standard_action(bundle, t_sym, self.param)
        self.alpha = alpha
        self.source = source

    def base_chart(self):
        if self.source is None:
            coords = tuple(c for c in self.bundle.coords if c != self.t)
            self.source = Chart(self.bundle.name + "_base", self.bundle.table,
                                coords, self.bundle.avoid_zero - {self.t})
        return self.source

    def certify(self, cfg=DEFAULT_CONFIG):
        results = [self.action.certify(cfg)]
        results.append(tensor_zero_check("closedness", exterior_d(self.omega),
                                         cfg))
        hom = homogeneity_degree(self.omega, self.action, cfg)
        if hom.check.passed and hom.degree == 1:
            results.append(CheckResult("scaling degree +1", hom.check.status,
                                       hom.check.detail))
        else:
            results.append(CheckResult(
                "scaling degree +1", FAIL,
                f"degree {hom.degree}" if hom.check.passed else hom.check.detail))
        results.append(nondegenerate(self.omega, cfg).as_check())
        return results

    def certified(self, cfg=DEFAULT_CONFIG):
        return all(r.passed for r in self.certify(cfg))

    def poisson_bivector(self, cfg=DEFAULT_CONFIG):
        return invert_symplectic(self.omega, cfg)


def symplectise(alpha, t_name="t", param_name="s"):
    """Closed degree-one bundle form of a 1-form: dt ^ alpha + t d(alpha)."""
    if not isinstance(alpha, DifferentialForm) or alpha.degree != 1:
        raise DomainError("only 1-forms symplectise")
    base = alpha.chart
    tab = base.table
    t = _bundle_coordinate(tab, base, t_name)
    bundle = Chart(base.name + "^", tab, (t,) + base.coords,
                   base.avoid_zero | {t})
    te = sym_expr(t)
    comps = {}
    for (a,), c in alpha.comps.items():
        comps[(0, a + 1)] = c
    for (a, b), c in exterior_d(alpha).comps.items():
        comps[(a + 1, b + 1)] = te * c
    omega = DifferentialForm(bundle, 2, comps)
    return HomogeneousSymplectic(bundle, t, omega, param_name, alpha=alpha,
                                 source=base)


def volume_coefficient(alpha):
    """Top coefficient of alpha ^ (d alpha)^n on a chart of dimension 2n+1."""
    if not isinstance(alpha, DifferentialForm) or alpha.degree != 1:
        raise DomainError("volume coefficient needs a 1-form")
    n2 = alpha.chart.dim
    if n2 % 2 == 0:
        raise DomainError("contact forms live on odd-dimensional charts")
    vol = alpha
    da = exterior_d(alpha)
    for _ in range((n2 - 1) // 2):
        vol = vol.wedge(da)
    return vol.component(tuple(range(n2)))


@dataclass(frozen=True)
class ContactVerdict:
    """Outcome of the two contact criteria, which must agree."""

    contact: bool
    agree: bool
    volume_status: str
    symplectic_status: str
    detail: str

    def as_check(self, name="contact criteria"):
        if not self.agree:
            return CheckResult(name, FAIL, self.detail)
        status = PROVED if self.volume_status == PROVED \
            and self.symplectic_status == PROVED else NUMERIC
        return CheckResult(name, status, self.detail)


def is_contact_form(alpha, cfg=DEFAULT_CONFIG, t_name="t"):
    """Decide the contact condition twice and require the answers to match.

    Route one stays downstairs: the top coefficient of alpha ^ (d alpha)^n
    must not vanish.  Route two goes upstairs: the symplectisation must be
    nondegenerate.
    """
    coeff = volume_coefficient(alpha)
    verdict = is_zero(coeff, cfg, alpha.chart.avoid_zero)
    nd = nondegenerate(symplectise(alpha, t_name).omega, cfg)
    from_volume = not verdict.is_zero
    agree = from_volume == nd.nondegenerate
    vol_status = PROVED if verdict.proved else NUMERIC
    if not agree:
        detail = (f"volume coefficient says {from_volume}, symplectisation "
                  f"says {nd.nondegenerate}")
        return ContactVerdict(False, False, vol_status, nd.status, detail)
    word = "contact" if from_volume else "not contact"
    detail = f"{word}; volume coefficient {coeff}, determinant {nd.determinant}"
    return ContactVerdict(from_volume, True, vol_status, nd.status, detail)


def recover_contact_form(hs, cfg=DEFAULT_CONFIG):
    """Contract the Euler field into the bundle form and strip one power of t.

    The contraction must have no dt component and the remaining coefficients
    divided by t must be free of t; both facts are certified alongside the
    recovered form.
    """
    delta = hs.action.fundamental_field()
    beta = interior(delta, hs.omega)
    te = sym_expr(hs.t)
    one = {hs.t: const(1)}
    labeled = []
    entries = {}
    for (a,), c in beta.comps.items():
        name = hs.bundle.coords[a].name
        if a == 0:
            labeled.append((f"d{name} component", c))
            continue
        stripped = c / te
        labeled.append((f"coefficient of d{name}, scaling dependence",
                        stripped.diff(hs.t)))
        entries[(a - 1,)] = stripped.subs(one)
    check = check_all_zero("contact form recovery", labeled, cfg,
                           hs.bundle.avoid_zero) \
        if labeled else CheckResult("contact form recovery", PROVED,
                                    "zero contraction")
    alpha = DifferentialForm.build(hs.base_chart(), 1, entries)
    return alpha, check


def liouville_form(base):
    """Tautological 1-form on the momentum chart over a base chart."""
    ph = phase_chart(base)
    n = base.dim
    entries = {(a,): sym_expr(ph.coords[n + a]) for a in range(n)}
    return DifferentialForm.build(ph, 1, entries)


def canonical_symplectic(base):
    """Exterior derivative of the tautological form, written directly."""
    ph = phase_chart(base)
    n = base.dim
    return DifferentialForm.build(ph, 2, {(a, n + a): const(-1)
                                          for a in range(n)})


def cotangent_embedding(hs, cfg=DEFAULT_CONFIG):
    """Embed the bundle into the momentum chart by t times the contact form.

    Sends (t, q) to (q, t alpha(q)).  The certificate pulls the canonical
    symplectic form back to the bundle form and the tautological form back
    to t alpha.
    """
    alpha = hs.alpha
    if alpha is None:
        alpha, rec = recover_contact_form(hs, cfg)
        if not rec.passed:
            raise DomainError(f"no contact form to embed along: {rec.detail}")
    base = hs.base_chart()
    ph = phase_chart(base)
    te = sym_expr(hs.t)
    comps = [sym_expr(c) for c in base.coords]
    scaled = {}
    for a in range(base.dim):
        c = alpha.component((a,))
        comps.append(te * c)
        if not (te * c).is_zero_form:
            scaled[(a + 1,)] = te * c
    emb = ParametricMap(hs.bundle, ph, comps)
    labeled = []
    pulled = emb.pullback(canonical_symplectic(base))
    for key, value in (pulled - hs.omega).labeled_components():
        labeled.append((f"symplectic pullback {key}", value))
    t_alpha = DifferentialForm(hs.bundle, 1, scaled)
    for key, value in (emb.pullback(liouville_form(base)) - t_alpha) \
            .labeled_components():
        labeled.append((f"potential pullback {key}", value))
    check = check_all_zero("cotangent embedding", labeled, cfg,
                           hs.bundle.avoid_zero) \
        if labeled else CheckResult("cotangent embedding", PROVED)
    return emb, check
