"""Lifts of scaling actions and bivectors to tangent and phase charts.

The tangent chart doubles a base chart with velocity coordinates (prefix d_),
the phase chart with momentum coordinates (prefix p_).  A scaling action
lifts to both: velocities transform by the Jacobian of the action, momenta by
the inverse-transpose Jacobian weighted by one extra power of the scale, so
that the momenta conjugate to unscaled coordinates pick up degree one.  An
integer shift multiplies the fiber-linear part by a further power.

The complete lift carries a multivector from the base to the tangent chart:
each slot is pushed to its velocity in turn, and one extra term transports
the coefficients along the velocities.  For a bivector this reproduces

    d_T P = P^{ab} d_a ^ ddot_b + (1/2) qdot^c d_c P^{ab} ddot_a ^ ddot_b.

Raising indices with a bivector defines a fiber-linear map from the phase
chart to the tangent chart; for bundle bivectors of scaling degree -1 it
intertwines the two lifted actions, and the complete lift becomes an
anchored-bracket bivector after the velocity of the scaling coordinate is
replaced by its invariant quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

from .symexpr import (
    CheckResult, DEFAULT_CONFIG, DomainError, PROVED, check_all_zero, const,
    sym_expr,
)
from .tensorcalc import (
    Chart, Multivector, ParametricMap, RxAction, schouten,
)
from .kirillov import algebroid_form_check

__all__ = [
    "tangent_chart", "phase_chart", "tangent_action", "phase_action",
    "LiftedActionPair", "lifted_actions", "tangent_lift", "sharp_map",
    "intertwine_check", "linear_rx_identification", "algebroid_reduction",
]

VELOCITY_PREFIX = "d_"
MOMENTUM_PREFIX = "p_"


def _extended_chart(base, prefix, tag):
    cached = getattr(base, tag, None)
    if cached is not None:
        return cached
    tab = base.table
    fiber = [tab.coordinate(prefix + c.name) for c in base.coords]
    out = Chart(base.name + "_" + prefix.rstrip("_"), tab,
                base.coords + tuple(fiber), base.avoid_zero)
    setattr(base, tag, out)
    return out


def tangent_chart(base):
    return _extended_chart(base, VELOCITY_PREFIX, "_tangent_chart")


def phase_chart(base):
    return _extended_chart(base, MOMENTUM_PREFIX, "_phase_chart")


def tangent_action(action, shift=0):
    """Lift to velocities by the Jacobian, with an optional degree shift."""
    base = action.chart
    tan = tangent_chart(base)
    n = base.dim
    s = sym_expr(action.param)
    jac = [[c.diff(x) for x in base.coords] for c in action.comps]
    comps = list(action.comps)
    for a in range(n):
        v = const(0)
        for b in range(n):
            if not jac[a][b].is_zero_form:
                v = v + jac[a][b] * sym_expr(tan.coords[n + b])
        comps.append((s ** shift) * v)
    return RxAction(tan, action.param, comps)


def phase_action(action, shift=0):
    """Lift to momenta by the weighted inverse-transpose Jacobian.

    The base weight is one power of the scale on top of the cotangent
    transformation rule; the shift adds more.  With zero shift the momentum
    of the scaling coordinate stays fixed and the remaining momenta scale
    linearly.
    """
    base = action.chart
    ph = phase_chart(base)
    n = base.dim
    s = sym_expr(action.param)
    inv_comps = action.inverse_comps()
    fwd = dict(zip(base.coords, action.comps))
    jac_inv = [[c.diff(x).subs(fwd) for x in base.coords] for c in inv_comps]
    comps = list(action.comps)
    for a in range(n):
        v = const(0)
        for b in range(n):
            if not jac_inv[b][a].is_zero_form:
                v = v + jac_inv[b][a] * sym_expr(ph.coords[n + b])
        comps.append((s ** (shift + 1)) * v)
    return RxAction(ph, action.param, comps)


@dataclass(frozen=True)
class LiftedActionPair:
    tangent: RxAction
    phase: RxAction
    shift: int

    def certify(self, cfg=DEFAULT_CONFIG):
        return [self.tangent.certify(cfg), self.phase.certify(cfg)]


def lifted_actions(action, shift=0):
    return LiftedActionPair(tangent_action(action, shift),
                            phase_action(action, shift), shift)


def tangent_lift(tensor):
    """Complete lift of a multivector to the tangent chart."""
    if not isinstance(tensor, Multivector):
        raise DomainError("the complete lift applies to multivectors")
    base = tensor.chart
    tan = tangent_chart(base)
    n = base.dim
    out = Multivector.zero(tan, tensor.degree)
    for key, c in tensor.comps.items():
        dotted = tuple(a + n for a in key)
        transport = const(0)
        for b in range(n):
            dc = c.diff(base.coords[b])
            if not dc.is_zero_form:
                transport = transport + sym_expr(tan.coords[n + b]) * dc
        if not transport.is_zero_form:
            out = out + Multivector.build(tan, tensor.degree, {dotted: transport})
        for j in range(len(key)):
            slot = dotted[:j] + (key[j],) + dotted[j + 1:]
            out = out + Multivector.build(tan, tensor.degree, {slot: c})
    return out


def sharp_map(biv, base=None):
    """Fiber-linear raising map from the phase chart to the tangent chart."""
    if biv.degree != 2:
        raise DomainError("the raising map needs a bivector")
    base = biv.chart if base is None else base
    tan = tangent_chart(base)
    ph = phase_chart(base)
    n = base.dim
    full = biv.full_matrix()
    comps = [sym_expr(c) for c in base.coords]
    for a in range(n):
        v = const(0)
        for b in range(n):
            if not full[a][b].is_zero_form:
                v = v + full[a][b] * sym_expr(ph.coords[n + b])
        comps.append(v)
    return ParametricMap(ph, tan, comps)


def intertwine_check(action, biv, shift=0, cfg=DEFAULT_CONFIG):
    """The raising map intertwines the phase lift with the tangent lift."""
    if biv.chart is not action.chart:
        raise DomainError("bivector and action live on different charts")
    pair = lifted_actions(action, shift)
    raise_map = sharp_map(biv, action.chart)
    tan = pair.tangent.chart
    left = ParametricMap(tan, tan, pair.tangent.comps).compose(raise_map)
    right = raise_map.compose(ParametricMap(raise_map.source, raise_map.source,
                                            pair.phase.comps))
    labeled = []
    for coord, lc, rc in zip(tan.coords, left.comps, right.comps):
        labeled.append((f"component {coord.name}", lc - rc))
    az = action.chart.avoid_zero | {action.param}
    return check_all_zero("lift intertwining", labeled, cfg, az)


def linear_rx_identification(chart_, t_sym, scaled_fibers, suffix="_inv"):
    """Replace scaling-weighted fiber coordinates by invariant quotients.

    Returns the map from the adapted chart back to the original one (fiber =
    t times invariant fiber), with its inverse attached.
    """
    t = chart_.sym(t_sym) if isinstance(t_sym, str) else t_sym
    scaled = [chart_.sym(s) if isinstance(s, str) else s for s in scaled_fibers]
    if t in scaled:
        raise DomainError("the scaling coordinate itself cannot be normalized")
    tab = chart_.table
    new_coords = []
    renamed = {}
    for c in chart_.coords:
        if c in scaled:
            nc = tab.coordinate(c.name + suffix)
            renamed[c] = nc
            new_coords.append(nc)
        else:
            new_coords.append(c)
    adapted = Chart(chart_.name + suffix, tab, tuple(new_coords),
                    chart_.avoid_zero)
    te = sym_expr(t)
    fwd = []
    for c in chart_.coords:
        fwd.append(te * sym_expr(renamed[c]) if c in scaled else sym_expr(c))
    back = []
    for c in new_coords:
        orig = next((o for o, n in renamed.items() if n == c), None)
        back.append(sym_expr(orig) / te if orig is not None else sym_expr(c))
    ident = ParametricMap(adapted, chart_, fwd)
    ident.inverse = ParametricMap(chart_, adapted, back)
    ident.inverse.inverse = ident
    return ident


def algebroid_reduction(ks, cfg=DEFAULT_CONFIG):
    """Complete lift of a bundle bivector in invariant velocity coordinates.

    The velocity of the scaling coordinate is traded for its invariant
    quotient; the result is checked against the anchored-bracket shape and
    returned with the check and the extracted blocks.
    """
    lifted = tangent_lift(ks.bivector)
    tan = lifted.chart
    t_vel = tan.sym(VELOCITY_PREFIX + ks.t.name)
    ident = linear_rx_identification(tan, ks.t, [t_vel])
    adapted = ident.inverse.pushforward(lifted)
    base_names = [c.name for c in ks.base_coords]
    fiber = [c for c in ident.source.coords
             if c.name.startswith(VELOCITY_PREFIX)
             or c.name == t_vel.name + "_inv"]
    check, blocks = algebroid_form_check(adapted, ks.t, base_names, fiber, cfg)
    return adapted, check, blocks
