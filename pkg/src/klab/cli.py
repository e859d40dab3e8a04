"""Batch front-end: run certified checks described by a scene document.

A scene is a single JSON file with schema version 1:

    {
      "schema": 1,
      "description": "optional free text",
      "symbols": {"parameters": ["s"],
                  "functions": [{"name": "f", "arity": 2}]},
      "charts": {"P": {"coords": "t x", "avoid_zero": "t"}},
      "tensors": {"lam": {"chart": "P", "kind": "multivector",
                          "degree": 2, "components": {"t x": "1"}}},
      "actions": {"act": {"chart": "P", "param": "s",
                          "components": ["s*t", "x"]}},
      "jacobi_pairs": {"pr": {"chart": "M", "bivector": {"x y": "y"},
                              "vector": {"x": "1"}}},
      "groupoids": {"G": {"builtin": "pair", "chart": "M"}},
      "cocycles": {"b": {"groupoid": "G", "value": "first_x / second_x"}},
      "directives": [{"directive": "check jacobi", "pair": "pr"}]
    }

Every expression string uses the same grammar as the expression kernel:
rational arithmetic over declared names, integer powers, and the elementary
functions sin, cos, exp, log.  Tensor component keys are space-separated
coordinate names.  Actions either list full components or name a single
scaled "fiber" coordinate.  Groupoid stanzas are either a builtin
("pair" over a chart; "group" / "cotangent_group" with a named law
additive | multiplicative | affine; "cotangent_pair" with a base dimension)
or an explicit table of charts and structure maps.  A directive with an
"as" field registers its product for later directives.

Chart declarations must not use the reserved coordinate prefixes "d_" and
"p_", which belong to tangent and momentum doublings.

Exit codes: 0 when every directive verdict passes, 1 when any check fails,
2 on parse or validation errors.  The JSON report is deterministic for a
fixed scene and seed; timings appear only in the text format.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .symexpr import (
    CheckResult, DEFAULT_CONFIG, DomainError, ExprSyntaxError, FAIL, NUMERIC,
    PROVED, Witness, aggregate_status, sym_expr,
)
from .tensorcalc import (
    RxAction, chart as make_chart, differential_form, homogeneity_degree,
    multivector, ParametricMap, schouten, standard_action, tensor_zero_check,
)
from .kirillov import is_jacobi, jacobi_pair, poissonise
from .contact import (
    canonical_symplectic, cotangent_embedding, is_contact_form,
    recover_contact_form, symplectise,
)
from .lifts import (
    MOMENTUM_PREFIX, VELOCITY_PREFIX, algebroid_reduction, intertwine_check,
    tangent_lift,
)
from .groupoidlab import (
    CoordGroupoid, Membership, MultiplicativeCocycle, PairData, TripleData,
    cotangent_group_groupoid, cotangent_pair_groupoid, group_groupoid,
    multiplicative_form_check, pair_groupoid, splitting_map_check,
    trivial_split, verify_groupoid,
)

__all__ = ["SceneError", "load_scene", "run_scene", "render_text",
           "render_json", "explain", "main"]


class SceneError(Exception):
    """A scene failed to parse or validate; maps to exit code 2."""


# --------------------------------------------------------------------------
# scene loading

GROUP_LAWS = {
    "additive": {
        "dims": None,
        "law": lambda u, v: [a + b for a, b in zip(u, v)],
        "unit": lambda n: [0] * n,
        "inverse": lambda u: [-a for a in u],
    },
    "multiplicative": {
        "dims": (1,),
        "law": lambda u, v: [u[0] * v[0]],
        "unit": lambda n: [1],
        "inverse": lambda u: [u[0] ** -1],
    },
    "affine": {
        "dims": (2,),
        "law": lambda u, v: [u[0] * v[0], u[0] * v[1] + u[1]],
        "unit": lambda n: [1, 0],
        "inverse": lambda u: [u[0] ** -1, -u[1] / u[0]],
    },
}

RESERVED_PREFIXES = (VELOCITY_PREFIX, MOMENTUM_PREFIX)


@dataclass
class Scene:
    path: str
    table: object
    doc: dict
    charts: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)
    actions: dict = field(default_factory=dict)
    pairs: dict = field(default_factory=dict)
    structures: dict = field(default_factory=dict)   # poissonised bundles
    symplectics: dict = field(default_factory=dict)  # homogeneous 2-forms
    groupoids: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict)       # cotangent pair bundles
    memberships: dict = field(default_factory=dict)
    cocycles: dict = field(default_factory=dict)
    directives: list = field(default_factory=list)


def _expect_object(value, what):
    if not isinstance(value, dict):
        raise SceneError(f"{what} must be a JSON object")
    return value


def _fetch(registry, name, what):
    if not isinstance(name, str):
        raise SceneError(f"{what} reference must be a string name")
    try:
        return registry[name]
    except KeyError:
        raise SceneError(f"unknown {what} '{name}'") from None


def _parse_expr(chart_, text, where):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise SceneError(f"{where}: expression must be a string")
    try:
        return chart_.parse(text)
    except (ExprSyntaxError, DomainError) as exc:
        raise SceneError(f"{where}: {exc}") from None


def _split_key(key):
    return tuple(key.replace(",", " ").split())


def _load_chart(scene, name, spec):
    spec = _expect_object(spec, f"chart '{name}'")
    coords = spec.get("coords")
    if not isinstance(coords, str) or not coords.split():
        raise SceneError(f"chart '{name}' needs a non-empty 'coords' string")
    for coord in coords.replace(",", " ").split():
        for prefix in RESERVED_PREFIXES:
            if coord.startswith(prefix):
                raise SceneError(
                    f"chart '{name}': coordinate '{coord}' uses the reserved"
                    f" prefix '{prefix}'")
    try:
        return make_chart(name, coords, scene.table,
                          spec.get("avoid_zero", ()))
    except DomainError as exc:
        raise SceneError(f"chart '{name}': {exc}") from None


def _load_tensor(scene, name, spec):
    spec = _expect_object(spec, f"tensor '{name}'")
    chart_ = _fetch(scene.charts, spec.get("chart"), "chart")
    kind = spec.get("kind", "multivector")
    degree = spec.get("degree")
    if not isinstance(degree, int) or degree < 0:
        raise SceneError(f"tensor '{name}' needs an integer 'degree'")
    comps = _expect_object(spec.get("components", {}),
                           f"tensor '{name}' components")
    entries = {}
    for key, value in comps.items():
        entries[_split_key(key)] = _parse_expr(chart_, value,
                                               f"tensor '{name}' [{key}]")
    builder = {"multivector": multivector,
               "form": differential_form}.get(kind)
    if builder is None:
        raise SceneError(f"tensor '{name}': unknown kind '{kind}'")
    try:
        return builder(chart_, degree, entries)
    except DomainError as exc:
        raise SceneError(f"tensor '{name}': {exc}") from None


def _load_action(scene, name, spec):
    spec = _expect_object(spec, f"action '{name}'")
    chart_ = _fetch(scene.charts, spec.get("chart"), "chart")
    param_name = spec.get("param", "s")
    try:
        param = scene.table.parameter(param_name)
    except DomainError as exc:
        raise SceneError(f"action '{name}': {exc}") from None
    if "fiber" in spec:
        fiber = chart_.table.lookup(spec["fiber"])
        if fiber is None or fiber not in chart_.coords:
            raise SceneError(f"action '{name}': fiber '{spec['fiber']}'"
                             f" is not a coordinate of '{chart_.name}'")
        return standard_action(chart_, fiber, param)
    comps = spec.get("components")
    if not isinstance(comps, list):
        raise SceneError(f"action '{name}' needs 'components' or 'fiber'")
    parsed = [_parse_expr(chart_, c, f"action '{name}'") for c in comps]
    try:
        return RxAction(chart_, param, parsed)
    except DomainError as exc:
        raise SceneError(f"action '{name}': {exc}") from None


def _load_pair(scene, name, spec):
    spec = _expect_object(spec, f"jacobi pair '{name}'")
    chart_ = _fetch(scene.charts, spec.get("chart"), "chart")

    def entries(block, degree):
        raw = _expect_object(spec.get(block, {}), f"pair '{name}' {block}")
        out = {}
        for key, value in raw.items():
            out[_split_key(key)] = _parse_expr(chart_, value,
                                               f"pair '{name}' [{key}]")
        return out

    try:
        return jacobi_pair(chart_, entries("bivector", 2),
                           entries("vector", 1))
    except DomainError as exc:
        raise SceneError(f"jacobi pair '{name}': {exc}") from None


def _group_law(spec, chart_, where):
    law_name = spec.get("law")
    recipe = GROUP_LAWS.get(law_name)
    if recipe is None:
        known = ", ".join(sorted(GROUP_LAWS))
        raise SceneError(f"{where}: unknown group law '{law_name}'"
                         f" (known: {known})")
    if recipe["dims"] is not None and chart_.dim not in recipe["dims"]:
        raise SceneError(f"{where}: law '{law_name}' needs dimension"
                         f" {recipe['dims']}, chart has {chart_.dim}")
    return recipe


_MAP_ENDPOINTS = {
    "src": ("arrows", "units"), "tgt": ("arrows", "units"),
    "unit": ("units", "arrows"), "inv": ("arrows", "arrows"),
    "pr1": ("pairs", "arrows"), "pr2": ("pairs", "arrows"),
    "mul": ("pairs", "arrows"),
    "left_unit": ("arrows", "pairs"), "right_unit": ("arrows", "pairs"),
    "left_inverse": ("arrows", "pairs"), "right_inverse": ("arrows", "pairs"),
    "p12": ("triples", "pairs"), "p23": ("triples", "pairs"),
    "left": ("triples", "pairs"), "right": ("triples", "pairs"),
}


def _explicit_groupoid(scene, name, spec):
    charts = {}
    for role in ("arrows", "units", "pairs", "triples"):
        charts[role] = _fetch(scene.charts, spec.get(role), "chart")
    maps_spec = _expect_object(spec.get("maps"), f"groupoid '{name}' maps")
    missing = sorted(set(_MAP_ENDPOINTS) - set(maps_spec))
    if missing:
        raise SceneError(f"groupoid '{name}': missing maps {missing}")
    built = {}
    for map_name, comps in maps_spec.items():
        endpoints = _MAP_ENDPOINTS.get(map_name)
        if endpoints is None:
            raise SceneError(f"groupoid '{name}': unknown map '{map_name}'")
        source, target = charts[endpoints[0]], charts[endpoints[1]]
        if not isinstance(comps, list):
            raise SceneError(f"groupoid '{name}': map '{map_name}' must be"
                             f" a list of component expressions")
        parsed = [_parse_expr(source, c, f"groupoid '{name}'.{map_name}")
                  for c in comps]
        try:
            built[map_name] = ParametricMap(source, target, parsed)
        except DomainError as exc:
            raise SceneError(
                f"groupoid '{name}'.{map_name}: {exc}") from None
    try:
        return CoordGroupoid(
            name, charts["arrows"], charts["units"],
            src=built["src"], tgt=built["tgt"],
            unit=built["unit"], inv=built["inv"],
            pairs=PairData(charts["pairs"], built["pr1"], built["pr2"],
                           built["mul"], built["left_unit"],
                           built["right_unit"], built["left_inverse"],
                           built["right_inverse"]),
            triples=TripleData(charts["triples"], built["p12"],
                               built["p23"], built["left"], built["right"]))
    except DomainError as exc:
        raise SceneError(f"groupoid '{name}': {exc}") from None


def _build_groupoid(scene, name, spec):
    """Construct and register a groupoid; returns the registered object."""
    spec = _expect_object(spec, f"groupoid '{name}'")
    builtin = spec.get("builtin")
    try:
        if builtin == "pair":
            chart_ = _fetch(scene.charts, spec.get("chart"), "chart")
            gpd = pair_groupoid(chart_, name)
        elif builtin == "group":
            chart_ = _fetch(scene.charts, spec.get("chart"), "chart")
            recipe = _group_law(spec, chart_, f"groupoid '{name}'")
            gpd = group_groupoid(chart_, recipe["law"],
                                 recipe["unit"](chart_.dim),
                                 recipe["inverse"], name)
        elif builtin == "cotangent_group":
            chart_ = _fetch(scene.charts, spec.get("chart"), "chart")
            recipe = _group_law(spec, chart_, f"groupoid '{name}'")
            gpd = cotangent_group_groupoid(chart_, recipe["law"],
                                           recipe["unit"](chart_.dim),
                                           recipe["inverse"], name)
            scene.tensors[name + "_form"] = canonical_symplectic(chart_)
            n = chart_.dim
            momenta = [sym_expr(c) for c in gpd.arrows.coords[n:]]
            duals = [sym_expr(c) for c in gpd.units.coords]
            quad = lambda vs: sum((v * v for v in vs[1:]), vs[0] * vs[0])
            scene.memberships[name] = Membership(
                gpd, arrow_funcs=(quad(momenta),), unit_funcs=(quad(duals),))
        elif builtin == "cotangent_pair":
            n = spec.get("n", 1)
            if not isinstance(n, int) or n < 1:
                raise SceneError(f"groupoid '{name}': 'n' must be a"
                                 f" positive integer")
            model = cotangent_pair_groupoid(n, spec.get("param", "s"))
            gpd = model.gpd
            scene.models[name] = model
            scene.tensors[name + "_form"] = model.omega
            scene.memberships[name] = model.membership
        elif builtin is None:
            gpd = _explicit_groupoid(scene, name, spec)
        else:
            raise SceneError(f"groupoid '{name}': unknown builtin"
                             f" '{builtin}'")
    except DomainError as exc:
        raise SceneError(f"groupoid '{name}': {exc}") from None
    scene.groupoids[name] = gpd
    return gpd


def load_scene(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SceneError(f"cannot read scene: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SceneError(
            f"scene is not valid JSON: line {exc.lineno}, column"
            f" {exc.colno}: {exc.msg}") from None
    doc = _expect_object(doc, "scene document")
    if doc.get("schema") != 1:
        raise SceneError("scene must declare \"schema\": 1")
    known = {"schema", "description", "symbols", "charts", "tensors",
             "actions", "jacobi_pairs", "groupoids", "cocycles",
             "directives"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise SceneError(f"unknown scene sections: {unknown}")

    from .symexpr import SymbolTable
    scene = Scene(path=path, table=SymbolTable(), doc=doc)

    symbols = _expect_object(doc.get("symbols", {}), "symbols")
    for pname in symbols.get("parameters", []):
        try:
            scene.table.parameter(pname)
        except DomainError as exc:
            raise SceneError(f"symbols: {exc}") from None
    for fn in symbols.get("functions", []):
        fn = _expect_object(fn, "function declaration")
        try:
            scene.table.function(fn.get("name", ""), fn.get("arity", 0))
        except DomainError as exc:
            raise SceneError(f"symbols: {exc}") from None

    for name, spec in _expect_object(doc.get("charts", {}),
                                     "charts").items():
        scene.charts[name] = _load_chart(scene, name, spec)
    for name, spec in _expect_object(doc.get("tensors", {}),
                                     "tensors").items():
        scene.tensors[name] = _load_tensor(scene, name, spec)
    for name, spec in _expect_object(doc.get("actions", {}),
                                     "actions").items():
        scene.actions[name] = _load_action(scene, name, spec)
    for name, spec in _expect_object(doc.get("jacobi_pairs", {}),
                                     "jacobi_pairs").items():
        scene.pairs[name] = _load_pair(scene, name, spec)
    for name, spec in _expect_object(doc.get("groupoids", {}),
                                     "groupoids").items():
        _build_groupoid(scene, name, spec)
    for name, spec in _expect_object(doc.get("cocycles", {}),
                                     "cocycles").items():
        spec = _expect_object(spec, f"cocycle '{name}'")
        gpd = _fetch(scene.groupoids, spec.get("groupoid"), "groupoid")
        value = _parse_expr(gpd.arrows, spec.get("value", ""),
                            f"cocycle '{name}'")
        scene.cocycles[name] = MultiplicativeCocycle(gpd, value)

    directives = doc.get("directives", [])
    if not isinstance(directives, list):
        raise SceneError("'directives' must be a list")
    for i, d in enumerate(directives, start=1):
        d = _expect_object(d, f"directive {i}")
        kind = d.get("directive")
        if kind not in DIRECTIVES:
            raise SceneError(f"directive {i}: unknown directive '{kind}'")
        scene.directives.append(d)
    return scene


# --------------------------------------------------------------------------
# directive handlers: each returns (checks, registered_name_or_None)


def _register(scene, registry, directive, value, required=False):
    name = directive.get("as")
    if name is None:
        if required:
            raise SceneError(
                f"directive '{directive['directive']}' needs 'as'")
        return None
    if not isinstance(name, str) or not name:
        raise SceneError("'as' must be a non-empty name")
    registry[name] = value
    return name


def _do_check_jacobi(scene, d, cfg):
    if "pair" in d:
        pair = _fetch(scene.pairs, d["pair"], "jacobi pair")
        check, _ = is_jacobi(pair, cfg)
        return [check], None
    biv = _fetch(scene.tensors, d.get("bivector"), "tensor")
    residual = schouten(biv, biv)
    check = tensor_zero_check("jacobi property", residual, cfg,
                              biv.chart.avoid_zero)
    return [check], None


def _do_poissonise(scene, d, cfg):
    pair = _fetch(scene.pairs, d.get("pair"), "jacobi pair")
    try:
        ks = poissonise(pair, d.get("t", "t"), d.get("param", "s"))
    except DomainError as exc:
        raise SceneError(f"poissonise: {exc}") from None
    name = _register(scene, scene.structures, d, ks, required=True)
    return list(ks.certify(cfg)), name


def _do_symplectise(scene, d, cfg):
    form = _fetch(scene.tensors, d.get("form"), "tensor")
    try:
        hs = symplectise(form, d.get("t", "t"), d.get("param", "s"))
    except DomainError as exc:
        raise SceneError(f"symplectise: {exc}") from None
    name = _register(scene, scene.symplectics, d, hs, required=True)
    return list(hs.certify(cfg)), name


def _do_check_contact(scene, d, cfg):
    form = _fetch(scene.tensors, d.get("form"), "tensor")
    try:
        verdict = is_contact_form(form, cfg, d.get("t", "t"))
    except DomainError as exc:
        raise SceneError(f"check contact: {exc}") from None
    return [verdict.as_check()], None


def _do_recover(scene, d, cfg):
    hs = _fetch(scene.symplectics, d.get("structure"),
                "homogeneous symplectic structure")
    alpha, check = recover_contact_form(hs, cfg)
    checks = [check]
    if "expect" in d:
        want = _fetch(scene.tensors, d["expect"], "tensor")
        if alpha is None:
            checks.append(CheckResult("recover matches declared form", FAIL,
                                      "nothing was recovered"))
        else:
            try:
                diff = alpha - want
            except DomainError as exc:
                raise SceneError(f"recover: expected form does not live on"
                                 f" the base chart ({exc})") from None
            checks.append(tensor_zero_check("recover matches declared form",
                                            diff, cfg,
                                            alpha.chart.avoid_zero))
    name = None
    if alpha is not None:
        name = _register(scene, scene.tensors, d, alpha)
    return checks, name


def _do_embed(scene, d, cfg):
    hs = _fetch(scene.symplectics, d.get("structure"),
                "homogeneous symplectic structure")
    try:
        _, check = cotangent_embedding(hs, cfg)
    except DomainError as exc:
        raise SceneError(f"embed: {exc}") from None
    return [check], None


def _do_check_homogeneity(scene, d, cfg):
    tensor = _fetch(scene.tensors, d.get("tensor"), "tensor")
    action = _fetch(scene.actions, d.get("action"), "action")
    want = d.get("degree")
    if not isinstance(want, int):
        raise SceneError("check homogeneity needs an integer 'degree'")
    result = homogeneity_degree(tensor, action, cfg)
    if result.check.passed and (result.every_degree
                                or result.degree == want):
        return [CheckResult(f"homogeneity degree {want}",
                            result.check.status, result.check.detail,
                            result.check.witnesses)], None
    detail = result.check.detail if not result.check.passed \
        else f"tensor is homogeneous of degree {result.degree}, not {want}"
    return [CheckResult(f"homogeneity degree {want}", FAIL, detail)], None


def _do_check_intertwine(scene, d, cfg):
    biv = _fetch(scene.tensors, d.get("bivector"), "tensor")
    action = _fetch(scene.actions, d.get("action"), "action")
    shift = d.get("shift", 0)
    if not isinstance(shift, int):
        raise SceneError("'shift' must be an integer")
    try:
        return [intertwine_check(action, biv, shift, cfg)], None
    except DomainError as exc:
        raise SceneError(f"check intertwine: {exc}") from None


def _do_lift_tangent(scene, d, cfg):
    tensor = _fetch(scene.tensors, d.get("tensor"), "tensor")
    try:
        lifted = tangent_lift(tensor)
    except DomainError as exc:
        raise SceneError(f"lift tangent: {exc}") from None
    name = _register(scene, scene.tensors, d, lifted, required=True)
    return [CheckResult("tangent lift", PROVED,
                        f"lifted to {lifted.chart.name}")], name


def _do_reduce(scene, d, cfg):
    ks = _fetch(scene.structures, d.get("structure"), "bundle structure")
    try:
        adapted, check, _ = algebroid_reduction(ks, cfg)
    except DomainError as exc:
        raise SceneError(f"reduce: {exc}") from None
    name = _register(scene, scene.tensors, d, adapted)
    return [check], name


def _do_check_cocycle(scene, d, cfg):
    cocycle = _fetch(scene.cocycles, d.get("cocycle"), "cocycle")
    return [cocycle.check(cfg)], None


def _do_groupoid_build(scene, d, cfg):
    name = d.get("as")
    if not isinstance(name, str) or not name:
        raise SceneError("groupoid build needs 'as'")
    spec = {k: v for k, v in d.items() if k not in ("directive", "as")}
    gpd = _build_groupoid(scene, name, spec)
    return [CheckResult("groupoid build", PROVED,
                        f"arrows on {gpd.arrows.name}")], name


def _do_groupoid_verify(scene, d, cfg):
    gpd = _fetch(scene.groupoids, d.get("groupoid"), "groupoid")
    return list(verify_groupoid(gpd, cfg)), None


def _do_groupoid_certify(scene, d, cfg):
    name = d.get("groupoid")
    model = scene.models.get(name)
    if model is not None:
        return list(model.certify(cfg)), None
    gpd = _fetch(scene.groupoids, name, "groupoid")
    return list(verify_groupoid(gpd, cfg)), None


def _do_groupoid_split(scene, d, cfg):
    gpd = _fetch(scene.groupoids, d.get("groupoid"), "groupoid")
    if "cocycle" in d:
        value = _fetch(scene.cocycles, d["cocycle"], "cocycle").value
    else:
        value = _parse_expr(gpd.arrows, d.get("value", ""),
                            "groupoid split value")
    try:
        split = trivial_split(gpd, value, d.get("fiber", "r"))
    except DomainError as exc:
        raise SceneError(f"groupoid split: {exc}") from None
    name = _register(scene, scene.groupoids, d, split, required=True)
    return [CheckResult("groupoid split", PROVED,
                        f"fiber {split.arrows.coords[-1].name}")], name


def _do_groupoid_cotangent(scene, d, cfg):
    name = d.get("as")
    if not isinstance(name, str) or not name:
        raise SceneError("groupoid cotangent needs 'as'")
    spec = {"builtin": "cotangent_group", "chart": d.get("chart"),
            "law": d.get("law")}
    gpd = _build_groupoid(scene, name, spec)
    return [CheckResult("groupoid cotangent", PROVED,
                        f"arrows on {gpd.arrows.name}")], name


def _do_groupoid_check_multiplicative(scene, d, cfg):
    gpd = _fetch(scene.groupoids, d.get("groupoid"), "groupoid")
    form = _fetch(scene.tensors, d.get("form"), "tensor")
    try:
        return [multiplicative_form_check(gpd, form, cfg)], None
    except DomainError as exc:
        raise SceneError(f"groupoid check-multiplicative: {exc}") from None


def _do_groupoid_check_membership(scene, d, cfg):
    name = d.get("groupoid")
    gpd = _fetch(scene.groupoids, name, "groupoid")
    samples = d.get("samples", 32)
    if not isinstance(samples, int) or samples < 1:
        raise SceneError("'samples' must be a positive integer")
    if "arrow_funcs" in d or "unit_funcs" in d:
        arrow_funcs = tuple(
            _parse_expr(gpd.arrows, f, "membership arrow function")
            for f in d.get("arrow_funcs", []))
        unit_funcs = tuple(
            _parse_expr(gpd.units, f, "membership unit function")
            for f in d.get("unit_funcs", []))
        member = Membership(gpd, arrow_funcs, unit_funcs)
    else:
        member = scene.memberships.get(name)
        if member is None:
            raise SceneError(f"groupoid '{name}' has no registered"
                             f" membership; give arrow_funcs/unit_funcs")
    return [member.closure_check(cfg, samples)], None


def _do_groupoid_check_morphism(scene, d, cfg):
    dom = _fetch(scene.groupoids, d.get("from"), "groupoid")
    cod = _fetch(scene.groupoids, d.get("to"), "groupoid")

    def build(key, source, target):
        comps = d.get(key)
        if not isinstance(comps, list):
            raise SceneError(f"groupoid check-morphism needs '{key}' as a"
                             f" list of components")
        parsed = [_parse_expr(source, c, f"morphism {key}") for c in comps]
        try:
            return ParametricMap(source, target, parsed)
        except DomainError as exc:
            raise SceneError(f"morphism {key}: {exc}") from None

    arrow_map = build("arrows", dom.arrows, cod.arrows)
    unit_map = build("units", dom.units, cod.units)
    pair_map = build("pairs", dom.pairs.chart, cod.pairs.chart)
    try:
        return [splitting_map_check(dom, cod, arrow_map, unit_map,
                                    pair_map, cfg)], None
    except DomainError as exc:
        raise SceneError(f"groupoid check-morphism: {exc}") from None


DIRECTIVES = {
    "check jacobi": _do_check_jacobi,
    "poissonise": _do_poissonise,
    "symplectise": _do_symplectise,
    "check contact": _do_check_contact,
    "recover": _do_recover,
    "embed": _do_embed,
    "check homogeneity": _do_check_homogeneity,
    "check intertwine": _do_check_intertwine,
    "lift tangent": _do_lift_tangent,
    "reduce": _do_reduce,
    "check cocycle": _do_check_cocycle,
    "groupoid build": _do_groupoid_build,
    "groupoid verify": _do_groupoid_verify,
    "groupoid certify": _do_groupoid_certify,
    "groupoid split": _do_groupoid_split,
    "groupoid cotangent": _do_groupoid_cotangent,
    "groupoid check-multiplicative": _do_groupoid_check_multiplicative,
    "groupoid check-cocycle": _do_check_cocycle,
    "groupoid check-membership": _do_groupoid_check_membership,
    "groupoid check-morphism": _do_groupoid_check_morphism,
}

# directives that write into a registry must run alone; the rest of a
# document-order run may be evaluated concurrently under --parallel
_REGISTERING = {"poissonise", "symplectise", "recover", "lift tangent",
                "reduce", "groupoid build", "groupoid split",
                "groupoid cotangent"}


EXPLANATIONS = {
    "check jacobi": (
        "A bracket pair (B, V) is Jacobi exactly when the homogeneous"
        " bundle bivector built from it has vanishing self-bracket; the"
        " check computes that Schouten bracket and certifies every"
        " component zero.  With a bare bivector the self-bracket [L, L]"
        " is checked directly; a nonzero component is the reported"
        " obstruction."),
    "poissonise": (
        "Builds the scaling-homogeneous bundle bivector of a bracket pair:"
        " base components divided by the fiber coordinate plus the mixed"
        " fiber row from the vector field.  Certifies the scaling action"
        " laws and that the result has scaling degree -1."),
    "symplectise": (
        "Builds the homogeneous 2-form dt wedge a + t da from a 1-form a"
        " on the base.  Certifies closedness, scaling degree +1, and"
        " nondegeneracy of the component matrix."),
    "check contact": (
        "Decides the contact property two independent ways: the top"
        " volume coefficient of a wedge (da)^n, and nondegeneracy of the"
        " homogeneous 2-form upstairs.  Both verdicts must agree;"
        " vanishing is read as an identity, so only coefficients that are"
        " identically zero reject."),
    "recover": (
        "Contracts the fiber scaling generator into the homogeneous"
        " 2-form, certifies the dt component vanishes and the rest is"
        " independent of the fiber coordinate after one division, and"
        " returns the base 1-form evaluated at fiber value one.  With"
        " 'expect' the recovered form is compared to a declared one"
        " exactly."),
    "embed": (
        "Maps the bundle into the momentum chart of the base by"
        " (t, q) -> (q, t a(q)) and certifies two pullbacks: the"
        " canonical symplectic form returns the homogeneous 2-form, and"
        " the tautological 1-form returns t a."),
    "check homogeneity": (
        "Pulls the tensor back along the scaling action and matches it"
        " against s^k times itself, cross-checked infinitesimally by the"
        " Lie derivative along the action generator equalling k times the"
        " tensor.  Passes only at the stated degree."),
    "check intertwine": (
        "States that the raising map of a bivector intertwines the two"
        " canonical lifts of a scaling action: composing the tangent lift"
        " after the raising map equals composing the raising map after"
        " the momentum lift, for every scale value.  Velocities transform"
        " by the Jacobian times s^shift, momenta by the inverse-transpose"
        " Jacobian times s^(shift+1); the identity holds exactly when the"
        " bivector has scaling degree -1."),
    "lift tangent": (
        "Doubles the chart with velocity coordinates and lifts the tensor"
        " by the complete (tangent) lift, which is a bracket morphism and"
        " preserves scaling degree."),
    "reduce": (
        "Rewrites the tangent lift of a homogeneous bundle bivector in"
        " scaling-invariant velocity coordinates and certifies the result"
        " has linear-algebroid form: unit block constant, anchor block"
        " fiber-free, structure block linear in the invariant fibers."),
    "check cocycle": (
        "Checks multiplicativity of a scalar on arrows: b(pr1) b(pr2)"
        " equals b after the product on composable pairs, b is 1 on"
        " units, and b times b after inversion is 1."),
    "groupoid build": (
        "Constructs a groupoid presentation: arrow, unit, composable-pair"
        " and composable-triple charts with all structure maps.  Builtins:"
        " the pair groupoid of a chart, a group as a groupoid over a"
        " point, the cotangent groupoid of a pair groupoid, and the"
        " cotangent groupoid of a group with a named rational law."),
    "groupoid verify": (
        "Runs every groupoid axiom as a zero check on the presented"
        " charts: unit and product endpoints, composability, unit and"
        " inverse laws through their sections, triple coherence, and"
        " associativity."),
    "groupoid certify": (
        "Runs the full certificate stack of a registered cotangent-pair"
        " model: the groupoid axioms, multiplicativity of its 2-form, the"
        " fiber scaling as a groupoid morphism, scaling degree +1 of the"
        " form, and the exact tangent-pairing split.  On a plain groupoid"
        " this is the same as groupoid verify."),
    "groupoid split": (
        "Forms the product with a scaling fiber, twisting the target by a"
        " candidate multiplicative function b: source keeps the fiber r,"
        " target carries r b.  The result satisfies the groupoid axioms"
        " exactly when b is multiplicative, so verify after splitting."),
    "groupoid cotangent": (
        "Builds the cotangent groupoid of a group with a named rational"
        " law over the dual of its Lie algebra: source and target"
        " transport covectors to the identity along the two translations,"
        " the product covector is pushed through the inverse-transpose"
        " first-slot derivative of the law, and the canonical symplectic"
        " form is registered alongside."),
    "groupoid check-multiplicative": (
        "Checks a 2-form on arrows is multiplicative: its pullback along"
        " the product equals the sum of its pullbacks along the two"
        " projections, as an exact identity on the composable-pair"
        " chart."),
    "groupoid check-cocycle": (
        "Checks multiplicativity of a scalar on arrows: b(pr1) b(pr2)"
        " equals b after the product on composable pairs, b is 1 on"
        " units, and b times b after inversion is 1."),
    "groupoid check-membership": (
        "Seeded sampling that an open subgroupoid cut out by nonvanishing"
        " scalars is closed: products, inverses, endpoints and unit"
        " arrows of member samples stay members at every drawn point."),
    "groupoid check-morphism": (
        "Checks a triple of maps (arrows, units, composable pairs) is a"
        " groupoid morphism: it intertwines source, target, unit,"
        " inversion, both projections, and the product."),
}


# --------------------------------------------------------------------------
# execution and reports


def _verdict(checks):
    statuses = [c.status for c in checks]
    agg = aggregate_status(statuses) if statuses else PROVED
    return {PROVED: "proved", NUMERIC: "numeric-pass", FAIL: "fail"}[agg]


def _witness_strings(checks):
    out = []
    for c in checks:
        for w in c.witnesses:
            out.append(w.render() if isinstance(w, Witness) else str(w))
    return out


def run_scene(scene, cfg, parallel=False):
    """Execute all directives; returns report entries in document order."""

    def execute(index, d):
        handler = DIRECTIVES[d["directive"]]
        started = time.perf_counter()
        checks, registered = handler(scene, d, cfg)
        elapsed = time.perf_counter() - started
        entry = {
            "index": index,
            "directive": d["directive"],
            "verdict": _verdict(checks),
            "checks": [{"name": c.name, "status": c.status,
                        "detail": c.detail} for c in checks],
            "witnesses": _witness_strings(checks),
        }
        if registered is not None:
            entry["registered"] = registered
        return entry, elapsed

    jobs = list(enumerate(scene.directives, start=1))
    entries, timings = [], []
    if not parallel:
        for index, d in jobs:
            entry, elapsed = execute(index, d)
            entries.append(entry)
            timings.append(elapsed)
        return entries, timings

    # registering directives are barriers; stretches between them are
    # independent and may run concurrently, report order stays fixed
    batch = []

    def flush():
        if not batch:
            return
        with ThreadPoolExecutor(max_workers=min(8, len(batch))) as pool:
            for entry, elapsed in pool.map(lambda job: execute(*job), batch):
                entries.append(entry)
                timings.append(elapsed)
        batch.clear()

    for index, d in jobs:
        if d["directive"] in _REGISTERING:
            flush()
            entry, elapsed = execute(index, d)
            entries.append(entry)
            timings.append(elapsed)
        else:
            batch.append((index, d))
    flush()
    return entries, timings


def overall_verdict(entries):
    if any(e["verdict"] == "fail" for e in entries):
        return "fail"
    if any(e["verdict"] == "numeric-pass" for e in entries):
        return "numeric-pass"
    return "proved"


def render_json(scene, entries, seed):
    report = {
        "schema": 1,
        "scene": os.path.basename(scene.path),
        "seed": seed,
        "verdict": overall_verdict(entries),
        "entries": entries,
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render_text(scene, entries, timings, seed):
    lines = [f"scene {os.path.basename(scene.path)}  (seed {seed})"]
    width = max((len(e["directive"]) for e in entries), default=0)
    for e, elapsed in zip(entries, timings):
        reg = f"  -> {e['registered']}" if "registered" in e else ""
        lines.append(f"  [{e['index']:>3}] {e['directive']:<{width}}"
                     f"  {e['verdict']:<12} {elapsed * 1000.0:8.1f} ms{reg}")
        if e["verdict"] == "fail":
            for c in e["checks"]:
                if c["status"] == FAIL:
                    lines.append(f"        {c['name']}: {c['detail']}")
            for w in e["witnesses"]:
                lines.append(f"        witness {w}")
    lines.append(f"verdict: {overall_verdict(entries)}"
                 f" ({len(entries)} directives)")
    return "\n".join(lines) + "\n"


def explain(name):
    text = EXPLANATIONS.get(name)
    if text is None:
        known = "\n  ".join(sorted(EXPLANATIONS))
        raise SceneError(f"unknown directive '{name}'; known directives:"
                         f"\n  {known}")
    return text


# --------------------------------------------------------------------------
# entry point


def _env_int(name):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise SceneError(f"{name} must be an integer, got '{raw}'") from None


def _env_float(name):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise SceneError(f"{name} must be a number, got '{raw}'") from None


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="klab",
        description="Run certified symbolic checks from a scene file.")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a scene's directives")
    runp.add_argument("scene", help="path to a JSON scene document")
    runp.add_argument("--seed", type=int, default=None,
                      help="sampling seed (default KLAB_SEED or 0)")
    runp.add_argument("--format", choices=("text", "json"), default="text")
    runp.add_argument("--samples", type=int, default=None,
                      help="zero-test sample count override")
    runp.add_argument("--tol", type=float, default=None,
                      help="numeric tolerance (default KLAB_TOL or 1e-9)")
    runp.add_argument("--parallel", action="store_true",
                      help="evaluate independent directives concurrently")
    exp = sub.add_parser("explain", help="describe a directive's certificate")
    exp.add_argument("name", nargs="+", help="directive name")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the contract
        return int(exc.code or 0)

    try:
        if args.command == "explain":
            print(explain(" ".join(args.name)))
            return 0

        seed = args.seed if args.seed is not None else _env_int("KLAB_SEED")
        tol = args.tol if args.tol is not None else _env_float("KLAB_TOL")
        overrides = {}
        if seed is not None:
            overrides["seed"] = seed
        if tol is not None:
            overrides["tol"] = tol
        if args.samples is not None:
            if args.samples < 1:
                raise SceneError("--samples must be positive")
            overrides["samples"] = args.samples
        cfg = dataclasses.replace(DEFAULT_CONFIG, **overrides)

        scene = load_scene(args.scene)
        entries, timings = run_scene(scene, cfg, parallel=args.parallel)
    except SceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.format == "json":
        sys.stdout.write(render_json(scene, entries, cfg.seed))
    else:
        sys.stdout.write(render_text(scene, entries, timings, cfg.seed))
    return 0 if overall_verdict(entries) != "fail" else 1


if __name__ == "__main__":
    sys.exit(main())
