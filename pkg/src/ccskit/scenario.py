"""Scenario files: JSON documents (optionally preceded by ``#`` header lines) and their built-ins."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

SCHEMA_VERSION = 1
COMPUTATIONS = ("curvature", "chern-weil", "chern-simons", "chern-number", "cs-action", "cohomology",
                "transgress", "build", "trivialize", "verify")
ATLAS_BUILTINS = ("instanton", "anti_instanton", "hopf_monopole", "maurer_cartan", "su2_torus", "u1_torus",
                  "constant")
COMPLEX_BUILTINS = ("circle", "torus", "torus_cw", "rp2", "lens", "sphere", "hopf_total", "hopf_base")
MAP_BUILTINS = ("torus_circle", "hopf_projection", "circle_degree")
CYCLE_BUILTINS = ("s4", "s2_cube")
ACTION_CHECKS = ("winding", "boundary")
BUILTIN_SCENARIOS = ("instanton", "flat_su2", "hopf", "abelian_torus")

_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_box = {"type": "array", "items": _vector, "minItems": 2, "maxItems": 2}
_params = {"type": "object", "additionalProperties": {"type": ["number", "integer", "boolean", "array"]}}

_atlas = {
    "type": "object",
    "required": ["builtin"],
    "additionalProperties": False,
    "properties": {
        "builtin": {"enum": list(ATLAS_BUILTINS)},
        "params": _params,
        "coefficients": {"type": "array", "items": _vector},
    },
}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema_version", "name", "group", "computations"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "group": {"enum": ["su(2)", "u(1)"]},
        "polynomials": {"type": "array", "items": {"type": "string", "pattern": "^(chern_[1-9]|pontryagin_[1-9]|half_p1)$"}},
        "atlas": _atlas,
        "second_connection": _atlas,
        "sample_boxes": {"type": "object", "additionalProperties": _box},
        "cycles": {"type": "object", "required": ["builtin"], "additionalProperties": False,
                   "properties": {"builtin": {"enum": list(CYCLE_BUILTINS)}}},
        "complexes": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "builtin": {"enum": list(COMPLEX_BUILTINS)},
                "params": _params,
                "facets": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 1}},
                "name": {"type": "string"},
                "expected": {"type": "array", "items": {"type": "string"}},
            },
            "oneOf": [{"required": ["builtin"]}, {"required": ["facets"]}],
        }},
        "maps": {"type": "array", "items": {
            "type": "object", "required": ["builtin"], "additionalProperties": False,
            "properties": {"builtin": {"enum": list(MAP_BUILTINS)}, "params": _params},
        }},
        "package": {"type": "object", "required": ["base_dim"], "additionalProperties": False,
                    "properties": {"base_dim": {"type": "integer", "minimum": 1, "maximum": 4},
                                   "connection": _atlas, "second_connection": _atlas,
                                   "trivialization_samples": {"type": "integer", "minimum": 1}}},
        "actions": {"type": "array", "items": {"enum": list(ACTION_CHECKS)}},
        "transgression": {"type": "object", "additionalProperties": False,
                          "properties": {"model": {"const": "hopf_cell"},
                                         "families": {"type": "array", "items": {"enum": ["latitudes", "constant"]}},
                                         "fiber_points": {"type": "array", "items": _vector}}},
        "expected": {"type": "object", "additionalProperties": False,
                     "properties": {"chern_number": {"type": "integer"}, "flat": {"type": "boolean"}}},
        "computations": {"type": "array", "items": {"enum": list(COMPUTATIONS)}, "minItems": 1},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
    },
}


class ScenarioError(ValueError):
    """Schema violation; ``path`` locates it in the document (``$.a.b[0]``)."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass
class Scenario:
    data: dict
    header: list = field(default_factory=list)
    source: str = ""

    @property
    def name(self) -> str:
        return self.data["name"]

    def get(self, key, default=None):
        return self.data.get(key, default)


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def split_header(text: str) -> tuple[list, str]:
    """Leading ``#`` lines (the header) and the JSON body."""
    lines = text.splitlines()
    header = []
    while lines and (lines[0].startswith("#") or not lines[0].strip()):
        line = lines.pop(0)
        if line.startswith("#"):
            header.append(line[1:].strip())
    return header, "\n".join(lines)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    header, body = split_header(text)
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON ({exc.msg} at line {exc.lineno + len(text.splitlines()) - len(body.splitlines())})") from exc
    validate(data)
    return Scenario(data, header, source)


def validate(data) -> None:
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        raise ScenarioError(e.message, _json_path(e.absolute_path))
    check_requirements(data, data["computations"])
    atlas = data.get("atlas")
    if atlas is not None:
        for chart in data.get("sample_boxes", {}):
            if chart not in atlas_charts(atlas):
                raise ScenarioError(f"unknown chart {chart!r}", f"$.sample_boxes.{chart}")


_NEEDS = {"curvature": ("atlas",), "chern-weil": ("atlas",), "chern-simons": ("atlas",),
          "chern-number": ("atlas", "cycles"), "cohomology": ("complexes",), "transgress": ("transgression",),
          "build": ("package",), "trivialize": ("package",), "cs-action": ("actions",)}


def check_requirements(data: dict, computations) -> None:
    """Every requested computation must find the scenario entries it reads."""
    for comp in computations:
        for key in _NEEDS.get(comp, ()):
            if key not in data:
                raise ScenarioError(f"computation {comp!r} needs a {key!r} entry", f"$.{key}")


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}") from exc
    return parse_scenario(text, str(p))


def builtin_scenario_text(name: str) -> str:
    if name not in BUILTIN_SCENARIOS:
        raise KeyError(name)
    return resources.files("ccskit").joinpath("scenarios", f"{name}.scn").read_text()


def builtin_scenario(name: str) -> Scenario:
    return parse_scenario(builtin_scenario_text(name), f"builtin:{name}")


# built-ins --------------------------------------------------------------------------------------


def atlas_charts(spec: dict) -> list:
    b = spec["builtin"]
    if b in ("instanton", "anti_instanton", "hopf_monopole"):
        return ["N", "S"]
    return ["U"]


def _base_dim(spec: dict, default: int) -> int:
    return int(spec.get("params", {}).get("base_dim", default))


def make_connection(spec: dict, algebra: str, base_dim: int):
    """Connection 1-form on the torus chart for the trivial-bundle built-ins (``None`` means flat)."""
    from .geometry import FormField
    from .library import SU2_BASIS, su2_torus_connection, u1_torus_connection

    b, p = spec["builtin"], spec.get("params", {})
    if b == "maurer_cartan":
        return None
    if b == "su2_torus":
        return su2_torus_connection(float(p.get("strength", 0.4)), base_dim)
    if b == "u1_torus":
        return u1_torus_connection(float(p.get("strength", 0.3)), base_dim)
    if b == "constant":
        coeffs = np.asarray(spec.get("coefficients", []), dtype=float)
        if algebra == "su(2)":
            basis = np.asarray(SU2_BASIS)
        else:
            basis = np.array([[[1j]]])
        if coeffs.shape != (base_dim, len(basis)):
            raise ScenarioError(f"expected a {base_dim} x {len(basis)} coefficient table", "$.atlas.coefficients")
        mats = np.einsum("jb,bkl->jkl", coeffs, basis)
        return FormField(base_dim, 1, lambda x: np.broadcast_to(mats, (len(x),) + mats.shape).copy(), mats.shape[1:],
                         lambda x: np.zeros((len(x), base_dim * (base_dim - 1) // 2) + mats.shape[1:], dtype=complex),
                         "A_const")
    raise ScenarioError(f"atlas {b!r} is not a trivial-bundle connection", "$.atlas.builtin")


def make_atlas(spec: dict, algebra: str, base=None):
    """Bundle atlas from a scenario atlas entry; ``base`` shares charts and transitions."""
    from .library import hopf_atlas, instanton_atlas, trivial_atlas

    b, p = spec["builtin"], spec.get("params", {})
    if b in ("instanton", "anti_instanton"):
        if algebra != "su(2)":
            raise ScenarioError("the instanton is an su(2) connection", "$.group")
        a = instanton_atlas(float(p.get("rho", 1.0)), b == "anti_instanton")
    elif b == "hopf_monopole":
        if algebra != "u(1)":
            raise ScenarioError("the monopole is a u(1) connection", "$.group")
        a = hopf_atlas(int(p.get("charge", 1)), float(p.get("extra", 0.0)))
    else:
        nb = _base_dim(spec, 3 if algebra == "su(2)" else 2)
        a = trivial_atlas(algebra, nb, make_connection(spec, algebra, nb), name=f"{b} on T{nb}")
    if base is not None:
        a = base.with_connections(a.connections, a.name)
    return a


def make_complex(spec: dict):
    from .complexes import (circle_complex, hopf_cell_model, lens_cw, rp2_simplicial, simplicial_complex,
                            sphere_cw, torus_cw, torus_simplicial)

    if "facets" in spec:
        return simplicial_complex([tuple(f) for f in spec["facets"]], spec.get("name", "custom")).chain
    b, p = spec["builtin"], spec.get("params", {})
    if b == "circle":
        return circle_complex(int(p.get("m", 3))).chain
    if b == "torus":
        return torus_simplicial(int(p.get("n", 3))).chain
    if b == "torus_cw":
        return torus_cw(int(p.get("d", 2))).chain
    if b == "rp2":
        return rp2_simplicial().chain
    if b == "lens":
        return lens_cw(int(p.get("p", 3)))
    if b == "sphere":
        n = int(p.get("n", 2))
        return sphere_cw(n, n + 1).chain
    if b == "hopf_total":
        return hopf_cell_model()["E"].chain
    if b == "hopf_base":
        return hopf_cell_model()["X"].chain
    raise ScenarioError(f"unknown complex {b!r}")


def make_map(spec: dict):
    from .complexes import circle_cw, circle_degree_map, hopf_cell_model, torus_circle_inclusion

    b, p = spec["builtin"], spec.get("params", {})
    if b == "torus_circle":
        return torus_circle_inclusion(int(p.get("n", 3)))[0]
    if b == "hopf_projection":
        return hopf_cell_model()["p"]
    if b == "circle_degree":
        S = circle_cw()
        return circle_degree_map(S, S, int(p.get("degree", 2)))
    raise ScenarioError(f"unknown map {b!r}")
