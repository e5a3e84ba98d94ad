"""Scene files: strict schema, command-line overrides and cross-field checks.

A scene is a JSON or YAML mapping with blocks ``grid``, ``metric``,
``fields``, ``experiment`` and ``output``. Unknown keys are rejected
everywhere. Box lengths may be numbers or strings such as ``"2pi"``.
"""

import copy
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .catalog import CATALOG, catalog_embedding
from .errors import ConfigurationError, MetricError, SchemaError
from .geometry import MetricField, build_geometry
from .gcr import ImmersionFields
from .grid import build_grid
from .metric import BUILTIN_METRICS, MetricSpec
from .minimizer import MinimizeConfig, random_fields
from .weaklab import EpsSchedule, FrameworkSpec, PairSpec, TestFunction, make_framework_sequence

SCHEMA_VERSION = 1
EXPERIMENTS = ("geometry", "residuals", "divcurl-verify", "weaklab", "minimize")

_num = {"type": "number"}
_int = {"type": "integer"}
_length = {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"type": "string", "pattern": r"^\d*\.?\d*\s*\*?\s*pi$"}]}
_vec_int = {"type": "array", "items": _int, "minItems": 2}
_profile = {"enum": ["sin", "cos"]}
_osc_profile = {"enum": ["sin", "cos", "zero"]}
_matrix = {"type": "array", "items": {"type": "array", "items": _num}}

_trig = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "const": _num,
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["coef", "fn", "k"],
                "properties": {"coef": _num, "fn": _profile, "k": _vec_int},
            },
        },
    },
}
_test_function = copy.deepcopy(_trig)
_test_function["properties"]["bound"] = {"type": "number", "exclusiveMinimum": 0}

_laminate = {
    "eta": _vec_int,
    "base": {"enum": list(CATALOG)},
    "base_params": {"type": "object"},
    "profiles_h": {"type": "array", "items": {"enum": ["sin", "cos", "zero"]}},
    "amplitudes_h": {"type": "array", "items": _num},
    "kappa_matrix": _matrix,
    "profile_kappa": _profile,
    "violation": {"type": "boolean"},
    "c": _matrix,
}

SCENE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "grid", "experiment"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["d", "box", "resolution"],
            "properties": {
                "d": {"type": "integer", "minimum": 2},
                "box": {"oneOf": [_length, {"type": "array", "items": _length}]},
                "resolution": {"oneOf": [_int, {"type": "array", "items": _int}]},
                "periodic": {"oneOf": [{"type": "boolean"}, {"type": "array", "items": {"type": "boolean"}}]},
            },
        },
        "metric": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "name": {"enum": list(BUILTIN_METRICS)},
                "params": {"type": "object"},
                "components": {
                    "type": "object",
                    "patternProperties": {r"^[1-9][1-9]$": _trig},
                    "additionalProperties": False,
                },
            },
            "oneOf": [{"required": ["name"]}, {"required": ["components"]}],
        },
        "fields": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["zero", "catalog", "random", "laminate", "file"]},
                "n_co": {"type": "integer", "minimum": 1},
                "name": {"enum": list(CATALOG)},
                "params": {"type": "object"},
                "seed": {"type": "integer", "minimum": 0},
                "amplitude": {"type": "number", "minimum": 0},
                "m": {"type": "integer", "minimum": 1},
                "path": {"type": "string"},
                **_laminate,
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(EXPERIMENTS)},
                # weaklab
                "mode": {"enum": ["divcurl", "framework"]},
                "eps": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "policy": {"enum": ["fixed", "refine"]},
                "points_per_period": {"type": "integer", "minimum": 8},
                "test_functions": {"type": "array", "items": _test_function, "minItems": 1},
                "pair": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["eta", "w"],
                    "properties": {
                        "eta": _vec_int,
                        "w": {"type": "array", "items": _num},
                        "U": {"type": "array", "items": _num},
                        "V": {"type": "array", "items": _num},
                        "profile_u": _osc_profile,
                        "profile_v": _osc_profile,
                    },
                },
                "framework": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["eta"],
                    "properties": {"n_co": {"type": "integer", "minimum": 1}, **_laminate},
                },
                # minimize
                "p": _num,
                "mu0": _num,
                "mu_growth": _num,
                "outer_iterations": _int,
                "max_inner": _int,
                "grad_tol": _num,
                "inner_rtol": _num,
                "initial_step": _num,
                "step_shrink": _num,
                "step_expand": _num,
                "armijo": _num,
                "max_backtracks": _int,
                "tol_r": _num,
                "obj_rtol": _num,
                "seed": _int,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "prefix": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
                "deterministic": {"type": "boolean"},
                "dump_fields": {"type": "boolean"},
            },
        },
    },
}

MINIMIZE_KEYS = tuple(
    k for k in SCENE_SCHEMA["properties"]["experiment"]["properties"]
    if k in MinimizeConfig.__dataclass_fields__
)
WEAKLAB_KEYS = ("mode", "eps", "policy", "points_per_period", "test_functions", "pair", "framework")


def parse_length(value):
    if isinstance(value, str):
        m = re.fullmatch(r"(\d*\.?\d*)\s*\*?\s*pi", value.strip())
        if not m:
            raise SchemaError(f"cannot parse box length {value!r}", path="grid.box")
        coef = float(m.group(1)) if m.group(1) not in ("", ".") else 1.0
        return coef * np.pi
    return float(value)


def load_text(text, suffix=".yaml"):
    try:
        if suffix.lower() == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise SchemaError(f"cannot parse scene: {exc}") from exc


def _coerce(value):
    try:
        return yaml.safe_load(value)
    except yaml.YAMLError:
        return value


def apply_overrides(raw, overrides):
    """Set dotted ``key=value`` paths; values are parsed as YAML scalars/lists."""
    doc = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise SchemaError(f"override {item!r} is not of the form key=value", path=item)
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise SchemaError(f"override key {key!r} is malformed", path=key)
        node = doc
        for part in parts[:-1]:
            if isinstance(node, list):
                node = node[int(part)]
                continue
            node = node.setdefault(part, {})
            if not isinstance(node, (dict, list)):
                raise SchemaError(f"override path {key!r} crosses a scalar", path=key)
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = _coerce(value)
        else:
            node[last] = _coerce(value)
    return doc


def validate_schema(doc):
    validator = jsonschema.Draft202012Validator(SCENE_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"schema violation at {path}: {err.message}", path=path)


@dataclass
class Scene:
    doc: dict
    sha256: str
    source: str = None

    @property
    def grid_block(self):
        return self.doc["grid"]

    @property
    def experiment(self):
        return self.doc["experiment"]

    @property
    def output(self):
        return self.doc.get("output", {})

    @property
    def fields_block(self):
        return self.doc.get("fields", {"kind": "zero"})

    def build_grid(self):
        g = self.grid_block
        box = g["box"]
        lengths = [parse_length(b) for b in box] if isinstance(box, list) else parse_length(box)
        return build_grid(g["d"], lengths, g["resolution"], g.get("periodic", True))

    def n_co(self):
        f = self.fields_block
        if "n_co" in f:
            return int(f["n_co"])
        fw = self.experiment.get("framework", {})
        return int(fw.get("n_co", 3))

    def metric_spec(self, grid):
        f = self.fields_block
        if f["kind"] == "catalog":
            return catalog_embedding(f["name"], self._catalog_params(), grid).metric
        m = self.doc.get("metric")
        if m is None:
            return MetricSpec("flat")
        if "components" in m:
            return MetricSpec(components=m["components"])
        return MetricSpec(m["name"], dict(m.get("params", {})))

    def _catalog_params(self):
        f = self.fields_block
        params = dict(f.get("params", {}))
        params.setdefault("n_co", self.n_co())
        return params

    def build_geometry(self, grid):
        spec = self.metric_spec(grid)
        return build_geometry(MetricField.from_spec(grid, spec)), spec

    def laminate_spec(self, block, n_co):
        keys = {k: v for k, v in block.items() if k in _laminate}
        for key in ("kappa_matrix", "c"):
            if key in keys:
                keys[key] = tuple(tuple(r) for r in keys[key])
        for key in ("profiles_h", "amplitudes_h", "eta"):
            if key in keys:
                keys[key] = tuple(keys[key])
        return FrameworkSpec(n_co=n_co, **keys)

    def build_fields(self, grid):
        f = self.fields_block
        kind = f["kind"]
        n_co = self.n_co()
        if kind == "zero":
            return ImmersionFields.zeros(grid, n_co)
        if kind == "catalog":
            return catalog_embedding(f["name"], self._catalog_params(), grid).fields
        if kind == "random":
            return random_fields(grid, n_co, f.get("amplitude", 0.1), self.seed())
        if kind == "laminate":
            spec = self.laminate_spec(f, n_co)
            EpsSchedule((f.get("m", 1),)).validate(grid, spec.eta)
            return make_framework_sequence(spec, f.get("m", 1), grid)
        from .fielddump import read_fields

        path = Path(f["path"])
        if not path.is_absolute() and self.source is not None:
            path = Path(self.source).parent / path
        fields = read_fields(path)
        grid.check_same(fields.grid)
        return fields

    def seed(self):
        """Random-init seed: the fields block wins over the minimize block."""
        return int(self.fields_block.get("seed", self.experiment.get("seed", 0)))

    def minimize_config(self):
        exp = self.experiment
        return MinimizeConfig(**{k: exp[k] for k in MINIMIZE_KEYS if k in exp})

    def eps_schedule(self):
        exp = self.experiment
        return EpsSchedule.from_eps(
            exp.get("eps", [0.25, 0.125, 0.0625]),
            points_per_period=exp.get("points_per_period", 8),
            policy=exp.get("policy", "fixed"),
        )

    def test_functions(self, d):
        specs = self.experiment.get("test_functions", [{"const": 1.0}])
        return [TestFunction.from_dict(s, d) for s in specs]

    def pair_spec(self):
        p = self.experiment["pair"]
        return PairSpec(
            tuple(p["eta"]), tuple(p["w"]), p.get("U"), p.get("V"), p.get("profile_u", "sin"), p.get("profile_v", "sin")
        )

    def framework_spec(self):
        fw = dict(self.experiment["framework"])
        return self.laminate_spec(fw, int(fw.get("n_co", 3)))


def _canonical_hash(doc):
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _cross_validate(scene):
    """Checks that need more than the schema, done without running the experiment."""
    doc = scene.doc
    exp = doc["experiment"]
    kind = exp["kind"]
    grid = _at("grid", scene.build_grid)
    d = grid.d
    f = scene.fields_block
    if f["kind"] == "catalog":
        if "name" not in f:
            raise SchemaError("catalog fields need a 'name'", path="fields.name")
        if "metric" in doc:
            raise SchemaError("catalog scenes take their metric from the catalog; drop the metric block", path="metric")
    if f["kind"] == "file" and "path" not in f:
        raise SchemaError("file fields need a 'path'", path="fields.path")
    if f["kind"] == "laminate" and "eta" not in f:
        raise SchemaError("laminate fields need 'eta'", path="fields.eta")
    _at("metric", lambda: MetricField.from_dense(grid, scene.metric_spec(grid).evaluate(grid)))
    if f["kind"] in ("catalog", "laminate"):
        _at("fields", lambda: scene.build_fields(grid))

    misplaced = [k for k in exp if k != "kind" and k not in _allowed(kind)]
    if misplaced:
        raise SchemaError(f"experiment '{kind}' does not take {sorted(misplaced)}", path=f"experiment.{misplaced[0]}")
    if kind == "minimize":
        _at("experiment", scene.minimize_config)
    if kind == "weaklab":
        mode = exp.get("mode")
        if mode is None:
            raise SchemaError("weaklab experiments need a 'mode' (divcurl or framework)", path="experiment.mode")
        needed = "pair" if mode == "divcurl" else "framework"
        if needed not in exp:
            raise SchemaError(f"weaklab mode '{mode}' needs a '{needed}' block", path=f"experiment.{needed}")
        schedule = _at("experiment.eps", scene.eps_schedule)
        _at("experiment.test_functions", lambda: scene.test_functions(d))
        spec = _at(f"experiment.{needed}", scene.pair_spec if mode == "divcurl" else scene.framework_spec)
        if spec.d != d:
            raise SchemaError(f"direction eta has {spec.d} entries but d = {d}", path="experiment")
        _at("experiment.eps", lambda: schedule.validate(grid, spec.eta))
    return grid


def _allowed(kind):
    if kind == "minimize":
        return MINIMIZE_KEYS
    if kind == "weaklab":
        return WEAKLAB_KEYS
    return ()


def _at(path, fn):
    try:
        return fn()
    except SchemaError:
        raise
    except (ConfigurationError, MetricError) as exc:
        raise SchemaError(str(exc), path=path) from exc


def load_scene(path=None, overrides=None, text=None, suffix=".yaml"):
    """Parse, override, schema-check and cross-validate a scene."""
    source = None
    if text is None:
        p = Path(path)
        text = p.read_text()
        suffix = p.suffix or suffix
        source = str(p)
    raw = load_text(text, suffix)
    if not isinstance(raw, dict):
        raise SchemaError("scene must be a mapping at the top level")
    doc = apply_overrides(raw, overrides)
    validate_schema(doc)
    scene = Scene(doc, _canonical_hash(doc), source)
    _cross_validate(scene)
    return scene
