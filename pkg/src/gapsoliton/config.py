"""
Run configuration: JSON schema, validation and construction of problem objects.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .grid import TorusGrid, make_grid
from .nonlinearity import (
    Combination,
    GrossPitaevskii,
    NonlinearityModel,
    PowerProfile,
    PowerSum,
    RadialW,
    SamplerConfig,
    SaturatingProfile,
)
from .solver import InnerConfig, OuterConfig, SolverConfig
from .spectral import PeriodicPotential, gap_center_shift

MODES = ("check", "solve", "decay", "all")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _num}}
_vec = lambda item: {"type": "array", "minItems": 1, "maxItems": 2, "items": item}  # noqa: E731


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_model_ref = {"$ref": "#/$defs/model"}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {
        "model": {
            "oneOf": [
                _obj(
                    {
                        "family": {"const": "power_sum"},
                        "terms": {
                            "type": "array",
                            "minItems": 1,
                            "items": _obj({"p": _num, "gamma": _matrix}, ["p", "gamma"]),
                        },
                    },
                    ["family", "terms"],
                ),
                _obj({"family": {"const": "gross_pitaevskii"}, "beta": _matrix}, ["family", "beta"]),
                _obj(
                    {
                        "family": {"const": "radial_w"},
                        "profile": {
                            "oneOf": [
                                _obj(
                                    {
                                        "kind": {"const": "power_terms"},
                                        "terms": {
                                            "type": "array",
                                            "minItems": 1,
                                            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _num},
                                        },
                                    },
                                    ["kind", "terms"],
                                ),
                                _obj({"kind": {"const": "saturating"}, "coef": _pos}, ["kind"]),
                            ]
                        },
                        "M": _matrix,
                        "gamma": _pos,
                        "p": _pos,
                        "strict": {"type": "boolean"},
                    },
                    ["family", "profile", "M"],
                ),
                _obj(
                    {
                        "family": {"const": "combination"},
                        "models": {"type": "array", "minItems": 1, "items": _model_ref},
                        "weights": {"type": "array", "minItems": 1, "items": _pos},
                    },
                    ["family", "models", "weights"],
                ),
            ]
        },
    },
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "potential", "nonlinearity"],
    "properties": {
        "grid": _obj(
            {"dim": {"enum": [1, 2]}, "box_lengths": _vec(_pos), "points": _vec({"type": "integer", "minimum": 8})},
            ["dim", "box_lengths", "points"],
        ),
        "potential": {
            "oneOf": [
                _obj(
                    {"kind": {"const": "constant"}, "values": {"type": "array", "minItems": 1, "items": _num}},
                    ["kind", "values"],
                ),
                _obj(
                    {
                        "kind": {"const": "cosine_sum"},
                        "offset": _num,
                        "terms": {
                            "type": "array",
                            "items": _obj(
                                {"amplitude": _num, "harmonics": _vec({"type": "integer"})}, ["amplitude", "harmonics"]
                            ),
                        },
                        "period": _vec(_pos),
                        "components": _posint,
                        "center_gap": {"type": "integer", "minimum": 1},
                    },
                    ["kind", "terms", "period"],
                ),
                _obj({"kind": {"const": "file"}, "path": {"type": "string"}, "period": _vec(_pos)}, ["kind", "path", "period"]),
            ]
        },
        "nonlinearity": _model_ref,
        "spectral": _obj({"gap_tol": _pos, "dof_cap": _posint, "bloch_samples": _posint}),
        "checks": _obj(
            {
                "shell_samples": _posint,
                "shells": {"type": "integer", "minimum": 3},
                "bulk_samples": _posint,
                "f6_pairs": _posint,
                "neq_samples": _posint,
                "seed": {"type": "integer", "minimum": 0},
            }
        ),
        "solver": _obj(
            {
                "inner": _obj(
                    {
                        "tilde_tol": _pos,
                        "bracket_growth": {"type": "number", "exclusiveMinimum": 1},
                        "golden_tol": _pos,
                        "max_iter": _posint,
                        "t_max": _pos,
                        "curvature_tol": _pos,
                    }
                ),
                "outer": _obj(
                    {"sphere_tol": _pos, "cerami_tol": _pos, "max_iter": _posint, "armijo": _pos, "max_backtracks": _posint}
                ),
                "restarts": {"type": "integer", "minimum": 0},
                "warm_start": {"type": "string"},
                "centering": {"type": "boolean"},
                "seed": {"type": "integer", "minimum": 0},
                "init_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            }
        ),
        "decay": _obj({"tail_floor": _pos, "core_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}}),
        "outputs": _obj(
            {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["gsf", "csv", "png"]}, "uniqueItems": True},
                "history": {"type": "boolean"},
            }
        ),
        "mode": {"enum": list(MODES)},
    },
}


def _location(err) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def validate(raw: dict) -> None:
    """Raise ConfigError naming the offending location."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if not errors:
        return
    err = errors[0]
    # oneOf failures hide the useful message in the closest-matching branch
    best = jsonschema.exceptions.best_match([err]) if err.context else err
    raise ConfigError(f"config invalid at {_location(best)}: {best.message}")


def build_model(spec: dict) -> NonlinearityModel:
    fam = spec["family"]
    if fam == "power_sum":
        return PowerSum([t["p"] for t in spec["terms"]], [np.asarray(t["gamma"], dtype=float) for t in spec["terms"]])
    if fam == "gross_pitaevskii":
        return GrossPitaevskii(spec["beta"])
    if fam == "radial_w":
        prof = spec["profile"]
        if prof["kind"] == "power_terms":
            profile = PowerProfile(tuple((float(c), float(q)) for c, q in prof["terms"]))
        else:
            profile = SaturatingProfile(float(prof.get("coef", 1.0)))
        return RadialW(profile, spec["M"], spec.get("gamma", 1.0), spec.get("p"), spec.get("strict", True))
    if fam == "combination":
        if len(spec["models"]) != len(spec["weights"]):
            raise ConfigError("config invalid at /nonlinearity: models and weights differ in length")
        return Combination([build_model(m) for m in spec["models"]], spec["weights"])
    raise ConfigError(f"unknown nonlinearity family {fam!r}")


def build_potential(spec: dict, grid: TorusGrid, base_dir: Path | None = None) -> PeriodicPotential:
    kind = spec["kind"]
    if kind == "constant":
        return PeriodicPotential.constant(grid, spec["values"])
    if kind == "cosine_sum":
        terms = [(t["amplitude"], t["harmonics"]) for t in spec["terms"]]
        pot = PeriodicPotential.cosine_sum(grid, spec.get("offset", 0.0), terms, spec["period"], spec.get("components", 1))
        band = spec.get("center_gap")
        if band is not None:
            s = gap_center_shift(pot.cell_values(0), pot.period, band=band)
            pot = pot.shifted([-s] * pot.components)
        return pot
    from .io import load_field

    path = Path(spec["path"])
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    field_ = load_field(path, grid=grid)
    return PeriodicPotential(grid, field_.values, tuple(spec["period"]))


@dataclass
class RunConfig:
    raw: dict
    sha256: str
    source: Path | None
    grid: TorusGrid
    potential_spec: dict
    model: NonlinearityModel
    sampler: SamplerConfig
    solver: SolverConfig
    spectral: dict
    decay: dict
    out_dir: Path
    formats: tuple[str, ...]
    history: bool
    mode: str

    def potential(self) -> PeriodicPotential:
        base = self.source.parent if self.source else None
        return build_potential(self.potential_spec, self.grid, base)


def from_dict(raw: dict, source: Path | None = None, digest: str | None = None) -> RunConfig:
    validate(raw)
    g = raw["grid"]
    if len(g["box_lengths"]) != g["dim"] or len(g["points"]) != g["dim"]:
        raise ConfigError("config invalid at /grid: box_lengths and points need one entry per dimension")
    grid = make_grid(g["dim"], g["box_lengths"], g["points"])
    try:
        model = build_model(raw["nonlinearity"])
    except ValueError as exc:
        raise ConfigError(f"config invalid at /nonlinearity: {exc}") from exc
    checks = dict(raw.get("checks", {}))
    sampler = SamplerConfig(**checks)
    s = raw.get("solver", {})
    try:
        solver = SolverConfig(
            inner=InnerConfig(**s.get("inner", {})),
            outer=OuterConfig(**s.get("outer", {})),
            restarts=s.get("restarts", 5),
            centering=s.get("centering", True),
            seed=s.get("seed", 0),
            init_fraction=s.get("init_fraction", 0.1),
        )
    except ValueError as exc:
        raise ConfigError(f"config invalid at /solver: {exc}") from exc
    out = raw.get("outputs", {})
    base = source.parent if source else Path.cwd()
    out_dir = Path(out.get("directory", "out"))
    if not out_dir.is_absolute():
        out_dir = base / out_dir
    text = json.dumps(raw, sort_keys=True).encode()
    return RunConfig(
        raw=raw,
        sha256=digest or hashlib.sha256(text).hexdigest(),
        source=source,
        grid=grid,
        potential_spec=raw["potential"],
        model=model,
        sampler=sampler,
        solver=solver,
        spectral=dict(raw.get("spectral", {})),
        decay=dict(raw.get("decay", {})),
        out_dir=out_dir,
        formats=tuple(out.get("formats", ["gsf", "csv", "png"])),
        history=bool(out.get("history", False)),
        mode=raw.get("mode", "all"),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config invalid at /: top level must be an object")
    return from_dict(raw, source=path.resolve(), digest=hashlib.sha256(data).hexdigest())
