"""Run configuration: JSON schema, semantic checks and object construction.

A run configuration is a single JSON document.  Unknown keys are rejected
and every error names the dotted path of the offending entry.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import jsonschema

from .complexmap import map_from_config
from .domain import DomainModel
from .dynamics import VortexConfiguration
from .errors import ConfigError, MapRejectedError, ParameterError
from .integrators import IntegratorOptions

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_pair = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_complex = {"oneOf": [_num, _pair]}

MAP_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["identity", "mobius", "polynomial", "inversion", "composed", "inverse"]},
        "a": _pair,
        "theta": _num,
        "c": _complex,
        "coeffs": {"type": "array", "items": _complex, "minItems": 1},
        "radius": _pos,
        "r_min": _pos,
        "r_max": _pos,
        "outer": {"$ref": "#/$defs/map"},
        "inner": {"$ref": "#/$defs/map"},
        "of": {"$ref": "#/$defs/map"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"map": MAP_SCHEMA},
    "type": "object",
    "required": ["domain"],
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "domain": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["disk", "annulus", "exterior_disk", "mapped_simply_connected", "mapped_exterior"]},
                "rho": _num,
                "window": _pos,
                "map": {"$ref": "#/$defs/map"},
                "map_direction": {"enum": ["to_disk", "from_disk"]},
                "sanity_seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "vortices": {
            "type": "object",
            "properties": {
                "positions": {"type": "array", "items": _pair, "minItems": 1},
                "masses": {"type": "array", "items": _num, "minItems": 1},
                "circulations": {"type": "array", "items": _num},
            },
            "required": ["positions", "masses"],
            "additionalProperties": False,
        },
        "integrator": {
            "type": "object",
            "properties": {
                "method": {"enum": ["dopri54", "implicit_midpoint"]},
                "rtol": _pos,
                "atol": _pos,
                "delta_stop": {"type": "number", "minimum": 0},
                "step": _pos,
                "h0": _pos,
                "h_min": _pos,
                "max_steps": {"type": "integer", "minimum": 1},
                "event_tol": _pos,
            },
            "additionalProperties": False,
        },
        "run": {
            "type": "object",
            "properties": {"horizon": {"type": "number", "minimum": 0}},
            "additionalProperties": False,
        },
        "regularization": {
            "type": "object",
            "properties": {"enabled": {"type": "boolean"}, "epsilon": _pos, "eta": _pos},
            "additionalProperties": False,
        },
        "ensemble": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 1},
                "masses": {"type": "array", "items": _num, "minItems": 1},
                "circulations": {"type": "array", "items": _num},
                "count": {"type": "integer", "minimum": 0},
                "horizon": _pos,
                "delta_grid": {"type": "array", "items": _pos, "minItems": 1},
                "max_steps": {"type": "integer", "minimum": 1},
                "workers": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "inequalities": {
            "type": "object",
            "properties": {
                "kappa": _num,
                "levels": {"type": "array", "items": {"type": "integer", "minimum": 4, "maximum": 24}, "minItems": 2},
                "epsilon_grid": {"type": "array", "items": _pos, "minItems": 1},
                "N": {"type": "integer", "minimum": 1},
                "eta": _pos,
                "phi_samples": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "bounds": {
            "type": "object",
            "properties": {"sample_count": {"type": "integer", "minimum": 1000}},
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"dir": {"type": "string", "minLength": 1}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def _path(parts):
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


@dataclass
class RunConfig:
    """Validated run configuration together with the built objects."""

    raw: dict
    domain: DomainModel
    vortices: VortexConfiguration | None
    integrator: IntegratorOptions
    horizon: float
    regularization: dict
    ensemble: dict
    inequalities: dict
    bounds: dict
    output_dir: str
    seed: int
    notes: list = field(default_factory=list)

    @property
    def hash(self):
        return config_hash(self.raw)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(raw) -> str:
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()


def validate_schema(raw):
    """Raise ConfigError for the first schema violation (deepest path first)."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (-len(e.absolute_path), str(e.absolute_path)))
    if errors:
        e = errors[0]
        raise ConfigError(_path(e.absolute_path), e.message)


def _domain(cfg):
    kind = cfg["kind"]
    if kind == "annulus":
        if "rho" not in cfg:
            raise ConfigError("domain.rho", "annulus requires rho")
        if not (0.0 < cfg["rho"] < 1.0):
            raise ConfigError("domain.rho", f"annulus requires 0 < rho < 1, got {cfg['rho']}")
    elif "rho" in cfg:
        raise ConfigError("domain.rho", f"rho is only meaningful for an annulus, not {kind}")
    if kind.startswith("mapped"):
        if "map" not in cfg:
            raise ConfigError("domain.map", f"{kind} requires a map")
    elif "map" in cfg:
        raise ConfigError("domain.map", f"{kind} does not take a map")
    if kind in ("disk", "annulus") and "window" in cfg:
        raise ConfigError("domain.window", "window applies only to exterior domains")
    try:
        return DomainModel.from_config(cfg)
    except MapRejectedError as exc:
        raise ConfigError("domain.map", f"map rejected by the sanity check: {exc}") from exc
    except (KeyError, ValueError, ParameterError) as exc:
        raise ConfigError("domain.map", str(exc)) from exc


def _vortices(cfg, domain):
    if cfg is None:
        return None
    pos, a = cfg["positions"], cfg["masses"]
    if len(pos) != len(a):
        raise ConfigError("vortices.masses", f"{len(pos)} positions but {len(a)} masses")
    xi = cfg.get("circulations", [0.0] * domain.hole_count)
    if len(xi) != domain.hole_count:
        raise ConfigError("vortices.circulations", f"{domain.kind} has {domain.hole_count} holes but {len(xi)} circulations")
    X = VortexConfiguration([complex(p[0], p[1]) for p in pos], a, xi)
    inside = domain.contains(X.positions)
    for i, ok in enumerate(inside):
        if not ok:
            raise ConfigError(f"vortices.positions[{i}]", f"point {pos[i]} lies outside the open {domain.kind} domain")
    for i in range(X.N):
        for j in range(i):
            if X.positions[i] == X.positions[j]:
                raise ConfigError(f"vortices.positions[{i}]", f"coincides with vortices.positions[{j}]")
    return X


def build_config(raw) -> RunConfig:
    """Validate a parsed configuration and build the run objects.

    Raises
    ------
    ConfigError
        With the dotted path of the first offending entry.
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    validate_schema(raw)
    domain = _domain(raw["domain"])
    X = _vortices(raw.get("vortices"), domain)
    opts = IntegratorOptions(**raw.get("integrator", {}))
    reg = {"enabled": False, "epsilon": 1e-2, "eta": 0.1, **raw.get("regularization", {})}
    if domain.bounded and reg["epsilon"] * domain.diameter >= 1.0:
        raise ConfigError("regularization.epsilon", f"epsilon * diameter must be < 1, got {reg['epsilon'] * domain.diameter}")
    ens = {"N": 2, "count": 1000, "horizon": 10.0, "delta_grid": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3], **raw.get("ensemble", {})}
    if "masses" in ens and len(ens["masses"]) != ens["N"]:
        raise ConfigError("ensemble.masses", f"expected {ens['N']} masses, got {len(ens['masses'])}")
    ens.setdefault("masses", [1.0] * ens["N"])
    if "circulations" in ens and len(ens["circulations"]) != domain.hole_count:
        raise ConfigError("ensemble.circulations", f"{domain.kind} has {domain.hole_count} holes")
    if raw.get("ensemble") is not None and not domain.bounded:
        raise ConfigError("ensemble", "ensembles need a bounded domain for uniform sampling of initial data")
    ineq = {"kappa": 0.5, "levels": [14, 16, 18], "epsilon_grid": [1e-2, 1e-3, 1e-4], "N": 2, "eta": 0.1, "phi_samples": 4096}
    ineq.update(raw.get("inequalities", {}))
    if not (0.0 < ineq["kappa"] < 1.0):
        raise ConfigError("inequalities.kappa", f"kappa must lie in (0, 1); the integrals diverge for kappa >= 1, got {ineq['kappa']}")
    if list(ineq["levels"]) != sorted(set(ineq["levels"])):
        raise ConfigError("inequalities.levels", "levels must be strictly increasing")
    bounds = {"sample_count": 10_000, **raw.get("bounds", {})}
    return RunConfig(
        raw=raw,
        domain=domain,
        vortices=X,
        integrator=opts,
        horizon=float(raw.get("run", {}).get("horizon", 1.0)),
        regularization=reg,
        ensemble=ens,
        inequalities=ineq,
        bounds=bounds,
        output_dir=raw.get("output", {}).get("dir", "out"),
        seed=int(raw.get("seed", 0)),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read file: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return build_config(raw)
