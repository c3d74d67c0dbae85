"""Deterministic JSON and JSON-lines output.

Floats are written with the shortest round-tripping representation and
keys are sorted, so reading a file back and writing it again reproduces it
byte for byte.  Non-finite floats become ``null``.
"""

from __future__ import annotations

import json
import math

import numpy as np


def to_jsonable(obj):
    """Recursively convert numpy and complex values to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dump_line(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_jsonl(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(dump_line(rec))


def read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def trajectory_records(traj):
    """One record per accepted step: time, flattened positions, energy, separation."""
    phi = traj.extra.get("phi")
    for i, t in enumerate(traj.times):
        z = traj.positions[i]
        rec = {
            "t": float(t),
            "x": np.column_stack([z.real, z.imag]).ravel().tolist(),
            "H": float(traj.hamiltonian_series[i]),
            "d": float(traj.min_separation_series[i]),
        }
        if phi is not None and len(phi):
            rec["phi"] = float(phi[i])
        yield rec
