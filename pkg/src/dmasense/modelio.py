"""JSON serialization of MNT models.

Complex arrays are stored row-major as base64 of little-endian float64
(re, im) interleaved pairs, with explicit dimensions, so any language can
decode them without numpy.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .grid import build_grid
from .mnt import MntModel, Z0_OHM

MODEL_FORMAT = "dma-mnt-model"
MODEL_VERSION = 1


def _encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<c16")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode_array(obj: dict, name: str) -> np.ndarray:
    if set(obj) != {"shape", "data"}:
        raise InvalidInputError(f"array entry '{name}' must have exactly 'shape' and 'data'")
    raw = base64.b64decode(obj["data"])
    a = np.frombuffer(raw, dtype="<c16")
    shape = tuple(int(s) for s in obj["shape"])
    if a.size != int(np.prod(shape)):
        raise InvalidInputError(f"array entry '{name}': data length does not match shape {shape}")
    return a.reshape(shape).astype(np.complex128)


def model_to_dict(model: MntModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "z0_ohm": Z0_OHM,
        "alpha": [model.alpha.real, model.alpha.imag],
        "beta": [model.beta.real, model.beta.imag],
        "n_meta": model.n_meta,
        "grid": {
            "spacing_phi_deg": model.grid.spacing_phi,
            "spacing_theta_deg": model.grid.spacing_theta,
        },
        "h0": _encode_array(model.h0),
        "A": _encode_array(model.A),
        "Gamma": _encode_array(model.Gamma),
        "b": _encode_array(model.b),
    }


def save_model(model: MntModel, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(model), sort_keys=True, indent=1), encoding="utf-8")
    return path


def model_from_dict(doc: dict) -> MntModel:
    expected = {
        "format", "version", "z0_ohm", "alpha", "beta", "n_meta", "grid",
        "h0", "A", "Gamma", "b",
    }
    unknown = set(doc) - expected
    if unknown:
        raise InvalidInputError(f"unknown model file keys: {sorted(unknown)}")
    missing = expected - set(doc)
    if missing:
        raise InvalidInputError(f"missing model file keys: {sorted(missing)}")
    if doc["format"] != MODEL_FORMAT:
        raise InvalidInputError(f"not a {MODEL_FORMAT} file")
    grid_spec = doc["grid"]
    if set(grid_spec) != {"spacing_phi_deg", "spacing_theta_deg"}:
        raise InvalidInputError("grid spec must have exactly spacing_phi_deg and spacing_theta_deg")
    grid = build_grid(float(grid_spec["spacing_phi_deg"]), float(grid_spec["spacing_theta_deg"]))
    model = MntModel(
        alpha=complex(doc["alpha"][0], doc["alpha"][1]),
        beta=complex(doc["beta"][0], doc["beta"][1]),
        h0=_decode_array(doc["h0"], "h0"),
        A=_decode_array(doc["A"], "A"),
        Gamma=_decode_array(doc["Gamma"], "Gamma"),
        b=_decode_array(doc["b"], "b"),
        grid=grid,
    )
    if model.n_meta != int(doc["n_meta"]):
        raise InvalidInputError("n_meta does not match the stored arrays")
    model.validate()
    return model


def load_model(path) -> MntModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return model_from_dict(doc)
