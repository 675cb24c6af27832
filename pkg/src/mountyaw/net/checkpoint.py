"""Versioned JSON checkpoints with bit-exact tensor round-trips.

Tensors are stored as base64 of their little-endian float64 bytes, so
save -> load reproduces every parameter and running statistic exactly.
A load failure never yields a partially populated model.
"""

import base64
import json

import numpy as np

from ..errors import (
    CheckpointCorruptError,
    CheckpointShapeError,
    CheckpointVersionError,
)
from .model import YawConvNet

FORMAT = "mountyaw-checkpoint"
VERSION = 1


def _encode(a):
    a = np.ascontiguousarray(a, dtype="<f8")
    return {
        "shape": list(a.shape),
        "dtype": "<f8",
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _decode(entry):
    try:
        raw = base64.b64decode(entry["data"], validate=True)
        a = np.frombuffer(raw, dtype=entry["dtype"]).copy()
        return a.reshape(entry["shape"])
    except (KeyError, ValueError, TypeError) as e:
        raise CheckpointCorruptError(f"bad tensor payload: {e}") from e


def save_checkpoint(model, path, config=None):
    """Write the model (parameters + running stats) and a config echo."""
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "hidden": model.hidden,
        "param_count": model.param_count,
        "config": dict(config or {}),
        "tensors": {k: _encode(v) for k, v in model.state_tensors().items()},
    }
    with open(path, "w") as f:
        json.dump(payload, f)


def load_checkpoint(path):
    """Rebuild the model from a checkpoint file.

    Raises CheckpointCorruptError on unparseable/truncated files,
    CheckpointVersionError on format mismatches, CheckpointShapeError when
    tensor names or shapes disagree with the declared architecture.
    """
    try:
        with open(path) as f:
            payload = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointCorruptError(f"unreadable checkpoint: {e}") from e

    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CheckpointCorruptError("not a model checkpoint")
    if payload.get("version") != VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {payload.get('version')!r}"
        )

    model = YawConvNet(hidden=int(payload.get("hidden", 0) or 0))
    expected = model.state_tensors()
    tensors = payload.get("tensors", {})
    if set(tensors) != set(expected):
        missing = set(expected) - set(tensors)
        extra = set(tensors) - set(expected)
        raise CheckpointShapeError(
            f"tensor names mismatch (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    decoded = {}
    for name, entry in tensors.items():
        a = _decode(entry)
        if a.shape != expected[name].shape:
            raise CheckpointShapeError(
                f"{name}: shape {a.shape} != {expected[name].shape}"
            )
        decoded[name] = a
    if payload.get("param_count") != model.param_count:
        raise CheckpointShapeError(
            f"declared param_count {payload.get('param_count')} != "
            f"{model.param_count}"
        )
    model.load_state(decoded)
    return model
