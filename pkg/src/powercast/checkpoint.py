"""Portable model checkpoints: versioned JSON with flat float64 arrays.

JSON float serialization uses shortest-repr round-tripping, so a
save -> load -> save cycle is byte-identical and loaded models predict
bitwise the same as the in-memory originals.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .model import ARCH_BLSTM, DenseHead, LstmParams, RecurrentModel
from .preprocess import MinMaxScaler

FORMAT_VERSION = 1

_CELL_FIELDS = ("w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o")


class CheckpointError(Exception):
    """Unreadable, truncated, or incompatible checkpoint file."""


def _encode_array(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "data": arr.ravel().tolist()}


def _decode_array(obj, name: str) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in obj["shape"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed array entry for {name!r}") from exc
    expected = int(np.prod(shape)) if shape else 1
    if len(data) != expected:
        raise CheckpointError(
            f"array {name!r}: {len(data)} values for declared shape {shape}"
        )
    return np.asarray(data, dtype=float).reshape(shape)


def model_to_doc(model: RecurrentModel) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "arch": model.arch,
        "hidden": model.hidden,
        "window": model.window,
        "dropout_rate": model.dropout_rate,
        "seed": model.seed,
        "provenance": model.provenance,
        "epoch_losses": list(model.epoch_losses),
        "scaler": None
        if model.scaler is None
        else {"data_min": model.scaler.data_min, "data_max": model.scaler.data_max},
        "params": {name: _encode_array(arr) for name, arr in model.parameters().items()},
    }
    return doc


def model_from_doc(doc: dict) -> RecurrentModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version!r}")
    try:
        arch = doc["arch"]
        params = doc["params"]
    except KeyError as exc:
        raise CheckpointError(f"missing checkpoint field {exc}") from exc

    def cell(prefix: str) -> LstmParams:
        arrays = {}
        for name in _CELL_FIELDS:
            key = f"{prefix}.{name}"
            if key not in params:
                raise CheckpointError(f"missing parameter {key!r}")
            arrays[name] = _decode_array(params[key], key)
        return LstmParams(**arrays)

    fwd = cell("fwd")
    bwd = cell("bwd") if arch == ARCH_BLSTM else None
    w_backward = None
    if arch == ARCH_BLSTM:
        w_backward = _decode_array(params["head.w_backward"], "head.w_backward")
    head = DenseHead(
        w_forward=_decode_array(params["head.w_forward"], "head.w_forward"),
        w_backward=w_backward,
        bias=_decode_array(params["head.bias"], "head.bias"),
    )
    scaler = None
    if doc.get("scaler") is not None:
        scaler = MinMaxScaler(float(doc["scaler"]["data_min"]), float(doc["scaler"]["data_max"]))
    try:
        return RecurrentModel(
            arch=arch,
            hidden=int(doc["hidden"]),
            window=int(doc["window"]),
            forward_cell=fwd,
            backward_cell=bwd,
            head=head,
            dropout_rate=float(doc["dropout_rate"]),
            scaler=scaler,
            seed=int(doc["seed"]),
            provenance=dict(doc.get("provenance") or {}),
            epoch_losses=list(doc.get("epoch_losses") or []),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"invalid checkpoint contents: {exc}") from exc


def checkpoint_bytes(model: RecurrentModel) -> bytes:
    return (json.dumps(model_to_doc(model), sort_keys=True, indent=1) + "\n").encode()


def save_checkpoint(model: RecurrentModel, path) -> None:
    """Write atomically (temp file + rename in the target directory)."""
    path = os.fspath(path)
    payload = checkpoint_bytes(model)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> RecurrentModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"corrupt checkpoint (bad JSON): {exc}") from exc
    if not isinstance(doc, dict):
        raise CheckpointError("checkpoint root must be an object")
    return model_from_doc(doc)
