"""Checkpoint format: round-trips, corruption handling, bitwise stability."""

import json

import numpy as np
import pytest

from powercast.checkpoint import (
    CheckpointError,
    checkpoint_bytes,
    load_checkpoint,
    save_checkpoint,
)
from powercast.model import predict_batch
from powercast.preprocess import fit_scaler, frame_windows
from powercast.training import Hyper, train


@pytest.fixture(scope="module", params=["LSTM", "BLSTM"])
def trained_model(request):
    values = np.sin(np.arange(160) / 4.0) + 0.1 * np.cos(np.arange(160))
    scaler = fit_scaler(values)
    ds = frame_windows(scaler.transform(values), 10)
    return train(
        request.param,
        ds,
        Hyper(hidden=3, epochs=2, window=10, seed=17),
        scaler=scaler,
        provenance={"dataset_id": "synthetic", "fold_id": 1},
    )


def test_round_trip_predictions_are_bitwise_equal(trained_model, tmp_path):
    path = tmp_path / "model.json"
    save_checkpoint(trained_model, path)
    loaded = load_checkpoint(path)
    inputs = np.random.default_rng(0).random((9, 10))
    assert np.array_equal(predict_batch(trained_model, inputs), predict_batch(loaded, inputs))
    assert loaded.provenance == trained_model.provenance
    assert loaded.epoch_losses == trained_model.epoch_losses
    assert loaded.scaler == trained_model.scaler


def test_save_load_save_is_byte_identical(trained_model, tmp_path):
    first = tmp_path / "a.json"
    save_checkpoint(trained_model, first)
    second = tmp_path / "b.json"
    save_checkpoint(load_checkpoint(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_truncated_file_rejected(trained_model, tmp_path):
    payload = checkpoint_bytes(trained_model)
    path = tmp_path / "broken.json"
    path.write_bytes(payload[: len(payload) // 2])
    with pytest.raises(CheckpointError, match="JSON"):
        load_checkpoint(path)


def test_version_mismatch_rejected(trained_model, tmp_path):
    doc = json.loads(checkpoint_bytes(trained_model))
    doc["format_version"] = 999
    path = tmp_path / "versioned.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)


def test_corrupt_array_length_rejected(trained_model, tmp_path):
    doc = json.loads(checkpoint_bytes(trained_model))
    doc["params"]["head.w_forward"]["data"].pop()
    path = tmp_path / "short.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="shape"):
        load_checkpoint(path)


def test_missing_parameter_rejected(trained_model, tmp_path):
    doc = json.loads(checkpoint_bytes(trained_model))
    del doc["params"]["fwd.w_f"]
    path = tmp_path / "missing.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="fwd.w_f"):
        load_checkpoint(path)
