import struct

import numpy as np
import pytest

from moldata.checkpoint import (
    MAGIC,
    VERSION,
    Checkpoint,
    CheckpointIntegrityError,
    UnsupportedCheckpointVersion,
    load_checkpoint,
    save_checkpoint,
)


@pytest.fixture
def checkpoint():
    rng = np.random.default_rng(3)
    return Checkpoint(
        config={"seed": 3, "experts": 2, "split_ratios": [0.8, 0.1, 0.1]},
        phase="prediction",
        task_names=["a", "b"],
        parameters={"encoder.w": rng.normal(size=(4, 3)), "moe.b": rng.normal(size=(1, 2)), "eps": np.zeros((1, 1))},
        rng_state=np.random.default_rng(5).bit_generator.state,
        motifs=[{"positive_fragments": [0], "negative_fragments": [1], "positive_nodes": [0, 1],
                 "negative_nodes": [2], "degenerate": False}],
        metadata={"dataset_digest": "abc"},
    )


def test_layout_starts_with_magic_and_version(checkpoint):
    data = checkpoint.to_bytes()
    assert data[:8] == MAGIC
    assert struct.unpack_from("<H", data, 8)[0] == VERSION


def test_round_trip_is_byte_identical(checkpoint, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(checkpoint, path)
    restored = load_checkpoint(path)
    assert restored.to_bytes() == checkpoint.to_bytes()
    for name, value in checkpoint.parameters.items():
        assert np.array_equal(restored.parameters[name], value)
    assert restored.task_names == ["a", "b"]
    assert restored.motifs == checkpoint.motifs


def test_restored_generator_state_continues_the_stream(checkpoint):
    restored = Checkpoint.from_bytes(checkpoint.to_bytes())
    original = np.random.default_rng(5)
    resumed = np.random.default_rng(0)
    resumed.bit_generator.state = restored.rng_state
    assert np.array_equal(original.normal(size=4), resumed.normal(size=4))


def test_bumped_version_is_unsupported(checkpoint):
    data = bytearray(checkpoint.to_bytes())
    struct.pack_into("<H", data, 8, VERSION + 1)
    with pytest.raises(UnsupportedCheckpointVersion) as info:
        Checkpoint.from_bytes(bytes(data))
    assert info.value.version == VERSION + 1


@pytest.mark.parametrize("cut", [1, 9, 100])
def test_truncated_file_is_an_integrity_error(checkpoint, cut):
    data = checkpoint.to_bytes()
    with pytest.raises(CheckpointIntegrityError):
        Checkpoint.from_bytes(data[:-cut])


def test_flipped_payload_byte_fails_the_checksum(checkpoint):
    data = bytearray(checkpoint.to_bytes())
    data[-12] ^= 0xFF
    with pytest.raises(CheckpointIntegrityError, match="checksum"):
        Checkpoint.from_bytes(bytes(data))


def test_bad_magic(checkpoint):
    data = b"NOTACKPT" + checkpoint.to_bytes()[8:]
    with pytest.raises(CheckpointIntegrityError, match="magic"):
        Checkpoint.from_bytes(data)


def test_tiny_input():
    with pytest.raises(CheckpointIntegrityError, match="truncated"):
        Checkpoint.from_bytes(b"ASE")
