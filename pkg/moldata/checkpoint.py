"""
Single-file binary checkpoints.

Layout (little endian):

    magic        8 bytes   b"ASEMOLCK"
    version      uint16
    header_len   uint32
    header       header_len bytes of UTF-8 JSON (sorted keys, compact)
    payload      float64 values of every block, in block-table order
    crc32        uint32 over all preceding bytes

The header holds the training configuration, phase marker, task names,
random-generator state, frozen motif assignments and the block table
(name, shape, offset and count in float64 units).
"""
import json
import logging
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

MAGIC = b"ASEMOLCK"
VERSION = 1
_PREAMBLE = struct.Struct("<8sHI")


class CheckpointIntegrityError(ValueError):
    pass


class UnsupportedCheckpointVersion(ValueError):
    def __init__(self, version):
        super().__init__(f"checkpoint format version {version} is not supported (expected {VERSION})")
        self.version = version


@dataclass
class Checkpoint:
    config: dict
    phase: str
    task_names: list
    parameters: dict
    rng_state: dict = field(default_factory=dict)
    motifs: list = None
    metadata: dict = field(default_factory=dict)

    def to_bytes(self):
        blocks, chunks, offset = [], [], 0
        for name, value in self.parameters.items():
            array = np.ascontiguousarray(value, dtype="<f8")
            blocks.append({"name": name, "shape": list(array.shape), "offset": offset, "count": int(array.size)})
            chunks.append(array.tobytes())
            offset += array.size
        header = json.dumps(
            {
                "config": self.config,
                "phase": self.phase,
                "task_names": list(self.task_names),
                "rng_state": self.rng_state,
                "motifs": self.motifs,
                "metadata": self.metadata,
                "blocks": blocks,
            },
            sort_keys=True,
            separators=(",", ":"),
            allow_nan=False,
        ).encode("utf-8")
        body = _PREAMBLE.pack(MAGIC, VERSION, len(header)) + header + b"".join(chunks)
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data):
        if len(data) < _PREAMBLE.size + 4:
            raise CheckpointIntegrityError(f"checkpoint is truncated ({len(data)} bytes)")
        magic, version, header_len = _PREAMBLE.unpack_from(data)
        if magic != MAGIC:
            raise CheckpointIntegrityError("not a checkpoint file (bad magic bytes)")
        if version != VERSION:
            raise UnsupportedCheckpointVersion(version)
        header_end = _PREAMBLE.size + header_len
        if header_end + 4 > len(data):
            raise CheckpointIntegrityError("checkpoint is truncated inside the header")
        (stored_crc,) = struct.unpack_from("<I", data, len(data) - 4)
        if zlib.crc32(data[:-4]) != stored_crc:
            raise CheckpointIntegrityError("checksum mismatch; the file is corrupt or truncated")
        try:
            header = json.loads(data[_PREAMBLE.size:header_end].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointIntegrityError(f"unreadable header: {exc}") from exc

        payload_bytes = data[header_end:-4]
        if len(payload_bytes) % 8:
            raise CheckpointIntegrityError("payload length is not a whole number of float64 values")
        payload = np.frombuffer(payload_bytes, dtype="<f8")
        missing = {"blocks", "config", "phase", "task_names", "rng_state", "motifs", "metadata"} - set(header)
        if missing:
            raise CheckpointIntegrityError(f"header lacks {sorted(missing)}")
        parameters = {}
        for block in header["blocks"]:
            start, count = block["offset"], block["count"]
            if start < 0 or start + count > payload.size or int(np.prod(block["shape"])) != count:
                raise CheckpointIntegrityError(f"block '{block['name']}' does not fit the payload")
            parameters[block["name"]] = payload[start:start + count].reshape(block["shape"]).astype(np.float64)
        return cls(
            config=header["config"],
            phase=header["phase"],
            task_names=header["task_names"],
            parameters=parameters,
            rng_state=header["rng_state"],
            motifs=header["motifs"],
            metadata=header["metadata"],
        )


def save_checkpoint(checkpoint, path):
    data = checkpoint.to_bytes()
    with open(path, "wb") as handle:
        handle.write(data)
    logger.info(f"Saved checkpoint ({len(data)} bytes, {len(checkpoint.parameters)} tensors) to {path}")
    return len(data)


def load_checkpoint(path):
    with open(path, "rb") as handle:
        return Checkpoint.from_bytes(handle.read())
