"""Versioned checkpoint container for flow models.

Layout, all integers little-endian:

    bytes 0..6    magic "MGFLOW1"
    bytes 7..10   uint32 format version
    bytes 11..14  uint32 header length H
    H bytes       UTF-8 JSON header: {"config": {...}, "metadata": {...},
                  "arrays": [{"name", "shape", "offset", "count"}, ...]}
    payload       all parameter arrays as float64 little-endian, in header order
    32 bytes      SHA-256 over header bytes + payload

Load verifies in a fixed order (magic, version, checksum, then shapes), so a
truncated or corrupted file fails the checksum before any model is built and
never yields a partially populated model.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np
import torch

from molscope.flow import FlowConfig, FlowModel, new_model

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "CheckpointError",
    "BadMagicError",
    "VersionMismatchError",
    "ChecksumError",
    "ShapeMismatchError",
    "save_checkpoint",
    "load_checkpoint",
]

MAGIC = b"MGFLOW1"
FORMAT_VERSION = 1
_DIGEST_LEN = 32


class CheckpointError(Exception):
    """Base class for checkpoint load/save failures."""


class BadMagicError(CheckpointError):
    pass


class VersionMismatchError(CheckpointError):
    pass


class ChecksumError(CheckpointError):
    pass


class ShapeMismatchError(CheckpointError):
    pass


def save_checkpoint(model: FlowModel, path: str | Path, metadata: dict | None = None) -> None:
    """Serialize config, metadata, and parameters; the write is atomic."""
    arrays = model.named_arrays()
    index = []
    chunks = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f8")
        index.append(
            {"name": name, "shape": list(arr.shape), "offset": offset, "count": arr.size}
        )
        chunks.append(arr.tobytes())
        offset += arr.size
    header = {
        "config": {
            "n_max": model.config.n_max,
            "k": model.config.k,
            "c": model.config.c,
            "n_bond_layers": model.config.n_bond_layers,
            "n_atom_layers": model.config.n_atom_layers,
            "hidden_width": model.config.hidden_width,
            "dequant_gamma": model.config.dequant_gamma,
            "seed": model.config.seed,
        },
        "metadata": metadata or {},
        "arrays": index,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(chunks)
    digest = hashlib.sha256(header_bytes + payload).digest()

    path = Path(path)
    blob = (
        MAGIC
        + struct.pack("<I", FORMAT_VERSION)
        + struct.pack("<I", len(header_bytes))
        + header_bytes
        + payload
        + digest
    )
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str | Path) -> tuple[FlowModel, dict]:
    """Load and verify a checkpoint; returns (model, metadata)."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 8 + _DIGEST_LEN or data[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{path}: not a MGFLOW1 checkpoint")
    pos = len(MAGIC)
    (version,) = struct.unpack_from("<I", data, pos)
    pos += 4
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {version}, this build reads {FORMAT_VERSION}"
        )
    (header_len,) = struct.unpack_from("<I", data, pos)
    pos += 4
    body, digest = data[pos : len(data) - _DIGEST_LEN], data[len(data) - _DIGEST_LEN :]
    if len(body) < header_len or hashlib.sha256(body).digest() != digest:
        raise ChecksumError(f"{path}: checksum mismatch (file truncated or corrupted)")

    header = json.loads(body[:header_len].decode("utf-8"))
    payload = body[header_len:]
    try:
        config = FlowConfig(**header["config"])
    except (TypeError, ValueError) as exc:
        raise ShapeMismatchError(f"{path}: bad config in header: {exc}") from exc

    model = new_model(config)
    expected = model.named_arrays()
    names_in_file = {a["name"] for a in header["arrays"]}
    if names_in_file != set(expected):
        raise ShapeMismatchError(
            f"{path}: parameter names do not match the config's architecture"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    state = {}
    for item in header["arrays"]:
        shape = tuple(item["shape"])
        if expected[item["name"]].shape != shape:
            raise ShapeMismatchError(
                f"{path}: array {item['name']} has shape {shape}, "
                f"expected {expected[item['name']].shape}"
            )
        start, count = item["offset"], item["count"]
        if count != int(np.prod(shape, dtype=np.int64)) or start + count > flat.size:
            raise ShapeMismatchError(f"{path}: array {item['name']} index out of bounds")
        state[item["name"]] = torch.as_tensor(flat[start : start + count].copy()).reshape(shape)
    model.net.load_state_dict(state)
    return model, header["metadata"]
