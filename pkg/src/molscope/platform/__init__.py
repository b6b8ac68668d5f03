"""Persistence, dataset ingestion, the HTTP API, background jobs, and the CLI."""

from molscope.platform.checkpoint import (
    CheckpointError,
    BadMagicError,
    ChecksumError,
    ShapeMismatchError,
    VersionMismatchError,
    load_checkpoint,
    save_checkpoint,
)
from molscope.platform.dataset import DatasetEntry, RejectedLine, ingest_dataset

__all__ = [
    "CheckpointError",
    "BadMagicError",
    "ChecksumError",
    "ShapeMismatchError",
    "VersionMismatchError",
    "load_checkpoint",
    "save_checkpoint",
    "DatasetEntry",
    "RejectedLine",
    "ingest_dataset",
]
