"""Dataset ingestion: one SMILES per line, optional tab-separated name."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from molscope.molgraph import MolecularGraph, SmilesError, parse_smiles

__all__ = ["DatasetEntry", "RejectedLine", "ingest_dataset"]


@dataclass(frozen=True)
class DatasetEntry:
    id: int
    name: str | None
    smiles: str
    graph: MolecularGraph


@dataclass(frozen=True)
class RejectedLine:
    line_no: int
    text: str
    reason: str


def ingest_dataset(path: str | Path, n_max: int = 9) -> tuple[list[DatasetEntry], list[RejectedLine]]:
    """Parse a corpus file into entries plus a rejection report.

    Blank lines and lines starting with "#" are skipped. Entries get
    sequential ids in file order; rejects carry 1-based line numbers and the
    parser's reason. Molecules larger than n_max are rejected, not truncated.
    """
    entries: list[DatasetEntry] = []
    rejects: list[RejectedLine] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        smiles, _, name = line.partition("\t")
        smiles = smiles.strip()
        name = name.strip() or None
        try:
            graph = parse_smiles(smiles)
        except SmilesError as exc:
            rejects.append(RejectedLine(line_no, smiles, str(exc)))
            continue
        if graph.n_atoms > n_max:
            rejects.append(
                RejectedLine(line_no, smiles, f"{graph.n_atoms} atoms exceeds n_max={n_max}")
            )
            continue
        entries.append(DatasetEntry(len(entries), name, smiles, graph))
    return entries, rejects
