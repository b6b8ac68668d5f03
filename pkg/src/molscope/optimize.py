"""Constrained latent-space hill climbing over registered property scores.

The decode path goes through argmax discretization and validity correction,
so the objective is piecewise constant in z and gradient steps have nothing
to push on; proposals are random perturbations instead. The incumbent only
moves on strict improvement, which makes the best-score sequence exactly
monotone, and every candidate below the similarity floor is discarded before
scoring, so accepted entries can never violate the constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from molscope.chem import PROPERTY_NAMES, fingerprint, property_score, tanimoto
from molscope.flow import FlowModel, LatentPoint, decode_batch
from molscope.latent import ExplorationCell, reconstruct
from molscope.molgraph import (
    MolecularGraph,
    from_tensors,
    to_smiles,
    validity_correct,
)

__all__ = ["OptimizeSpec", "TrajectoryEntry", "Trajectory", "optimize"]


@dataclass(frozen=True)
class OptimizeSpec:
    property_name: str = "mol_weight"
    maximize: bool = True
    steps: int = 20
    step_size: float = 0.4
    sim_min: float = 0.3
    proposals_per_step: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.property_name not in PROPERTY_NAMES:
            raise ValueError(f"unknown property {self.property_name!r}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if not (0.0 <= self.sim_min <= 1.0):
            raise ValueError("sim_min must be in [0, 1]")
        if self.proposals_per_step < 1:
            raise ValueError("proposals_per_step must be >= 1")


@dataclass(frozen=True)
class TrajectoryEntry:
    step_index: int
    cell: ExplorationCell
    score: float
    accepted: bool


@dataclass(frozen=True)
class Trajectory:
    """Ordered optimization record; entry 0 is always the seed reconstruction."""

    entries: tuple[TrajectoryEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TrajectoryEntry]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> TrajectoryEntry:
        return self.entries[i]

    def incumbent_scores(self) -> list[float]:
        """Best accepted score after each entry (entry 0 included)."""
        out = []
        best = self.entries[0].score
        for e in self.entries:
            if e.accepted:
                best = e.score
            out.append(best)
        return out


def optimize(
    model: FlowModel,
    seed_graph: MolecularGraph,
    spec: OptimizeSpec,
    on_step: Callable[[TrajectoryEntry], None] | None = None,
) -> Trajectory:
    """Hill-climb ``spec.steps`` steps from the seed's deterministic encoding.

    Each step decodes ``proposals_per_step`` perturbations z + step_size*eps
    in one batch, corrects them, drops candidates with Tanimoto(seed) below
    sim_min, and moves only on strict improvement. The recorded cell is the
    step's best surviving candidate (the incumbent when nothing survives);
    on_step sees each entry as it is appended, in step order.
    """
    better = (lambda a, b: a > b) if spec.maximize else (lambda a, b: a < b)
    seed_fp = fingerprint(seed_graph)

    cell0 = reconstruct(model, seed_graph)
    score0 = property_score(cell0.molecule, spec.property_name).value
    entries = [TrajectoryEntry(0, cell0, score0, True)]
    if on_step is not None:
        on_step(entries[0])

    current_z = np.array(cell0.z.z)
    current_cell, current_score = cell0, score0
    rng = np.random.default_rng(spec.seed)

    for step in range(1, spec.steps + 1):
        eps = rng.standard_normal((spec.proposals_per_step, current_z.shape[0]))
        atom_b, bond_b = decode_batch(model, current_z + spec.step_size * eps)
        best: tuple[np.ndarray, ExplorationCell, float] | None = None
        for row in range(spec.proposals_per_step):
            graph, corrected = validity_correct(from_tensors(atom_b[row], bond_b[row]))
            sim = tanimoto(seed_fp, fingerprint(graph))
            if sim < spec.sim_min:
                continue
            score = property_score(graph, spec.property_name).value
            if best is not None and not better(score, best[2]):
                continue
            z_row = current_z + spec.step_size * eps[row]
            cell = ExplorationCell(
                z=LatentPoint(z_row),
                molecule=graph,
                smiles=to_smiles(graph) if graph.n_atoms else "",
                similarity=sim,
                corrected=corrected,
                position=(step,),
            )
            best = (z_row, cell, score)

        if best is not None and better(best[2], current_score):
            current_z, current_cell, current_score = np.array(best[0]), best[1], best[2]
            entry = TrajectoryEntry(step, best[1], best[2], True)
        elif best is not None:
            entry = TrajectoryEntry(step, best[1], best[2], False)
        else:
            entry = TrajectoryEntry(step, current_cell, current_score, False)
        entries.append(entry)
        if on_step is not None:
            on_step(entry)

    return Trajectory(tuple(entries))
