"""Latent-space exploration: reconstruction, neighborhood grids, interpolation.

Every operation here is a pure function of (model, inputs): encode is always
run in deterministic mode, grid directions come from a seeded generator, and
decoded graphs always pass through validity correction. A cell's ``position``
is presentation metadata and is excluded from equality, so the grid's center
cell compares equal to ``reconstruct(seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from molscope.chem import Fingerprint, fingerprint, tanimoto
from molscope.flow import FlowModel, LatentPoint, decode_batch, encode
from molscope.molgraph import (
    MolecularGraph,
    from_tensors,
    to_smiles,
    to_tensors,
    validity_correct,
)

__all__ = [
    "ExplorationCell",
    "GridSpec",
    "reconstruct",
    "neighborhood_grid",
    "grid_from_directions",
    "orthonormal_directions",
    "interpolate",
]


@dataclass(frozen=True)
class ExplorationCell:
    """One decoded point of an exploration: latent, molecule, and context.

    ``similarity`` is Tanimoto against the exploration's declared baseline
    (grid seed, or the left interpolation seed), so the same latent point can
    appear with different similarities in different explorations. ``smiles``
    is empty for the zero-atom molecule, which has no textual form.
    """

    z: LatentPoint
    molecule: MolecularGraph
    smiles: str
    similarity: float
    corrected: bool
    position: tuple[int, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class GridSpec:
    """Neighborhood grid parameters; steps is odd so the seed sits centered."""

    steps: int = 5
    delta: float = 0.5
    direction_seed: int = 0

    def __post_init__(self) -> None:
        if self.steps < 1 or self.steps % 2 == 0:
            raise ValueError(f"steps must be an odd integer >= 1, got {self.steps}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


def _seed_latent(model: FlowModel, graph: MolecularGraph) -> LatentPoint:
    z, _ = encode(model, to_tensors(graph, model.config.n_max), deterministic=True)
    return z


def _cells_from_latents(
    model: FlowModel,
    zs: np.ndarray,
    baseline: Fingerprint,
    positions: list[tuple[int, ...]],
) -> list[ExplorationCell]:
    atom_b, bond_b = decode_batch(model, zs)
    cells = []
    for row, atom, bond, pos in zip(zs, atom_b, bond_b, positions):
        graph, corrected = validity_correct(from_tensors(atom, bond))
        smiles = to_smiles(graph) if graph.n_atoms else ""
        sim = tanimoto(baseline, fingerprint(graph))
        cells.append(
            ExplorationCell(
                z=LatentPoint(row),
                molecule=graph,
                smiles=smiles,
                similarity=sim,
                corrected=corrected,
                position=pos,
            )
        )
    return cells


def reconstruct(model: FlowModel, graph: MolecularGraph) -> ExplorationCell:
    """Encode deterministically, decode, correct; similarity vs. the input."""
    z = _seed_latent(model, graph)
    return _cells_from_latents(model, z.z[None, :], fingerprint(graph), [()])[0]


def orthonormal_directions(dim: int, direction_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal latent directions from a seeded generator.

    Standard-normal draws followed by Gram-Schmidt; degenerate draws are
    redrawn (astronomically unlikely, but keeps the function total).
    """
    rng = np.random.default_rng(direction_seed)
    while True:
        d1 = rng.standard_normal(dim)
        n1 = np.linalg.norm(d1)
        if n1 > 1e-9:
            d1 = d1 / n1
            break
    while True:
        d2 = rng.standard_normal(dim)
        d2 = d2 - (d2 @ d1) * d1
        n2 = np.linalg.norm(d2)
        if n2 > 1e-9:
            return d1, d2 / n2


def grid_from_directions(
    model: FlowModel,
    seed_graph: MolecularGraph,
    d1: np.ndarray,
    d2: np.ndarray,
    steps: int,
    delta: float,
) -> list[list[ExplorationCell]]:
    """Grid around the seed along two explicit directions.

    cell(r, c) decodes z0 + (r-m)*delta*d1 + (c-m)*delta*d2 with m the middle
    index; swapping d1 and d2 transposes the grid.
    """
    z0 = _seed_latent(model, seed_graph)
    m = (steps - 1) // 2
    baseline = fingerprint(seed_graph)
    zs = np.empty((steps * steps, z0.dim), dtype=np.float64)
    positions: list[tuple[int, ...]] = []
    for r in range(steps):
        for c in range(steps):
            # sum the direction terms before adding the center so that
            # swapping d1/d2 transposes the grid bit-for-bit (float addition
            # commutes even though it does not associate)
            offset = ((r - m) * delta) * d1 + ((c - m) * delta) * d2
            zs[r * steps + c] = z0.z + offset
            positions.append((r, c))
    flat = _cells_from_latents(model, zs, baseline, positions)
    return [flat[r * steps : (r + 1) * steps] for r in range(steps)]


def neighborhood_grid(
    model: FlowModel, seed_graph: MolecularGraph, spec: GridSpec
) -> list[list[ExplorationCell]]:
    """steps x steps grid of decoded neighbors with the seed at the center."""
    d1, d2 = orthonormal_directions(model.config.latent_dim, spec.direction_seed)
    return grid_from_directions(model, seed_graph, d1, d2, spec.steps, spec.delta)


def interpolate(
    model: FlowModel,
    graph_a: MolecularGraph,
    graph_b: MolecularGraph,
    steps: int,
) -> list[ExplorationCell]:
    """Linear latent path from a to b in ``steps`` cells.

    Cell i decodes (1-l)*z_a + l*z_b with l = i/(steps-1), so the endpoints
    decode exactly the two seed latents. Similarity for every cell, endpoints
    included, is measured against graph_a (the left seed is the baseline).
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    za = _seed_latent(model, graph_a)
    zb = _seed_latent(model, graph_b)
    baseline = fingerprint(graph_a)
    degenerate = np.array_equal(za.z, zb.z)
    zs = np.empty((steps, za.dim), dtype=np.float64)
    positions = []
    for i in range(steps):
        lam = i / (steps - 1)
        if degenerate:
            # (1-l)*z + l*z drifts by an ulp for l outside {0, 1}; a path
            # between identical endpoints must hold every cell at that point
            zs[i] = za.z
        else:
            zs[i] = (1.0 - lam) * za.z + lam * zb.z
        positions.append((i,))
    return _cells_from_latents(model, zs, baseline, positions)
