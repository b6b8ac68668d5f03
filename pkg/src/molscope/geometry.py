"""Deterministic molecule geometry: 2D layout, approximate 3D, xyz, SVG.

Nothing here aspires to physical accuracy; the point is a recognizable,
bit-reproducible depiction. Both minimizers are plain fixed-step descent
with no randomness beyond a hash-derived z jitter, so identical graphs give
identical bytes and golden-file tests are legitimate. Coordinates are heavy
atoms only; implicit hydrogens are never placed.
"""

from __future__ import annotations

import math

import numpy as np

from molscope.chem import fnv1a64
from molscope.molgraph import GraphStructureError, MolecularGraph

__all__ = [
    "BOND_LENGTHS",
    "bond_length",
    "layout_2d",
    "embed_3d",
    "embed_energy",
    "to_xyz",
    "render_svg",
]

# Ideal single-bond lengths in angstroms for listed pairs; multiple bonds are
# listed explicitly only where a standard value exists.
BOND_LENGTHS: dict[tuple[str, str, int], float] = {
    ("C", "C", 1): 1.54,
    ("C", "C", 2): 1.34,
    ("C", "C", 3): 1.20,
    ("C", "N", 1): 1.47,
    ("C", "O", 1): 1.43,
    ("C", "F", 1): 1.35,
    ("N", "N", 1): 1.45,
    ("N", "O", 1): 1.40,
    ("O", "O", 1): 1.48,
}

_DEFAULT_SINGLE = 1.50
_ORDER_SCALE = {1: 1.0, 2: 0.87, 3: 0.78}

_LAYOUT_ITERS = 500
_LAYOUT_STEP = 0.05
_LAYOUT_REPULSION = 0.02  # bonded-pair equilibrium stays within 5% of 1.0

_EMBED_ITERS = 1000
_EMBED_STEP = 0.01
_EMBED_CUTOFF = 2.5
_EMBED_REPULSION = 0.05
_EMBED_SCALE = 1.5
_JITTER = 0.1

_EPS = 1e-9


def bond_length(sym_a: str, sym_b: str, order: int) -> float:
    """Ideal length for a bond; unlisted pairs fall back to scaled defaults."""
    a, b = sorted((sym_a, sym_b))
    explicit = BOND_LENGTHS.get((a, b, order))
    if explicit is not None:
        return explicit
    single = BOND_LENGTHS.get((a, b, 1), _DEFAULT_SINGLE)
    return single * _ORDER_SCALE[order]


def _require_drawable(graph: MolecularGraph) -> None:
    if graph.n_atoms == 0:
        raise GraphStructureError("cannot lay out an empty graph")
    if not graph.is_connected():
        raise GraphStructureError("layout requires a connected graph")


def layout_2d(graph: MolecularGraph) -> np.ndarray:
    """Force-directed 2D coordinates, centroid at the origin, shape (n, 2).

    Circular initialization (atom i at angle 2*pi*i/n on the unit circle),
    unit-length bond springs, inverse-square repulsion between all pairs,
    fixed 500 iterations at step 0.05.
    """
    _require_drawable(graph)
    n = graph.n_atoms
    angles = 2.0 * math.pi * np.arange(n) / n
    pos = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    bonds = sorted(graph.bonds)
    for _ in range(_LAYOUT_ITERS):
        force = np.zeros_like(pos)
        for b in bonds:
            delta = pos[b.j] - pos[b.i]
            d = max(float(np.linalg.norm(delta)), _EPS)
            f = (d - 1.0) * (delta / d)
            force[b.i] += f
            force[b.j] -= f
        for i in range(n):
            for j in range(i + 1, n):
                delta = pos[j] - pos[i]
                d = max(float(np.linalg.norm(delta)), _EPS)
                f = (_LAYOUT_REPULSION / (d * d)) * (delta / d)
                force[i] -= f
                force[j] += f
        pos += _LAYOUT_STEP * force
    return pos - pos.mean(axis=0)


def _ideal_lengths(graph: MolecularGraph) -> list[tuple[int, int, float]]:
    return [
        (b.i, b.j, bond_length(graph.atoms[b.i].symbol, graph.atoms[b.j].symbol, b.order))
        for b in sorted(graph.bonds)
    ]


def embed_energy(graph: MolecularGraph, coords: np.ndarray) -> float:
    """Objective the 3D embedding descends: springs plus hinge repulsion."""
    bonded = {(b.i, b.j) for b in graph.bonds}
    e = 0.0
    for i, j, ideal in _ideal_lengths(graph):
        d = float(np.linalg.norm(coords[j] - coords[i]))
        e += 0.5 * (d - ideal) ** 2
    n = graph.n_atoms
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) in bonded:
                continue
            d = float(np.linalg.norm(coords[j] - coords[i]))
            if d < _EMBED_CUTOFF:
                e += 0.5 * _EMBED_REPULSION * (_EMBED_CUTOFF - d) ** 2
    return e


def embed_3d(graph: MolecularGraph) -> np.ndarray:
    """Approximate 3D coordinates in angstroms, centroid at origin, (n, 3).

    Starts from the 2D layout scaled by 1.5 A with a deterministic z jitter
    z(i) = 0.1*((fnv1a64(str(i)) mod 1000)/1000 - 0.5), then runs 1000
    fixed-step descent iterations on bond springs toward the ideal-length
    table plus a soft repulsion hinge (cutoff 2.5 A) for non-bonded pairs.
    """
    _require_drawable(graph)
    n = graph.n_atoms
    flat = layout_2d(graph) * _EMBED_SCALE
    z = np.array(
        [_JITTER * ((fnv1a64(str(i).encode("ascii")) % 1000) / 1000.0 - 0.5) for i in range(n)]
    )
    pos = np.column_stack([flat, z])
    springs = _ideal_lengths(graph)
    bonded = {(b.i, b.j) for b in graph.bonds}
    nonbonded = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in bonded]
    for _ in range(_EMBED_ITERS):
        force = np.zeros_like(pos)
        for i, j, ideal in springs:
            delta = pos[j] - pos[i]
            d = max(float(np.linalg.norm(delta)), _EPS)
            f = (d - ideal) * (delta / d)
            force[i] += f
            force[j] -= f
        for i, j in nonbonded:
            delta = pos[j] - pos[i]
            d = max(float(np.linalg.norm(delta)), _EPS)
            if d < _EMBED_CUTOFF:
                f = (_EMBED_REPULSION * (_EMBED_CUTOFF - d)) * (delta / d)
                force[i] -= f
                force[j] += f
        pos += _EMBED_STEP * force
    return pos - pos.mean(axis=0)


def to_xyz(graph: MolecularGraph, coords: np.ndarray, comment: str = "molscope") -> str:
    """Bit-exact xyz text: count line, comment line, "SYMBOL %.4f %.4f %.4f".

    Formatting goes through '%.4f'-style fixed point, which ignores locale,
    so the bytes are stable across machines.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if "\n" in comment or "\r" in comment:
        raise ValueError("comment must not contain newlines")
    if coords.shape != (graph.n_atoms, 3):
        raise ValueError(
            f"coords shape {coords.shape} does not match {graph.n_atoms} atoms"
        )
    lines = [str(graph.n_atoms), comment]
    for el, (x, y, z) in zip(graph.atoms, coords):
        lines.append(f"{el.symbol} {x:.4f} {y:.4f} {z:.4f}")
    return "\n".join(lines) + "\n"


_ELEMENT_FILL = {"C": "#4b5563", "N": "#2563eb", "O": "#dc2626", "F": "#16a34a"}
_SCALE = 40.0
_ATOM_R = 9.0
_HIGHLIGHT_R = 13.5
# floor on the canvas margin; must exceed the highlight ring's outer edge
# (13.5 radius + half the 2.5 stroke) so nothing clips on tiny molecules
_MARGIN_MIN_PX = 16.0
_BOND_OFFSETS = {1: (0.0,), 2: (-2.5, 2.5), 3: (-5.0, 0.0, 5.0)}


def render_svg(
    graph: MolecularGraph,
    layout: np.ndarray,
    highlight: set[int] | frozenset[int] | None = None,
) -> str:
    """Deterministic standalone SVG depiction of a laid-out molecule.

    Bonds (1-3 parallel segments by order) are emitted before atoms so atoms
    paint on top; element order, attribute order, and number formatting are
    all fixed, so identical inputs give byte-identical output.
    """
    layout = np.asarray(layout, dtype=np.float64)
    if layout.shape != (graph.n_atoms, 2):
        raise ValueError(
            f"layout shape {layout.shape} does not match {graph.n_atoms} atoms"
        )
    highlight = set() if highlight is None else set(highlight)
    for idx in highlight:
        if not (0 <= idx < graph.n_atoms):
            raise ValueError(f"highlight index {idx} out of range")

    xs, ys = layout[:, 0], layout[:, 1]
    span = max(float(xs.max() - xs.min()), float(ys.max() - ys.min()))
    margin = max(0.1 * span, _MARGIN_MIN_PX / _SCALE)
    min_x, max_y = float(xs.min()) - margin, float(ys.max()) + margin
    width = (float(xs.max() - xs.min()) + 2 * margin) * _SCALE
    height = (float(ys.max() - ys.min()) + 2 * margin) * _SCALE

    def px(p: np.ndarray) -> tuple[float, float]:
        return (p[0] - min_x) * _SCALE, (max_y - p[1]) * _SCALE

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" height="{height:.1f}" '
        f'viewBox="0 0 {width:.1f} {height:.1f}">',
        f'<rect width="{width:.1f}" height="{height:.1f}" fill="#ffffff"/>',
    ]
    for b in sorted(graph.bonds):
        (x1, y1), (x2, y2) = px(layout[b.i]), px(layout[b.j])
        dx, dy = x2 - x1, y2 - y1
        d = max(math.hypot(dx, dy), 1e-9)
        nx, ny = -dy / d, dx / d
        for off in _BOND_OFFSETS[b.order]:
            out.append(
                f'<line class="bond" x1="{x1 + off * nx:.2f}" y1="{y1 + off * ny:.2f}" '
                f'x2="{x2 + off * nx:.2f}" y2="{y2 + off * ny:.2f}" '
                f'stroke="#374151" stroke-width="2"/>'
            )
    for i, el in enumerate(graph.atoms):
        cx, cy = px(layout[i])
        out.append(
            f'<circle class="atom" cx="{cx:.2f}" cy="{cy:.2f}" r="{_ATOM_R:.1f}" '
            f'fill="{_ELEMENT_FILL[el.symbol]}"/>'
        )
        out.append(
            f'<text x="{cx:.2f}" y="{cy:.2f}" fill="#ffffff" font-size="10" '
            f'font-family="sans-serif" text-anchor="middle" dominant-baseline="central">'
            f"{el.symbol}</text>"
        )
        if i in highlight:
            out.append(
                f'<circle class="highlight" cx="{cx:.2f}" cy="{cy:.2f}" '
                f'r="{_HIGHLIGHT_R:.1f}" fill="none" stroke="#f59e0b" stroke-width="2.5"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
