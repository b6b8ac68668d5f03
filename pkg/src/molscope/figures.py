"""Composite figures: grid/path SVG sheets and training/optimization reports.

The SVG composers reuse the single-molecule renderer and are as deterministic
as it is. The report writers produce a PNG chart plus a CSV of the same
numbers next to it; the CSV is the stable, diffable record and the chart is
for eyeballing.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from molscope.flow import TrainReport
from molscope.geometry import layout_2d, render_svg
from molscope.latent import ExplorationCell
from molscope.optimize import Trajectory

__all__ = [
    "compose_grid_svg",
    "compose_path_svg",
    "write_train_report",
    "write_optimize_report",
]

_TILE_W = 190.0
_TILE_H = 210.0
_CAPTION_H = 34.0
_PAD = 6.0

_SIZE_RE = re.compile(r'width="([0-9.]+)" height="([0-9.]+)"')


def _molecule_body(cell: ExplorationCell) -> tuple[str, float, float]:
    """Inner SVG markup for a cell's molecule plus its natural size."""
    if cell.molecule.n_atoms == 0:
        return (
            '<text x="50" y="50" font-size="12" font-family="sans-serif" '
            'text-anchor="middle" fill="#9ca3af">(empty)</text>',
            100.0,
            100.0,
        )
    svg = render_svg(cell.molecule, layout_2d(cell.molecule))
    lines = svg.strip().split("\n")
    m = _SIZE_RE.search(lines[0])
    assert m is not None
    return "\n".join(lines[1:-1]), float(m.group(1)), float(m.group(2))


def _tile(cell: ExplorationCell, x: float, y: float, label: str) -> list[str]:
    body, w, h = _molecule_body(cell)
    draw_h = _TILE_H - _CAPTION_H - 2 * _PAD
    draw_w = _TILE_W - 2 * _PAD
    out = [
        f'<g transform="translate({x:.1f},{y:.1f})">',
        f'<rect width="{_TILE_W:.1f}" height="{_TILE_H:.1f}" fill="#ffffff" '
        f'stroke="#d1d5db" stroke-width="1"/>',
        f'<svg x="{_PAD:.1f}" y="{_PAD:.1f}" width="{draw_w:.1f}" height="{draw_h:.1f}" '
        f'viewBox="0 0 {w:.1f} {h:.1f}" preserveAspectRatio="xMidYMid meet">',
        body,
        "</svg>",
        f'<text x="{_PAD:.1f}" y="{_TILE_H - 20:.1f}" font-size="11" '
        f'font-family="monospace" fill="#111827">{_escape(cell.smiles) or "(empty)"}</text>',
        f'<text x="{_PAD:.1f}" y="{_TILE_H - 7:.1f}" font-size="11" '
        f'font-family="sans-serif" fill="#6b7280">{label}</text>',
        "</g>",
    ]
    return out


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def compose_grid_svg(grid: Sequence[Sequence[ExplorationCell]]) -> str:
    """One SVG sheet of grid tiles, row-major, similarity badge per tile."""
    rows, cols = len(grid), len(grid[0])
    width, height = cols * _TILE_W, rows * _TILE_H
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" '
        f'height="{height:.1f}" viewBox="0 0 {width:.1f} {height:.1f}">'
    ]
    for r, row in enumerate(grid):
        for c, cell in enumerate(row):
            label = f"({r},{c}) sim {cell.similarity:.2f}" + (" *" if cell.corrected else "")
            out.extend(_tile(cell, c * _TILE_W, r * _TILE_H, label))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def compose_path_svg(cells: Sequence[ExplorationCell]) -> str:
    """One horizontal strip of tiles for an interpolation path."""
    width, height = len(cells) * _TILE_W, _TILE_H
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" '
        f'height="{height:.1f}" viewBox="0 0 {width:.1f} {height:.1f}">'
    ]
    for i, cell in enumerate(cells):
        label = f"step {i} sim {cell.similarity:.2f}" + (" *" if cell.corrected else "")
        out.extend(_tile(cell, i * _TILE_W, 0.0, label))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_train_report(reports: Sequence[TrainReport], out_dir: str | Path) -> tuple[Path, Path]:
    """Write train_curve.png and train_log.csv under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "train_log.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "nll_bits_per_dim", "grad_norm"])
        for r in reports:
            writer.writerow([r.epoch, f"{r.nll_bits_per_dim:.6f}", f"{r.grad_norm:.6f}"])

    png_path = out_dir / "train_curve.png"
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r.epoch for r in reports], [r.nll_bits_per_dim for r in reports], marker="o")
    ax.set_xlabel("epoch")
    ax.set_ylabel("bits / dim")
    ax.set_title("training negative log-likelihood")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path)
    plt.close(fig)
    return png_path, csv_path


def write_optimize_report(traj: Trajectory, out_dir: str | Path) -> tuple[Path, Path]:
    """Write optimize_curve.png and optimize_log.csv under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    incumbents = traj.incumbent_scores()
    csv_path = out_dir / "optimize_log.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "score", "incumbent", "accepted", "similarity", "smiles"])
        for e, inc in zip(traj, incumbents):
            writer.writerow(
                [
                    e.step_index,
                    f"{e.score:.6f}",
                    f"{inc:.6f}",
                    int(e.accepted),
                    f"{e.cell.similarity:.6f}",
                    e.cell.smiles,
                ]
            )

    png_path = out_dir / "optimize_curve.png"
    steps = [e.step_index for e in traj]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(steps, [e.score for e in traj], marker=".", alpha=0.6, label="step best")
    ax.plot(steps, incumbents, drawstyle="steps-post", label="incumbent")
    ax.set_xlabel("step")
    ax.set_ylabel("score")
    ax.set_title("latent hill climbing")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path)
    plt.close(fig)
    return png_path, csv_path
