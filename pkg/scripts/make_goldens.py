#!/usr/bin/env python3
"""Regenerate the golden geometry outputs under tests/golden/.

Run from the repository root after any deliberate change to the layout,
embedding, xyz, or SVG code paths:

    python3 scripts/make_goldens.py

The outputs are deterministic functions of the input SMILES, so a diff in a
golden file is always a real behavior change, never noise. Review the diff
before committing it.
"""

from __future__ import annotations

import pathlib

from molscope.geometry import embed_3d, layout_2d, render_svg, to_xyz
from molscope.molgraph import parse_smiles

GOLDEN_DIR = pathlib.Path(__file__).resolve().parent.parent / "tests" / "golden"


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)

    ethanol = parse_smiles("CCO")
    (GOLDEN_DIR / "ethanol.xyz").write_text(
        to_xyz(ethanol, embed_3d(ethanol), comment="ethanol"), encoding="ascii"
    )
    (GOLDEN_DIR / "ethanol.svg").write_text(
        render_svg(ethanol, layout_2d(ethanol)), encoding="ascii"
    )

    ring = parse_smiles("C1CCCCC1")
    (GOLDEN_DIR / "cyclohexane_highlight.svg").write_text(
        render_svg(ring, layout_2d(ring), highlight={0, 3}), encoding="ascii"
    )

    acrylamide = parse_smiles("C=CC(=O)N")
    (GOLDEN_DIR / "acrylamide.xyz").write_text(
        to_xyz(acrylamide, embed_3d(acrylamide), comment="acrylamide"), encoding="ascii"
    )

    for name in sorted(p.name for p in GOLDEN_DIR.iterdir()):
        print(f"wrote tests/golden/{name}")


if __name__ == "__main__":
    main()
