import { GridCell } from "./types.js";

// Two decimals everywhere a similarity is shown, so an exact match reads
// as "1.00". The value itself is the server's, never recomputed here.
export function formatSimilarity(value: number): string {
  return value.toFixed(2);
}

// One molecule card: server-rendered 2D depiction, the decoded string and
// a similarity badge. Cells that decoded to nothing get a placeholder.
export function moleculeCard(cell: GridCell, labels: string[] = []): HTMLElement {
  const card = document.createElement("div");
  card.className = "cell";

  const pic = document.createElement("div");
  pic.className = "cell-pic";
  if (cell.svg) {
    pic.innerHTML = cell.svg;
  } else {
    pic.textContent = "(empty)";
    card.classList.add("cell-empty");
  }
  card.appendChild(pic);

  const meta = document.createElement("div");
  meta.className = "cell-meta";

  const badge = document.createElement("span");
  badge.className = "badge badge-sim";
  badge.textContent = formatSimilarity(cell.similarity);
  meta.appendChild(badge);

  if (cell.corrected) {
    const fixed = document.createElement("span");
    fixed.className = "badge badge-corrected";
    fixed.textContent = "corrected";
    meta.appendChild(fixed);
  }
  for (const label of labels) {
    const tag = document.createElement("span");
    tag.className = "badge badge-label";
    tag.textContent = label;
    meta.appendChild(tag);
  }
  card.appendChild(meta);

  const smiles = document.createElement("div");
  smiles.className = "cell-smiles";
  smiles.textContent = cell.smiles || "(none)";
  card.appendChild(smiles);

  return card;
}
