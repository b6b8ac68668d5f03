import { ApiClient, ApiError, SequenceGate } from "./api.js";
import { moleculeCard } from "./cards.js";
import { GridSettings } from "./state.js";
import { GridPayload } from "./types.js";

// Neighborhood grid around the current seed. Each refresh is one POST; a
// failed refresh reports inline and leaves the previous grid standing so
// the user keeps something to click on.
export class GridPanel {
  private root: HTMLElement;
  private client: ApiClient;
  private onRecenter: (smiles: string) => void;
  private gate = new SequenceGate();
  private status: HTMLElement;
  private cellsHost: HTMLElement;

  constructor(root: HTMLElement, client: ApiClient, onRecenter: (smiles: string) => void) {
    this.root = root;
    this.client = client;
    this.onRecenter = onRecenter;
    this.status = document.createElement("div");
    this.status.className = "panel-status";
    this.cellsHost = document.createElement("div");
    this.cellsHost.className = "grid-cells";
    this.root.appendChild(this.status);
    this.root.appendChild(this.cellsHost);
  }

  async refresh(smiles: string, settings: GridSettings): Promise<void> {
    const token = this.gate.next();
    this.status.textContent = "loading grid…";
    this.status.className = "panel-status";
    let payload: GridPayload;
    try {
      payload = await this.client.grid({
        smiles,
        steps: settings.steps,
        delta: settings.delta,
        seed: settings.seed,
      });
    } catch (err) {
      if (!this.gate.isCurrent(token)) {
        return;
      }
      const detail = err instanceof ApiError ? `${err.tag}: ${err.message}` : String(err);
      this.status.textContent = `grid request failed: ${detail}`;
      this.status.className = "panel-status panel-error";
      return;
    }
    if (!this.gate.isCurrent(token)) {
      return;
    }
    this.status.textContent = "";
    this.render(payload);
  }

  private render(payload: GridPayload): void {
    const steps = payload.cells.length;
    const mid = (steps - 1) / 2;
    this.cellsHost.innerHTML = "";
    this.cellsHost.style.gridTemplateColumns = `repeat(${steps}, minmax(0, 1fr))`;
    for (const row of payload.cells) {
      for (const cell of row) {
        const isCenter = cell.position[0] === mid && cell.position[1] === mid;
        const card = moleculeCard(cell, isCenter ? ["seed"] : []);
        if (isCenter) {
          card.classList.add("cell-center");
        }
        if (cell.smiles) {
          card.classList.add("cell-clickable");
          card.addEventListener("click", () => this.onRecenter(cell.smiles));
        }
        this.cellsHost.appendChild(card);
      }
    }
  }
}
