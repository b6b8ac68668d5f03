import { ApiClient, ApiError, SequenceGate } from "./api.js";
import { moleculeCard } from "./cards.js";
import { InterpolatePayload } from "./types.js";

// Latent-path slider between two seeds. One fetch per (from, to, steps)
// submission; moving the slider only swaps which already-loaded cell is
// shown, it never refetches.
export class InterpolatePanel {
  private client: ApiClient;
  private gate = new SequenceGate();
  private status: HTMLElement;
  private slider: HTMLInputElement;
  private label: HTMLElement;
  private cardHost: HTMLElement;
  private payload: InterpolatePayload | null = null;
  private fromSmiles = "";
  private toSmiles = "";

  constructor(root: HTMLElement, client: ApiClient) {
    this.client = client;
    this.status = document.createElement("div");
    this.status.className = "panel-status";
    this.slider = document.createElement("input");
    this.slider.type = "range";
    this.slider.min = "0";
    this.slider.value = "0";
    this.slider.disabled = true;
    this.slider.className = "interp-slider";
    this.label = document.createElement("div");
    this.label.className = "interp-label";
    this.cardHost = document.createElement("div");
    this.cardHost.className = "interp-card";
    root.appendChild(this.status);
    root.appendChild(this.slider);
    root.appendChild(this.label);
    root.appendChild(this.cardHost);

    this.slider.addEventListener("input", () => {
      this.showIndex(Number(this.slider.value));
    });
  }

  async load(fromSmiles: string, toSmiles: string, steps: number): Promise<void> {
    const token = this.gate.next();
    this.status.textContent = "interpolating…";
    this.status.className = "panel-status";
    let payload: InterpolatePayload;
    try {
      payload = await this.client.interpolate(fromSmiles, toSmiles, steps);
    } catch (err) {
      if (!this.gate.isCurrent(token)) {
        return;
      }
      const detail = err instanceof ApiError ? `${err.tag}: ${err.message}` : String(err);
      this.status.textContent = `interpolation failed: ${detail}`;
      this.status.className = "panel-status panel-error";
      return;
    }
    if (!this.gate.isCurrent(token)) {
      return;
    }
    this.status.textContent = "";
    this.payload = payload;
    this.fromSmiles = fromSmiles;
    this.toSmiles = toSmiles;
    this.slider.max = String(payload.cells.length - 1);
    this.slider.value = "0";
    this.slider.disabled = false;
    this.showIndex(0);
  }

  showIndex(index: number): void {
    if (!this.payload) {
      return;
    }
    const last = this.payload.cells.length - 1;
    const i = Math.min(last, Math.max(0, index));
    const cell = this.payload.cells[i];
    // endpoints are the seeds themselves, label them as such
    const labels: string[] = [];
    if (i === 0) {
      labels.push(`seed A (${this.fromSmiles})`);
    }
    if (i === last) {
      labels.push(`seed B (${this.toSmiles})`);
    }
    this.label.textContent = `step ${i} of ${last}`;
    this.cardHost.innerHTML = "";
    this.cardHost.appendChild(moleculeCard(cell, labels));
  }
}
