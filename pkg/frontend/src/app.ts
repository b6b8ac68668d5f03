import { ApiClient, ApiError, SequenceGate } from "./api.js";
import { GridPanel } from "./grid.js";
import { InterpolatePanel } from "./interpolate.js";
import { OptimizePanel } from "./optimize.js";
import { initialState, setSeed, Tab, toggleHighlight, ViewState } from "./state.js";
import { HealthPayload, RenderPayload } from "./types.js";
import {
  checkRenderPayload,
  defaultSettings,
  MoleculeViewer,
  ViewerSettings,
} from "./viewer.js";

const DEFAULT_SEED = "CCO";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export function boot(): void {
  const client = new ApiClient();
  const state: ViewState = initialState(DEFAULT_SEED);
  const settings: ViewerSettings = defaultSettings();
  const renderGate = new SequenceGate();
  let renderPayload: RenderPayload | null = null;

  const canvas = el<HTMLCanvasElement>("viewer-canvas");
  const seedInput = el<HTMLInputElement>("seed-input");
  const atomInfo = el("atom-info");
  const viewerStatus = el("viewer-status");
  const propsHost = el("props");

  seedInput.value = state.seed;

  const viewer = new MoleculeViewer(canvas, state.camera, {
    onCameraChange(camera) {
      state.camera = camera;
    },
    onAtomClick(atomIndex) {
      toggleHighlight(state, atomIndex);
      viewer.setHighlight(state.highlight);
      const atom = renderPayload?.atoms.find((a) => a.index === atomIndex);
      if (atom) {
        const mark = state.highlight.has(atomIndex) ? "highlighted" : "cleared";
        atomInfo.textContent = `atom ${atom.index}: ${atom.symbol} (${mark})`;
      }
    },
  });
  viewer.setSettings(settings);

  async function showSeed(smiles: string): Promise<void> {
    const token = renderGate.next();
    viewerStatus.textContent = "rendering…";
    viewerStatus.className = "panel-status";
    let payload: RenderPayload;
    try {
      payload = await client.render(smiles);
    } catch (err) {
      if (!renderGate.isCurrent(token)) {
        return;
      }
      const detail = err instanceof ApiError ? `${err.tag}: ${err.message}` : String(err);
      viewerStatus.textContent = `render failed: ${detail}`;
      viewerStatus.className = "panel-status panel-error";
      return;
    }
    if (!renderGate.isCurrent(token)) {
      return;
    }
    const malformed = checkRenderPayload(payload);
    if (malformed) {
      viewerStatus.textContent = malformed;
      viewerStatus.className = "panel-status panel-error";
      return;
    }
    viewerStatus.textContent = "";
    renderPayload = payload;
    atomInfo.textContent = "click an atom to highlight it";
    viewer.setHighlight(state.highlight);
    viewer.setMolecule(payload);
    el("depiction-2d").innerHTML = payload.svg;
    propsHost.innerHTML = "";
    for (const [name, value] of Object.entries(payload.properties)) {
      const row = document.createElement("div");
      row.className = "prop-row";
      row.innerHTML = `<span>${name}</span><span>${value}</span>`;
      propsHost.appendChild(row);
    }
  }

  function recenter(smiles: string): void {
    setSeed(state, smiles);
    seedInput.value = smiles;
    viewer.setHighlight(state.highlight);
    void showSeed(smiles);
    void gridPanel.refresh(smiles, state.grid);
  }

  // explore tab
  const gridPanel = new GridPanel(el("grid-root"), client, recenter);
  const gridSteps = el<HTMLInputElement>("grid-steps");
  const gridDelta = el<HTMLInputElement>("grid-delta");
  const gridSeed = el<HTMLInputElement>("grid-seed");
  el("grid-go").addEventListener("click", () => {
    state.grid = {
      steps: Number(gridSteps.value) || 5,
      delta: Number(gridDelta.value) || 0.5,
      seed: Number(gridSeed.value) || 0,
    };
    void gridPanel.refresh(state.seed, state.grid);
  });

  // interpolate tab
  const interpPanel = new InterpolatePanel(el("interp-root"), client);
  el("interp-go").addEventListener("click", () => {
    const from = el<HTMLInputElement>("interp-from").value.trim();
    const to = el<HTMLInputElement>("interp-to").value.trim();
    const steps = Number(el<HTMLInputElement>("interp-steps").value) || 7;
    void interpPanel.load(from, to, steps);
  });

  // optimize tab
  const propertySelect = el<HTMLSelectElement>("opt-property");
  const optPanel = new OptimizePanel(el("opt-root"), client, {
    onJobChange(jobId) {
      state.jobId = jobId;
    },
  });
  el("opt-go").addEventListener("click", () => {
    void optPanel.submit({
      smiles: state.seed,
      property: propertySelect.value,
      maximize: el<HTMLInputElement>("opt-maximize").checked,
      steps: Number(el<HTMLInputElement>("opt-steps").value) || 20,
      step_size: Number(el<HTMLInputElement>("opt-step-size").value) || 0.4,
      sim_min: Number(el<HTMLInputElement>("opt-sim-min").value) || 0.3,
      seed: Number(el<HTMLInputElement>("opt-seed").value) || 0,
    });
  });
  el("opt-stop").addEventListener("click", () => optPanel.abandon());

  // tabs
  const tabs: Tab[] = ["explore", "interpolate", "optimize"];
  for (const tab of tabs) {
    el(`tab-${tab}`).addEventListener("click", () => {
      state.tab = tab;
      for (const t of tabs) {
        el(`tab-${t}`).classList.toggle("tab-active", t === tab);
        el(`pane-${t}`).style.display = t === tab ? "" : "none";
      }
    });
  }

  // viewer controls
  const outline = el<HTMLInputElement>("set-outline");
  const shading = el<HTMLInputElement>("set-shading");
  const applySettings = () => {
    settings.outline = Number(outline.value);
    settings.shading = shading.checked;
    viewer.setSettings(settings);
  };
  outline.addEventListener("input", applySettings);
  shading.addEventListener("change", applySettings);

  el("seed-go").addEventListener("click", () => {
    recenter(seedInput.value.trim());
  });
  seedInput.addEventListener("keydown", (e) => {
    if (e.key === "Enter") {
      recenter(seedInput.value.trim());
    }
  });

  // startup: banner, dataset picker, first molecule and grid
  client
    .health()
    .then((health: HealthPayload) => {
      el("model-version").textContent =
        `${health.model_version} · latent dim ${health.latent_dim} · ` +
        `n_max ${health.n_max}`;
      propertySelect.innerHTML = "";
      for (const name of health.properties) {
        const opt = document.createElement("option");
        opt.value = name;
        opt.textContent = name;
        propertySelect.appendChild(opt);
      }
    })
    .catch(() => {
      el("model-version").textContent = "server unreachable";
    });
  client
    .dataset()
    .then((ds) => {
      const list = el<HTMLDataListElement>("dataset-options");
      for (const entry of ds.entries) {
        const opt = document.createElement("option");
        opt.value = entry.smiles;
        opt.label = entry.name ? `${entry.name} (${entry.atoms} atoms)` : entry.smiles;
        list.appendChild(opt);
      }
    })
    .catch(() => {
      // dataset listing is a convenience, the seed box still works without it
    });

  void showSeed(state.seed);
  void gridPanel.refresh(state.seed, state.grid);
}

boot();
