import { Camera, initialCamera } from "./camera.js";

export type Tab = "explore" | "interpolate" | "optimize";

export interface GridSettings {
  steps: number;
  delta: number;
  seed: number;
}

// Everything the UI needs to redraw itself. Panels render from this state
// plus the latest payload they fetched; nothing is derived from chemistry
// on the client, every displayed number comes verbatim from the server.
export interface ViewState {
  seed: string;
  camera: Camera;
  highlight: Set<number>;
  tab: Tab;
  grid: GridSettings;
  jobId: string | null;
}

export function initialState(seed: string): ViewState {
  return {
    seed,
    camera: initialCamera(),
    highlight: new Set(),
    tab: "explore",
    grid: { steps: 5, delta: 0.5, seed: 0 },
    jobId: null,
  };
}

// Clicking an atom flips its membership in the highlight set.
export function toggleHighlight(state: ViewState, atomIndex: number): void {
  if (state.highlight.has(atomIndex)) {
    state.highlight.delete(atomIndex);
  } else {
    state.highlight.add(atomIndex);
  }
}

// Re-centering on a new seed invalidates atom highlights (indices refer to
// the previous molecule) but deliberately keeps the camera, so the user
// does not lose their viewing angle while browsing.
export function setSeed(state: ViewState, smiles: string): void {
  state.seed = smiles;
  state.highlight.clear();
}
