// Wire shapes for the molscope HTTP API. Field names match the JSON
// exactly; keep these in sync with docs/api.md on the server side.

export interface HealthPayload {
  status: string;
  model_version: string;
  latent_dim: number;
  n_max: number;
  properties: string[];
}

export interface DatasetEntry {
  id: number;
  name: string;
  smiles: string;
  atoms: number;
}

export interface DatasetPayload {
  entries: DatasetEntry[];
}

export interface AtomInfo {
  index: number;
  symbol: string;
}

export interface BondInfo {
  i: number;
  j: number;
  order: number;
}

export interface RenderPayload {
  svg: string;
  xyz: string;
  atoms: AtomInfo[];
  bonds: BondInfo[];
  coords3d: number[][];
  properties: Record<string, number>;
}

export interface EncodePayload {
  z: number[];
  reconstructed_smiles: string;
  similarity: number;
}

export interface DecodePayload {
  smiles: string;
  valid: boolean;
  corrected: boolean;
  svg: string | null;
}

export interface GridCell {
  smiles: string;
  similarity: number;
  corrected: boolean;
  position: number[];
  z: number[];
  svg: string | null;
}

export interface GridPayload {
  cells: GridCell[][];
}

export interface InterpolatePayload {
  cells: GridCell[];
}

export interface OptimizeSubmitPayload {
  job_id: string;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobEntry {
  step_index: number;
  score: number;
  accepted: boolean;
  smiles: string;
  similarity: number;
  corrected: boolean;
  svg: string | null;
}

export interface JobSnapshot {
  job_id: string;
  state: JobState;
  property: string;
  maximize: boolean;
  sim_min: number;
  steps: number;
  error: string | null;
  entries: JobEntry[];
}

export interface GridRequest {
  smiles: string;
  steps: number;
  delta: number;
  seed: number;
}

export interface OptimizeRequest {
  smiles: string;
  property: string;
  maximize: boolean;
  steps: number;
  step_size: number;
  sim_min: number;
  seed: number;
}
