import { Camera, dragRotate, rotateVector, wheelZoom } from "./camera.js";
import { RenderPayload } from "./types.js";

// Same palette as the server-side 2D depictions so atoms read consistently
// across views. Unknown symbols fall back to slate.
const ELEMENT_COLOR: Record<string, string> = {
  C: "#4b5563",
  N: "#2563eb",
  O: "#dc2626",
  F: "#16a34a",
};
const FALLBACK_COLOR = "#64748b";
const HIGHLIGHT_COLOR = "#f59e0b";
const BOND_COLOR = "#94a3b8";
const BACKGROUND = "#0b1120";

// Parallel-line offsets per bond order, in screen pixels perpendicular to
// the bond axis. Mirrors the 2D depiction style.
const BOND_OFFSETS: Record<number, number[]> = {
  1: [0],
  2: [-3, 3],
  3: [-5, 0, 5],
};

export interface ViewerSettings {
  outline: number; // sphere outline width in px, 0 disables
  shading: boolean; // depth cueing, far atoms fade toward the background
}

export function defaultSettings(): ViewerSettings {
  return { outline: 1.5, shading: true };
}

export interface SceneSphere {
  atom: number;
  symbol: string;
  x: number;
  y: number;
  depth: number; // rotated z in model units, larger is nearer
  fade: number; // 0 nearest .. 1 farthest, for shading
  r: number;
}

export interface SceneBond {
  order: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  depth: number;
}

export interface Scene {
  spheres: SceneSphere[];
  bonds: SceneBond[];
  width: number;
  height: number;
}

// Structural sanity check on a render payload before it reaches the scene
// builder, so a malformed response surfaces as a message instead of a
// crash mid-draw. Returns null when the payload is usable.
export function checkRenderPayload(payload: RenderPayload): string | null {
  if (!Array.isArray(payload.atoms) || !Array.isArray(payload.bonds)) {
    return "render payload malformed: atoms/bonds missing";
  }
  if (!Array.isArray(payload.coords3d) || payload.coords3d.length !== payload.atoms.length) {
    return "render payload malformed: coords3d does not match atom count";
  }
  for (const row of payload.coords3d) {
    if (!Array.isArray(row) || row.length !== 3 || row.some((v) => !Number.isFinite(v))) {
      return "render payload malformed: bad 3D coordinate row";
    }
  }
  const n = payload.atoms.length;
  for (const b of payload.bonds) {
    if (
      !Number.isInteger(b.i) ||
      !Number.isInteger(b.j) ||
      b.i < 0 ||
      b.j < 0 ||
      b.i >= n ||
      b.j >= n
    ) {
      return "render payload malformed: bond endpoint out of range";
    }
  }
  return null;
}

// Orthographic projection of the server's 3D coordinates. The molecule is
// centered on its centroid and scaled so its largest radial extent fits the
// canvas at zoom 1; using the 3D extent keeps the scale steady while the
// molecule rotates.
export function buildScene(
  payload: RenderPayload,
  camera: Camera,
  width: number,
  height: number
): Scene {
  const coords = payload.coords3d;
  const n = coords.length;
  const scene: Scene = { spheres: [], bonds: [], width, height };
  if (n === 0) {
    return scene;
  }

  const centroid = [0, 0, 0];
  for (const row of coords) {
    centroid[0] += row[0] / n;
    centroid[1] += row[1] / n;
    centroid[2] += row[2] / n;
  }
  let extent = 0;
  const centered: number[][] = [];
  for (const row of coords) {
    const c = [row[0] - centroid[0], row[1] - centroid[1], row[2] - centroid[2]];
    centered.push(c);
    extent = Math.max(extent, Math.sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]));
  }
  extent = Math.max(extent, 1.0);

  const scale = ((Math.min(width, height) / 2 - 30) / extent) * camera.zoom;
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(60, Math.max(3, 0.22 * scale));

  const rotated: [number, number, number][] = centered.map((c) =>
    rotateVector(camera.rotation, c)
  );
  let zMin = Infinity;
  let zMax = -Infinity;
  for (const r of rotated) {
    zMin = Math.min(zMin, r[2]);
    zMax = Math.max(zMax, r[2]);
  }
  const zSpan = zMax - zMin || 1;

  for (let i = 0; i < n; i++) {
    const r = rotated[i];
    scene.spheres.push({
      atom: payload.atoms[i].index,
      symbol: payload.atoms[i].symbol,
      x: cx + r[0] * scale,
      y: cy - r[1] * scale,
      depth: r[2],
      fade: (zMax - r[2]) / zSpan,
      r: radius,
    });
  }
  for (const b of payload.bonds) {
    const ri = rotated[b.i];
    const rj = rotated[b.j];
    scene.bonds.push({
      order: b.order,
      x1: cx + ri[0] * scale,
      y1: cy - ri[1] * scale,
      x2: cx + rj[0] * scale,
      y2: cy - rj[1] * scale,
      depth: (ri[2] + rj[2]) / 2,
    });
  }
  // far to near so the painter draw order is just list order
  scene.spheres.sort((a, b) => a.depth - b.depth);
  scene.bonds.sort((a, b) => a.depth - b.depth);
  return scene;
}

// Front-most sphere under the cursor, or null. Spheres are stored back to
// front, so scan in reverse.
export function hitTest(scene: Scene, x: number, y: number): number | null {
  for (let i = scene.spheres.length - 1; i >= 0; i--) {
    const s = scene.spheres[i];
    const dx = x - s.x;
    const dy = y - s.y;
    if (dx * dx + dy * dy <= s.r * s.r) {
      return s.atom;
    }
  }
  return null;
}

// The subset of CanvasRenderingContext2D the renderer touches. Tests pass a
// recording stub; the browser passes the real context.
export interface DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  fill(): void;
  stroke(): void;
}

function mix(hex: string, target: string, t: number): string {
  const parse = (h: string) => [
    parseInt(h.slice(1, 3), 16),
    parseInt(h.slice(3, 5), 16),
    parseInt(h.slice(5, 7), 16),
  ];
  const a = parse(hex);
  const b = parse(target);
  const out = a.map((v, i) => Math.round(v + (b[i] - v) * t));
  return `rgb(${out[0]}, ${out[1]}, ${out[2]})`;
}

export function drawScene(
  ctx: DrawContext,
  scene: Scene,
  highlight: Set<number>,
  settings: ViewerSettings
): void {
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, scene.width, scene.height);

  // one merged painter pass, everything far to near
  type Item = { depth: number; kind: "bond"; bond: SceneBond } | {
    depth: number;
    kind: "sphere";
    sphere: SceneSphere;
  };
  const items: Item[] = [];
  for (const b of scene.bonds) {
    items.push({ depth: b.depth, kind: "bond", bond: b });
  }
  for (const s of scene.spheres) {
    items.push({ depth: s.depth, kind: "sphere", sphere: s });
  }
  items.sort((a, b) => a.depth - b.depth);

  for (const item of items) {
    if (item.kind === "bond") {
      const b = item.bond;
      const dx = b.x2 - b.x1;
      const dy = b.y2 - b.y1;
      const len = Math.sqrt(dx * dx + dy * dy) || 1;
      const px = -dy / len;
      const py = dx / len;
      ctx.strokeStyle = BOND_COLOR;
      ctx.lineWidth = 2.5;
      for (const off of BOND_OFFSETS[b.order] ?? [0]) {
        ctx.beginPath();
        ctx.moveTo(b.x1 + px * off, b.y1 + py * off);
        ctx.lineTo(b.x2 + px * off, b.y2 + py * off);
        ctx.stroke();
      }
    } else {
      const s = item.sphere;
      const base = ELEMENT_COLOR[s.symbol] ?? FALLBACK_COLOR;
      ctx.fillStyle = settings.shading ? mix(base, BACKGROUND, 0.55 * s.fade) : base;
      ctx.beginPath();
      ctx.arc(s.x, s.y, s.r, 0, Math.PI * 2);
      ctx.fill();
      if (settings.outline > 0) {
        ctx.strokeStyle = BACKGROUND;
        ctx.lineWidth = settings.outline;
        ctx.beginPath();
        ctx.arc(s.x, s.y, s.r, 0, Math.PI * 2);
        ctx.stroke();
      }
      if (highlight.has(s.atom)) {
        ctx.strokeStyle = HIGHLIGHT_COLOR;
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.arc(s.x, s.y, s.r + 4, 0, Math.PI * 2);
        ctx.stroke();
      }
    }
  }
}

export interface ViewerCallbacks {
  onCameraChange(camera: Camera): void;
  onAtomClick(atomIndex: number): void;
}

// Owns the canvas interaction loop. State (camera, highlight set, payload)
// lives outside and is pushed in; the viewer only reports gestures back
// through the callbacks.
export class MoleculeViewer {
  private canvas: HTMLCanvasElement;
  private ctx: DrawContext | null;
  private callbacks: ViewerCallbacks;
  private payload: RenderPayload | null = null;
  private camera: Camera;
  private highlight: Set<number> = new Set();
  private settings: ViewerSettings = defaultSettings();
  private scene: Scene | null = null;
  private dragging = false;
  private movedPx = 0;
  private lastX = 0;
  private lastY = 0;

  constructor(canvas: HTMLCanvasElement, camera: Camera, callbacks: ViewerCallbacks) {
    this.canvas = canvas;
    this.camera = camera;
    this.callbacks = callbacks;
    this.ctx = canvas.getContext("2d");

    canvas.addEventListener("mousedown", (e) => {
      this.dragging = true;
      this.movedPx = 0;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    canvas.addEventListener("mousemove", (e) => {
      if (!this.dragging) {
        return;
      }
      const dx = e.clientX - this.lastX;
      const dy = e.clientY - this.lastY;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
      this.movedPx += Math.abs(dx) + Math.abs(dy);
      this.camera = dragRotate(this.camera, dx, dy);
      this.callbacks.onCameraChange(this.camera);
      this.redraw();
    });
    const endDrag = (e: MouseEvent) => {
      if (!this.dragging) {
        return;
      }
      this.dragging = false;
      // a press that barely moved is a click, anything longer was a rotate
      if (this.movedPx < 4 && this.scene) {
        const rect = this.canvas.getBoundingClientRect();
        const hit = hitTest(this.scene, e.clientX - rect.left, e.clientY - rect.top);
        if (hit !== null) {
          this.callbacks.onAtomClick(hit);
        }
      }
    };
    canvas.addEventListener("mouseup", endDrag);
    canvas.addEventListener("mouseleave", () => {
      this.dragging = false;
    });
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.camera = wheelZoom(this.camera, e.deltaY);
      this.callbacks.onCameraChange(this.camera);
      this.redraw();
    });
  }

  setMolecule(payload: RenderPayload | null): void {
    this.payload = payload;
    this.redraw();
  }

  setCamera(camera: Camera): void {
    this.camera = camera;
    this.redraw();
  }

  setHighlight(highlight: Set<number>): void {
    this.highlight = highlight;
    this.redraw();
  }

  setSettings(settings: ViewerSettings): void {
    this.settings = settings;
    this.redraw();
  }

  currentScene(): Scene | null {
    return this.scene;
  }

  redraw(): void {
    if (!this.payload) {
      this.scene = null;
      if (this.ctx) {
        this.ctx.fillStyle = BACKGROUND;
        this.ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
      }
      return;
    }
    this.scene = buildScene(this.payload, this.camera, this.canvas.width, this.canvas.height);
    if (this.ctx) {
      drawScene(this.ctx, this.scene, this.highlight, this.settings);
    }
  }
}
