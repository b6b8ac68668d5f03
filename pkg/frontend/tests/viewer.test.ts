import { describe, expect, it } from "vitest";

import { initialCamera } from "../src/camera.js";
import { initialState, toggleHighlight } from "../src/state.js";
import { RenderPayload } from "../src/types.js";
import {
  buildScene,
  checkRenderPayload,
  DrawContext,
  drawScene,
  hitTest,
  MoleculeViewer,
} from "../src/viewer.js";
import { loadFixture, makeCanvas, mouse } from "./helpers.js";

const payload = loadFixture<RenderPayload>("render_cco.json");

function scene() {
  return buildScene(payload, initialCamera(), 596, 440);
}

// Counts draw calls instead of pixels; order and shape of the primitive
// stream is what the renderer owes us.
class RecordingContext implements DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 0;
  rects = 0;
  arcs: { r: number; stroke: boolean }[] = [];
  segments = 0;
  private arcPending = false;

  fillRect(): void {
    this.rects += 1;
  }
  beginPath(): void {
    this.arcPending = false;
  }
  arc(_x: number, _y: number, r: number): void {
    this.arcs.push({ r, stroke: false });
    this.arcPending = true;
  }
  moveTo(): void {}
  lineTo(): void {
    this.segments += 1;
  }
  fill(): void {}
  stroke(): void {
    if (this.arcPending) {
      this.arcs[this.arcs.length - 1].stroke = true;
    }
  }
}

describe("buildScene", () => {
  it("CCO projects exactly 3 spheres and 2 bond primitives", () => {
    const s = scene();
    expect(s.spheres.length).toBe(3);
    expect(s.bonds.length).toBe(2);
    expect(s.spheres.length).toBe(payload.atoms.length);
    expect(s.bonds.length).toBe(payload.bonds.length);
  });

  it("keeps every atom inside the canvas at zoom 1", () => {
    const s = scene();
    for (const sphere of s.spheres) {
      expect(sphere.x - sphere.r).toBeGreaterThanOrEqual(0);
      expect(sphere.x + sphere.r).toBeLessThanOrEqual(596);
      expect(sphere.y - sphere.r).toBeGreaterThanOrEqual(0);
      expect(sphere.y + sphere.r).toBeLessThanOrEqual(440);
    }
  });

  it("spheres come out sorted back to front", () => {
    const s = scene();
    for (let i = 1; i < s.spheres.length; i++) {
      expect(s.spheres[i].depth).toBeGreaterThanOrEqual(s.spheres[i - 1].depth);
    }
  });

  it("carries atom symbols through untouched", () => {
    const symbols = scene()
      .spheres.slice()
      .sort((a, b) => a.atom - b.atom)
      .map((s) => s.symbol);
    expect(symbols).toEqual(payload.atoms.map((a) => a.symbol));
  });
});

describe("checkRenderPayload", () => {
  it("accepts the recorded payload", () => {
    expect(checkRenderPayload(payload)).toBeNull();
  });

  it("rejects a coords3d/atom count mismatch", () => {
    const broken = { ...payload, coords3d: payload.coords3d.slice(0, 1) };
    expect(checkRenderPayload(broken)).toMatch(/coords3d/);
  });

  it("rejects non-finite coordinates", () => {
    const broken = {
      ...payload,
      coords3d: [[0, 0, Number.NaN], ...payload.coords3d.slice(1)],
    };
    expect(checkRenderPayload(broken)).toMatch(/coordinate/);
  });

  it("rejects bond endpoints outside the molecule", () => {
    const broken = { ...payload, bonds: [{ i: 0, j: 99, order: 1 }] };
    expect(checkRenderPayload(broken)).toMatch(/bond endpoint/);
  });
});

describe("hitTest", () => {
  it("finds the atom under the cursor", () => {
    const s = scene();
    for (const sphere of s.spheres) {
      expect(hitTest(s, sphere.x, sphere.y)).toBe(sphere.atom);
    }
  });

  it("misses empty space", () => {
    expect(hitTest(scene(), 2, 2)).toBeNull();
  });
});

describe("drawScene", () => {
  it("draws one filled circle per atom and one segment per single bond", () => {
    const ctx = new RecordingContext();
    drawScene(ctx, scene(), new Set(), { outline: 0, shading: false });
    expect(ctx.rects).toBe(1);
    expect(ctx.arcs.length).toBe(payload.atoms.length);
    expect(ctx.segments).toBe(payload.bonds.length);
  });

  it("adds a ring for each highlighted atom", () => {
    const ctx = new RecordingContext();
    drawScene(ctx, scene(), new Set([0, 2]), { outline: 0, shading: false });
    expect(ctx.arcs.length).toBe(payload.atoms.length + 2);
    const rings = ctx.arcs.filter((a) => a.stroke);
    expect(rings.length).toBe(2);
    // the ring sits outside its sphere
    const body = ctx.arcs.find((a) => !a.stroke)!;
    for (const ring of rings) {
      expect(ring.r).toBeGreaterThan(body.r);
    }
  });

  it("outline setting strokes every sphere", () => {
    const ctx = new RecordingContext();
    drawScene(ctx, scene(), new Set(), { outline: 2, shading: false });
    expect(ctx.arcs.length).toBe(payload.atoms.length * 2);
  });
});

describe("MoleculeViewer interaction", () => {
  function mount() {
    const state = initialState("CCO");
    const canvas = makeCanvas(596, 440);
    document.body.appendChild(canvas);
    const clicks: number[] = [];
    const viewer = new MoleculeViewer(canvas, state.camera, {
      onCameraChange(camera) {
        state.camera = camera;
      },
      onAtomClick(atomIndex) {
        clicks.push(atomIndex);
        toggleHighlight(state, atomIndex);
        viewer.setHighlight(state.highlight);
      },
    });
    viewer.setMolecule(payload);
    return { state, canvas, viewer, clicks };
  }

  it("clicking an atom toggles its highlight on, clicking again toggles it off", () => {
    const { state, canvas, viewer } = mount();
    const sphere = viewer.currentScene()!.spheres[0];

    canvas.dispatchEvent(mouse("mousedown", sphere.x, sphere.y));
    canvas.dispatchEvent(mouse("mouseup", sphere.x, sphere.y));
    expect(state.highlight.has(sphere.atom)).toBe(true);

    canvas.dispatchEvent(mouse("mousedown", sphere.x, sphere.y));
    canvas.dispatchEvent(mouse("mouseup", sphere.x, sphere.y));
    expect(state.highlight.has(sphere.atom)).toBe(false);
  });

  it("clicking empty space leaves highlights alone", () => {
    const { state, canvas } = mount();
    canvas.dispatchEvent(mouse("mousedown", 3, 3));
    canvas.dispatchEvent(mouse("mouseup", 3, 3));
    expect(state.highlight.size).toBe(0);
  });

  it("a drag rotates the camera instead of clicking", () => {
    const { state, canvas, clicks } = mount();
    const before = { ...state.camera.rotation };

    canvas.dispatchEvent(mouse("mousedown", 200, 200));
    canvas.dispatchEvent(mouse("mousemove", 260, 230));
    canvas.dispatchEvent(mouse("mouseup", 260, 230));

    expect(clicks.length).toBe(0);
    expect(state.highlight.size).toBe(0);
    const after = state.camera.rotation;
    const moved =
      Math.abs(after.w - before.w) +
      Math.abs(after.x - before.x) +
      Math.abs(after.y - before.y) +
      Math.abs(after.z - before.z);
    expect(moved).toBeGreaterThan(1e-3);
  });

  it("wheel zoom updates the camera and keeps it positive", () => {
    const { state, canvas } = mount();
    canvas.dispatchEvent(new WheelEvent("wheel", { deltaY: -120 }));
    expect(state.camera.zoom).toBeGreaterThan(1);
    for (let i = 0; i < 200; i++) {
      canvas.dispatchEvent(new WheelEvent("wheel", { deltaY: 4000 }));
    }
    expect(state.camera.zoom).toBeGreaterThan(0);
  });
});
