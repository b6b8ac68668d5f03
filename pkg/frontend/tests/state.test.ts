import { describe, expect, it } from "vitest";

import { formatSimilarity } from "../src/cards.js";
import { initialState, setSeed, toggleHighlight } from "../src/state.js";

describe("view state", () => {
  it("toggling the same atom twice returns to the empty set", () => {
    const state = initialState("CCO");
    toggleHighlight(state, 4);
    expect(state.highlight.has(4)).toBe(true);
    toggleHighlight(state, 4);
    expect(state.highlight.size).toBe(0);
  });

  it("highlights are independent per atom", () => {
    const state = initialState("CCO");
    toggleHighlight(state, 0);
    toggleHighlight(state, 2);
    toggleHighlight(state, 0);
    expect([...state.highlight]).toEqual([2]);
  });

  it("re-centering clears highlights but keeps the camera", () => {
    const state = initialState("CCO");
    toggleHighlight(state, 1);
    state.camera.zoom = 3.0;
    setSeed(state, "CCN");
    expect(state.seed).toBe("CCN");
    expect(state.highlight.size).toBe(0);
    expect(state.camera.zoom).toBe(3.0);
  });
});

describe("formatSimilarity", () => {
  it("an exact match reads 1.00", () => {
    expect(formatSimilarity(1.0)).toBe("1.00");
  });

  it("values render to two decimals verbatim", () => {
    expect(formatSimilarity(0.2)).toBe("0.20");
    expect(formatSimilarity(0.333333)).toBe("0.33");
    expect(formatSimilarity(0)).toBe("0.00");
  });
});
