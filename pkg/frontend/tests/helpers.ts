import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

// Payloads recorded from the live service by scripts/record_frontend_fixtures.py.
export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf8")) as T;
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

// A real ApiClient whose fetch resolves from a path-keyed table, so tests
// exercise the actual request and error-envelope handling.
export function clientFor(
  routes: Record<string, unknown | (() => Promise<Response>)>
): ApiClient {
  return new ApiClient(async (input) => {
    const route = routes[input];
    if (route === undefined) {
      return jsonResponse({ error: "unknown_route", detail: `no fixture for ${input}` }, 404);
    }
    if (typeof route === "function") {
      return (route as () => Promise<Response>)();
    }
    return jsonResponse(route);
  });
}

// jsdom has no 2D context unless the optional canvas package is installed;
// stub it out so constructing a viewer does not log noise.
export function makeCanvas(width: number, height: number): HTMLCanvasElement {
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  canvas.getContext = () => null;
  return canvas;
}

export function mouse(type: string, x: number, y: number): MouseEvent {
  return new MouseEvent(type, { clientX: x, clientY: y, bubbles: true });
}
