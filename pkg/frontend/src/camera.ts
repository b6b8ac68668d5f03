// Orbit camera for the 3D viewer: a unit quaternion for orientation plus a
// positive zoom factor. No translation, molecules are drawn about their
// centroid.

export interface Quaternion {
  w: number;
  x: number;
  y: number;
  z: number;
}

export interface Camera {
  rotation: Quaternion;
  zoom: number;
}

export const IDENTITY: Quaternion = { w: 1, x: 0, y: 0, z: 0 };

const ZOOM_MIN = 0.2;
const ZOOM_MAX = 8.0;

export function initialCamera(): Camera {
  return { rotation: { ...IDENTITY }, zoom: 1.0 };
}

export function multiply(a: Quaternion, b: Quaternion): Quaternion {
  return {
    w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
    x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
    y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
    z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
  };
}

export function normalize(q: Quaternion): Quaternion {
  const n = Math.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  if (n === 0) {
    return { ...IDENTITY };
  }
  return { w: q.w / n, x: q.x / n, y: q.y / n, z: q.z / n };
}

export function axisAngle(ax: number, ay: number, az: number, angle: number): Quaternion {
  const n = Math.sqrt(ax * ax + ay * ay + az * az);
  if (n === 0) {
    return { ...IDENTITY };
  }
  const half = angle / 2;
  const s = Math.sin(half) / n;
  return { w: Math.cos(half), x: ax * s, y: ay * s, z: az * s };
}

export function rotateVector(q: Quaternion, v: number[]): [number, number, number] {
  // q * (0, v) * conj(q), expanded to avoid building temporaries
  const { w, x, y, z } = q;
  const vx = v[0];
  const vy = v[1];
  const vz = v[2];
  const tx = 2 * (y * vz - z * vy);
  const ty = 2 * (z * vx - x * vz);
  const tz = 2 * (x * vy - y * vx);
  return [
    vx + w * tx + (y * tz - z * ty),
    vy + w * ty + (z * tx - x * tz),
    vz + w * tz + (x * ty - y * tx),
  ];
}

// Mouse drag in screen pixels. Horizontal drag spins about the screen y
// axis, vertical about x; the new rotation composes on the left so the
// motion is in view space, not model space.
export function dragRotate(camera: Camera, dxPx: number, dyPx: number): Camera {
  const perPixel = 0.01;
  const spin = multiply(
    axisAngle(0, 1, 0, dxPx * perPixel),
    axisAngle(1, 0, 0, dyPx * perPixel)
  );
  return {
    rotation: normalize(multiply(spin, camera.rotation)),
    zoom: camera.zoom,
  };
}

// Wheel zoom is exponential in the scroll delta and clamped to a band that
// keeps zoom strictly positive. Scrolling up (negative deltaY) zooms in.
export function wheelZoom(camera: Camera, deltaY: number): Camera {
  const factor = Math.exp(-deltaY * 0.0015);
  const zoom = Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, camera.zoom * factor));
  return { rotation: camera.rotation, zoom };
}
