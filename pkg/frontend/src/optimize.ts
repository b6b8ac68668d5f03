import { ApiClient, ApiError } from "./api.js";
import { formatSimilarity, moleculeCard } from "./cards.js";
import { JobEntry, JobSnapshot, OptimizeRequest } from "./types.js";

export interface PollHandle {
  stop(): void;
}

// Poll a job until it reaches a terminal state. The first fetch fires
// immediately (the server writes the seed entry synchronously at submit,
// so there is always something to show), then every intervalMs. There is
// no push channel; this loop is the only way results arrive.
export function pollJob(
  client: ApiClient,
  jobId: string,
  onSnapshot: (snap: JobSnapshot) => void,
  onError: (message: string) => void,
  intervalMs = 500
): PollHandle {
  let stopped = false;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const tick = async () => {
    let snap: JobSnapshot;
    try {
      snap = await client.job(jobId);
    } catch (err) {
      if (!stopped) {
        onError(err instanceof Error ? err.message : String(err));
      }
      return;
    }
    if (stopped) {
      return;
    }
    onSnapshot(snap);
    if (snap.state === "done" || snap.state === "failed") {
      return;
    }
    timer = setTimeout(tick, intervalMs);
  };

  void tick();
  return {
    stop() {
      stopped = true;
      if (timer !== null) {
        clearTimeout(timer);
      }
    },
  };
}

// Best score after each entry. Entry k's incumbent is the score of the
// most recent accepted entry at or before k; the server only accepts
// strict improvements, so this series is monotone by construction. No
// comparison happens here, the client just carries the last accepted
// value forward.
export function incumbentSeries(entries: JobEntry[]): number[] {
  const series: number[] = [];
  let best: number | null = null;
  for (const e of entries) {
    if (e.accepted || best === null) {
      best = e.score;
    }
    series.push(best);
  }
  return series;
}

export interface ChartGeometry {
  line: { x: number; y: number }[]; // incumbent locus
  dots: { x: number; y: number; accepted: boolean }[]; // raw per-step scores
  yMin: number;
  yMax: number;
}

// Map entries onto a w-by-h box, y grows downward as on screen. Scores are
// plotted verbatim; the y range is padded a little so a flat series does
// not sit on the border.
export function chartGeometry(entries: JobEntry[], w: number, h: number): ChartGeometry {
  const series = incumbentSeries(entries);
  const scores = entries.map((e) => e.score);
  let yMin = Math.min(...scores, ...series);
  let yMax = Math.max(...scores, ...series);
  if (!isFinite(yMin) || !isFinite(yMax)) {
    yMin = 0;
    yMax = 1;
  }
  if (yMax - yMin < 1e-12) {
    yMax = yMin + 1;
  }
  const pad = (yMax - yMin) * 0.08;
  yMin -= pad;
  yMax += pad;
  const n = entries.length;
  const xAt = (i: number) => (n <= 1 ? w / 2 : (i / (n - 1)) * w);
  const yAt = (v: number) => h - ((v - yMin) / (yMax - yMin)) * h;
  return {
    line: series.map((v, i) => ({ x: xAt(i), y: yAt(v) })),
    dots: entries.map((e, i) => ({ x: xAt(i), y: yAt(e.score), accepted: e.accepted })),
    yMin,
    yMax,
  };
}

function chartSvg(entries: JobEntry[]): string {
  const w = 420;
  const h = 160;
  const geo = chartGeometry(entries, w, h);
  const pts = geo.line.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
  const dots = geo.dots
    .map(
      (d) =>
        `<circle cx="${d.x.toFixed(1)}" cy="${d.y.toFixed(1)}" r="2.5" ` +
        `fill="${d.accepted ? "#38bdf8" : "#475569"}"/>`
    )
    .join("");
  return (
    `<svg viewBox="0 0 ${w} ${h}" class="score-chart" ` +
    `data-points="${pts}" preserveAspectRatio="none">` +
    `<rect width="${w}" height="${h}" fill="#0b1120"/>` +
    `<polyline points="${pts}" fill="none" stroke="#38bdf8" stroke-width="2"/>` +
    dots +
    `<text x="4" y="12" fill="#94a3b8" font-size="10">${geo.yMax.toPrecision(4)}</text>` +
    `<text x="4" y="${h - 4}" fill="#94a3b8" font-size="10">${geo.yMin.toPrecision(4)}</text>` +
    `</svg>`
  );
}

export interface OptimizeCallbacks {
  onJobChange(jobId: string | null): void;
}

// Submit / poll / chart panel. One job at a time; launching a new one
// abandons the previous poll loop (the server keeps running it, we just
// stop watching).
export class OptimizePanel {
  private client: ApiClient;
  private callbacks: OptimizeCallbacks;
  private status: HTMLElement;
  private chartHost: HTMLElement;
  private stripHost: HTMLElement;
  private handle: PollHandle | null = null;
  private lastSnapshot: JobSnapshot | null = null;

  constructor(root: HTMLElement, client: ApiClient, callbacks: OptimizeCallbacks) {
    this.client = client;
    this.callbacks = callbacks;
    this.status = document.createElement("div");
    this.status.className = "panel-status";
    this.chartHost = document.createElement("div");
    this.chartHost.className = "chart-host";
    this.stripHost = document.createElement("div");
    this.stripHost.className = "opt-strip";
    root.appendChild(this.status);
    root.appendChild(this.chartHost);
    root.appendChild(this.stripHost);
  }

  async submit(req: OptimizeRequest): Promise<void> {
    this.abandon();
    this.status.textContent = "submitting…";
    this.status.className = "panel-status";
    let jobId: string;
    try {
      const res = await this.client.optimize(req);
      jobId = res.job_id;
    } catch (err) {
      const detail = err instanceof ApiError ? `${err.tag}: ${err.message}` : String(err);
      this.status.textContent = `submit failed: ${detail}`;
      this.status.className = "panel-status panel-error";
      return;
    }
    this.callbacks.onJobChange(jobId);
    this.watch(jobId);
  }

  watch(jobId: string): void {
    this.handle = pollJob(
      this.client,
      jobId,
      (snap) => this.apply(snap),
      (message) => {
        this.status.textContent = `poll failed: ${message}`;
        this.status.className = "panel-status panel-error";
      }
    );
  }

  // Stop watching. Keeps whatever was last rendered on screen.
  abandon(): void {
    if (this.handle) {
      this.handle.stop();
      this.handle = null;
      this.status.textContent = "stopped watching job";
    }
  }

  apply(snap: JobSnapshot): void {
    this.lastSnapshot = snap;
    if (snap.state === "failed") {
      this.status.textContent = `job failed: ${snap.error ?? "unknown error"}`;
      this.status.className = "panel-status panel-error";
    } else {
      const arrow = snap.maximize ? "↑" : "↓";
      this.status.textContent =
        `${snap.state} · ${snap.property} ${arrow} · ` +
        `${snap.entries.length} of ${snap.steps + 1} entries · ` +
        `sim_min ${formatSimilarity(snap.sim_min)}`;
      this.status.className = "panel-status";
    }
    if (snap.entries.length > 0) {
      this.chartHost.innerHTML = chartSvg(snap.entries);
      this.renderStrip(snap.entries);
    }
  }

  snapshot(): JobSnapshot | null {
    return this.lastSnapshot;
  }

  private renderStrip(entries: JobEntry[]): void {
    this.stripHost.innerHTML = "";
    for (const e of entries) {
      if (!e.accepted && e.step_index > 0) {
        continue;
      }
      const card = moleculeCard(
        {
          smiles: e.smiles,
          similarity: e.similarity,
          corrected: e.corrected,
          position: [e.step_index],
          z: [],
          svg: e.svg,
        },
        [`step ${e.step_index}`, `score ${e.score.toPrecision(4)}`]
      );
      this.stripHost.appendChild(card);
    }
  }
}
