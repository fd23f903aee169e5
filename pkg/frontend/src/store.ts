/** Dashboard state assembled from the server stream.

The store is a pure accumulator: every number it exposes comes from a
received frame, never from local simulation. A fresh store fed a
mid-run stream converges to the same view, which is what makes a page
reload safe.
*/

import type {
  FinalFrame,
  GraphPayload,
  HelloFrame,
  SnapshotFrame,
} from "./protocol.js";

export interface SeriesPoint {
  t: number;
  value: number;
}

export const SERIES_KEYS = ["p", "a", "c", "t_hat_x", "t_hat_a", "em"] as const;
export type SeriesKey = (typeof SERIES_KEYS)[number];

const DEFAULT_CAPACITY = 2048;
const STALL_AFTER_MS = 1000;

class RingSeries {
  private readonly buf: SeriesPoint[] = [];
  private head = 0;

  constructor(private readonly capacity: number) {}

  push(t: number, value: number): void {
    if (this.buf.length < this.capacity) {
      this.buf.push({ t, value });
    } else {
      this.buf[this.head] = { t, value };
      this.head = (this.head + 1) % this.capacity;
    }
  }

  points(): SeriesPoint[] {
    return this.buf.slice(this.head).concat(this.buf.slice(0, this.head));
  }

  get length(): number {
    return this.buf.length;
  }
}

export interface StoreOptions {
  capacity?: number;
  now?: () => number;
}

export class DashboardStore {
  hello: HelloFrame | null = null;
  latest: SnapshotFrame | null = null;
  final: FinalFrame | null = null;
  /** Vertex changes that do not follow a graph edge, oldest first. */
  readonly invalidTransitions: Array<{ from: number; to: number }> = [];
  private readonly series = new Map<SeriesKey, RingSeries>();
  private readonly capacity: number;
  private readonly now: () => number;
  private lastFrameAtMs: number | null = null;
  private edgeSet: Set<string> | null = null;

  constructor(opts: StoreOptions = {}) {
    this.capacity = opts.capacity ?? DEFAULT_CAPACITY;
    this.now = opts.now ?? Date.now;
    for (const key of SERIES_KEYS) this.series.set(key, new RingSeries(this.capacity));
  }

  ingestHello(frame: HelloFrame): void {
    this.hello = frame;
    this.edgeSet = new Set(frame.graph.edges.map(([u, v]) => `${u}>${v}`));
    this.final = null;
  }

  ingestSnapshot(frame: SnapshotFrame): void {
    const prev = this.latest;
    if (prev !== null && frame.t < prev.t) {
      // a reset mid-stream restarts the clock; drop history with it
      this.resetRun();
    }
    this.checkTransition(this.latest, frame);
    this.latest = frame;
    this.lastFrameAtMs = this.now();
    for (const key of SERIES_KEYS) {
      this.series.get(key)!.push(frame.t, frame[key]);
    }
  }

  ingestFinal(frame: FinalFrame): void {
    this.final = frame;
    this.lastFrameAtMs = this.now();
  }

  ingestResetDone(): void {
    this.resetRun();
  }

  seriesPoints(key: SeriesKey): SeriesPoint[] {
    return this.series.get(key)!.points();
  }

  /** True when snapshots were flowing but stopped for over a second. */
  isStalled(): boolean {
    if (this.lastFrameAtMs === null || this.final !== null) return false;
    return this.now() - this.lastFrameAtMs > STALL_AFTER_MS;
  }

  graph(): GraphPayload | null {
    return this.hello?.graph ?? null;
  }

  committedPath(): number[] {
    if (this.final !== null) return this.final.committed_path;
    return this.latest?.committed_path ?? [];
  }

  /** Banner text for the end of a run; null while still running. */
  finalBanner(): string | null {
    if (this.final === null) return null;
    const am = this.final.am;
    if (am === null || this.final.cap_hit) {
      return "run stopped at the time cap before both channels finished";
    }
    const gap = Math.abs(am).toFixed(2);
    if (am > 0) return `motion finished before the audio by ${gap} s`;
    if (am < 0) return `audio finished before the motion by ${gap} s`;
    return "motion and audio finished together";
  }

  private resetRun(): void {
    this.latest = null;
    this.final = null;
    this.invalidTransitions.length = 0;
    for (const key of SERIES_KEYS) this.series.set(key, new RingSeries(this.capacity));
  }

  private checkTransition(prev: SnapshotFrame | null, next: SnapshotFrame): void {
    if (prev === null || this.edgeSet === null) return;
    if (prev.vertex === next.vertex) return;
    if (!this.edgeSet.has(`${prev.vertex}>${next.vertex}`)) {
      this.invalidTransitions.push({ from: prev.vertex, to: next.vertex });
    }
  }
}
