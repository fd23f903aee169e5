/** Outgoing control throttle: at most `ratePerSec` frames leave the client.

Consecutive resistance frames coalesce to the latest value while waiting
for a slot; discrete frames (push, start, reset) queue in order. The
server enforces the same cap, so anything beyond it would be dropped
there anyway.
*/

import type { ControlFrame } from "./protocol.js";

export interface ThrottleOptions {
  ratePerSec?: number;
  now?: () => number;
  schedule?: (fn: () => void, delayMs: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export class ControlThrottle {
  private readonly emit: (frame: ControlFrame) => void;
  private readonly intervalMs: number;
  private readonly now: () => number;
  private readonly schedule: (fn: () => void, delayMs: number) => unknown;
  private readonly cancel: (handle: unknown) => void;
  private queue: ControlFrame[] = [];
  private lastEmitMs = -Infinity;
  private timer: unknown = null;
  private emitted = 0;

  constructor(emit: (frame: ControlFrame) => void, opts: ThrottleOptions = {}) {
    this.emit = emit;
    this.intervalMs = 1000 / (opts.ratePerSec ?? 30);
    this.now = opts.now ?? (() => Date.now());
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = opts.cancel ?? ((h) => clearTimeout(h as number));
  }

  get sentCount(): number {
    return this.emitted;
  }

  get pendingCount(): number {
    return this.queue.length;
  }

  send(frame: ControlFrame): void {
    const last = this.queue[this.queue.length - 1];
    if (
      frame.type === "set_resistance" &&
      last !== undefined &&
      last.type === "set_resistance"
    ) {
      this.queue[this.queue.length - 1] = frame;
    } else {
      this.queue.push(frame);
    }
    this.drain();
  }

  /** Drop anything still waiting (used when the socket goes away). */
  clear(): void {
    this.queue = [];
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
  }

  private drain(): void {
    const t = this.now();
    while (this.queue.length > 0 && t - this.lastEmitMs >= this.intervalMs) {
      const frame = this.queue.shift()!;
      this.lastEmitMs = t;
      this.emitted += 1;
      this.emit(frame);
    }
    if (this.queue.length > 0 && this.timer === null) {
      // floor of 1 ms: a rounding tie between the emit test above and
      // this remainder must not produce a zero-delay retry storm
      const wait = Math.max(1, this.lastEmitMs + this.intervalMs - t);
      this.timer = this.schedule(() => {
        this.timer = null;
        this.drain();
      }, wait);
    }
  }
}
