/** Websocket client: one connection, auto-reconnect, throttled control out.

Simulation state lives entirely on the server, so dropping and reopening
the socket only affects rendering; the next hello + snapshot resume the
view. Control input is disabled while the socket is not open.
*/

import { parseServerFrame, type ControlFrame, type ServerFrame } from "./protocol.js";
import { ControlThrottle } from "./ratelimit.js";
import { Backoff } from "./reconnect.js";

export type ConnectionStatus = "connecting" | "open" | "reconnecting" | "stopped";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface ConnectionHandlers {
  onFrame: (frame: ServerFrame) => void;
  onStatus?: (status: ConnectionStatus) => void;
}

export interface ConnectionOptions {
  factory?: (url: string) => SocketLike;
  schedule?: (fn: () => void, delayMs: number) => unknown;
  cancel?: (handle: unknown) => void;
  now?: () => number;
  ratePerSec?: number;
}

export class LiveConnection {
  readonly throttle: ControlThrottle;
  private readonly url: string;
  private readonly handlers: ConnectionHandlers;
  private readonly factory: (url: string) => SocketLike;
  private readonly schedule: (fn: () => void, delayMs: number) => unknown;
  private readonly cancel: (handle: unknown) => void;
  private readonly backoff = new Backoff();
  private socket: SocketLike | null = null;
  private timer: unknown = null;
  private statusValue: ConnectionStatus = "stopped";

  constructor(url: string, handlers: ConnectionHandlers, opts: ConnectionOptions = {}) {
    this.url = url;
    this.handlers = handlers;
    this.factory = opts.factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = opts.cancel ?? ((h) => clearTimeout(h as number));
    this.throttle = new ControlThrottle((frame) => this.raw(frame), {
      ratePerSec: opts.ratePerSec ?? 30,
      now: opts.now,
      schedule: opts.schedule,
      cancel: opts.cancel,
    });
  }

  get status(): ConnectionStatus {
    return this.statusValue;
  }

  get canControl(): boolean {
    return this.statusValue === "open";
  }

  start(): void {
    if (this.socket !== null) return;
    this.setStatus(this.backoff.attempts > 0 ? "reconnecting" : "connecting");
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.backoff.reset();
      this.setStatus("open");
    };
    sock.onmessage = (ev) => {
      const frame = parseServerFrame(ev.data);
      if (frame !== null) this.handlers.onFrame(frame);
    };
    sock.onerror = () => {
      // the close handler owns recovery
    };
    sock.onclose = () => {
      this.socket = null;
      this.throttle.clear();
      if (this.statusValue === "stopped") return;
      this.setStatus("reconnecting");
      this.timer = this.schedule(() => {
        this.timer = null;
        this.start();
      }, this.backoff.nextDelayMs());
    };
  }

  stop(): void {
    this.setStatus("stopped");
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    this.throttle.clear();
    const sock = this.socket;
    this.socket = null;
    if (sock !== null) {
      sock.onclose = null;
      sock.close();
    }
  }

  /** Queue a control frame; false if input is disabled right now. */
  send(frame: ControlFrame): boolean {
    if (!this.canControl) return false;
    this.throttle.send(frame);
    return true;
  }

  private raw(frame: ControlFrame): void {
    this.socket?.send(JSON.stringify(frame));
  }

  private setStatus(status: ConnectionStatus): void {
    if (status === this.statusValue) return;
    this.statusValue = status;
    this.handlers.onStatus?.(status);
  }
}
