/** Browser entry point: one websocket, one animation-frame loop.

Frames are folded into the store as they arrive; the DOM is written at
most once per animation frame from whatever the store holds. Nothing
below simulates: a reload reconnects and repaints from the stream.
*/

import { PhraseAudioSync, type PhrasePlayer } from "./audiosync.js";
import { ResistanceInput } from "./controls.js";
import { renderGraphSvg } from "./graphview.js";
import type { ServerFrame } from "./protocol.js";
import {
  formatSeconds,
  formatSigned,
  progressPercent,
  sparklinePoints,
} from "./render.js";
import { LiveConnection, type ConnectionStatus } from "./socket.js";
import { DashboardStore, SERIES_KEYS, type SeriesKey } from "./store.js";

const SERIES_BOUNDS: Partial<Record<SeriesKey, [number, number]>> = {
  p: [0.5, 1.5],
  a: [0.5, 1.5],
  c: [0.0, 1.1],
};

/** Local playhead that free-runs at the streamed rate between frames. */
class ClockPlayer implements PhrasePlayer {
  private vertex = -1;
  private offset = 0;
  private rate = 1;
  private lastMs = performance.now();

  position(): number {
    this.advance();
    return this.offset;
  }

  seek(vertex: number, offsetS: number): void {
    this.advance();
    this.vertex = vertex;
    this.offset = offsetS;
  }

  setRate(rate: number): void {
    this.advance();
    this.rate = rate;
  }

  currentVertex(): number {
    return this.vertex;
  }

  private advance(): void {
    const nowMs = performance.now();
    this.offset += ((nowMs - this.lastMs) / 1000) * this.rate;
    this.lastMs = nowMs;
  }
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

function wsUrl(): string {
  // ?ws=host:port lets a separately served page reach the service
  const override = new URLSearchParams(location.search).get("ws");
  const proto = location.protocol === "https:" ? "wss" : "ws";
  if (override !== null && override !== "") {
    return override.includes("://") ? override : `${proto}://${override}/ws`;
  }
  return `${proto}://${location.host}/ws`;
}

function main(): void {
  const store = new DashboardStore();
  const player = new ClockPlayer();
  const audio = new PhraseAudioSync(player);
  let dirty = true;

  const conn = new LiveConnection(wsUrl(), {
    onFrame: (frame: ServerFrame) => {
      if (frame.type === "hello") store.ingestHello(frame);
      else if (frame.type === "snapshot") {
        store.ingestSnapshot(frame);
        audio.apply(frame);
      } else if (frame.type === "final") store.ingestFinal(frame);
      else if (frame.type === "reset_done") store.ingestResetDone();
      else if (frame.type === "error") showError(frame.message);
      dirty = true;
    },
    onStatus: (status: ConnectionStatus) => {
      applyStatus(status);
      dirty = true;
    },
  });

  const resistance = new ResistanceInput((r) => {
    conn.send({ type: "set_resistance", r });
    slider.value = r.toFixed(2);
    sliderLabel.textContent = r.toFixed(2);
  });

  const slider = byId<HTMLInputElement>("resistance");
  const sliderLabel = byId<HTMLSpanElement>("resistance-value");
  const springToggle = byId<HTMLInputElement>("spring-return");
  const startBtn = byId<HTMLButtonElement>("start");
  const resetBtn = byId<HTMLButtonElement>("reset");
  const banner = byId<HTMLDivElement>("banner");
  const stalled = byId<HTMLDivElement>("stalled");
  const finalLine = byId<HTMLDivElement>("final");
  const phraseLine = byId<HTMLDivElement>("phrase");
  const graphBox = byId<HTMLDivElement>("graph-box");
  const progressFill = byId<HTMLDivElement>("progress-fill");
  const marker = byId<HTMLDivElement>("end-effector");
  const readout = byId<HTMLDivElement>("readout");

  slider.addEventListener("input", () => {
    resistance.setSlider(Number(slider.value));
  });
  springToggle.addEventListener("change", () => {
    resistance.springReturn = springToggle.checked;
  });
  startBtn.addEventListener("click", () => conn.send({ type: "start" }));
  resetBtn.addEventListener("click", () => conn.send({ type: "reset" }));
  window.addEventListener("keydown", (ev) => {
    if (ev.code === "Space" && !ev.repeat) {
      ev.preventDefault();
      resistance.keyPress();
    }
  });
  window.addEventListener("keyup", (ev) => {
    if (ev.code === "Space") resistance.keyRelease();
  });

  function showError(message: string): void {
    banner.textContent = `server error: ${message}`;
    banner.dataset["kind"] = "error";
    banner.hidden = false;
  }

  function applyStatus(status: ConnectionStatus): void {
    const connected = status === "open";
    slider.disabled = !connected;
    startBtn.disabled = !connected;
    resetBtn.disabled = !connected;
    resistance.setEnabled(connected);
    if (connected) {
      banner.hidden = true;
    } else {
      banner.textContent =
        status === "reconnecting" ? "connection lost, reconnecting" : "connecting";
      banner.dataset["kind"] = "warn";
      banner.hidden = false;
    }
  }

  let lastFrameMs = performance.now();
  function paint(nowMs: number): void {
    const dtS = Math.min((nowMs - lastFrameMs) / 1000, 0.1);
    lastFrameMs = nowMs;
    resistance.tick(dtS);
    stalled.hidden = !store.isStalled();
    if (dirty) {
      dirty = false;
      paintStore();
    }
    requestAnimationFrame(paint);
  }

  function paintStore(): void {
    const snap = store.latest;
    const graph = store.graph();
    if (graph !== null) {
      graphBox.innerHTML = renderGraphSvg(
        graph,
        store.committedPath(),
        snap?.vertex ?? null,
      );
    }
    if (snap !== null) {
      phraseLine.textContent = snap.phrase;
      progressFill.style.width = progressPercent(snap.progress);
      marker.style.left = progressPercent(snap.progress);
      readout.textContent = [
        `t ${formatSeconds(snap.t)}`,
        `p ${snap.p.toFixed(3)}${snap.clamp.p ? "*" : ""}`,
        `a ${snap.a.toFixed(3)}${snap.clamp.a ? "*" : ""}`,
        `c ${snap.c.toFixed(3)}`,
        `lead ${formatSigned(snap.em)}`,
      ].join("   ");
    }
    for (const key of SERIES_KEYS) {
      const poly = document.getElementById(`series-${key}`);
      if (poly === null) continue;
      const bounds = SERIES_BOUNDS[key];
      poly.setAttribute(
        "points",
        sparklinePoints(store.seriesPoints(key), 300, 60, bounds?.[0], bounds?.[1]),
      );
    }
    const text = store.finalBanner();
    finalLine.hidden = text === null;
    if (text !== null) finalLine.textContent = text;
  }

  applyStatus(conn.status);
  conn.start();
  requestAnimationFrame(paint);
}

main();
