import { describe, expect, it } from "vitest";

import type { ControlFrame } from "../src/protocol.js";
import { ControlThrottle } from "../src/ratelimit.js";
import { FakeClock } from "./fakes.js";

function harness(ratePerSec = 30) {
  const clock = new FakeClock();
  const sent: ControlFrame[] = [];
  const throttle = new ControlThrottle((f) => sent.push(f), {
    ratePerSec,
    now: clock.now,
    schedule: clock.schedule,
    cancel: clock.cancel,
  });
  return { clock, sent, throttle };
}

describe("ControlThrottle", () => {
  it("emits the first frame immediately", () => {
    const { sent, throttle } = harness();
    throttle.send({ type: "set_resistance", r: 0.5 });
    expect(sent).toEqual([{ type: "set_resistance", r: 0.5 }]);
  });

  it("caps a kilohertz slider spam at thirty frames per second", () => {
    const { clock, sent, throttle } = harness();
    let r = 0;
    for (let i = 0; i < 10_000; i += 1) {
      r = (i % 100) / 100;
      throttle.send({ type: "set_resistance", r });
      clock.advance(1);
    }
    // 10 s of spam: one immediate frame plus one per 33.3 ms slot
    expect(sent.length).toBeLessThanOrEqual(301);
    expect(sent.length).toBeGreaterThanOrEqual(290);
    // trailing emit delivers the final value once the last slot opens
    clock.advance(100);
    const last = sent[sent.length - 1]!;
    expect(last).toEqual({ type: "set_resistance", r });
    expect(throttle.pendingCount).toBe(0);
  });

  it("coalesces queued resistance updates to the latest value", () => {
    const { clock, sent, throttle } = harness();
    throttle.send({ type: "set_resistance", r: 0.1 });
    throttle.send({ type: "set_resistance", r: 0.2 });
    throttle.send({ type: "set_resistance", r: 0.3 });
    expect(sent.length).toBe(1);
    expect(throttle.pendingCount).toBe(1);
    clock.advance(40);
    expect(sent.map((f) => (f.type === "set_resistance" ? f.r : NaN))).toEqual([
      0.1, 0.3,
    ]);
  });

  it("keeps discrete frames ordered and uncoalesced", () => {
    const { clock, sent, throttle } = harness();
    throttle.send({ type: "set_resistance", r: 0.4 });
    throttle.send({ type: "push", direction: [0, 0, -1], magnitude: 5, duration: 0.2 });
    throttle.send({ type: "set_resistance", r: 0.6 });
    clock.advance(200);
    expect(sent.map((f) => f.type)).toEqual([
      "set_resistance",
      "push",
      "set_resistance",
    ]);
    expect(sent[2]).toEqual({ type: "set_resistance", r: 0.6 });
  });

  it("drops whatever is pending on clear", () => {
    const { clock, sent, throttle } = harness();
    throttle.send({ type: "set_resistance", r: 0.4 });
    throttle.send({ type: "set_resistance", r: 0.9 });
    expect(throttle.pendingCount).toBe(1);
    throttle.clear();
    clock.advance(1000);
    expect(sent.length).toBe(1);
    expect(clock.pendingTasks).toBe(0);
  });
});
