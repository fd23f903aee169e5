import { describe, expect, it } from "vitest";

import type { ServerFrame } from "../src/protocol.js";
import { LiveConnection, type ConnectionStatus, type SocketLike } from "../src/socket.js";
import { FakeClock, makeHello } from "./fakes.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  receive(frame: unknown): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }

  drop(): void {
    this.onclose?.();
  }
}

function harness() {
  const clock = new FakeClock();
  const sockets: FakeSocket[] = [];
  const frames: ServerFrame[] = [];
  const statuses: ConnectionStatus[] = [];
  const conn = new LiveConnection(
    "ws://test/ws",
    {
      onFrame: (f) => frames.push(f),
      onStatus: (s) => statuses.push(s),
    },
    {
      factory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      now: clock.now,
      schedule: clock.schedule,
      cancel: clock.cancel,
    },
  );
  return { clock, sockets, frames, statuses, conn };
}

describe("LiveConnection", () => {
  it("opens one socket and surfaces parsed frames", () => {
    const { sockets, frames, statuses, conn } = harness();
    conn.start();
    expect(sockets.length).toBe(1);
    expect(statuses).toEqual(["connecting"]);
    sockets[0]!.open();
    expect(conn.status).toBe("open");
    sockets[0]!.receive(makeHello());
    expect(frames.length).toBe(1);
    expect(frames[0]!.type).toBe("hello");
  });

  it("ignores malformed and wrong-version messages", () => {
    const { sockets, frames, conn } = harness();
    conn.start();
    sockets[0]!.open();
    sockets[0]!.onmessage?.({ data: "not json{" });
    sockets[0]!.receive({ type: "snapshot", v: 99 });
    sockets[0]!.receive({ type: "mystery", v: 1 });
    expect(frames).toEqual([]);
  });

  it("blocks control input until the socket is open", () => {
    const { sockets, conn } = harness();
    expect(conn.send({ type: "start" })).toBe(false);
    conn.start();
    expect(conn.canControl).toBe(false);
    expect(conn.send({ type: "start" })).toBe(false);
    sockets[0]!.open();
    expect(conn.send({ type: "start" })).toBe(true);
    expect(sockets[0]!.sent).toEqual([JSON.stringify({ type: "start" })]);
  });

  it("reconnects with doubling delays and resets after success", () => {
    const { clock, sockets, statuses, conn } = harness();
    conn.start();
    sockets[0]!.open();
    sockets[0]!.drop();
    expect(conn.status).toBe("reconnecting");
    expect(sockets.length).toBe(1);
    clock.advance(499);
    expect(sockets.length).toBe(1);
    clock.advance(1);
    expect(sockets.length).toBe(2);

    // still down: the second retry waits twice as long
    sockets[1]!.drop();
    clock.advance(999);
    expect(sockets.length).toBe(2);
    clock.advance(1);
    expect(sockets.length).toBe(3);

    sockets[2]!.open();
    expect(conn.status).toBe("open");
    sockets[2]!.drop();
    // success reset the backoff to the base delay
    clock.advance(500);
    expect(sockets.length).toBe(4);
    // retries inside one outage collapse to a single status event
    expect(statuses).toEqual([
      "connecting",
      "open",
      "reconnecting",
      "open",
      "reconnecting",
    ]);
  });

  it("disables input while down and drops queued frames", () => {
    const { clock, sockets, conn } = harness();
    conn.start();
    sockets[0]!.open();
    conn.send({ type: "set_resistance", r: 0.5 });
    conn.send({ type: "set_resistance", r: 0.7 });
    expect(conn.throttle.pendingCount).toBe(1);
    sockets[0]!.drop();
    expect(conn.canControl).toBe(false);
    expect(conn.send({ type: "set_resistance", r: 0.9 })).toBe(false);
    expect(conn.throttle.pendingCount).toBe(0);
    clock.advance(10_000);
    // only the frame sent while open ever reached a socket
    expect(sockets[0]!.sent.length).toBe(1);
  });

  it("stop closes the socket and cancels the retry timer", () => {
    const { clock, sockets, conn } = harness();
    conn.start();
    sockets[0]!.open();
    sockets[0]!.drop();
    conn.stop();
    clock.advance(60_000);
    expect(sockets.length).toBe(1);
    expect(conn.status).toBe("stopped");

    conn.start();
    sockets[1]!.open();
    conn.stop();
    expect(sockets[1]!.closed).toBe(true);
  });
});
