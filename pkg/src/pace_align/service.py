"""Live websocket bridge: wall-clock sessions driven by human input.

One session at a time. The first connected client controls it; later
clients observe. Control messages are sampled and held at tick
boundaries, recorded with the tick they took effect on, and a recorded
trace replayed headlessly reproduces the same log.

Frame schema lives in docs/protocol.md.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import SessionConfig
from .session import SessionLog, SessionRunner
from .speech import PhrasingGraph
from .trajectory import Trajectory

__all__ = [
    "PROTOCOL_VERSION",
    "LiveUser",
    "TokenBucket",
    "apply_control",
    "replay_trace",
    "create_app",
    "serve",
]

PROTOCOL_VERSION = 1
SNAPSHOT_HZ = 30.0
MSG_RATE_LIMIT = 30.0
SNAPSHOT_QUEUE_SIZE = 8


class LiveUser:
    """Force source fed by control messages instead of a script.

    Matches UserModel's force() signature so SessionRunner treats both
    alike. Noise keeps the configured level so replays stay exact: the
    draw happens every tick no matter what messages arrive.
    """

    def __init__(self, r_max: float, noise_std: float, dims: int):
        self.r = 0.0
        self.r_max = float(r_max)
        self.noise_std = float(noise_std)
        self.dims = dims
        self._pushes: list[tuple[float, float, np.ndarray, float]] = []

    def set_resistance(self, r: float) -> None:
        self.r = min(max(float(r), 0.0), 1.0)

    def add_push(self, t0: float, duration: float, direction, magnitude: float) -> None:
        d = np.asarray(direction, dtype=float)
        if d.shape != (self.dims,):
            raise ValueError(f"push direction has {d.shape} components, need {self.dims}")
        n = float(np.linalg.norm(d))
        if n == 0.0:
            raise ValueError("push direction must be nonzero")
        self._pushes.append((t0, t0 + duration, d / n, float(magnitude)))

    def force(self, t: float, x_dot: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        f = -self.r * self.r_max * x_dot
        for t0, t1, unit, mag in self._pushes:
            if t0 <= t < t1:
                f = f + mag * unit
        if self.noise_std > 0.0:
            f = f + rng.normal(0.0, self.noise_std, self.dims)
        return f


class TokenBucket:
    """Rate limiter: allow() passes at most `rate` events per second."""

    def __init__(self, rate: float, burst: float | None = None,
                 clock=time.monotonic):
        self.rate = float(rate)
        self.capacity = float(burst if burst is not None else rate)
        self.tokens = self.capacity
        self.clock = clock
        self._last = clock()

    def allow(self) -> bool:
        now = self.clock()
        self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
        self._last = now
        if self.tokens >= 1.0:
            self.tokens -= 1.0
            return True
        return False


def apply_control(user: LiveUser, cfg: SessionConfig, tick: int, frame: dict) -> None:
    """Apply one validated control frame at a tick boundary."""
    kind = frame.get("type")
    if kind == "set_resistance":
        user.set_resistance(frame["r"])
    elif kind == "push":
        magnitude = min(float(frame["magnitude"]), cfg.f_max)
        user.add_push(tick * cfg.dt, float(frame["duration"]),
                      frame["direction"], magnitude)
    else:
        raise ValueError(f"not a control frame: {kind!r}")


def _validate_control(frame: dict) -> str | None:
    kind = frame.get("type")
    if kind == "set_resistance":
        r = frame.get("r")
        if not isinstance(r, (int, float)):
            return "set_resistance needs a numeric r"
        return None
    if kind == "push":
        if not isinstance(frame.get("magnitude"), (int, float)):
            return "push needs a numeric magnitude"
        if not isinstance(frame.get("duration"), (int, float)) or frame["duration"] <= 0:
            return "push needs a positive duration"
        direction = frame.get("direction")
        if (not isinstance(direction, list)
                or not all(isinstance(v, (int, float)) for v in direction)
                or not any(v != 0 for v in direction)):
            return "push needs a nonzero direction vector"
        return None
    return f"unknown control type {kind!r}"


def replay_trace(
    cfg: SessionConfig,
    traj: Trajectory,
    graph: PhrasingGraph,
    events: list[dict],
) -> SessionLog:
    """Re-run a recorded live session headlessly.

    events: [{"tick": k, "frame": control frame}] sorted by tick; each
    frame is applied right before tick k executes, exactly where the
    live loop sampled it.
    """
    user = LiveUser(cfg.user.r_max, cfg.user.noise_std, traj.dims)
    runner = SessionRunner(cfg, traj, graph, force_source=user)
    pending = sorted(events, key=lambda e: e["tick"])
    i = 0
    while not runner.capped and not runner.finished:
        while i < len(pending) and pending[i]["tick"] <= runner.k:
            apply_control(user, cfg, runner.k, pending[i]["frame"])
            i += 1
        runner.step()
    return runner.finalize()


@dataclass
class _Client:
    ws: object
    role: str
    queue: asyncio.Queue = field(default_factory=lambda: asyncio.Queue(SNAPSHOT_QUEUE_SIZE))


class SessionService:
    """Owns the live session state shared by all websocket handlers."""

    def __init__(self, cfg: SessionConfig, traj: Trajectory, graph: PhrasingGraph,
                 realtime: bool = True):
        self.cfg = cfg
        self.traj = traj
        self.graph = graph
        self.realtime = realtime
        self.clients: list[_Client] = []
        self.controller: _Client | None = None
        self.runner: SessionRunner | None = None
        self.user: LiveUser | None = None
        self.trace: list[dict] = []
        self.last_log: SessionLog | None = None
        self._loop_task: asyncio.Task | None = None

    # -- lifecycle -----------------------------------------------------------

    def start_session(self) -> None:
        if self._loop_task is not None and not self._loop_task.done():
            raise RuntimeError("session already running")
        self.user = LiveUser(self.cfg.user.r_max, self.cfg.user.noise_std,
                             self.traj.dims)
        self.runner = SessionRunner(self.cfg, self.traj, self.graph,
                                    force_source=self.user)
        self.trace = []
        self.last_log = None
        self._loop_task = asyncio.get_running_loop().create_task(self._run_loop())

    async def reset_session(self) -> None:
        if self._loop_task is not None and not self._loop_task.done():
            self._loop_task.cancel()
            try:
                await self._loop_task
            except asyncio.CancelledError:
                pass
        self._loop_task = None
        self.runner = None
        self.user = None

    def record_control(self, frame: dict) -> None:
        if self.runner is None or self.user is None:
            raise RuntimeError("no session running")
        tick = self.runner.k
        apply_control(self.user, self.cfg, tick, frame)
        self.trace.append({"tick": tick, "frame": frame})

    # -- control loop --------------------------------------------------------

    async def _run_loop(self) -> None:
        runner = self.runner
        snap_every = max(int(round(1.0 / (SNAPSHOT_HZ * runner.dt))), 1)
        loop = asyncio.get_running_loop()
        t0 = loop.time()
        try:
            while not runner.capped and not runner.finished:
                if self.realtime:
                    target = min(int((loop.time() - t0) / runner.dt),
                                 runner.cap_ticks)
                else:
                    target = min(runner.k + snap_every, runner.cap_ticks)
                stepped = False
                while runner.k < target and not runner.finished:
                    runner.step()
                    stepped = True
                    if runner.k % snap_every == 0:
                        self._broadcast(self._snapshot_frame(runner))
                if self.realtime:
                    await asyncio.sleep(runner.dt * snap_every / 4)
                elif stepped:
                    await asyncio.sleep(0)
                else:
                    await asyncio.sleep(0.001)
            self._broadcast(self._snapshot_frame(runner))
            self.last_log = runner.finalize()
            self._broadcast(self._final_frame(self.last_log))
        except asyncio.CancelledError:
            self.last_log = runner.finalize()
            raise

    def _snapshot_frame(self, runner: SessionRunner) -> dict:
        frame = runner.snapshot()
        frame["type"] = "snapshot"
        frame["v"] = PROTOCOL_VERSION
        return frame

    def _final_frame(self, log: SessionLog) -> dict:
        return {
            "type": "final",
            "v": PROTOCOL_VERSION,
            "am": log.misalignment,
            "motion_end_t": log.motion_end_t,
            "audio_end_t": log.audio_end_t,
            "cap_hit": log.cap_hit,
            "committed_path": list(log.committed_path),
        }

    def _broadcast(self, frame: dict) -> None:
        # drop-oldest keeps the loop from ever waiting on a slow reader
        for client in self.clients:
            try:
                client.queue.put_nowait(frame)
            except asyncio.QueueFull:
                try:
                    client.queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass
                client.queue.put_nowait(frame)

    # -- connection handling -------------------------------------------------

    def hello_frame(self, role: str) -> dict:
        return {
            "type": "hello",
            "v": PROTOCOL_VERSION,
            "role": role,
            "config_id": "default",
            "dt": self.cfg.dt,
            "scheme": self.cfg.scheme,
            "f_max": self.cfg.f_max,
            "graph": {
                "start": self.graph.start,
                "vertices": [
                    {"id": v.id, "text": v.text, "duration_s": v.duration_s}
                    for v in self.graph.vertices.values()
                ],
                "edges": [[u, v] for u, succs in sorted(self.graph.edges.items())
                          for v in succs],
                "natural_path": list(self.graph.natural_path or []),
            },
            "running": self._loop_task is not None and not self._loop_task.done(),
        }

    def attach(self, ws) -> _Client:
        role = "controller" if self.controller is None else "observer"
        client = _Client(ws=ws, role=role)
        self.clients.append(client)
        if role == "controller":
            self.controller = client
        return client

    def detach(self, client: _Client) -> None:
        if client in self.clients:
            self.clients.remove(client)
        if self.controller is client:
            self.controller = None
            # controller hand-off: oldest remaining client takes over
            for other in self.clients:
                other.role = "controller"
                self.controller = other
                break


def _error_frame(message: str) -> dict:
    return {"type": "error", "v": PROTOCOL_VERSION, "message": message}


def create_app(cfg: SessionConfig, traj: Trajectory, graph: PhrasingGraph,
               realtime: bool = True) -> FastAPI:
    app = FastAPI()
    service = SessionService(cfg, traj, graph, realtime=realtime)
    app.state.service = service

    @app.get("/trace")
    def get_trace() -> dict:
        return {"events": service.trace, "seed": cfg.seed,
                "scheme": cfg.scheme, "v": PROTOCOL_VERSION}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        client = service.attach(ws)
        await ws.send_json(service.hello_frame(client.role))
        bucket = TokenBucket(MSG_RATE_LIMIT)
        sender = asyncio.get_running_loop().create_task(_drain(ws, client.queue))
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    frame = json.loads(raw)
                    if not isinstance(frame, dict):
                        raise ValueError("frame must be an object")
                except (json.JSONDecodeError, ValueError) as e:
                    await ws.send_json(_error_frame(f"malformed frame: {e}"))
                    continue
                kind = frame.get("type")
                if kind == "start":
                    config_id = frame.get("config", "default")
                    if config_id != "default":
                        await ws.send_json(_error_frame(f"unknown config {config_id!r}"))
                        continue
                    if client.role != "controller":
                        await ws.send_json(_error_frame("read-only connection"))
                        continue
                    try:
                        service.start_session()
                    except RuntimeError as e:
                        await ws.send_json(_error_frame(str(e)))
                elif kind == "reset":
                    if client.role != "controller":
                        await ws.send_json(_error_frame("read-only connection"))
                        continue
                    await service.reset_session()
                    await ws.send_json({"type": "reset_done", "v": PROTOCOL_VERSION})
                elif kind in ("set_resistance", "push"):
                    if client.role != "controller":
                        await ws.send_json(_error_frame("read-only connection"))
                        continue
                    if not bucket.allow():
                        continue  # rate limit: drop silently, keep the loop live
                    problem = _validate_control(frame)
                    if problem is not None:
                        await ws.send_json(_error_frame(problem))
                        continue
                    try:
                        service.record_control(frame)
                    except (RuntimeError, ValueError) as e:
                        await ws.send_json(_error_frame(str(e)))
                else:
                    await ws.send_json(_error_frame(f"unknown frame type {kind!r}"))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            service.detach(client)

    async def _drain(ws, queue: asyncio.Queue) -> None:
        try:
            while True:
                frame = await queue.get()
                await ws.send_json(frame)
        except Exception:
            return  # reader went away; the endpoint's finally detaches it

    return app


def serve(cfg: SessionConfig, traj: Trajectory, graph: PhrasingGraph,
          host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(cfg, traj, graph), host=host, port=port)
