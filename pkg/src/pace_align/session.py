"""Closed-loop session: guided motion plus paced speech against a simulated user.

One session runs the 500 Hz control loop until both channels finish
(motion reaches the track end, speech reaches a terminal phrase) or a
wall-clock cap trips. Three schemes are supported:

  AC       fixed paces (p = a = 1), fixed phrase path
  LC_noAP  pace control active, phrase path pinned to the authored one
  LC       pace control plus adaptive phrase selection

Per tick, in order: user force, cooperation update, time-to-completion
estimates (at etc_rate_hz), pace targets, pace integration, admittance
step, plant step, speech advance, log row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SessionConfig, UserConfig, resolve_asset
from .motion import (
    AdmittanceParams,
    CompletionCriteria,
    MotionState,
    PlantParams,
    estimate_motion_etc,
    step_admittance,
    step_plant,
    virtual_force,
)
from .pacing import CooperationEstimator, PaceGains, PaceState, ideal_paces
from .speech import PhrasingGraph, SpeechState, advance_playhead, estimate_audio_etc, load_graph
from .trajectory import Trajectory, load_trajectory

__all__ = [
    "UserModel",
    "SessionLog",
    "SessionRunner",
    "run_session",
    "compute_summary",
    "load_session_assets",
    "TARGET_FREEZE_S",
]

# Remaining-time floor below which pace targets stop updating.
TARGET_FREEZE_S = 0.3


class UserModel:
    """Deterministic simulated user.

    Applies viscous resistance -r(t) * r_max * x_dot, optional scripted
    force bursts, and optional Gaussian force noise. All randomness comes
    from the generator passed to force(), so a fixed seed fixes the run.
    """

    def __init__(self, cfg: UserConfig, dims: int):
        self.kind = cfg.kind
        self.r_max = float(cfg.r_max)
        self.noise_std = float(cfg.noise_std)
        self.dims = dims
        self._times = np.array([t for t, _ in cfg.profile])
        self._levels = np.array([r for _, r in cfg.profile])
        self._pushes = []
        for t0, dur, direction, mag in cfg.pushes:
            d = np.asarray(direction, dtype=float)
            if d.shape != (dims,):
                raise ValueError(f"push direction has {d.shape[0]} components, need {dims}")
            n = np.linalg.norm(d)
            if n == 0.0:
                raise ValueError("push direction must be nonzero")
            self._pushes.append((t0, t0 + dur, d / n, mag))

    def resistance_at(self, t: float) -> float:
        idx = int(np.searchsorted(self._times, t, side="right")) - 1
        return float(self._levels[max(idx, 0)])

    def force(self, t: float, x_dot: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        f = -self.resistance_at(t) * self.r_max * x_dot
        for t0, t1, unit, mag in self._pushes:
            if t0 <= t < t1:
                f = f + mag * unit
        if self.noise_std > 0.0:
            f = f + rng.normal(0.0, self.noise_std, self.dims)
        return f


@dataclass
class SessionLog:
    """Row-per-tick record of one session plus terminal markers.

    Row 0 is the initial state at t = 0 with zero applied force; row k
    holds the state after tick k together with the force, cooperation,
    paces, and estimates used during that tick. Estimates read 0 for a
    channel that has finished.
    """

    scheme: str
    seed: int
    dims: int
    dt: float
    t: np.ndarray = field(default_factory=lambda: np.empty(0))
    x: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    x_dot: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    v_ref: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    f_ext: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    p: np.ndarray = field(default_factory=lambda: np.empty(0))
    a: np.ndarray = field(default_factory=lambda: np.empty(0))
    c: np.ndarray = field(default_factory=lambda: np.empty(0))
    t_hat_x: np.ndarray = field(default_factory=lambda: np.empty(0))
    t_hat_a: np.ndarray = field(default_factory=lambda: np.empty(0))
    em: np.ndarray = field(default_factory=lambda: np.empty(0))
    vertex: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    playhead: np.ndarray = field(default_factory=lambda: np.empty(0))
    motion_end_t: float | None = None
    audio_end_t: float | None = None
    cap_hit: bool = False
    committed_path: list[int] = field(default_factory=list)

    @property
    def misalignment(self) -> float | None:
        """Terminal misalignment: audio end minus motion end, seconds.

        Positive means motion finished first. None if the cap tripped
        before both channels completed.
        """
        if self.motion_end_t is None or self.audio_end_t is None:
            return None
        return self.audio_end_t - self.motion_end_t

    def column_names(self) -> list[str]:
        names = ["t"]
        for prefix in ("x", "xd", "vref", "f"):
            names += [f"{prefix}{i}" for i in range(self.dims)]
        names += ["p", "a", "c", "t_hat_x", "t_hat_a", "em", "vertex", "playhead"]
        return names

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names())
            for i in range(len(self.t)):
                row = [repr(float(self.t[i]))]
                for arr in (self.x, self.x_dot, self.v_ref, self.f_ext):
                    row += [repr(float(v)) for v in arr[i]]
                row += [repr(float(v[i])) for v in (self.p, self.a, self.c,
                                                    self.t_hat_x, self.t_hat_a, self.em)]
                row.append(str(int(self.vertex[i])))
                row.append(repr(float(self.playhead[i])))
                writer.writerow(row)

    def terminal_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "seed": self.seed,
            "motion_end_t": self.motion_end_t,
            "audio_end_t": self.audio_end_t,
            "misalignment": self.misalignment,
            "cap_hit": self.cap_hit,
            "committed_path": list(self.committed_path),
            "ticks": int(len(self.t)) - 1,
        }


def load_session_assets(cfg: SessionConfig) -> tuple[Trajectory, PhrasingGraph]:
    traj = load_trajectory(resolve_asset(cfg.trajectory, cfg.base_dir))
    graph = load_graph(resolve_asset(cfg.graph, cfg.base_dir))
    return traj, graph


class SessionRunner:
    """Incremental session stepper: one control tick per step() call.

    run_session drives it to completion in a tight loop; the live
    service steps it at wall-clock rate with a mutable force source.
    A force source must expose force(t, x_dot, rng) like UserModel.
    """

    def __init__(
        self,
        cfg: SessionConfig,
        traj: Trajectory,
        graph: PhrasingGraph,
        force_source=None,
    ):
        dims = traj.dims
        dt = cfg.dt
        self.cfg = cfg
        self.traj = traj
        self.graph = graph
        self.dt = dt
        self.adm = AdmittanceParams.create(dims, cfg.m0, cfg.d0, cfg.k, cfg.f_propell)
        self.plant = PlantParams.create(dims, cfg.m_robot, cfg.c_gain, dt=dt)
        self.crit = CompletionCriteria(cfg.completion_d, cfg.completion_dist)
        gains = PaceGains(cfg.k_p, cfg.k_a, cfg.k_c, cfg.pace_min, cfg.pace_max)
        self.coop = CooperationEstimator(cfg.alpha, cfg.f_max, cfg.deadband)
        self.pace = PaceState(gains)
        self.user = force_source if force_source is not None else UserModel(cfg.user, dims)
        self.rng = np.random.default_rng(cfg.seed)

        self.state = MotionState.at_rest(traj.point_at(0.0))
        self.speech = SpeechState(current_vertex=graph.start)
        self.pinned = None if cfg.scheme == "LC" else graph.pinned_successors()
        self.pace_on = cfg.scheme != "AC"

        self.etc_every = max(int(round(1.0 / (cfg.etc_rate_hz * dt))), 1)
        self.cap_ticks = int(round(cfg.cap_s / dt))
        self.k = 0

        self.t_hat_x = estimate_motion_etc(
            self.adm, self.plant, traj, self.state, self.crit
        ).seconds
        self.t_hat_a = estimate_audio_etc(
            graph, self.speech, self.t_hat_x, pinned=self.pinned
        )
        self.p_star, self.a_star = (1.0, 1.0)
        if self.pace_on and self.t_hat_x > 0.0 and self.t_hat_a > 0.0:
            self.p_star, self.a_star = ideal_paces(self.t_hat_x, self.t_hat_a)

        self.proj = traj.project(self.state.x)
        self.log = SessionLog(scheme=cfg.scheme, seed=cfg.seed, dims=dims, dt=dt)
        self._rows_t = [0.0]
        self._rows_x = [self.state.x.copy()]
        self._rows_xd = [self.state.x_dot.copy()]
        self._rows_vref = [self.state.v_ref.copy()]
        self._rows_f = [np.zeros(dims)]
        self._rows_p = [self.pace.p if self.pace_on else 1.0]
        self._rows_a = [self.pace.a if self.pace_on else 1.0]
        self._rows_c = [self.coop.value]
        self._rows_thx = [self.t_hat_x]
        self._rows_tha = [self.t_hat_a]
        self._rows_vertex = [self.speech.current_vertex]
        self._rows_play = [self.speech.playhead_s]

    @property
    def finished(self) -> bool:
        return self.state.completed and self.speech.finished

    @property
    def capped(self) -> bool:
        return self.k >= self.cap_ticks

    def step(self) -> None:
        state, speech, pace, log = self.state, self.speech, self.pace, self.log
        k, dt = self.k, self.dt
        t = k * dt
        f_ext = self.user.force(t, state.x_dot, self.rng)
        c = self.coop.step(float(np.linalg.norm(f_ext)), dt)

        if k % self.etc_every == 0:
            if not state.completed:
                self.t_hat_x = estimate_motion_etc(
                    self.adm, self.plant, self.traj, state, self.crit
                ).seconds
            if not speech.finished:
                self.t_hat_a = estimate_audio_etc(
                    self.graph, speech,
                    self.t_hat_x if not state.completed else 0.0,
                    pinned=self.pinned,
                )
            # Targets hold near the end: below ~0.3 s remaining the estimate
            # ratio is dominated by refresh staleness and tick quantization.
            # Once one channel finishes there is nothing left to sync
            # against, so the survivor heads back to natural pace.
            if self.pace_on:
                if state.completed != speech.finished:
                    self.p_star, self.a_star = 1.0, 1.0
                elif not state.completed and not speech.finished \
                        and self.t_hat_x > TARGET_FREEZE_S and self.t_hat_a > TARGET_FREEZE_S:
                    self.p_star, self.a_star = ideal_paces(self.t_hat_x, self.t_hat_a)

        if self.pace_on:
            pace.step(self.p_star, self.a_star, c, dt)
            state.p, state.p_dot = pace.p, pace.p_rate

        f_virt, self.proj = virtual_force(self.adm, self.traj, state.x, proj=self.proj)
        step_admittance(self.adm, dt, state, f_ext, f_virt)
        was_completed = state.completed
        self.proj = step_plant(self.plant, state, f_ext, self.traj, self.crit,
                               hint=self.proj.d)
        if state.completed and not was_completed:
            log.motion_end_t = (k + 1) * dt

        if not speech.finished:
            a_eff = pace.a if self.pace_on else 1.0
            advance_playhead(
                self.graph, speech, a_eff, dt,
                self.t_hat_x if not state.completed else 0.0, pinned=self.pinned,
            )
            if speech.finished:
                log.audio_end_t = (k + 1) * dt

        self._rows_t.append((k + 1) * dt)
        self._rows_x.append(state.x.copy())
        self._rows_xd.append(state.x_dot.copy())
        self._rows_vref.append(state.v_ref.copy())
        self._rows_f.append(np.asarray(f_ext, dtype=float))
        self._rows_p.append(pace.p if self.pace_on else 1.0)
        self._rows_a.append(pace.a if self.pace_on else 1.0)
        self._rows_c.append(c)
        self._rows_thx.append(0.0 if state.completed else self.t_hat_x)
        self._rows_tha.append(0.0 if speech.finished else self.t_hat_a)
        self._rows_vertex.append(speech.current_vertex)
        self._rows_play.append(speech.playhead_s)
        self.k = k + 1

    def snapshot(self) -> dict:
        """Latest tick as a JSON-ready dict for streaming."""
        vertex = int(self._rows_vertex[-1])
        p_now = float(self._rows_p[-1])
        a_now = float(self._rows_a[-1])
        return {
            "t": float(self._rows_t[-1]),
            "x": [float(v) for v in self._rows_x[-1]],
            "x_dot": [float(v) for v in self._rows_xd[-1]],
            "f_ext": [float(v) for v in self._rows_f[-1]],
            "p": p_now,
            "a": a_now,
            "c": float(self._rows_c[-1]),
            "t_hat_x": float(self._rows_thx[-1]),
            "t_hat_a": float(self._rows_tha[-1]),
            "em": float(self._rows_tha[-1] - self._rows_thx[-1]),
            "vertex": vertex,
            "phrase": self.graph.vertices[vertex].text,
            "playhead": float(self._rows_play[-1]),
            "progress": float(self.proj.d),
            "motion_done": bool(self.state.completed),
            "audio_done": bool(self.speech.finished),
            "committed_path": list(self.speech.committed_path),
            "clamp": {
                "p": p_now <= self.cfg.pace_min or p_now >= self.cfg.pace_max,
                "a": a_now <= self.cfg.pace_min or a_now >= self.cfg.pace_max,
            },
        }

    def finalize(self) -> SessionLog:
        log = self.log
        log.cap_hit = not self.finished
        log.t = np.array(self._rows_t)
        log.x = np.array(self._rows_x)
        log.x_dot = np.array(self._rows_xd)
        log.v_ref = np.array(self._rows_vref)
        log.f_ext = np.array(self._rows_f)
        log.p = np.array(self._rows_p)
        log.a = np.array(self._rows_a)
        log.c = np.array(self._rows_c)
        log.t_hat_x = np.array(self._rows_thx)
        log.t_hat_a = np.array(self._rows_tha)
        log.em = log.t_hat_a - log.t_hat_x
        log.vertex = np.array(self._rows_vertex, dtype=int)
        log.playhead = np.array(self._rows_play)
        log.committed_path = list(self.speech.committed_path)
        return log


def run_session(
    cfg: SessionConfig,
    traj: Trajectory | None = None,
    graph: PhrasingGraph | None = None,
    force_source=None,
) -> SessionLog:
    """Run one closed-loop session and return its full log.

    Deterministic: the same config (including seed) produces a
    bit-identical log.
    """
    if traj is None or graph is None:
        loaded_traj, loaded_graph = load_session_assets(cfg)
        traj = traj if traj is not None else loaded_traj
        graph = graph if graph is not None else loaded_graph
    runner = SessionRunner(cfg, traj, graph, force_source=force_source)
    while not runner.capped and not runner.finished:
        runner.step()
    return runner.finalize()


def _dist_stats(values: np.ndarray) -> dict:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {"n": 0}
    qs = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "n": int(values.size),
        "min": float(qs[0]),
        "q25": float(qs[1]),
        "median": float(qs[2]),
        "q75": float(qs[3]),
        "max": float(qs[4]),
        "mean": float(values.mean()),
    }


def _ks_statistic(xs: np.ndarray, ys: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (sup CDF distance)."""
    xs = np.sort(np.asarray(xs, dtype=float))
    ys = np.sort(np.asarray(ys, dtype=float))
    grid = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, grid, side="right") / xs.size
    cdf_y = np.searchsorted(ys, grid, side="right") / ys.size
    return float(np.abs(cdf_x - cdf_y).max())


def compute_summary(logs: list[SessionLog]) -> dict:
    """Aggregate per-scheme distributions over a batch of session logs.

    Terminal misalignment is summarized across sessions; |em|, a, p, c
    pool all ticks of all sessions in a scheme. Cooperation similarity
    across schemes is reported as pairwise KS statistics.
    """
    by_scheme: dict[str, list[SessionLog]] = {}
    for log in logs:
        by_scheme.setdefault(log.scheme, []).append(log)
    summary: dict = {"schemes": {}, "coop_ks": {}}
    pooled_c: dict[str, np.ndarray] = {}
    for scheme in sorted(by_scheme):
        group = by_scheme[scheme]
        ams = np.array([g.misalignment for g in group if g.misalignment is not None])
        abs_em = np.concatenate([np.abs(g.em) for g in group])
        a_all = np.concatenate([g.a for g in group])
        p_all = np.concatenate([g.p for g in group])
        c_all = np.concatenate([g.c for g in group])
        pooled_c[scheme] = c_all
        summary["schemes"][scheme] = {
            "misalignment": _dist_stats(ams),
            "abs_misalignment": _dist_stats(np.abs(ams)),
            "abs_em": _dist_stats(abs_em),
            "a": _dist_stats(a_all),
            "p": _dist_stats(p_all),
            "c": _dist_stats(c_all),
            "frac_a_natural": float(np.mean(np.abs(a_all - 1.0) < 0.05)),
            "n_sessions": len(group),
            "cap_hits": sum(1 for g in group if g.cap_hit),
        }
    names = sorted(pooled_c)
    for i, s1 in enumerate(names):
        for s2 in names[i + 1:]:
            summary["coop_ks"][f"{s1}_vs_{s2}"] = _ks_statistic(pooled_c[s1], pooled_c[s2])
    return summary
