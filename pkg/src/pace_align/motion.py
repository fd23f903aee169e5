"""Guidance force, pace-varying admittance, robot plant, ETC, energy audit.

The virtual admittance turns forces into a reference velocity; a velocity
loop drags the simulated robot after it.  Pace p rescales the admittance
clock: the reference velocity obeys

    M0 dv_ref/dt = p^2 (F_ext + F_virtual) - (p D0 - (pdot/p) M0) v_ref

which reduces to the fixed admittance M0 dv/dt + D0 v = F at p = 1,
pdot = 0.  All matrices are diagonal, stored as per-axis vectors.
Integration is semi-implicit Euler at a fixed step (500 Hz default).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .trajectory import ProjectionResult, Trajectory

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


__all__ = [
    "AdmittanceParams",
    "PlantParams",
    "CompletionCriteria",
    "MotionState",
    "MotionError",
    "EtcResult",
    "virtual_force",
    "step_admittance",
    "step_admittance_fixed",
    "step_plant",
    "step_plant_ideal",
    "estimate_motion_etc",
    "dissipation_residual",
    "energy_audit",
]

ETC_CAP_S = 120.0


class MotionError(RuntimeError):
    """Raised when the control loop receives non-finite inputs."""


def _diag(value, dims: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (dims,)).copy()
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError(f"{name} entries must be positive finite, got {value}")
    return arr


@dataclass(frozen=True)
class AdmittanceParams:
    """Diagonal virtual mass/damping, guide stiffness, propell magnitude."""

    m0: np.ndarray
    d0: np.ndarray
    k: np.ndarray
    f_propell: float = 0.0

    @classmethod
    def create(cls, dims: int, m0, d0, k, f_propell: float = 0.0) -> "AdmittanceParams":
        if f_propell < 0.0:
            raise ValueError(f"f_propell must be >= 0, got {f_propell}")
        return cls(
            m0=_diag(m0, dims, "M0"),
            d0=_diag(d0, dims, "D0"),
            k=_diag(k, dims, "K"),
            f_propell=float(f_propell),
        )


@dataclass(frozen=True)
class PlantParams:
    """Robot-side mass, velocity-loop gain, and the integration step."""

    m_robot: np.ndarray
    c_gain: float
    dt: float = 0.002

    @classmethod
    def create(cls, dims: int, m_robot, c_gain: float, dt: float = 0.002) -> "PlantParams":
        if c_gain <= 0.0:
            raise ValueError(f"C gain must be positive, got {c_gain}")
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        return cls(m_robot=_diag(m_robot, dims, "M_robot"), c_gain=float(c_gain), dt=float(dt))


@dataclass(frozen=True)
class CompletionCriteria:
    """Done when the projection parameter and the tracking error both pass."""

    d_min: float = 0.995
    dist_max: float = 0.01


@dataclass
class MotionState:
    x: np.ndarray
    x_dot: np.ndarray
    v_ref: np.ndarray
    p: float = 1.0
    p_dot: float = 0.0
    phase: float = 0.0
    t: float = 0.0
    completed: bool = False

    @classmethod
    def at_rest(cls, x0) -> "MotionState":
        x0 = np.asarray(x0, dtype=float)
        return cls(x=x0.copy(), x_dot=np.zeros_like(x0), v_ref=np.zeros_like(x0))


class EtcResult(NamedTuple):
    seconds: float
    cap_hit: bool


def virtual_force(
    adm: AdmittanceParams,
    traj: Trajectory,
    x: np.ndarray,
    proj: ProjectionResult | None = None,
) -> tuple[np.ndarray, ProjectionResult]:
    """Guide spring toward the closest curve point plus a propell pull
    along the tangent.  The propell vanishes at the end of the curve so
    the endpoint is an equilibrium.  Returns the projection it used so
    callers can reuse it within the tick.
    """
    if proj is None:
        proj = traj.project(x)
    force = adm.k * (proj.point - x)
    if proj.d < 1.0:
        force = force + adm.f_propell * proj.tangent
    return force, proj


def step_admittance(
    adm: AdmittanceParams, dt: float, state: MotionState, f_ext: np.ndarray, f_virtual: np.ndarray
) -> None:
    """One semi-implicit step of the pace-scaled admittance.

    Solves (M0 + dt (p D0 - (pdot/p) M0)) v_new = M0 v + dt p^2 F_total
    per axis.  At p = 1, pdot = 0 the expression is literally the fixed
    admittance update, so the reduction is bit-exact.
    """
    f_total = f_ext + f_virtual
    if not np.all(np.isfinite(f_total)):
        raise MotionError(f"non-finite force at t={state.t:.4f}: {f_total}")
    p, p_dot = state.p, state.p_dot
    denom = adm.m0 + dt * (p * adm.d0 - (p_dot / p) * adm.m0)
    state.v_ref = (adm.m0 * state.v_ref + dt * (p * p) * f_total) / denom
    state.phase += p * dt


def step_admittance_fixed(
    adm: AdmittanceParams, dt: float, v_ref: np.ndarray, f_total: np.ndarray
) -> np.ndarray:
    """Pace-free admittance step (the p = 1 baseline controller)."""
    return (adm.m0 * v_ref + dt * f_total) / (adm.m0 + dt * adm.d0)


def step_plant(
    plant: PlantParams,
    state: MotionState,
    f_ext: np.ndarray,
    traj: Trajectory,
    criteria: CompletionCriteria,
    hint: float | None = None,
) -> ProjectionResult:
    """Drag the robot toward v_ref one step and test completion.

    (M_r + dt C) xdot_new = M_r xdot + dt (F_ext + C v_ref), then
    x += dt xdot_new.  Completion (projection parameter and distance both
    within bounds) is absorbing.  Returns the new position's projection,
    which doubles as the next tick's virtual-force projection.
    """
    dt, c = plant.dt, plant.c_gain
    state.x_dot = (plant.m_robot * state.x_dot + dt * (f_ext + c * state.v_ref)) / (
        plant.m_robot + dt * c
    )
    state.x = state.x + dt * state.x_dot
    state.t += dt
    proj = traj.project(state.x, hint=hint)
    if proj.d >= criteria.d_min and proj.distance <= criteria.dist_max:
        state.completed = True
    return proj


def step_plant_ideal(
    dt: float,
    state: MotionState,
    traj: Trajectory,
    criteria: CompletionCriteria,
    hint: float | None = None,
) -> ProjectionResult:
    """Plant that executes v_ref exactly (no inner velocity loop).

    This is the robot model under which the (F_ext, v_ref) port is a real
    power port: with a lagging inner loop a sustained transverse force
    extracts energy at F^2/C indefinitely and no storage function can bound
    it.  Energy audits therefore run against this plant.
    """
    state.x_dot = state.v_ref.copy()
    state.x = state.x + dt * state.x_dot
    state.t += dt
    proj = traj.project(state.x, hint=hint)
    if proj.d >= criteria.d_min and proj.distance <= criteria.dist_max:
        state.completed = True
    return proj


# -- motion ETC --------------------------------------------------------------


@njit(cache=True)
def _etc_sim_linear(
    seg_a,
    seg_v,
    seg_len2,
    seg_dir,
    x0,
    xd0,
    vref0,
    m0,
    d0,
    kdiag,
    f_propell,
    m_robot,
    c_gain,
    dt,
    comp_d,
    comp_dist,
    cap_ticks,
):  # pragma: no cover - compiled
    n_seg = seg_a.shape[0]
    dims = seg_a.shape[1]
    x = x0.copy()
    xd = xd0.copy()
    vref = vref0.copy()
    ts = np.empty(n_seg)
    dist2s = np.empty(n_seg)
    for tick in range(cap_ticks + 1):
        # exact per-segment projection, ties to the smallest parameter;
        # mirrors the interpreted projection op-for-op so both ETC paths
        # stay tick-identical
        for i in range(n_seg):
            num = 0.0
            for j in range(dims):
                num += (x[j] - seg_a[i, j]) * seg_v[i, j]
            L2 = seg_len2[i]
            if L2 < 1e-300:
                L2 = 1e-300
            t = num / L2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            ts[i] = t
            dist2 = 0.0
            for j in range(dims):
                diff = seg_a[i, j] + seg_v[i, j] * t - x[j]
                dist2 += diff * diff
            dist2s[i] = dist2
        best = dist2s[0]
        for i in range(1, n_seg):
            if dist2s[i] < best:
                best = dist2s[i]
        tol = best + 1e-12 * (1.0 + best)
        bi = 0
        for i in range(n_seg):
            if dist2s[i] <= tol:
                bi = i
                break
        d = (bi + ts[bi]) / n_seg
        # evaluate the curve point the way the interpreted evaluator does
        scaled = d * n_seg
        idx = int(scaled)
        if idx > n_seg - 1:
            idx = n_seg - 1
        frac = scaled - idx
        dist2 = 0.0
        for j in range(dims):
            diff = seg_a[idx, j] + seg_v[idx, j] * frac - x[j]
            dist2 += diff * diff
        dist = np.sqrt(dist2)
        if d >= comp_d and dist <= comp_dist:
            return tick, False
        if tick == cap_ticks:
            break
        # virtual force at base pace, then admittance, then plant
        for j in range(dims):
            point_j = seg_a[idx, j] + seg_v[idx, j] * frac
            f = kdiag[j] * (point_j - x[j])
            if d < 1.0:
                f = f + f_propell * seg_dir[idx, j]
            vref[j] = (m0[j] * vref[j] + dt * f) / (m0[j] + dt * d0[j])
            xd[j] = (m_robot[j] * xd[j] + dt * c_gain * vref[j]) / (m_robot[j] + dt * c_gain)
            x[j] = x[j] + dt * xd[j]
    return cap_ticks, True


def _etc_sim_python(
    adm: AdmittanceParams,
    plant: PlantParams,
    traj: Trajectory,
    x0: np.ndarray,
    xd0: np.ndarray,
    vref0: np.ndarray,
    criteria: CompletionCriteria,
    cap_ticks: int,
) -> tuple[int, bool]:
    """Reference ETC loop; also the only path for cubic trajectories."""
    sim = MotionState(x=x0.copy(), x_dot=xd0.copy(), v_ref=vref0.copy())
    proj = traj.project(sim.x)
    for tick in range(cap_ticks + 1):
        if proj.d >= criteria.d_min and proj.distance <= criteria.dist_max:
            return tick, False
        if tick == cap_ticks:
            break
        f_virt, _ = virtual_force(adm, traj, sim.x, proj=proj)
        sim.v_ref = step_admittance_fixed(adm, plant.dt, sim.v_ref, f_virt)
        sim.x_dot = (plant.m_robot * sim.x_dot + plant.dt * plant.c_gain * sim.v_ref) / (
            plant.m_robot + plant.dt * plant.c_gain
        )
        sim.x = sim.x + plant.dt * sim.x_dot
        proj = traj.project(sim.x)
    return cap_ticks, True


def estimate_motion_etc(
    adm: AdmittanceParams,
    plant: PlantParams,
    traj: Trajectory,
    state: MotionState,
    criteria: CompletionCriteria = CompletionCriteria(),
    cap_s: float = ETC_CAP_S,
    force_python: bool = False,
) -> EtcResult:
    """Time to completion if the user lets go now.

    Forward-simulates a clone of (x, xdot, v_ref) at base pace with zero
    external force until the completion predicate fires, at the loop's own
    rate, capped at cap_s.  Piecewise-linear curves run in a compiled
    kernel; the Python reference path is equivalence-tested against it.
    """
    cap_ticks = int(round(cap_s / plant.dt))
    if traj.interpolation == "linear" and _HAVE_NUMBA and not force_python:
        ticks, cap_hit = _etc_sim_linear(
            traj._seg_a,
            traj._seg_v,
            traj._seg_len2,
            traj._seg_dir,
            state.x.astype(float),
            state.x_dot.astype(float),
            state.v_ref.astype(float),
            adm.m0,
            adm.d0,
            adm.k,
            adm.f_propell,
            plant.m_robot,
            plant.c_gain,
            plant.dt,
            criteria.d_min,
            criteria.dist_max,
            cap_ticks,
        )
    else:
        ticks, cap_hit = _etc_sim_python(
            adm, plant, traj, state.x, state.x_dot, state.v_ref, criteria, cap_ticks
        )
    return EtcResult(seconds=ticks * plant.dt, cap_hit=bool(cap_hit))


# -- energy audit ------------------------------------------------------------


def dissipation_residual(
    adm: AdmittanceParams,
    traj: Trajectory,
    dt: float,
    f_ext: np.ndarray,
    v_ref: np.ndarray,
    x: np.ndarray,
    p: np.ndarray,
) -> np.ndarray:
    """Residual R(t) = supplied energy minus storage growth, per tick.

    Inputs are aligned tick series: row k of f_ext acts while v_ref moves
    from row k to row k+1, so the input-energy quadrature pairs f_ext[k]
    with v_ref[k+1] (the semi-implicit update's own pairing, which keeps
    the discrete balance one-sided).  Storage uses the candidate
    V = v^T (M0 / 2p^2) v + (xd - x)^T K (xd - x) / 2.  A passive run
    keeps min R above a small negative numerical floor.
    """
    f_ext = np.atleast_2d(np.asarray(f_ext, dtype=float))
    v_ref = np.atleast_2d(np.asarray(v_ref, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = np.asarray(p, dtype=float)
    n = len(v_ref)
    if not (len(f_ext) >= n - 1 and len(x) == n and len(p) == n):
        raise ValueError("misaligned audit series")
    err = np.empty_like(x)
    for k in range(n):
        err[k] = traj.project(x[k]).point - x[k]
    storage = 0.5 * np.einsum("kj,j,kj->k", v_ref, adm.m0, v_ref) / p**2
    storage += 0.5 * np.einsum("kj,j,kj->k", err, adm.k, err)
    power = np.einsum("kj,kj->k", f_ext[: n - 1], v_ref[1:])
    supplied = np.concatenate([[0.0], np.cumsum(power) * dt])
    return supplied - (storage - storage[0])


def energy_audit(adm: AdmittanceParams, traj: Trajectory, log) -> np.ndarray:
    """Dissipation residual series for a recorded session log.

    Log row k holds the state after tick k and the force applied during
    tick k, so the force that moved v_ref[k] to v_ref[k+1] sits in row
    k + 1.  Meaningful as a passivity statement only under the audit
    hypotheses (constant pace, linear trajectory, propell off); outside
    them the series is still well defined and useful for exploration.
    """
    return dissipation_residual(
        adm, traj, log.dt, log.f_ext[1:], log.v_ref, log.x, log.p
    )
