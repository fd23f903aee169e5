"""Ideal-pace solver, cooperation estimate, and pace tracking laws."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pace_align.pacing import (
    PACE_MAX,
    PACE_MIN,
    CooperationEstimator,
    PaceGains,
    PaceState,
    ideal_paces,
)


def grid_search_paces(t_motion: float, t_audio: float, step: float = 1e-4):
    """Oracle: sweep the constraint line a = p / s, minimize the objective.

    Gridded in whichever coordinate moves slower along the line, so the
    half-step resolution bounds the error of both returned coordinates.
    """
    s = t_motion / t_audio
    grid = np.arange(step, 2.0 + step, step)
    if s >= 1.0:
        p, a = grid, grid / s
    else:
        p, a = grid * s, grid
    obj = (p - 1.0) ** 2 + (a - 1.0) ** 2
    i = int(np.argmin(obj))
    return float(p[i]), float(a[i])


def integrate_cooperation(force_mag: float, alpha: float, f_max: float,
                          deadband: float, t_end: float, dt: float = 1e-4):
    """Oracle: left-Riemann quadrature of the continuous leaky integral."""
    taus = np.arange(0.0, t_end, dt)
    u = max(force_mag - deadband, 0.0) / f_max
    accum = float(np.sum(alpha ** (t_end - taus) * u * dt))
    return 1.0 - accum


# -- ideal paces -------------------------------------------------------------


@pytest.mark.parametrize(
    ("t_motion", "t_audio", "p_want", "a_want"),
    [
        (5.0, 5.0, 1.0, 1.0),
        (6.0, 3.0, 1.2, 0.6),
        (3.0, 6.0, 0.6, 1.2),
    ],
)
def test_ideal_paces_known_values(t_motion, t_audio, p_want, a_want):
    p, a = ideal_paces(t_motion, t_audio)
    assert p == pytest.approx(p_want, abs=1e-12)
    assert a == pytest.approx(a_want, abs=1e-12)
    assert t_motion / p == pytest.approx(t_audio / a, rel=1e-12)


def test_ideal_paces_matches_grid_search(rng):
    for _ in range(100):
        t_motion, t_audio = rng.uniform(0.5, 30.0, size=2)
        p, a = ideal_paces(t_motion, t_audio)
        p_ref, a_ref = grid_search_paces(t_motion, t_audio)
        assert p == pytest.approx(p_ref, abs=1e-3)
        assert a == pytest.approx(a_ref, abs=1e-3)


@given(st.floats(0.5, 30.0), st.floats(0.5, 30.0))
@settings(max_examples=200, deadline=None)
def test_ideal_paces_constraint_and_signs(t_motion, t_audio):
    p, a = ideal_paces(t_motion, t_audio)
    assert abs(t_motion / p - t_audio / a) <= 1e-12 * (t_motion / p)
    s = t_motion / t_audio
    if s > 1.0 + 1e-12:
        assert p > 1.0 and a < 1.0
    elif s < 1.0 - 1e-12:
        assert p < 1.0 and a > 1.0


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_ideal_paces_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        ideal_paces(bad, 5.0)
    with pytest.raises(ValueError):
        ideal_paces(5.0, bad)


# -- cooperation -------------------------------------------------------------


def test_cooperation_full_without_force():
    est = CooperationEstimator()
    for _ in range(5000):
        est.step(0.0, 0.002)
    assert est.value == 1.0


def test_cooperation_deadband_absorbs_noise():
    est = CooperationEstimator(deadband=1.5)
    for _ in range(5000):
        est.step(1.4, 0.002)
    assert est.value == 1.0


def test_cooperation_steady_state_under_max_force():
    est = CooperationEstimator(alpha=0.1, f_max=30.0, deadband=0.0)
    for _ in range(60 * 500):  # 60 s at 500 Hz, well past the transient
        est.step(30.0, 0.002)
    closed_form = 1.0 - 1.0 / np.log(1.0 / 0.1)
    assert est.value == pytest.approx(closed_form, abs=2e-3)
    oracle = integrate_cooperation(30.0, 0.1, 30.0, 0.0, t_end=60.0)
    assert est.value == pytest.approx(oracle, abs=2e-3)
    assert est.value == pytest.approx(0.566, abs=2e-3)


def test_cooperation_decay_is_dt_exact():
    # the decay factor alpha^dt composes exactly across step splits
    whole = CooperationEstimator(alpha=0.1, accum=0.4)
    halves = CooperationEstimator(alpha=0.1, accum=0.4)
    whole.step(0.0, 0.002)
    halves.step(0.0, 0.001)
    halves.step(0.0, 0.001)
    assert halves.accum == pytest.approx(whole.accum, rel=1e-15)


def test_cooperation_recurrence_tracks_continuous_integral():
    est = CooperationEstimator(alpha=0.1, f_max=30.0, deadband=0.0)
    dt, t_end = 0.002, 4.0
    for _ in range(int(t_end / dt)):
        est.step(20.0, dt)
    oracle = integrate_cooperation(20.0, 0.1, 30.0, 0.0, t_end=t_end)
    # left-Riemann source term: discretization error is O(dt) per unit mass
    assert est.value == pytest.approx(oracle, abs=5e-3)


@given(st.floats(0.0, 100.0), st.floats(1e-4, 0.1))
@settings(max_examples=100, deadline=None)
def test_cooperation_bounded(force, dt):
    est = CooperationEstimator()
    for _ in range(50):
        c = est.step(force, dt)
        assert 0.0 <= c <= 1.0


def test_cooperation_monotonicity():
    est = CooperationEstimator(alpha=0.1, f_max=30.0, deadband=0.0)
    prev = est.value
    for _ in range(1000):
        c = est.step(30.0, 0.002)
        assert c <= prev + 1e-15
        prev = c
    for _ in range(1000):
        c = est.step(0.0, 0.002)
        assert c >= prev - 1e-15
        prev = c


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, 2.0])
def test_cooperation_rejects_bad_alpha(alpha):
    with pytest.raises(ValueError):
        CooperationEstimator(alpha=alpha)


# -- pace tracking -----------------------------------------------------------


def test_pace_fixed_point():
    st_ = PaceState(p=1.1, a=0.9)
    st_.step(1.1, 0.9, coop=1.0, dt=0.002)
    assert st_.p == pytest.approx(1.1, abs=1e-15)
    assert st_.a == pytest.approx(0.9, abs=1e-15)


def test_pace_single_step_value():
    st_ = PaceState(gains=PaceGains(k_p=2.0))
    st_.step(1.2, 1.0, coop=1.0, dt=0.002)
    assert st_.p == pytest.approx(1.0008, abs=1e-12)
    assert st_.p_rate == pytest.approx(2.0 * 0.2, abs=1e-12)


def test_pace_exponential_convergence():
    k_p, dt = 2.0, 0.002
    st_ = PaceState(gains=PaceGains(k_p=k_p))
    target = 1.3
    for k in range(1, 2501):
        st_.step(target, 1.0, coop=1.0, dt=dt)
        bound = abs(1.0 - target) * np.exp(-k_p * k * dt)
        # forward-Euler decay factor (1 - k dt) is below e^{-k dt}: no overshoot
        assert abs(st_.p - target) <= bound + 1e-12
    assert st_.p == pytest.approx(target, abs=1e-3)


def test_audio_pace_drifts_down_when_uncooperative():
    st_ = PaceState(gains=PaceGains(k_c=0.5))
    ticks = 0
    while st_.a > PACE_MIN:
        a_before = st_.a
        st_.step(1.0, st_.a, coop=0.0, dt=0.002)  # target held at current a
        assert st_.a == pytest.approx(max(a_before - 0.5 * 0.002, PACE_MIN), abs=1e-12)
        ticks += 1
        assert ticks < 500_000
    assert st_.a == PACE_MIN


@given(
    st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.0, 1.0),
    st.floats(0.5, 1.5), st.floats(0.5, 1.5),
)
@settings(max_examples=100, deadline=None)
def test_paces_never_leave_bounds(pt, at, coop, p0, a0):
    st_ = PaceState(p=float(np.clip(p0, PACE_MIN, PACE_MAX)),
                    a=float(np.clip(a0, PACE_MIN, PACE_MAX)))
    for _ in range(200):
        st_.step(pt, at, coop, dt=0.01)
        assert PACE_MIN <= st_.p <= PACE_MAX
        assert PACE_MIN <= st_.a <= PACE_MAX


def test_pace_rate_reported_preclamp():
    st_ = PaceState(gains=PaceGains(k_p=2.0), p=1.39)
    st_.step(3.0, 1.0, coop=1.0, dt=0.01)
    assert st_.p == PACE_MAX
    assert st_.p_rate == pytest.approx(2.0 * (3.0 - 1.39), abs=1e-12)
