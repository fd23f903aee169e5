"""Pace coordination: ideal pace pair, cooperation estimate, pace tracking.

Motion pace p scales the guidance controller's clock; audio pace a scales
speech playback.  Both live in [pace_min, pace_max].  The ideal pair is the
closest point (in the (p, a) plane, to (1, 1)) on the alignment constraint
t_x / p = t_a / a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ideal_paces",
    "CooperationEstimator",
    "PaceState",
    "PaceGains",
    "PACE_MIN",
    "PACE_MAX",
]

PACE_MIN = 0.6
PACE_MAX = 1.4


def ideal_paces(t_motion: float, t_audio: float) -> tuple[float, float]:
    """Minimize (p-1)^2 + (a-1)^2 subject to t_motion / p = t_audio / a.

    Closed form via the constraint ratio s = t_motion / t_audio:
    p* = (s^2 + s) / (s^2 + 1), a* = p* / s = (s + 1) / (s^2 + 1).
    The assignment order matters: p* carries the s^2 + s numerator.
    Swapping the two violates the constraint for every s != 1.
    Unclamped; callers clamp to the admissible pace interval.
    """
    if not (t_motion > 0.0 and np.isfinite(t_motion)):
        raise ValueError(f"t_motion must be positive finite, got {t_motion}")
    if not (t_audio > 0.0 and np.isfinite(t_audio)):
        raise ValueError(f"t_audio must be positive finite, got {t_audio}")
    s = t_motion / t_audio
    p = (s * s + s) / (s * s + 1.0)
    a = (s + 1.0) / (s * s + 1.0)
    return p, a


@dataclass
class CooperationEstimator:
    """Leaky accumulator of interaction-force magnitude.

    c(t) = 1 - integral over the past of alpha^(t - tau) * u(tau) dtau with
    u = max(||F_ext|| - deadband, 0) / f_max.  alpha in (0, 1) sets the
    forgetting rate (per second); the discrete step folds the decay over dt
    analytically so the estimate is dt-invariant.
    """

    alpha: float = 0.1
    f_max: float = 30.0
    deadband: float = 1.5
    accum: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.f_max <= 0.0:
            raise ValueError(f"f_max must be positive, got {self.f_max}")
        if self.deadband < 0.0:
            raise ValueError(f"deadband must be >= 0, got {self.deadband}")

    def step(self, force_mag: float, dt: float) -> float:
        """Advance by dt seconds with ||F_ext|| = force_mag; returns c."""
        u = max(force_mag - self.deadband, 0.0) / self.f_max
        self.accum = self.alpha ** dt * self.accum + u * dt
        return self.value

    @property
    def value(self) -> float:
        """Current cooperation estimate, clipped to [0, 1]."""
        return float(np.clip(1.0 - self.accum, 0.0, 1.0))

    def reset(self):
        self.accum = 0.0


@dataclass(frozen=True)
class PaceGains:
    k_p: float = 2.0   # motion-pace tracking rate (1/s)
    k_a: float = 2.0   # audio-pace tracking rate (1/s)
    k_c: float = 0.5   # cooperation pull on audio pace (1/s)
    pace_min: float = PACE_MIN
    pace_max: float = PACE_MAX


@dataclass
class PaceState:
    """First-order tracking of the ideal paces with a cooperation bias.

    dp/dt = k_p (p* - p)
    da/dt = k_a (a* - a) - k_c (1 - c)

    Both paces clamp to [pace_min, pace_max].  `p_rate` keeps the pre-clamp
    dp/dt of the last step; the admittance update consumes it as-is, clamp
    active or not.
    """

    gains: PaceGains = None  # type: ignore[assignment]
    p: float = 1.0
    a: float = 1.0
    p_rate: float = 0.0

    def __post_init__(self):
        if self.gains is None:
            self.gains = PaceGains()
        g = self.gains
        if not g.pace_min <= self.p <= g.pace_max:
            raise ValueError(f"p={self.p} outside [{g.pace_min}, {g.pace_max}]")
        if not g.pace_min <= self.a <= g.pace_max:
            raise ValueError(f"a={self.a} outside [{g.pace_min}, {g.pace_max}]")

    def step(self, p_target: float, a_target: float, coop: float, dt: float):
        """Advance one tick toward the (unclamped) targets."""
        g = self.gains
        dp = g.k_p * (p_target - self.p)
        da = g.k_a * (a_target - self.a) - g.k_c * (1.0 - coop)
        self.p_rate = dp
        self.p = float(np.clip(self.p + dp * dt, g.pace_min, g.pace_max))
        self.a = float(np.clip(self.a + da * dt, g.pace_min, g.pace_max))
