"""Directed curve on [0, 1] with closest-point and tangent queries.

The guidance force needs three things from the curve: the closest point to
the end effector, the parameter of that point, and the downstream (one-sided)
tangent there.  Curves are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["Trajectory", "ProjectionResult", "load_trajectory", "TrajectoryError"]

_TIE_TOL = 1e-12  # relative; equal-distance candidates resolve to smallest d


class TrajectoryError(ValueError):
    """Raised for malformed trajectory definitions or queries."""


@dataclass(frozen=True)
class ProjectionResult:
    d: float            # parameter of closest point, in [0, 1]
    point: np.ndarray   # curve point at d (m)
    tangent: np.ndarray  # unit downstream tangent at d (left limit at d = 1)
    distance: float     # Euclidean distance query -> curve (m)


@dataclass(eq=False)
class Trajectory:
    """Piecewise-linear or cubic-spline curve through ordered control points.

    The parameter domain is exactly [0, 1]; knots are uniformly spaced in
    parameter.  Arc length is tabulated on a dense grid so callers can map
    parameter to metric progress.
    """

    control_points: np.ndarray          # (n_pts, dims)
    interpolation: str = "linear"       # "linear" | "cubic"
    arc_length_table: np.ndarray = field(init=False)   # (n_samples,) cumulative m
    _arc_params: np.ndarray = field(init=False, repr=False)
    _spline: CubicSpline | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise TrajectoryError("trajectory needs at least 2 control points")
        if not 1 <= pts.shape[1] <= 3:
            raise TrajectoryError(f"dims must be 1..3, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise TrajectoryError("control points must be finite")
        if np.array_equal(pts[0], pts[-1]) and len(np.unique(pts, axis=0)) < 2:
            raise TrajectoryError("control points must contain 2 distinct points")
        if self.interpolation not in ("linear", "cubic"):
            raise TrajectoryError(f"unknown interpolation {self.interpolation!r}")
        self.control_points = pts
        self._knots = np.linspace(0.0, 1.0, len(pts))
        if self.interpolation == "cubic":
            self._spline = CubicSpline(self._knots, pts, axis=0, bc_type="natural")
        # segment cache for the linear fast path
        self._seg_a = pts[:-1]
        self._seg_v = pts[1:] - pts[:-1]
        self._seg_len2 = np.einsum("ij,ij->i", self._seg_v, self._seg_v)
        # unit direction per segment; zero-length segments borrow the next
        # nonzero segment downstream (upstream at the tail) so the tangent
        # stays defined as the one-sided limit along the direction of travel
        n_seg = len(self._seg_v)
        dirs = np.full_like(self._seg_v, np.nan)
        ahead = None
        for i in range(n_seg - 1, -1, -1):
            # max-component scaling keeps the norm from underflowing when
            # the whole segment is shorter than ~1e-154
            m = float(np.max(np.abs(self._seg_v[i])))
            if m > 0.0:
                scaled = self._seg_v[i] / m
                ahead = scaled / np.linalg.norm(scaled)
            if ahead is not None:
                dirs[i] = ahead
        behind = None
        for i in range(n_seg):
            if np.isnan(dirs[i, 0]):
                dirs[i] = behind
            else:
                behind = dirs[i]
        self._seg_dir = dirs
        n_samples = 2048
        params = np.linspace(0.0, 1.0, n_samples)
        samples = self.point_at(params)
        steps = np.linalg.norm(np.diff(samples, axis=0), axis=1)
        self.arc_length_table = np.concatenate([[0.0], np.cumsum(steps)])
        self._arc_params = params

    # -- evaluation --------------------------------------------------------

    @property
    def dims(self) -> int:
        return self.control_points.shape[1]

    @property
    def length(self) -> float:
        """Total arc length (m, from the tabulated approximation)."""
        return float(self.arc_length_table[-1])

    def point_at(self, d):
        """Evaluate the curve at parameter d (scalar or array) in [0, 1]."""
        d_arr = np.asarray(d, dtype=float)
        if np.any(d_arr < -1e-12) or np.any(d_arr > 1 + 1e-12):
            raise TrajectoryError(f"parameter out of [0, 1]: {d}")
        d_arr = np.clip(d_arr, 0.0, 1.0)
        if self._spline is not None:
            out = self._spline(d_arr)
        else:
            n_seg = len(self._seg_a)
            scaled = d_arr * n_seg
            idx = np.minimum(scaled.astype(int), n_seg - 1)
            frac = scaled - idx
            out = self._seg_a[idx] + self._seg_v[idx] * frac[..., None]
        return out if np.ndim(d) else np.asarray(out, dtype=float)

    def tangent_at(self, d: float) -> np.ndarray:
        """Unit downstream tangent at d; the left limit at d = 1."""
        d = float(np.clip(d, 0.0, 1.0))
        if self._spline is not None:
            # one-sided derivative: nudge into the interior piece
            eps = 1e-9
            probe = d if d < 1.0 else d - eps
            vec = self._spline(probe, 1)
            if np.max(np.abs(vec)) < 1e-12:   # degenerate stationary point
                vec = self._spline(min(probe + 1e-6, 1.0)) - self._spline(probe)
        else:
            n_seg = len(self._seg_a)
            idx = min(int(d * n_seg), n_seg - 1)
            return np.array(self._seg_dir[idx])
        # max-component scaling keeps the norm from underflowing for
        # curves smaller than ~1e-154 in extent
        m = float(np.max(np.abs(vec)))
        if m == 0.0:
            raise TrajectoryError(f"zero tangent at d={d}")
        vec = np.asarray(vec, dtype=float) / m
        return vec / np.linalg.norm(vec)

    def arc_length_at(self, d: float) -> float:
        return float(np.interp(d, self._arc_params, self.arc_length_table))

    # -- projection --------------------------------------------------------

    def project(self, x, hint: float | None = None) -> ProjectionResult:
        """Global minimizer of ||T(d) - x|| over [0, 1].

        Ties resolve to the smallest d.  Piecewise-linear curves use the
        exact per-segment closed form; cubic curves use a coarse scan plus
        golden-section refinement.  `hint` restricts the linear search to a
        window of segments around a previous solution (used by the control
        loop; exact whenever the true minimizer lies in the window).
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dims,):
            raise TrajectoryError(f"query point must have shape ({self.dims},)")
        if self._spline is None:
            d = self._project_linear(x, hint)
        else:
            d = self._project_sampled(x)
        point = self.point_at(d)
        return ProjectionResult(
            d=d, point=point, tangent=self.tangent_at(d),
            distance=float(np.linalg.norm(point - x)),
        )

    def _project_linear(self, x: np.ndarray, hint: float | None) -> float:
        n_seg = len(self._seg_a)
        if hint is None:
            lo, hi = 0, n_seg
        else:
            c = int(np.clip(hint, 0.0, 1.0) * n_seg)
            lo, hi = max(0, c - 3), min(n_seg, c + 4)
        a = self._seg_a[lo:hi]
        v = self._seg_v[lo:hi]
        len2 = self._seg_len2[lo:hi]
        t = np.einsum("ij,ij->i", x - a, v) / np.maximum(len2, 1e-300)
        t = np.clip(t, 0.0, 1.0)
        closest = a + v * t[:, None]
        dist2 = np.einsum("ij,ij->i", closest - x, closest - x)
        best = float(np.min(dist2))
        tol = _TIE_TOL * (1.0 + best)
        i = int(np.argmax(dist2 <= best + tol))   # first (smallest-d) tie
        return (lo + i + t[i]) / n_seg

    def _project_sampled(self, x: np.ndarray, n_coarse: int = 1024) -> float:
        ds = np.linspace(0.0, 1.0, n_coarse)
        pts = self.point_at(ds)
        dist2 = np.einsum("ij,ij->i", pts - x, pts - x)
        best = float(np.min(dist2))
        i = int(np.argmax(dist2 <= best + _TIE_TOL * (1.0 + best)))
        lo = ds[max(i - 1, 0)]
        hi = ds[min(i + 1, n_coarse - 1)]
        d_ref = _golden_section(lambda d: float(np.sum((self.point_at(d) - x) ** 2)), lo, hi)
        # strict comparison against the exact endpoints so clamped queries
        # return 0/1 precisely; first of equals wins, keeping ties at
        # the smallest parameter
        best_d, best_v = None, np.inf
        for c in (0.0, d_ref, 1.0):
            v = float(np.sum((self.point_at(c) - x) ** 2))
            if v < best_v:
                best_d, best_v = c, v
        return float(best_d)


def _golden_section(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def load_trajectory(path: str | Path) -> Trajectory:
    """Load the JSON trajectory format:
    { "dims": N, "interpolation": "linear"|"cubic", "points": [[...], ...] }
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise TrajectoryError(f"cannot read trajectory {path}: {e}") from e
    try:
        dims = int(doc["dims"])
        points = np.asarray(doc["points"], dtype=float)
        interp = doc.get("interpolation", "linear")
    except (KeyError, TypeError, ValueError) as e:
        raise TrajectoryError(f"malformed trajectory {path}: {e}") from e
    if points.ndim != 2 or points.shape[1] != dims:
        raise TrajectoryError(f"{path}: points do not match dims={dims}")
    return Trajectory(points, interpolation=interp)
