"""Continuous piecewise-linear functions on a closed interval.

Used for cost-to-go functions and the final storage value. Evaluation is
linear interpolation between breakpoints; extrapolation is forbidden (a
small absolute slack absorbs round-off at the interval ends).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EDGE_SLACK = 1e-9


@dataclass(frozen=True)
class PiecewiseLinear:
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("piecewise-linear function needs at least two breakpoints")
        if vals.shape != bp.shape:
            raise ValueError("breakpoints and values must have the same length")
        if not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise ValueError("breakpoints and values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def lo(self) -> float:
        return float(self.breakpoints[0])

    @property
    def hi(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, x: float) -> float:
        x = float(x)
        if x < self.lo - _EDGE_SLACK or x > self.hi + _EDGE_SLACK:
            raise ValueError(
                f"x={x!r} outside [{self.lo}, {self.hi}]: extrapolation forbidden"
            )
        x = min(max(x, self.lo), self.hi)
        return float(np.interp(x, self.breakpoints, self.values))

    def sample(self, xs) -> np.ndarray:
        """Vectorised evaluation with the same no-extrapolation contract."""
        xs = np.asarray(xs, dtype=float)
        if np.any(xs < self.lo - _EDGE_SLACK) or np.any(xs > self.hi + _EDGE_SLACK):
            raise ValueError("some points lie outside the domain: extrapolation forbidden")
        return np.interp(np.clip(xs, self.lo, self.hi), self.breakpoints, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def scale(self, lam: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.breakpoints.copy(), lam * self.values)


def linear_fn(lo: float, hi: float, slope: float, intercept: float = 0.0) -> PiecewiseLinear:
    """Affine function slope*x + intercept represented on [lo, hi]."""
    bp = np.array([lo, hi], dtype=float)
    return PiecewiseLinear(bp, slope * bp + intercept)


def clip_points(fn: PiecewiseLinear, lo: float, hi: float):
    """Breakpoint/value arrays of ``fn`` restricted to [lo, hi].

    End points are interpolated so the clipped polyline starts exactly at lo
    and ends exactly at hi. Requires [lo, hi] inside the domain and lo <= hi.
    """
    if hi < lo:
        raise ValueError("empty window")
    bp, vals = fn.breakpoints, fn.values
    inner = (bp > lo) & (bp < hi)
    xs = np.concatenate([[lo], bp[inner], [hi]])
    ys = np.concatenate([[fn(lo)], vals[inner], [fn(hi)]])
    if xs.size >= 2 and xs[-1] - xs[-2] <= 0:  # lo == hi collapses to a point
        xs, ys = xs[:-1], ys[:-1]
    return xs, ys


def lower_convex_envelope(xs: np.ndarray, ys: np.ndarray):
    """Lower convex hull of the polyline points, as (slopes, intercepts).

    Each returned affine piece m*x + a underestimates the polyline on its
    whole x-range, and the pointwise max of all pieces is the envelope.
    """
    if xs.size == 1:
        return np.zeros(1), np.array([ys[0]])
    hull_x = [xs[0]]
    hull_y = [ys[0]]
    for x, y in zip(xs[1:], ys[1:]):
        while len(hull_x) >= 2:
            s_prev = (hull_y[-1] - hull_y[-2]) / (hull_x[-1] - hull_x[-2])
            s_new = (y - hull_y[-1]) / (x - hull_x[-1])
            if s_prev >= s_new:
                hull_x.pop()
                hull_y.pop()
            else:
                break
        hull_x.append(x)
        hull_y.append(y)
    hx = np.array(hull_x)
    hy = np.array(hull_y)
    m = np.diff(hy) / np.diff(hx)
    a = hy[:-1] - m * hx[:-1]
    return m, a


def convex_pieces(xs: np.ndarray, ys: np.ndarray):
    """Split a polyline into maximal convex runs.

    Returns a list of (x_lo, x_hi, slopes, intercepts); on each piece the
    function equals max(slopes*x + intercepts) exactly, because slopes are
    nondecreasing within a run.
    """
    if xs.size == 1:
        return [(float(xs[0]), float(xs[0]), np.zeros(1), np.array([ys[0]]))]
    slopes = np.diff(ys) / np.diff(xs)
    pieces = []
    start = 0
    for j in range(1, slopes.size):
        if slopes[j] < slopes[j - 1]:  # concave kink: new piece
            pieces.append((start, j))
            start = j
    pieces.append((start, slopes.size))
    out = []
    for s, e in pieces:
        m = slopes[s:e]
        a = ys[s:e] - m * xs[s:e]
        out.append((float(xs[s]), float(xs[e]), m, a))
    return out
