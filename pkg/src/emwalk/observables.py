"""Scalar diagnostics over walker trajectories.

Positions are signed site offsets from the grid centre, converted to
physical units through eps_l.  The axis spread is the *uncentered* root
mean square sqrt(<l^2>), not a standard deviation; a centered variant
exists for convenience but is never used in quantitative comparisons.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import find_peaks

from .errors import DegenerateFit, NoFront, NoOscillation
from .walk import SpinorField

__all__ = [
    "density",
    "axis_mean",
    "axis_spread",
    "centered_axis_spread",
    "bloch_period",
    "bottom_front_q",
    "top_front_q",
    "drift_speed",
    "loglog_slope",
]


def density(psi: SpinorField) -> np.ndarray:
    """Probability of presence per site: |psi^-|^2 + |psi^+|^2."""
    return np.abs(psi.minus) ** 2 + np.abs(psi.plus) ** 2


def _marginal(p_density: np.ndarray, axis: str) -> tuple[np.ndarray, np.ndarray]:
    if axis == "p":
        marg = p_density.sum(axis=1)
    elif axis == "q":
        marg = p_density.sum(axis=0)
    else:
        raise ValueError(f"axis must be 'p' or 'q', got {axis!r}")
    offsets = np.arange(marg.size) - marg.size // 2
    return offsets, marg


def axis_mean(p_density: np.ndarray, axis: str, eps_l: float = 1.0) -> float:
    """Mean signed offset along one axis, in units of eps_l."""
    offsets, marg = _marginal(p_density, axis)
    return float(np.dot(offsets, marg)) * eps_l


def axis_spread(p_density: np.ndarray, axis: str, eps_l: float = 1.0) -> float:
    """Uncentered RMS offset sqrt(sum l^2 P) along one axis, in units of eps_l."""
    offsets, marg = _marginal(p_density, axis)
    return float(np.sqrt(np.dot(offsets.astype(float) ** 2, marg))) * eps_l


def centered_axis_spread(p_density: np.ndarray, axis: str, eps_l: float = 1.0) -> float:
    """Standard deviation about the mean (not used for quantitative runs)."""
    offsets, marg = _marginal(p_density, axis)
    mean = np.dot(offsets, marg)
    var = np.dot((offsets - mean) ** 2, marg)
    return float(np.sqrt(max(var, 0.0))) * eps_l


def _parabolic_refine(values: np.ndarray, i: int) -> float:
    """Sub-step vertex position of the parabola through points i-1, i, i+1."""
    if i == 0 or i == len(values) - 1:
        return float(i)
    y0, y1, y2 = values[i - 1], values[i], values[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(i)
    return float(i) + 0.5 * (y0 - y2) / denom


def _lsq_parabola_vertex(values: np.ndarray, i: int, half_window: int) -> float:
    """Vertex abscissa of a least-squares parabola fitted around index i.

    Averages over grid-scale ripples riding on the oscillation; with
    half_window = 1 this reduces to exact 3-point interpolation.
    """
    lo = max(i - half_window, 0)
    hi = min(i + half_window + 1, len(values))
    xs = np.arange(lo, hi, dtype=float)
    a, b, _ = np.polyfit(xs - i, values[lo:hi], 2)
    if a >= 0.0:
        return float(i)
    return float(i) - 0.5 * b / a


def bloch_period(j: np.ndarray, values: np.ndarray,
                 prominence_frac: float = 0.4,
                 refine_window_frac: float = 0.06) -> tuple[float, float]:
    """Oscillation period of a time series from the gaps between its maxima.

    Maxima are located with a prominence threshold relative to the
    series swing (large by default: the slow oscillation of a walker
    mean carries fast low-prominence ripples that must not count as
    cycles) and refined to sub-step positions with a parabolic
    least-squares fit over a window scaling with the raw period.

    Returns (period, uncertainty) with the uncertainty the largest
    deviation of an individual gap from the mean gap.  Raises
    NoOscillation when the series shows fewer than three extrema
    (maxima and minima combined) or fewer than two maxima.
    """
    j = np.asarray(j, dtype=float)
    values = np.asarray(values, dtype=float)
    if j.size != values.size:
        raise ValueError("index and value arrays differ in length")
    if values.size < 5:
        raise NoOscillation("series too short")
    # zero-phase binomial filter: nulls the step-alternating lattice mode
    # exactly and leaves vertex positions of the slow oscillation in place
    smooth = 0.25 * values[:-2] + 0.5 * values[1:-1] + 0.25 * values[2:]
    j_smooth = j[1:-1]
    prom = prominence_frac * max(np.ptp(smooth), 1e-300)
    maxima, _ = find_peaks(smooth, prominence=prom)
    minima, _ = find_peaks(-smooth, prominence=prom)
    if len(maxima) + len(minima) < 3 or len(maxima) < 2:
        raise NoOscillation(
            f"found {len(maxima)} maxima / {len(minima)} minima, need an oscillating series"
        )
    raw_gap = float(np.median(np.diff(maxima)))
    half_window = max(1, int(refine_window_frac * raw_gap))
    refined = np.array([
        np.interp(_lsq_parabola_vertex(smooth, i, half_window), np.arange(j_smooth.size), j_smooth)
        for i in maxima
    ])
    gaps = np.diff(refined)
    period = float(gaps.mean())
    uncertainty = float(np.abs(gaps - period).max()) if len(gaps) > 1 else 0.0
    return period, uncertainty


def _front_q(p_density: np.ndarray, prominence: float, side: str) -> float:
    offsets, marg = _marginal(p_density, "q")
    peaks, _ = find_peaks(marg, prominence=prominence * marg.max())
    if len(peaks) == 0:
        raise NoFront("no local maximum of the q-marginal meets the prominence threshold")
    i = peaks[0] if side == "bottom" else peaks[-1]
    return float(np.interp(_parabolic_refine(marg, i), np.arange(offsets.size), offsets))


def bottom_front_q(p_density: np.ndarray, prominence: float = 0.05) -> float:
    """q offset of the smallest-q local maximum of the q-marginal density."""
    return _front_q(p_density, prominence, "bottom")


def top_front_q(p_density: np.ndarray, prominence: float = 0.05) -> float:
    """q offset of the largest-q local maximum of the q-marginal density."""
    return _front_q(p_density, prominence, "top")


def drift_speed(j: np.ndarray, q_front: np.ndarray, eps_l: float = 1.0,
                transient: int = 50, min_samples: int = 100,
                period: float | None = None) -> float:
    """Absolute front speed from a least-squares fit after a transient cutoff.

    The front of a driven walk rides a small oscillation; fitting a line
    over a fractional number of its cycles biases the slope.  When the
    oscillation ``period`` is known (for a uniform electric field it is
    the mean-position period), the fit window is trimmed to the largest
    whole number of cycles that fits; with no (or too little) room the
    full post-transient window is used.
    """
    j = np.asarray(j, dtype=float)
    q_front = np.asarray(q_front, dtype=float)
    keep = j >= transient
    if keep.sum() < min_samples:
        raise ValueError(
            f"only {int(keep.sum())} samples after j >= {transient}, need {min_samples}"
        )
    if period is not None and period > 0:
        span = j[keep].max() - j[keep].min()
        cycles = math.floor(span / period)
        if cycles >= 1:
            keep &= j <= j[keep].min() + cycles * period
    slope = np.polyfit(j[keep] * eps_l, q_front[keep] * eps_l, 1)[0]
    return float(abs(slope))


def loglog_slope(points) -> float:
    """Least-squares slope of log y against log x for positive (x, y) pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise DegenerateFit(f"need at least 3 (x, y) points, got {pts.shape}")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires strictly positive coordinates")
    lx = np.log(x)
    if np.ptp(lx) == 0.0:
        raise DegenerateFit("all abscissae equal")
    return float(np.polyfit(lx, np.log(y), 1)[0])
