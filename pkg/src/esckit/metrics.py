"""Summary metrics computed from logged trajectories."""
from __future__ import annotations

import math

import numpy as np

from .simulator import Trajectory


def final_window_stats(traj: Trajectory, theta_star, y_star: float,
                       frac: float = 0.1):
    """Mean errors over the trailing fraction of a run.

    Returns ``(y_err, theta_err)``: |mean(y) - y*| and the max-norm of
    mean(theta) - theta* over the final ``frac`` of the time range. NaNs if
    the run diverged before producing a window.
    """
    t = traj.t
    if traj.divergence is not None or len(t) < 2:
        return math.nan, math.nan
    window = t >= t[-1] - frac * (t[-1] - t[0])
    y_err = abs(float(traj.y[window].mean()) - y_star)
    theta_mean = traj.theta[window].mean(axis=0)
    theta_err = float(np.abs(theta_mean - np.asarray(theta_star)).max())
    return y_err, theta_err


def time_to_band(traj: Trajectory, y_star: float, frac: float = 0.05,
                 smooth: float = 10.0) -> float:
    """Earliest time after which the smoothed output stays within the band.

    The output is averaged over ``smooth`` seconds (moving mean) to keep the
    dither ripple from repeatedly kicking the signal across the band edge;
    the band is ``frac * |y*|``. Returns ``inf`` if the run diverged or
    never settles.
    """
    if traj.divergence is not None:
        return math.inf
    t = traj.t
    if len(t) < 3:
        return math.inf
    dt_log = t[1] - t[0]
    w = max(1, int(round(smooth / dt_log)))
    kernel = np.ones(w) / w
    ys = np.convolve(traj.y, kernel, mode="full")[:len(t)]
    # during start-up the window is partially filled; normalize.
    fill = np.convolve(np.ones(len(t)), kernel, mode="full")[:len(t)]
    ys = ys / fill
    outside = np.abs(ys - y_star) > frac * abs(y_star)
    if not outside.any():
        return float(t[0])
    last_bad = int(np.where(outside)[0][-1])
    if last_bad == len(t) - 1:
        return math.inf
    return float(t[last_bad + 1])


def control_attenuation(traj: Trajectory, frac: float = 0.1) -> float:
    """RMS of the control over the final window divided by its run peak."""
    t = traj.t
    window = t >= t[-1] - frac * (t[-1] - t[0])
    tail_rms = float(np.sqrt(np.mean(traj.u[window] ** 2)))
    peak = float(np.abs(traj.u).max())
    return tail_rms / peak if peak > 0 else 0.0
