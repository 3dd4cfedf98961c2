"""Deterministic averaged closed loop, used as a verification oracle.

Averaging the stochastic loop over the dither's invariant distribution and
linearizing the Hessian-inverse error around zero gives, per channel,

    theta_tilde'(t) = U(t)
    z_i(t)          = theta_tilde_i(t - D_i)
    U_i = c_i/(s + c_i) { -k_i [ z_i(t) + integral of U_i over (t-D_i, t] ] }

together with the decoupled linearized inverse-estimate error

    Gamma_err'(t) = -omega_r * Gamma_err(t).

The window integral advances the delayed measurement to the present, so for
t >= D_n and fast filters the loop collapses to theta_tilde' = -K
theta_tilde: the delay drops out of the characteristic equation
s(s + c) + k c = 0, whose slow root tends to -k as c grows. Everything here
is deterministic; trajectories are bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .buffers import HistoryBuffer
from .config import DelayVector, GainConfig, SimConfig, validate_setup
from .errors import ConfigurationError
from .plant import QuadraticMap, hessian_inverse
from .simulator import Trajectory, trajectory_columns


def run_averaged(qmap: QuadraticMap, delays: DelayVector, gains: GainConfig,
                 sim: SimConfig) -> Trajectory:
    """Integrate the averaged model on the same grid as the stochastic loop.

    The returned trajectory uses the standard column layout: theta and
    theta_hat coincide (no dither), y is evaluated at the delayed estimate,
    Hhat holds the exact averaged value (the true Hessian), and Gamma holds
    the analytic linearized estimate H^-1 + Gamma_err(t).
    """
    validate_setup(qmap, delays, gains, sim)
    n = qmap.n
    dt = sim.dt
    d = [float(v) for v in delays.delays]
    m = [round(v / dt) for v in d]
    k = [float(v) for v in gains.k]
    cdt = [float(v) * dt for v in gains.c]
    alpha = [math.exp(-float(v) * dt) for v in gains.c]
    exact = sim.exact_filter
    hess = [[float(v) for v in row] for row in qmap.hessian]
    hinv = hessian_inverse(qmap)

    tht = [float(v) for v in sim.theta_hat0 - qmap.theta_star]
    u = [0.0] * n
    gamma_err = np.asarray(sim.gamma0, dtype=float) - hinv
    decay = 1.0 - gains.omega_r * dt

    tht_buf = HistoryBuffer(n, dt, delays.max_delay, prefill=tht)
    u_buf = HistoryBuffer(n, dt, delays.max_delay, prefill=0.0, window=d)

    n_steps = sim.n_steps
    stride = sim.log_every
    log = np.empty((n_steps // stride + 1, len(trajectory_columns(n))))
    rows = 0
    divergence: Optional[tuple[float, str]] = None
    theta_star = [float(v) for v in qmap.theta_star]
    hh_flat = [float(v) for v in qmap.hessian.ravel()]

    for j in range(n_steps + 1):
        t = j * dt
        for i in range(n):
            tht_buf.push(i, tht[i])
        z = [tht_buf.sample_back(i, m[i]) for i in range(n)]
        y = qmap.y_star
        for i in range(n):
            y += 0.5 * z[i] * sum(hess[i][jj] * z[jj] for jj in range(n))
        if not (abs(y) <= sim.divergence_guard):
            divergence = (t, "output magnitude exceeded divergence guard")
            break
        for i in range(n):
            v = -k[i] * (z[i] + u_buf.window_sum(i))
            if exact:
                u[i] = alpha[i] * u[i] + (1.0 - alpha[i]) * v
            else:
                u[i] += cdt[i] * (v - u[i])
            u_buf.push(i, u[i])
        if j % stride == 0:
            row = [t]
            row += [theta_star[i] + tht[i] for i in range(n)]
            row += [theta_star[i] + tht[i] for i in range(n)]
            row.append(y)
            row += u
            row += hh_flat
            row += [float(v) for v in (hinv + gamma_err).ravel()]
            log[rows] = row
            rows += 1
        for i in range(n):
            tht[i] += dt * u[i]
        gamma_err *= decay

    return Trajectory(data=log[:rows].copy(), n=n, divergence=divergence)


def fit_decay_slope(t, values, t_start: float, t_end: float) -> float:
    """Least-squares slope of log(values) over [t_start, t_end]."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (t >= t_start) & (t <= t_end) & (values > 0)
    if mask.sum() < 2:
        raise ConfigurationError("not enough samples in the fit window")
    return float(np.polyfit(t[mask], np.log(values[mask]), 1)[0])


def fit_rate_by_levels(t, values, t_min: float = 0.0, hi: float = 0.3,
                       lo: float = 0.05) -> float:
    """Decay rate fitted between two relative levels of a decaying norm.

    The reference is the value at ``t_min`` (typically the longest delay, so
    dead time is excluded); the fit covers the segment between the first
    crossings below ``hi`` and ``lo`` times the reference. Level-based
    windowing keeps the fit on the settled exponential segment, below any
    slow start-up (e.g. while the inverse-Hessian estimate is still
    ramping) and above the dither noise floor. Returns the slope of
    log(values) (negative for decay).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    start = int(np.searchsorted(t, t_min))
    if start >= len(t) - 2:
        raise ConfigurationError("t_min beyond the trajectory")
    ref = values[start]
    below_hi = np.where(values[start:] <= hi * ref)[0]
    below_lo = np.where(values[start:] <= lo * ref)[0]
    if len(below_hi) == 0 or len(below_lo) == 0:
        raise ConfigurationError("trajectory never crosses the fit levels")
    i0 = start + below_hi[0]
    i1 = start + below_lo[0]
    if i1 <= i0 + 1:
        raise ConfigurationError("fit levels too close on this grid")
    return float(np.polyfit(t[i0:i1], np.log(values[i0:i1]), 1)[0])


@dataclass
class ComparisonReport:
    """Windowed distance and fitted decay rates of two trajectories."""

    rms_distance: float
    rate_averaged: float
    rate_stochastic: float
    window: float
    diverged: bool

    def as_dict(self) -> dict:
        return {
            "rms_distance": self.rms_distance,
            "rate_averaged": self.rate_averaged,
            "rate_stochastic": self.rate_stochastic,
            "window": self.window,
            "diverged": self.diverged,
        }


def compare_to_stochastic(avg: Trajectory, stoch: Trajectory, window: float,
                          theta_star, rate_from: float = 0.0) -> ComparisonReport:
    """Windowed RMS distance between estimate trajectories plus rate fits.

    ``window`` is measured back from the end of the common time range. Both
    trajectories must share the logging grid. If the stochastic run
    diverged, the distance is reported over the overlap and the rates are
    NaN.
    """
    ta, ts = avg.t, stoch.t
    if len(ta) < 2 or len(ts) < 2:
        raise ConfigurationError("trajectories too short to compare")
    if abs((ta[1] - ta[0]) - (ts[1] - ts[0])) > 1e-12:
        raise ConfigurationError("trajectories use different logging grids")
    if abs(ta[0] - ts[0]) > 1e-12:
        raise ConfigurationError("trajectories start at different times")
    L = min(len(ta), len(ts))
    t = ta[:L]
    mask = t >= t[-1] - window
    diff = avg.theta_hat[:L][mask] - stoch.theta_hat[:L][mask]
    rms = float(np.sqrt(np.mean(np.sum(diff ** 2, axis=1))))
    theta_star = np.asarray(theta_star, dtype=float)
    diverged = stoch.divergence is not None
    if diverged:
        rate_a = rate_s = float("nan")
    else:
        norm_a = np.linalg.norm(avg.theta_hat - theta_star, axis=1)
        norm_s = np.linalg.norm(stoch.theta_hat - theta_star, axis=1)
        rate_a = fit_rate_by_levels(avg.t, norm_a, t_min=rate_from)
        rate_s = fit_rate_by_levels(stoch.t, norm_s, t_min=rate_from)
    return ComparisonReport(rms_distance=rms, rate_averaged=rate_a,
                            rate_stochastic=rate_s, window=float(window),
                            diverged=diverged)
