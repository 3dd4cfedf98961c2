"""Delays, gains, and simulation configuration.

Channels are kept in non-decreasing delay order. ``order_by_delay`` applies
the sorting permutation consistently to every per-channel quantity (delays,
dither amplitudes, gains, Hessian rows/columns, initial conditions), since
reordering the inputs reorders the Hessian of the composed map as well.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .plant import QuadraticMap

#: tolerance for "delay is a whole number of steps" checks, relative to dt
GRID_RTOL = 1e-6


class ControllerMode(enum.Enum):
    NEWTON_PREDICTOR = "newton_predictor"
    GRADIENT_PREDICTOR = "gradient_predictor"
    NEWTON_NO_PREDICTOR = "newton_no_predictor"


@dataclass(frozen=True, eq=False)
class DelayVector:
    """Known constant per-channel input delays, sorted non-decreasing."""

    delays: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.delays, dtype=float))
        if d.ndim != 1 or d.shape[0] < 1:
            raise ConfigurationError("delays must be a vector of length >= 1")
        if (d < 0).any():
            raise ConfigurationError("delays must be non-negative")
        if (np.diff(d) < 0).any():
            raise ConfigurationError(
                "delays must be non-decreasing; use order_by_delay() to sort "
                "channels consistently")
        object.__setattr__(self, "delays", d)

    @property
    def n(self) -> int:
        return self.delays.shape[0]

    @property
    def max_delay(self) -> float:
        return float(self.delays.max())


@dataclass(frozen=True, eq=False)
class GainConfig:
    """Control, filter, Riccati, and dither parameters.

    k          : integrator gains (diagonal of K), one per channel, > 0
    c          : predictor low-pass poles c_i, > 0
    omega_r    : Riccati filter gain, > 0
    a          : dither amplitudes; a zero entry disables the dither and the
                 demodulation on that channel (diagnostics only)
    omega      : dither time-scale; the wrapped Wiener phase advances with
                 variance omega per unit time
    washout_freq : pole of the first-order washout high-pass applied to y
                 before demodulation; 0 disables (raw-output demodulation)
    """

    k: np.ndarray
    c: np.ndarray
    omega_r: float
    a: np.ndarray
    omega: float
    washout_freq: float = 0.1

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.k, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if not (k.shape == c.shape == a.shape) or k.ndim != 1:
            raise ConfigurationError("k, c, a must be vectors of equal length")
        if (k <= 0).any():
            raise ConfigurationError("all k entries must be > 0")
        if (c <= 0).any():
            raise ConfigurationError("all c entries must be > 0")
        if self.omega_r <= 0:
            raise ConfigurationError("omega_r must be > 0")
        if self.omega <= 0:
            raise ConfigurationError("omega must be > 0")
        if self.washout_freq < 0:
            raise ConfigurationError("washout_freq must be >= 0")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "omega_r", float(self.omega_r))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "washout_freq", float(self.washout_freq))

    @property
    def n(self) -> int:
        return self.k.shape[0]


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Integration grid, initial conditions, and run plumbing.

    exact_filter : use the zero-order-hold discretization of the control
                   low-pass instead of explicit Euler (needed when c*dt
                   approaches Euler's stability bound)
    """

    dt: float
    t_end: float
    theta_hat0: np.ndarray
    gamma0: np.ndarray
    seed: int = 0
    controller: ControllerMode = ControllerMode.NEWTON_PREDICTOR
    divergence_guard: float = 1e6
    log_every: int = 10
    exact_filter: bool = False

    def __post_init__(self):
        th0 = np.atleast_1d(np.asarray(self.theta_hat0, dtype=float))
        g0 = np.asarray(self.gamma0, dtype=float)
        n = th0.shape[0]
        if self.dt <= 0:
            raise ConfigurationError("dt must be > 0")
        if self.t_end <= 0:
            raise ConfigurationError("t_end must be > 0")
        if g0.shape != (n, n):
            raise ConfigurationError(
                f"gamma0 shape {g0.shape} does not match {n} channels")
        if not np.allclose(g0, g0.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("gamma0 must be symmetric")
        if self.divergence_guard <= 0:
            raise ConfigurationError("divergence_guard must be > 0")
        if self.log_every < 1:
            raise ConfigurationError("log_every must be >= 1")
        if isinstance(self.controller, str):
            object.__setattr__(self, "controller", ControllerMode(self.controller))
        object.__setattr__(self, "theta_hat0", th0)
        object.__setattr__(self, "gamma0", g0)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return self.theta_hat0.shape[0]

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def order_by_delay(qmap: QuadraticMap, delays, gains: GainConfig,
                   sim: SimConfig | None = None):
    """Sort channels by ascending delay, permuting all per-channel data.

    Returns ``(qmap, DelayVector, gains, sim, perm)`` with the same
    permutation applied to theta*, Hessian rows/columns, a, k, c, and the
    initial conditions, so the composed closed loop is unchanged up to
    channel relabeling.
    """
    d = np.atleast_1d(np.asarray(delays, dtype=float))
    perm = np.argsort(d, kind="stable")
    qmap2 = QuadraticMap(
        y_star=qmap.y_star,
        theta_star=qmap.theta_star[perm],
        hessian=qmap.hessian[np.ix_(perm, perm)],
    )
    gains2 = replace(gains, k=gains.k[perm], c=gains.c[perm], a=gains.a[perm])
    sim2 = None
    if sim is not None:
        sim2 = replace(sim, theta_hat0=sim.theta_hat0[perm],
                       gamma0=sim.gamma0[np.ix_(perm, perm)])
    return qmap2, DelayVector(d[perm]), gains2, sim2, perm


def delay_slots(delay_s: float, dt: float) -> int:
    """Delay expressed in whole time steps; rejects off-grid delays."""
    ratio = delay_s / dt
    m = int(round(ratio))
    if abs(ratio - m) > GRID_RTOL * max(1.0, abs(ratio)):
        raise ConfigurationError(
            f"delay {delay_s} is not a whole multiple of dt={dt}")
    return m


def validate_setup(qmap: QuadraticMap, delays: DelayVector, gains: GainConfig,
                   sim: SimConfig) -> None:
    """Cross-object invariants checked once before a run."""
    n = qmap.n
    if not (delays.n == gains.n == sim.n == n):
        raise ConfigurationError(
            f"channel count mismatch: map {n}, delays {delays.n}, "
            f"gains {gains.n}, sim {sim.n}")
    for d in delays.delays:
        delay_slots(float(d), sim.dt)
    nonzero = delays.delays[delays.delays > 0]
    if nonzero.size and sim.dt >= nonzero.min():
        raise ConfigurationError(
            "dt must be smaller than the smallest nonzero delay")
    if gains.omega * sim.dt > 1.0:
        warnings.warn(
            f"omega*dt = {gains.omega * sim.dt:.3g} > 1: the wrapped Wiener "
            "phase decorrelates in under one step; results remain ergodic "
            "but poorly resolved in time", stacklevel=2)
    if not sim.exact_filter and (gains.c * sim.dt >= 2.0).any():
        raise ConfigurationError(
            "c*dt >= 2 is unstable under the Euler filter discretization; "
            "reduce dt or set exact_filter=True")
