"""Per-channel control laws.

All three controllers share the structure: form a raw command v_i, then
pass it through the unity-DC-gain low-pass c_i/(s + c_i), whose state is
the actual control U_i.

Newton predictor   : v_i = -k_i (z_i + I_i), where I_i is the integral of
                     channel i's own control over its delay window. The
                     window term advances the measured (delayed) Newton
                     signal to the current time, so the closed loop behaves
                     like the undelayed one regardless of the delay length.
Gradient predictor : v_i = k_i (G_i + sum_j Hhat_ij I_j). With K > 0 and a
                     negative-definite Hessian the averaged loop matrix K*H
                     is Hurwitz, hence no leading minus; the convergence
                     rate inherits the Hessian's eigenvalues instead of
                     being assigned by K alone.
Uncompensated      : v_i = -k_i z_i, the Newton law with the delay window
                     dropped. Its delay margin is k_i D_i < pi/2.

The filter is discretized by explicit Euler (default) or exactly
(zero-order hold) when c*dt approaches Euler's stability bound.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ControllerMode
from .errors import ConfigurationError


@dataclass
class ControllerState:
    """Low-pass filter outputs (the applied control) and the active law."""

    u: np.ndarray
    mode: ControllerMode


def _filter_update(u, v, c, dt: float, exact: bool) -> np.ndarray:
    if exact:
        alpha = np.exp(-c * dt)
        return alpha * u + (1.0 - alpha) * v
    return u + dt * c * (v - u)


def _check(u, v, c):
    if not (u.shape == v.shape == c.shape):
        raise ConfigurationError("controller vectors must have matching length")


def newton_predictor_step(u, z, i_window, k, c, dt: float,
                          exact: bool = False) -> np.ndarray:
    """Delay-compensated Newton law; returns the updated control vector."""
    u = np.asarray(u, dtype=float)
    v = -np.asarray(k, dtype=float) * (np.asarray(z, dtype=float)
                                       + np.asarray(i_window, dtype=float))
    c = np.asarray(c, dtype=float)
    _check(u, v, c)
    return _filter_update(u, v, c, dt, exact)


def gradient_predictor_step(u, g, hhat, i_window, k, c, dt: float,
                            exact: bool = False) -> np.ndarray:
    """Delay-compensated gradient law; the Hessian estimate propagates the
    control history through the map's curvature."""
    u = np.asarray(u, dtype=float)
    g = np.asarray(g, dtype=float)
    hhat = np.asarray(hhat, dtype=float)
    i_window = np.asarray(i_window, dtype=float)
    v = np.asarray(k, dtype=float) * (g + hhat @ i_window)
    c = np.asarray(c, dtype=float)
    _check(u, v, c)
    return _filter_update(u, v, c, dt, exact)


def unpredicted_step(u, z, k, c, dt: float, exact: bool = False) -> np.ndarray:
    """Newton law without delay compensation (the unstable-under-delay
    baseline); identical to the predictor when all delays are zero."""
    u = np.asarray(u, dtype=float)
    v = -np.asarray(k, dtype=float) * np.asarray(z, dtype=float)
    c = np.asarray(c, dtype=float)
    _check(u, v, c)
    return _filter_update(u, v, c, dt, exact)
