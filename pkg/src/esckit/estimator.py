"""Online gradient/Hessian estimation and the Newton signal.

The measured output (after washout, if enabled) is demodulated against the
delayed dither phases: G = M*y estimates the gradient seen through the
delays, Hhat = N*y estimates the Hessian. The Riccati filter

    Gamma' = omega_r * (Gamma - Gamma Hhat Gamma)

has the Hessian inverse as its attracting equilibrium (for initial
conditions on the negative-definite side), so z = Gamma G is a Newton step
that never inverts Hhat explicitly. The filter state is re-symmetrized
every step; symmetry of Gamma is preserved exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass
class EstimatorState:
    """Latest estimator quantities, kept for logging and diagnostics."""

    gamma: np.ndarray
    hhat: np.ndarray
    g: np.ndarray
    z: np.ndarray


def perturbed_input(theta_hat, s) -> np.ndarray:
    """Plant input: estimate plus dither, theta = theta_hat + S."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    s = np.asarray(s, dtype=float)
    if theta_hat.shape != s.shape:
        raise ConfigurationError("theta_hat and S must have matching length")
    return theta_hat + s


def demodulate(y: float, m_delayed, n_delayed):
    """Scale the demodulation signals by the measured output.

    Returns ``(G, Hhat)`` with G = M*y and Hhat = N*y. Hhat inherits N's
    symmetry exactly.
    """
    m_delayed = np.asarray(m_delayed, dtype=float)
    n_delayed = np.asarray(n_delayed, dtype=float)
    return m_delayed * y, n_delayed * y


def _riccati_2x2(g, h, wr_dt):
    g00, g01, g11 = g[0][0], g[0][1], g[1][1]
    h00, h01, h10, h11 = h[0][0], h[0][1], h[1][0], h[1][1]
    gh00 = g00 * h00 + g01 * h10
    gh01 = g00 * h01 + g01 * h11
    gh10 = g01 * h00 + g11 * h10
    gh11 = g01 * h01 + g11 * h11
    ghg00 = gh00 * g00 + gh01 * g01
    ghg01 = gh00 * g01 + gh01 * g11
    ghg10 = gh10 * g00 + gh11 * g01
    ghg11 = gh10 * g01 + gh11 * g11
    n00 = g00 + wr_dt * (g00 - ghg00)
    n01 = g01 + wr_dt * (g01 - ghg01)
    n10 = g01 + wr_dt * (g01 - ghg10)
    n11 = g11 + wr_dt * (g11 - ghg11)
    off = 0.5 * (n01 + n10)
    return [[n00, off], [off, n11]]


def _riccati_update(g, h, wr_dt):
    """One Euler step of the Riccati filter on row-list matrices.

    Shared by the public wrapper and the simulation hot loop so both follow
    the same arithmetic. Result is re-symmetrized as (X + X^T)/2.
    """
    n = len(g)
    if n == 2:
        return _riccati_2x2(g, h, wr_dt)
    gh = [[sum(g[i][k] * h[k][j] for k in range(n)) for j in range(n)]
          for i in range(n)]
    ghg = [[sum(gh[i][k] * g[k][j] for k in range(n)) for j in range(n)]
           for i in range(n)]
    raw = [[g[i][j] + wr_dt * (g[i][j] - ghg[i][j]) for j in range(n)]
           for i in range(n)]
    return [[0.5 * (raw[i][j] + raw[j][i]) for j in range(n)] for i in range(n)]


def riccati_step(gamma, hhat, omega_r: float, dt: float) -> np.ndarray:
    """Explicit-Euler update of the Hessian-inverse estimate."""
    if dt <= 0:
        raise ConfigurationError("dt must be > 0")
    gamma = np.asarray(gamma, dtype=float)
    hhat = np.asarray(hhat, dtype=float)
    if gamma.shape != hhat.shape or gamma.ndim != 2:
        raise ConfigurationError("gamma and hhat must be square and congruent")
    rows = _riccati_update(gamma.tolist(), hhat.tolist(), omega_r * dt)
    return np.array(rows)


def newton_signal(gamma, g) -> np.ndarray:
    """Newton update direction z = Gamma G."""
    gamma = np.asarray(gamma, dtype=float)
    g = np.asarray(g, dtype=float)
    if gamma.shape != (g.shape[0], g.shape[0]):
        raise ConfigurationError("gamma and G dimensions do not match")
    return gamma @ g
