"""Stochastic perturbation phases and demodulation signals.

Each channel carries an independent Brownian motion on the circle: the
state ``W[i]`` performs a random walk with increment variance ``omega*dt``
per step, wrapped into [0, 2*pi). The perturbation phase eta_i is this
wrapped Wiener value itself, so under the uniform invariant distribution of
the circle process the demodulation moments are exact:

    E[sin(eta)] = 0,  E[sin^2(eta)] = 1/2,  E[sin^4(eta)] = 3/8,

which is what the gradient and Hessian demodulation gains below are sized
for. (Phase constructions that compose the circle process through another
sinusoid, e.g. eta = omega*pi*(1 + sin(W)), distort these moments by Bessel
factors J0(2*pi*omega) and leak the output's DC level into the Hessian
estimate; see the README design notes.)

The demodulation gains: channel i's gradient demodulator is
(2/a_i) sin(eta_i(t - D_i)), and the Hessian demodulation matrix is

    N_ii = (16/a_i^2) (sin^2(eta_i(t - D_i)) - 1/2)
    N_ij = (4/(a_i a_j)) sin(eta_i(t - D_i)) sin(eta_j(t - D_j)),  i != j,

evaluated at the per-channel delayed phases, matching the delays the plant
applies to the inputs.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError

TWO_PI = 2.0 * math.pi

_BLOCK = 4096


class DitherState:
    """Per-channel wrapped Wiener phases with independent substreams.

    Substreams are spawned from the master seed, so channel draws are
    independent and reproducible regardless of interleaving. Gaussian
    variates are pre-drawn in blocks; block draws are bit-identical to
    repeated scalar draws for numpy generators.
    """

    __slots__ = ("n", "W", "_rngs", "_buf", "_pos")

    def __init__(self, seed: int, n: int):
        if n < 1:
            raise ConfigurationError("need at least one channel")
        children = np.random.SeedSequence(seed).spawn(n)
        self.n = n
        self._rngs = [np.random.default_rng(s) for s in children]
        # start every channel in the invariant (uniform) phase distribution
        self.W = [float(r.uniform(0.0, TWO_PI)) for r in self._rngs]
        self._buf = [None] * n  # gaussian blocks, filled on first use
        self._pos = [_BLOCK] * n

    @property
    def eta(self) -> list[float]:
        """Current perturbation phases (the wrapped Wiener values)."""
        return list(self.W)

    def _draw(self, i: int) -> float:
        pos = self._pos[i]
        if pos == _BLOCK:
            self._buf[i] = self._rngs[i].standard_normal(_BLOCK)
            pos = 0
        self._pos[i] = pos + 1
        return self._buf[i][pos]

    def step(self, dt: float, omega: float) -> "DitherState":
        """Advance every channel by one Wiener increment of variance omega*dt."""
        if dt < 0:
            raise ConfigurationError("dt must be >= 0")
        if dt == 0.0:
            return self
        sq = math.sqrt(omega * dt)
        W = self.W
        for i in range(self.n):
            W[i] = (W[i] + sq * self._draw(i)) % TWO_PI
        return self

    def sample_path(self, n_steps: int, dt: float, omega: float) -> np.ndarray:
        """Vectorized phase path of shape (n_steps, n) for statistical checks.

        Same law as repeated :meth:`step` calls but wrapped once at the end
        of the cumulative sum, so it is not bit-compatible with stepping.
        Advances the underlying streams.
        """
        out = np.empty((n_steps, self.n))
        sq = math.sqrt(omega * dt)
        for i in range(self.n):
            leftover = (self._buf[i][self._pos[i]:] if self._buf[i] is not None
                        else np.empty(0))
            extra = max(0, n_steps - leftover.shape[0])
            inc = np.concatenate(
                [leftover, self._rngs[i].standard_normal(extra)])[:n_steps]
            out[:, i] = (self.W[i] + sq * np.cumsum(inc)) % TWO_PI
            self.W[i] = float(out[-1, i])
            self._buf[i] = None
            self._pos[i] = _BLOCK
        return out


def step_dither(state: DitherState, dt: float, omega: float) -> DitherState:
    """Functional alias for :meth:`DitherState.step` (mutates in place)."""
    return state.step(dt, omega)


def dither_S(eta, a) -> np.ndarray:
    """Perturbation vector S: a_i * sin(eta_i)."""
    eta = np.asarray(eta, dtype=float)
    a = np.asarray(a, dtype=float)
    if eta.shape != a.shape:
        raise ConfigurationError("eta and a must have matching length")
    return a * np.sin(eta)


def demod_M(eta_delayed, a) -> np.ndarray:
    """Gradient demodulation vector M: (2/a_i) sin(eta_i(t - D_i)).

    Channels with a_i == 0 carry no dither and return 0 (no gradient
    information on a silent channel).
    """
    eta = np.asarray(eta_delayed, dtype=float)
    a = np.asarray(a, dtype=float)
    if eta.shape != a.shape:
        raise ConfigurationError("eta_delayed and a must have matching length")
    out = np.zeros_like(a)
    live = a != 0.0
    out[live] = 2.0 / a[live] * np.sin(eta[live])
    return out


def demod_N(eta_delayed, a) -> np.ndarray:
    """Hessian demodulation matrix N, symmetric by construction.

    Silent channels (a_i == 0) produce zero rows and columns.
    """
    eta = np.asarray(eta_delayed, dtype=float)
    a = np.asarray(a, dtype=float)
    if eta.shape != a.shape:
        raise ConfigurationError("eta_delayed and a must have matching length")
    n = a.shape[0]
    s = np.sin(eta)
    inv_a = np.zeros(n)
    live = a != 0.0
    inv_a[live] = 1.0 / a[live]
    u = s * inv_a
    out = 4.0 * np.outer(u, u)
    np.fill_diagonal(out, 16.0 * inv_a ** 2 * (s * s - 0.5))
    out[~live, :] = 0.0
    out[:, ~live] = 0.0
    return out
