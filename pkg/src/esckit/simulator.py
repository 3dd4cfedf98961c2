"""Closed-loop time stepping.

One step at loop time t, in a fixed order that keeps every signal
referenced to the same grid index:

 1. advance the dither phases, push eta(t) into the phase history
 2. form the plant input theta(t) = theta_hat(t) + S(eta(t)), push it
 3. sample the per-channel delayed input theta_i(t - D_i)
 4. evaluate the map, y(t) = Q(theta(t - D)); check the divergence guard
 5. washout: y_d = y - y_lp (first-order high-pass; optional)
 6. sample delayed phases eta_i(t - D_i); demodulate G = M y_d, Hhat = N y_d
 7. Riccati update of Gamma; Newton signal z = Gamma G
 8. controller law using each channel's own control-history window integral
 9. push U(t) into the control history
10. log (theta_hat logged pre-integration so each row satisfies
    theta = theta_hat + S)
11. integrate the estimate, theta_hat += dt * U

The dither history is pre-generated on [-D_n, 0) with the control inactive,
so delayed phases and delayed inputs are defined from t = 0. Everything
stochastic derives from the master seed via per-channel substreams; a run
is a pure function of its configuration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .buffers import HistoryBuffer
from .config import ControllerMode, DelayVector, GainConfig, SimConfig, validate_setup
from .controller import ControllerState
from .dither import TWO_PI, DitherState
from .errors import ConfigurationError
from .estimator import EstimatorState, _riccati_update
from .plant import QuadraticMap


def trajectory_columns(n: int) -> list[str]:
    """Column names of the logged trajectory matrix (the CSV contract)."""
    cols = ["t"]
    cols += [f"theta_{i + 1}" for i in range(n)]
    cols += [f"theta_hat_{i + 1}" for i in range(n)]
    cols += ["y"]
    cols += [f"U_{i + 1}" for i in range(n)]
    cols += [f"Hhat_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    cols += [f"Gamma_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    return cols


@dataclass
class Trajectory:
    """Uniformly sampled log of one run, plus the divergence event if any."""

    data: np.ndarray
    n: int
    divergence: Optional[tuple[float, str]] = None

    @property
    def columns(self) -> list[str]:
        return trajectory_columns(self.n)

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def theta(self) -> np.ndarray:
        return self.data[:, 1:1 + self.n]

    @property
    def theta_hat(self) -> np.ndarray:
        return self.data[:, 1 + self.n:1 + 2 * self.n]

    @property
    def y(self) -> np.ndarray:
        return self.data[:, 1 + 2 * self.n]

    @property
    def u(self) -> np.ndarray:
        c = 2 + 2 * self.n
        return self.data[:, c:c + self.n]

    @property
    def hhat(self) -> np.ndarray:
        c = 2 + 3 * self.n
        return self.data[:, c:c + self.n ** 2].reshape(-1, self.n, self.n)

    @property
    def gamma(self) -> np.ndarray:
        c = 2 + 3 * self.n + self.n ** 2
        return self.data[:, c:c + self.n ** 2].reshape(-1, self.n, self.n)


@dataclass
class LoopState:
    """Snapshot view of the closed-loop state (for inspection and tests)."""

    t: float
    theta_hat: np.ndarray
    dither: DitherState
    buffers: dict
    est: EstimatorState
    ctrl: ControllerState
    y_lowpass: Optional[float]


class ClosedLoop:
    """One stochastic extremum-seeking simulation; owns all mutable state."""

    def __init__(self, qmap: QuadraticMap, delays: DelayVector,
                 gains: GainConfig, sim: SimConfig):
        validate_setup(qmap, delays, gains, sim)
        self.qmap = qmap
        self.delays = delays
        self.gains = gains
        self.sim = sim
        n = qmap.n
        self._n = n
        self._mode = sim.controller
        self._dt = sim.dt
        self._omega = gains.omega

        # plain-float copies for the hot loop
        self._th_star = [float(v) for v in qmap.theta_star]
        self._hess = [[float(v) for v in row] for row in qmap.hessian]
        self._d = [float(v) for v in delays.delays]
        self._m = [round(v / sim.dt) for v in self._d]
        self._a = [float(v) for v in gains.a]
        self._k = [float(v) for v in gains.k]
        self._cdt = [float(v) * sim.dt for v in gains.c]
        self._alpha = [math.exp(-float(v) * sim.dt) for v in gains.c]
        inv_a = [0.0 if v == 0.0 else 1.0 / v for v in self._a]
        self._coef_m = [2.0 * v for v in inv_a]
        self._coef_nd = [16.0 * v * v for v in inv_a]
        self._coef_no = [[4.0 * inv_a[i] * inv_a[j] for j in range(n)]
                         for i in range(n)]
        self._wr_dt = gains.omega_r * sim.dt
        self._wash_dt = gains.washout_freq * sim.dt

        horizon = delays.max_delay
        self.dither = DitherState(sim.seed, n)
        self.eta_buf = HistoryBuffer(n, sim.dt, horizon)
        self.theta_buf = HistoryBuffer(n, sim.dt, horizon)
        self.u_buf = HistoryBuffer(n, sim.dt, horizon, prefill=0.0,
                                   window=self._d)

        self._theta_hat = [float(v) for v in sim.theta_hat0]
        self._gamma = [[float(v) for v in row] for row in sim.gamma0]
        self._u = [0.0] * n
        self._g = [0.0] * n
        self._z = [0.0] * n
        self._hh = [[0.0] * n for _ in range(n)]
        self._y_lp: Optional[float] = None
        self.divergence: Optional[tuple[float, str]] = None
        self._j = 0

        # pre-generate the dither history on [-D_n, 0): control inactive,
        # input = theta_hat(0) + S
        warm = max(self._m)
        for step_i in range(warm):
            if step_i > 0:
                self.dither.step(self._dt, self._omega)
            W = self.dither.W
            for i in range(n):
                e = W[i]
                self.eta_buf.push(i, e)
                self.theta_buf.push(i, self._theta_hat[i] + self._a[i] * math.sin(e))

        n_rows = sim.n_steps // sim.log_every + 1
        self._log = np.empty((n_rows, len(trajectory_columns(n))))
        self._rows = 0

    @property
    def state(self) -> LoopState:
        return LoopState(
            t=self._j * self._dt,
            theta_hat=np.array(self._theta_hat),
            dither=self.dither,
            buffers={"eta": self.eta_buf, "theta": self.theta_buf,
                     "control": self.u_buf},
            est=EstimatorState(gamma=np.array(self._gamma),
                               hhat=np.array(self._hh), g=np.array(self._g),
                               z=np.array(self._z)),
            ctrl=ControllerState(u=np.array(self._u), mode=self._mode),
            y_lowpass=self._y_lp,
        )

    def step(self) -> None:
        """Advance the loop by one dt; no-op after a divergence event."""
        if self.divergence is not None:
            return
        n = self._n
        dt = self._dt
        j = self._j
        t = j * dt
        th_hat = self._theta_hat
        a = self._a
        m = self._m
        sin = math.sin

        # (1)-(2) dither, plant input, histories
        self.dither.step(dt, self._omega)
        W = self.dither.W
        eta_buf = self.eta_buf
        theta_buf = self.theta_buf
        theta = [0.0] * n
        for i in range(n):
            e = W[i]
            eta_buf.push(i, e)
            theta[i] = th_hat[i] + a[i] * sin(e)
            theta_buf.push(i, theta[i])

        # (3)-(4) delayed input, measured output, guard
        hess = self._hess
        mm = self._m
        dvec = [theta_buf.sample_back(i, mm[i]) - self._th_star[i]
                for i in range(n)]
        y = self.qmap.y_star
        for i in range(n):
            hrow = hess[i]
            y += 0.5 * dvec[i] * sum(hrow[jj] * dvec[jj] for jj in range(n))
        if not (abs(y) <= self.sim.divergence_guard):
            self.divergence = (t, "output magnitude exceeded divergence guard")
            return

        # (5) washout high-pass of the measured output
        if self._wash_dt > 0.0:
            if self._y_lp is None:
                self._y_lp = y
            y_d = y - self._y_lp
            self._y_lp += self._wash_dt * (y - self._y_lp)
        else:
            y_d = y

        # (6) demodulation at the per-channel delayed phases
        sd = [sin(eta_buf.sample_back(i, mm[i])) for i in range(n)]
        g_vec = [self._coef_m[i] * sd[i] * y_d for i in range(n)]
        coef_no = self._coef_no
        coef_nd = self._coef_nd
        hh = [[0.0] * n for _ in range(n)]
        for i in range(n):
            row = hh[i]
            si = sd[i]
            for jj in range(i):
                val = coef_no[i][jj] * si * sd[jj] * y_d
                row[jj] = val
                hh[jj][i] = val
            row[i] = coef_nd[i] * (si * si - 0.5) * y_d
        self._hh = hh
        self._g = g_vec

        # (7) Riccati update and Newton signal
        gam = _riccati_update(self._gamma, hh, self._wr_dt)
        self._gamma = gam
        z = [sum(gam[i][jj] * g_vec[jj] for jj in range(n)) for i in range(n)]
        self._z = z

        # (8)-(9) control law, control history
        u = self._u
        u_buf = self.u_buf
        mode = self._mode
        exact = self.sim.exact_filter
        k = self._k
        for i in range(n):
            if mode is ControllerMode.NEWTON_PREDICTOR:
                v = -k[i] * (z[i] + u_buf.window_sum(i))
            elif mode is ControllerMode.NEWTON_NO_PREDICTOR:
                v = -k[i] * z[i]
            else:
                acc = g_vec[i]
                hrow = hh[i]
                for jj in range(n):
                    acc += hrow[jj] * u_buf.window_sum(jj)
                v = k[i] * acc
            if exact:
                u[i] = self._alpha[i] * u[i] + (1.0 - self._alpha[i]) * v
            else:
                u[i] += self._cdt[i] * (v - u[i])
            u_buf.push(i, u[i])

        # (10) log with theta_hat as used to form theta(t)
        if j % self.sim.log_every == 0:
            chk = 0.0
            for i in range(n):
                chk += u[i] + z[i]
            if not math.isfinite(chk):
                self.divergence = (t, "non-finite estimator/controller state")
                return
            row = [t]
            row += theta
            row += th_hat
            row.append(y)
            row += u
            for i in range(n):
                row += hh[i]
            for i in range(n):
                row += gam[i]
            self._log[self._rows] = row
            self._rows += 1

        # (11) integrate the estimate
        for i in range(n):
            th_hat[i] += dt * u[i]
        self._j = j + 1

    def run(self) -> Trajectory:
        """Step to t_end (or divergence) and return the logged trajectory."""
        n_steps = self.sim.n_steps
        step = self.step
        while self._j <= n_steps and self.divergence is None:
            step()
        counts = (self.eta_buf.counts() + self.theta_buf.counts()
                  + self.u_buf.counts())
        if self.divergence is None and len(set(counts)) > 2:
            raise AssertionError("history buffers advanced unevenly")
        return Trajectory(data=self._log[:self._rows].copy(), n=self._n,
                          divergence=self.divergence)


def run(qmap: QuadraticMap, delays: DelayVector, gains: GainConfig,
        sim: SimConfig) -> Trajectory:
    """Run one closed-loop simulation; deterministic in the seed."""
    return ClosedLoop(qmap, delays, gains, sim).run()
