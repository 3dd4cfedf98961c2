"""Fixed-step signal histories with exact delayed sampling.

A :class:`HistoryBuffer` stores the last ``capacity`` samples of each
channel on the simulation grid. Because delays are whole multiples of dt
(enforced at configuration time), a pure transport delay is realized
exactly: ``sample_delayed`` returns the stored float bit-for-bit, with no
interpolation.

``integral_window(channel, D)`` returns the window quadrature

    dt * sum of the D/dt most recent samples (newest included),

i.e. the left-Riemann sum of the integral over (t - D, t] for a caller that
pushed its time-t sample one step ago, which is exactly how the predictor
uses it: at loop time t the control history holds samples up to t - dt and
the sum covers [t - D, t - dt]. Channels may be configured with a fixed
window so the sum is maintained incrementally in O(1) per push; a periodic
full recomputation bounds floating-point drift.
"""
from __future__ import annotations

from .config import delay_slots
from .errors import ConfigurationError

RECOMPUTE_EVERY = 100_000


class HistoryBuffer:
    """Ring-buffer histories for ``n_channels`` scalar signals."""

    def __init__(self, n_channels: int, dt: float, horizon: float,
                 prefill=0.0, window=None):
        """
        n_channels : number of independent channels
        dt         : sample spacing, seconds
        horizon    : longest delay the buffer must cover, seconds
        prefill    : pre-history value(s); scalar or one per channel
        window     : optional per-channel window lengths (seconds) for
                     incrementally maintained ``integral_window`` sums
        """
        if n_channels < 1:
            raise ConfigurationError("need at least one channel")
        if dt <= 0:
            raise ConfigurationError("dt must be > 0")
        if horizon < 0:
            raise ConfigurationError("horizon must be >= 0")
        self.n = n_channels
        self.dt = float(dt)
        self.capacity = delay_slots(horizon, dt) + 1
        try:
            fills = [float(prefill)] * n_channels
        except TypeError:
            fills = [float(v) for v in prefill]
            if len(fills) != n_channels:
                raise ConfigurationError(
                    "prefill must be scalar or one value per channel")
        self._buf = [[fills[i]] * self.capacity for i in range(n_channels)]
        self._pos = [0] * n_channels          # index of most recent sample
        self._count = [0] * n_channels        # pushes absorbed per channel
        self._wm = [0] * n_channels           # window length, slots
        self._wsum = [0.0] * n_channels
        if window is not None:
            for i, w in enumerate(window):
                m = delay_slots(float(w), dt)
                if m >= self.capacity + 1:
                    raise ConfigurationError("window exceeds buffer capacity")
                self._wm[i] = m
                self._wsum[i] = fills[i] * m

    def push(self, channel: int, value: float) -> None:
        """Append one sample; the channel's head advances by dt."""
        buf = self._buf[channel]
        pos = (self._pos[channel] + 1) % self.capacity
        m = self._wm[channel]
        if m > 0:
            # sample leaving the window is the m-th newest before this push
            leaving = buf[(pos - m) % self.capacity]
            self._wsum[channel] += value - leaving
        buf[pos] = value
        self._pos[channel] = pos
        cnt = self._count[channel] + 1
        self._count[channel] = cnt
        if m > 0 and cnt % RECOMPUTE_EVERY == 0:
            self._wsum[channel] = self._direct_sum(channel, m)

    def counts(self) -> list[int]:
        """Pushes absorbed per channel; the loop asserts these stay uniform."""
        return list(self._count)

    def sample_delayed(self, channel: int, delay_s: float) -> float:
        """Stored sample exactly ``delay_s`` behind the channel head."""
        m = delay_slots(delay_s, self.dt)
        if m < 0 or m >= self.capacity:
            raise ConfigurationError(
                f"delay {delay_s} outside buffer horizon "
                f"{(self.capacity - 1) * self.dt}")
        return self._buf[channel][(self._pos[channel] - m) % self.capacity]

    def sample_back(self, channel: int, slots: int) -> float:
        """``sample_delayed`` with the delay pre-converted to whole steps."""
        return self._buf[channel][(self._pos[channel] - slots) % self.capacity]

    def window_sum(self, channel: int) -> float:
        """Quadrature over the channel's configured window (dt * running sum)."""
        return self._wsum[channel] * self.dt

    def _direct_sum(self, channel: int, m: int) -> float:
        buf = self._buf[channel]
        pos = self._pos[channel]
        cap = self.capacity
        return sum(buf[(pos - j) % cap] for j in range(m))

    def integral_window(self, channel: int, delay_s: float) -> float:
        """Window quadrature: dt times the sum of the newest D/dt samples."""
        m = delay_slots(delay_s, self.dt)
        if m < 0 or m > self.capacity:
            raise ConfigurationError(
                f"window {delay_s} outside buffer horizon "
                f"{(self.capacity - 1) * self.dt}")
        if m == self._wm[channel]:
            return self._wsum[channel] * self.dt
        return self._direct_sum(channel, m) * self.dt
