"""Static quadratic plant with a known extremum.

The plant is the unknown-to-the-controller map

    y(theta) = y* + 1/2 (theta - theta*)^T H (theta - theta*)

with symmetric negative-definite Hessian H (maximum-seeking convention).
The controller only ever sees the scalar output y; the fields of
:class:`QuadraticMap` exist so simulations and diagnostics can measure
convergence against ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class QuadraticMap:
    """Quadratic static map: extremum value, maximizer, and Hessian."""

    y_star: float
    theta_star: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta_star, dtype=float))
        hess = np.asarray(self.hessian, dtype=float)
        n = theta.shape[0]
        if theta.ndim != 1 or n < 1:
            raise ConfigurationError("theta_star must be a vector of length >= 1")
        if hess.shape != (n, n):
            raise ConfigurationError(
                f"hessian shape {hess.shape} does not match {n} channels")
        if not np.allclose(hess, hess.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("hessian must be symmetric")
        if np.linalg.eigvalsh(hess).max() >= 0.0:
            raise ConfigurationError(
                "hessian must be negative definite (maximum-seeking convention)")
        object.__setattr__(self, "y_star", float(self.y_star))
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "hessian", hess)

    @property
    def n(self) -> int:
        return self.theta_star.shape[0]


def evaluate_map(qmap: QuadraticMap, theta_delayed) -> float:
    """Evaluate the map at the (per-channel delayed) input vector."""
    theta = np.asarray(theta_delayed, dtype=float)
    if theta.shape != (qmap.n,):
        raise ConfigurationError(
            f"input has shape {theta.shape}, expected ({qmap.n},)")
    d = theta - qmap.theta_star
    return float(qmap.y_star + 0.5 * d @ qmap.hessian @ d)


def hessian_inverse(qmap: QuadraticMap) -> np.ndarray:
    """Inverse Hessian, the reference value the Riccati filter converges to."""
    try:
        inv = np.linalg.inv(qmap.hessian)
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError(f"hessian is singular: {exc}") from exc
    resid = np.abs(qmap.hessian @ inv - np.eye(qmap.n)).max()
    if resid > 1e-8:
        raise ConfigurationError(
            f"hessian too ill-conditioned to invert (residual {resid:.2e})")
    return inv
