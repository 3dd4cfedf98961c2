"""Multivariable stochastic Newton extremum seeking with distinct,
known input delays compensated by predictor feedback.

The package simulates the full stochastic closed loop (wrapped-Wiener
dither, gradient/Hessian demodulation, Riccati inverse-Hessian filter,
per-channel predictor feedback), its deterministic averaged model used as a
verification oracle, and an uncompensated baseline, plus presets that
reproduce the standard two-input study at desk scale.
"""
from .averaged import (ComparisonReport, compare_to_stochastic,
                       fit_decay_slope, fit_rate_by_levels, run_averaged)
from .buffers import HistoryBuffer
from .config import (ControllerMode, DelayVector, GainConfig, SimConfig,
                     order_by_delay, validate_setup)
from .controller import (ControllerState, gradient_predictor_step,
                         newton_predictor_step, unpredicted_step)
from .dither import DitherState, demod_M, demod_N, dither_S, step_dither
from .errors import ConfigurationError
from .estimator import (EstimatorState, demodulate, newton_signal,
                        perturbed_input, riccati_step)
from .metrics import control_attenuation, final_window_stats, time_to_band
from .plant import QuadraticMap, evaluate_map, hessian_inverse
from .presets import Scenario, get_preset, preset_names
from .simulator import ClosedLoop, LoopState, Trajectory, run

__version__ = "0.1.0"

__all__ = [
    "ClosedLoop", "ComparisonReport", "ConfigurationError", "ControllerMode",
    "ControllerState", "DelayVector", "DitherState", "EstimatorState",
    "GainConfig", "HistoryBuffer", "LoopState", "QuadraticMap", "Scenario",
    "SimConfig", "Trajectory", "compare_to_stochastic", "control_attenuation",
    "demod_M", "demod_N", "demodulate", "dither_S", "evaluate_map",
    "final_window_stats", "fit_decay_slope", "fit_rate_by_levels",
    "get_preset", "gradient_predictor_step", "hessian_inverse",
    "newton_predictor_step", "newton_signal", "order_by_delay",
    "perturbed_input", "preset_names", "riccati_step", "run", "run_averaged",
    "step_dither", "time_to_band", "unpredicted_step", "validate_setup",
]
