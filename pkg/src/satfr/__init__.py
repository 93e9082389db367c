"""Frequency response of a car-following loop with acceleration and speed saturation.

The analytic path uses describing functions and harmonic balance; a
fixed-step simulator serves as ground truth.
"""

__version__ = "0.1.0"

from .model import (ControllerGains, LoopConfig, SaturationLimits, Scenario,  # noqa: E402
                    SolverSettings, ValidationError, derive_loop_gains)

__all__ = ["__version__", "ControllerGains", "LoopConfig", "SaturationLimits",
           "Scenario", "SolverSettings", "ValidationError", "derive_loop_gains"]
