"""Describing functions of the clip nonlinearity ``clip(u, lo, hi)``.

One routine covers both the acceleration and the speed saturation; the
named wrappers at the bottom only pick the right pair of bounds.

For a sinusoid of amplitude ``B`` each finite bound ``c`` (taken as a
magnitude) that the input crosses contributes

    (x*sqrt(1 - x**2) + asin(x)) / pi,     x = c / B

to the gain, while an untouched side contributes exactly ``1/2``.  Summing
the two sides gives all four limit-activeness cases at once.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DfCase", "DfValue", "IdfValue", "df_saturation", "df_derivative",
    "idf_saturation", "df_array",
    "accel_df", "speed_df", "accel_idf", "speed_idf",
]


class DfCase(enum.Enum):
    INACTIVE = "inactive"
    LOWER_ACTIVE = "lower_active"
    UPPER_ACTIVE = "upper_active"
    BOTH_ACTIVE = "both_active"


@dataclass(frozen=True)
class DfValue:
    value: float
    case: DfCase


@dataclass(frozen=True)
class IdfValue:
    value: complex
    theta: float


def _check(B, lo, hi):
    if not lo < 0:
        raise ValueError(f"lower bound must be < 0, got {lo}")
    if not hi > 0:
        raise ValueError(f"upper bound must be > 0, got {hi}")
    if not B > 0 or math.isnan(B):
        raise ValueError(f"input amplitude must be > 0, got {B}")


def _case(B, lo, hi) -> DfCase:
    # B equal to a bound counts as touching it; both closed forms give 1 there
    lower = B >= -lo
    upper = B >= hi
    if lower and upper:
        return DfCase.BOTH_ACTIVE
    if lower:
        return DfCase.LOWER_ACTIVE
    if upper:
        return DfCase.UPPER_ACTIVE
    return DfCase.INACTIVE


def _side(B, c):
    if B <= c:
        return 0.5
    x = c / B
    return (x * math.sqrt(1.0 - x * x) + math.asin(x)) / math.pi


def _side_slope(B, c):
    if B <= c:
        return 0.0
    x = c / B
    return -2.0 * c / (math.pi * B * B) * math.sqrt(1.0 - x * x)


def df_saturation(B: float, lo: float, hi: float) -> DfValue:
    """Describing function of ``clip(., lo, hi)`` at input amplitude ``B``.

    The gain is real, lies in (0, 1] and does not depend on frequency.

    Parameters
    ----------
    B : float
        Amplitude of the sinusoidal input, > 0.
    lo, hi : float
        Clip bounds with ``lo < 0 < hi``; either may be infinite.

    Returns
    -------
    DfValue
        Gain and the limit-activeness case that produced it.
    """
    _check(B, lo, hi)
    case = _case(B, lo, hi)
    if case is DfCase.INACTIVE:
        return DfValue(1.0, case)
    return DfValue(_side(B, hi) + _side(B, -lo), case)


def df_derivative(B: float, lo: float, hi: float) -> float:
    """``dN/dB`` of :func:`df_saturation`; zero where no bound is crossed.

    At an exact case boundary this returns the limit from above the bound,
    which is 0 because the slope vanishes there like ``sqrt(B - c)``.
    """
    _check(B, lo, hi)
    return _side_slope(B, hi) + _side_slope(B, -lo)


def idf_saturation(B: float, lo: float, hi: float, theta: float) -> IdfValue:
    """Incremental-input describing function.

    Gain seen by a small perturbation ``eps*sin(wt + theta)`` riding on the
    dominant input ``B*sin(wt)``:

        N(B) + (B/2) * N'(B) * (1 + exp(-2j*theta))
    """
    _check(B, lo, hi)
    n = df_saturation(B, lo, hi).value
    slope = df_derivative(B, lo, hi)
    if slope == 0.0:
        return IdfValue(complex(n, 0.0), theta)
    return IdfValue(n + 0.5 * B * slope * (1.0 + cmath.exp(-2j * theta)), theta)


def df_array(B, lo: float, hi: float) -> np.ndarray:
    """Vectorised :func:`df_saturation` value for an array of amplitudes."""
    if not (lo < 0 < hi):
        raise ValueError(f"need lo < 0 < hi, got [{lo}, {hi}]")
    B = np.asarray(B, dtype=float)
    if np.any(~(B > 0)):
        raise ValueError("input amplitudes must be > 0")
    out = np.zeros_like(B)
    for c in (hi, -lo):
        if math.isinf(c):
            out += 0.5
            continue
        x = np.minimum(c / B, 1.0)
        out += (x * np.sqrt(1.0 - x * x) + np.arcsin(x)) / np.pi
    return np.minimum(out, 1.0)


def accel_df(B, limits) -> DfValue:
    return df_saturation(B, limits.a_min, limits.a_max)


def speed_df(B, limits) -> DfValue:
    return df_saturation(B, limits.vt_min, limits.vt_max)


def accel_idf(B, limits, theta) -> IdfValue:
    return idf_saturation(B, limits.a_min, limits.a_max, theta)


def speed_idf(B, limits, theta) -> IdfValue:
    return idf_saturation(B, limits.vt_min, limits.vt_max, theta)
