"""Stability of forced-oscillation candidates.

A small same-frequency perturbation riding on a candidate sees each
saturation through its incremental-input describing function.  Splitting
the speed feedback ``k3 = k2 + (k3 - k2)`` gives the incremental loop

    H(s)   = N_inc / (s - (k3 - k2) * N_inc)
    T_o(s) = (k1 + k2*s) * H(s) / s

evaluated at the candidate frequency while the perturbation phase
``theta`` sweeps a full turn.  The candidate is stable when the resulting
closed locus does not wind around -1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .describing_functions import idf_saturation
from .harmonic_balance import (BalanceProblem, OscillationCandidate, Stability,
                               saturation_inputs)
from .model import ControllerGains, LoopConfig

__all__ = [
    "PoleOnLocus", "LocusPoint", "SelectionReport", "incremental_gain",
    "incremental_H", "open_loop_locus", "winding_number", "classify_stability",
    "classify_candidates", "select_response",
]

POLE_TOL = 1e-12
CRITICAL_TOL = 1e-9


class PoleOnLocus(ArithmeticError):
    """The incremental loop has a pole on the evaluation point."""


@dataclass(frozen=True)
class LocusPoint:
    theta: float
    value: complex


def incremental_gain(candidate: OscillationCandidate, problem: BalanceProblem,
                     theta: float) -> complex:
    """Product of the incremental gains around the loop at phase ``theta``.

    For the combined loop the speed saturation sees the acceleration
    perturbation after one integrator, so its phase offset is shifted by the
    acceleration IDF's argument and a quarter turn.
    """
    lim = problem.limits
    loop = candidate.loop
    if loop is LoopConfig.LINEAR:
        return 1.0 + 0j
    if loop is LoopConfig.CONTROL_ONLY:
        return idf_saturation(candidate.B, lim.a_min, lim.a_max, theta).value
    if loop is LoopConfig.STATE_ONLY:
        return idf_saturation(candidate.B, lim.vt_min, lim.vt_max, theta).value
    n_a = idf_saturation(candidate.B, lim.a_min, lim.a_max, theta).value
    _, B_v = saturation_inputs(candidate, problem)
    theta_v = theta + cmath.phase(n_a) - math.pi / 2
    n_v = idf_saturation(B_v, lim.vt_min, lim.vt_max, theta_v).value
    return n_a * n_v


def incremental_H(candidate: OscillationCandidate, problem: BalanceProblem,
                  theta: float, omega: float | None = None) -> complex:
    w = candidate.omega if omega is None else omega
    gains = problem.gains
    n = incremental_gain(candidate, problem, theta)
    den = 1j * w - (gains.k3 - gains.k2) * n
    if abs(den) < POLE_TOL:
        raise PoleOnLocus(f"incremental loop pole at theta={theta:.6g}")
    return n / den


def _open_loop(gains: ControllerGains, H: complex, w: float) -> complex:
    s = 1j * w
    return (gains.k1 + gains.k2 * s) * H / s


def open_loop_locus(candidate: OscillationCandidate, problem: BalanceProblem,
                    theta_samples: int = 720, omega: float | None = None,
                    endpoint: bool = False) -> list[LocusPoint]:
    """Open-loop incremental response ``T_o(j w)`` over a full theta turn.

    ``endpoint=True`` repeats theta = 2*pi as the last sample, which is
    convenient when writing a closed curve to disk.
    """
    if theta_samples < 2:
        raise ValueError("theta_samples must be >= 2")
    w = candidate.omega if omega is None else omega
    thetas = np.linspace(0.0, 2 * np.pi, theta_samples, endpoint=endpoint)
    return [LocusPoint(float(th),
                       _open_loop(problem.gains, incremental_H(candidate, problem, th, w), w))
            for th in thetas]


def winding_number(points, center: complex = -1 + 0j) -> float:
    """Signed turns of the closed polygon ``points`` around ``center``.

    Sums the principal-value angle increments between consecutive vertices,
    including the closing edge.
    """
    z = np.asarray(points, dtype=complex) - center
    angles = np.angle(z)
    steps = np.diff(np.append(angles, angles[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return float(steps.sum() / (2 * np.pi))


def _classify_locus(values) -> Stability:
    if np.min(np.abs(np.asarray(values) + 1.0)) < CRITICAL_TOL:
        return Stability.INDETERMINATE
    return Stability.UNSTABLE if abs(winding_number(values)) >= 0.5 else Stability.STABLE


def classify_stability(candidate: OscillationCandidate, problem: BalanceProblem,
                       theta_samples: int = 720, full_sweep_omegas=None) -> Stability:
    """Nyquist-style verdict on one candidate.

    By default the locus is taken at the candidate's own frequency.  Passing
    ``full_sweep_omegas`` additionally requires that the theta-locus at
    every listed frequency avoids encircling -1, which is more conservative.
    """
    omegas = [candidate.omega]
    if full_sweep_omegas is not None:
        omegas += [w for w in full_sweep_omegas if w != candidate.omega]
    verdict = Stability.STABLE
    for w in omegas:
        try:
            locus = open_loop_locus(candidate, problem, theta_samples, omega=w)
        except PoleOnLocus:
            return Stability.INDETERMINATE
        result = _classify_locus([p.value for p in locus])
        if result is Stability.INDETERMINATE:
            return result
        if result is Stability.UNSTABLE:
            verdict = Stability.UNSTABLE
    return verdict


def classify_candidates(candidates, problem, theta_samples=720, full_sweep_omegas=None):
    return [c.with_stability(classify_stability(c, problem, theta_samples, full_sweep_omegas))
            for c in candidates]


@dataclass
class SelectionReport:
    """Which candidate stands for the physical response at one frequency.

    ``status`` is ``"ok"``, ``"ambiguous"`` (several stable candidates, the
    smallest is selected) or ``"no_stable_solution"``.
    """

    selected: OscillationCandidate | None
    candidates: list = field(default_factory=list)
    status: str = "ok"
    indeterminate: list = field(default_factory=list)

    @property
    def ambiguous(self) -> bool:
        return self.status == "ambiguous"


def select_response(candidates) -> SelectionReport:
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to select from")
    stable = sorted((c for c in candidates if c.stability is Stability.STABLE),
                    key=lambda c: c.B)
    indeterminate = [c for c in candidates if c.stability is Stability.INDETERMINATE]
    if not stable:
        return SelectionReport(None, candidates, "no_stable_solution", indeterminate)
    status = "ambiguous" if len(stable) > 1 else "ok"
    return SelectionReport(stable[0], candidates, status, indeterminate)
