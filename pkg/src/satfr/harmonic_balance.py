"""First-harmonic balance of the saturated follower loop.

With the leader at ``R*sin(wt)`` and the saturation input at
``B*sin(wt + phi)``, the balance around the loop collapses to one phasor
equation

    B * exp(j*phi) * D(B) = R * U

where ``D = (1 - k1*N/w**2) + j*k3*N/w`` carries the loop through the
describing function ``N`` and ``U`` is the leader forcing seen at the
saturation input (``k1 + j*w*k2`` at the acceleration node,
``k2 - j*k1/w`` at the speed node).  Amplitude balance is the scalar root
problem ``g(B) = B*|D| - R*|U| = 0``; the phase then follows directly.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .describing_functions import df_array, df_saturation
from .model import (ControllerGains, LoopConfig, SaturationLimits, SolverSettings,
                    classify_loop)

__all__ = [
    "Stability", "Method", "BalanceProblem", "OscillationCandidate",
    "FrequencyResponsePoint", "NoRootFound", "UndefinedResponse",
    "LimitCycleReport", "effective_gain", "balance_residual", "solve_candidates",
    "frequency_response", "linear_frequency_response", "check_no_limit_cycle",
    "saturation_inputs", "limits_reached", "default_sweep_ceiling", "wrap_phase",
]


class Stability(enum.Enum):
    UNKNOWN = "unknown"
    STABLE = "stable"
    UNSTABLE = "unstable"
    INDETERMINATE = "indeterminate"


class Method(enum.Enum):
    IDF = "idf"
    LINEAR = "linear"
    SIMULATION = "simulation"


class NoRootFound(RuntimeError):
    def __init__(self, message, g_low=None, g_high=None, b_max=None):
        self.g_low, self.g_high, self.b_max = g_low, g_high, b_max
        super().__init__(message)


class UndefinedResponse(ValueError):
    """Frequency response requested for a zero leader amplitude."""


def wrap_phase(phase: float) -> float:
    """Principal value in (-pi, pi]."""
    wrapped = math.remainder(phase, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class BalanceProblem:
    loop: LoopConfig
    gains: ControllerGains
    limits: SaturationLimits
    R: float
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not self.R >= 0:
            raise ValueError(f"R must be >= 0, got {self.R}")

    @property
    def forcing(self) -> complex:
        """Leader forcing phasor ``U`` at the saturation input."""
        k1, k2, w = self.gains.k1, self.gains.k2, self.omega
        if self.loop is LoopConfig.STATE_ONLY:
            return complex(k2, -k1 / w)
        return complex(k1, w * k2)


@dataclass(frozen=True)
class OscillationCandidate:
    """One harmonic-balance solution.

    ``B`` is the acceleration-command amplitude except for the state-only
    loop, where it is the raw oscillatory-speed amplitude.
    """

    omega: float
    B: float
    phi: float
    loop: LoopConfig
    residual: float
    stability: Stability = Stability.UNKNOWN

    def with_stability(self, stability: Stability) -> "OscillationCandidate":
        return OscillationCandidate(self.omega, self.B, self.phi, self.loop,
                                    self.residual, stability)


@dataclass(frozen=True)
class FrequencyResponsePoint:
    omega: float
    magnitude: float
    phase: float
    method: Method
    phase_unwrapped: float | None = None

    def __post_init__(self):
        if not self.magnitude >= 0:
            raise ValueError("magnitude must be >= 0")
        if self.phase_unwrapped is None:
            object.__setattr__(self, "phase_unwrapped", self.phase)

    @property
    def complex_value(self) -> complex:
        return cmath.rect(self.magnitude, self.phase)


def effective_gain(B: float, problem: BalanceProblem) -> float:
    """Net describing-function gain between the saturation input and the
    position integrator."""
    lim, loop = problem.limits, problem.loop
    if loop is LoopConfig.LINEAR:
        return 1.0
    if loop is LoopConfig.CONTROL_ONLY:
        return df_saturation(B, lim.a_min, lim.a_max).value
    if loop is LoopConfig.STATE_ONLY:
        return df_saturation(B, lim.vt_min, lim.vt_max).value
    n_a = df_saturation(B, lim.a_min, lim.a_max).value
    B_v = B * n_a / problem.omega
    return n_a * df_saturation(B_v, lim.vt_min, lim.vt_max).value


def _loop_phasor(n, problem):
    k1, k3, w = problem.gains.k1, problem.gains.k3, problem.omega
    return (1.0 - k1 * n / (w * w)) + 1j * (k3 * n / w)


def balance_residual(B: float, problem: BalanceProblem) -> tuple[float, float]:
    """Amplitude mismatch ``g(B)`` and the phase ``phi`` that balances it."""
    n = effective_gain(B, problem)
    D = _loop_phasor(n, problem)
    U = problem.forcing
    g = B * abs(D) - problem.R * abs(U)
    phi = wrap_phase(cmath.phase(U) - cmath.phase(D))
    return g, phi


def _effective_gain_array(B, problem):
    lim, loop = problem.limits, problem.loop
    if loop is LoopConfig.LINEAR:
        return np.ones_like(B)
    if loop is LoopConfig.CONTROL_ONLY:
        return df_array(B, lim.a_min, lim.a_max)
    if loop is LoopConfig.STATE_ONLY:
        return df_array(B, lim.vt_min, lim.vt_max)
    n_a = df_array(B, lim.a_min, lim.a_max)
    return n_a * df_array(B * n_a / problem.omega, lim.vt_min, lim.vt_max)


def _residual_array(B, problem):
    D = _loop_phasor(_effective_gain_array(B, problem), problem)
    return B * np.abs(D) - problem.R * abs(problem.forcing)


def default_sweep_ceiling(problem: BalanceProblem) -> float:
    """Upper end of the initial-guess sweep when none is configured.

    Five times the unsaturated root, floored at ten times the larger of the
    finite bounds and the leader's forcing scale.
    """
    g, w, R = problem.gains, problem.omega, problem.R
    D_lin = _loop_phasor(1.0, problem)
    linear_root = R * abs(problem.forcing) / abs(D_lin)
    bounds = [abs(b) for b in (*problem.limits.accel_bounds, *problem.limits.speed_bounds)
              if math.isfinite(b)]
    scale = max(bounds + [g.k1 * R + g.k2 * w * R])
    return max(5.0 * linear_root, 10.0 * scale)


def solve_candidates(problem: BalanceProblem,
                     settings: SolverSettings = SolverSettings()) -> list[OscillationCandidate]:
    """All harmonic-balance roots at ``problem.omega``, sorted by ``B``.

    Scans ``g`` on a uniform grid over ``(0, b_max]``, refines each sign
    change with Brent's method and de-duplicates.  If ``g`` is still
    negative at the ceiling (a root lies beyond it) the ceiling is doubled
    until ``g`` turns positive; ``g(B) -> +inf`` as ``B -> inf`` so this
    terminates.
    """
    if problem.R == 0:
        return []
    U_abs = abs(problem.forcing)
    R = problem.R
    if problem.loop is LoopConfig.LINEAR:
        D = _loop_phasor(1.0, problem)
        B = R * U_abs / abs(D)
        g, phi = balance_residual(B, problem)
        return [OscillationCandidate(problem.omega, B, phi, problem.loop, abs(g))]

    b_max = settings.b_ini_max or default_sweep_ceiling(problem)
    for _ in range(60):
        if balance_residual(b_max, problem)[0] > 0:
            break
        b_max *= 2.0
    else:  # pragma: no cover - g grows linearly in B, cannot stay negative
        raise NoRootFound("sweep ceiling diverged", b_max=b_max)

    grid = np.linspace(0.0, b_max, settings.sweep_points + 1)
    grid[0] = b_max * 1e-12
    values = _residual_array(grid, problem)
    signs = np.sign(values)
    crossings = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
    if crossings.size == 0:
        raise NoRootFound(
            f"no sign change of g on (0, {b_max:.6g}] "
            f"(g endpoints {values[0]:.6g}, {values[-1]:.6g})",
            g_low=float(values[0]), g_high=float(values[-1]), b_max=b_max)

    roots = []
    scalar_g = lambda b: balance_residual(b, problem)[0]  # noqa: E731
    for i in crossings:
        lo, hi = grid[i], grid[i + 1]
        if values[i] == 0:
            root = lo
        elif values[i + 1] == 0:
            root = hi
        else:
            root = brentq(scalar_g, lo, hi, xtol=1e-300, rtol=settings.root_tol,
                          maxiter=500)
        if roots and abs(root - roots[-1]) < 1e-6 * b_max:
            continue
        roots.append(root)

    out = []
    for root in roots:
        g, phi = balance_residual(root, problem)
        out.append(OscillationCandidate(problem.omega, root, phi, problem.loop, abs(g)))
    return out


def saturation_inputs(candidate: OscillationCandidate, problem: BalanceProblem):
    """Amplitudes ``(B_a, B_v)`` at the acceleration and speed saturations.

    Either entry is ``None`` when that saturation is not part of the loop.
    """
    loop, lim, B = candidate.loop, problem.limits, candidate.B
    if loop is LoopConfig.CONTROL_ONLY:
        return B, None
    if loop is LoopConfig.STATE_ONLY:
        return None, B
    if loop is LoopConfig.BOTH:
        n_a = df_saturation(B, lim.a_min, lim.a_max).value
        return B, B * n_a / candidate.omega
    return None, None


def limits_reached(candidate: OscillationCandidate, problem: BalanceProblem) -> bool:
    B_a, B_v = saturation_inputs(candidate, problem)
    lim = problem.limits
    hit = False
    if B_a is not None:
        hit |= B_a > lim.a_bound
    if B_v is not None:
        hit |= B_v > lim.vt_bound
    return bool(hit)


def frequency_response(candidate: OscillationCandidate,
                       problem: BalanceProblem) -> FrequencyResponsePoint:
    """Follower/leader amplitude ratio and phase implied by a candidate."""
    if problem.R == 0:
        raise UndefinedResponse("frequency response undefined for R = 0")
    w, B, R = candidate.omega, candidate.B, problem.R
    n = effective_gain(B, problem)
    if candidate.loop is LoopConfig.STATE_ONLY:
        magnitude = B * n / (w * R)
        phase = candidate.phi - math.pi / 2
    else:
        magnitude = B * n / (w * w * R)
        phase = candidate.phi - math.pi
    return FrequencyResponsePoint(w, magnitude, wrap_phase(phase), Method.IDF)


def linear_frequency_response(gains: ControllerGains, omega: float) -> FrequencyResponsePoint:
    """Unsaturated response ``(k1 + j w k2) / (k1 - w^2 - j w k3)``."""
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    k1, k2, k3 = gains.k1, gains.k2, gains.k3
    F = complex(k1, omega * k2) / complex(k1 - omega * omega, -omega * k3)
    return FrequencyResponsePoint(omega, abs(F), cmath.phase(F), Method.LINEAR)


@dataclass
class LimitCycleReport:
    """Outcome of the zero-input balance scan.

    ``min_g_over_B`` equals ``min |D|`` over the grid; a positive value
    means no amplitude can balance the loop without an external input.
    """

    loop: LoopConfig
    omegas: list = field(default_factory=list)
    b_max: float = 0.0
    min_g_over_B: float = math.inf
    roots: list = field(default_factory=list)

    @property
    def no_limit_cycle(self) -> bool:
        return not self.roots and self.min_g_over_B > 0


def check_no_limit_cycle(gains: ControllerGains, limits: SaturationLimits, omegas,
                         settings: SolverSettings = SolverSettings(),
                         b_max: float | None = None) -> LimitCycleReport:
    """Scan ``g(B) = B*|D(B)|`` with no leader input for every ``omega``.

    Any zero found is recorded in ``roots`` as ``(omega, B)``; none is
    expected because ``Im D = k3*N/w`` never vanishes for ``N > 0``.
    """
    loop = classify_loop(limits)
    if b_max is None:
        b_max = settings.b_ini_max
    if b_max is None:
        finite = [abs(b) for b in (*limits.accel_bounds, *limits.speed_bounds)
                  if math.isfinite(b)]
        b_max = 10.0 * max(finite) if finite else 100.0
    report = LimitCycleReport(loop, list(omegas), b_max)
    grid = np.linspace(0.0, b_max, settings.sweep_points + 1)[1:]
    for w in omegas:
        problem = BalanceProblem(loop, gains, limits, 0.0, w)
        g = _residual_array(grid, problem)
        ratio = float(np.min(g / grid))
        report.min_g_over_B = min(report.min_g_over_B, ratio)
        for b in grid[g <= 0]:
            report.roots.append((w, float(b)))
    return report
