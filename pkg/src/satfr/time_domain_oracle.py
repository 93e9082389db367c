"""Fixed-step simulation of the saturated follower, used as ground truth.

The loop integrated here is

    a_cmd  = k1*(p_lead - p) + k2*dp_lead + k3*clip(v, vt_min, vt_max)
    dv/dt  = clip(a_cmd, a_min, a_max)
    dp/dt  = clip(v, vt_min, vt_max)

with the leader at ``R*sin(w t)``.  Clipping happens inside every
derivative evaluation so RK4 sub-steps see the same saturated dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .harmonic_balance import FrequencyResponsePoint, Method, wrap_phase
from .model import Scenario, SolverSettings

__all__ = [
    "Divergence", "NonConvergence", "SimTrajectory", "HarmonicFit", "DecayReport",
    "step_size", "simulate", "extract_first_harmonic", "estimate_frequency_response",
    "decay_check",
]

GATE_RTOL = 1e-3


class Divergence(FloatingPointError):
    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite state at step {step}")


class NonConvergence(RuntimeError):
    def __init__(self, message, fits):
        self.fits = fits
        super().__init__(message)


@njit(cache=True)
def _clip(x, lo, hi):
    return min(max(x, lo), hi)


@njit(cache=True)
def _deriv(t, p, v, R, w, k1, k2, k3, a_min, a_max, vt_min, vt_max):
    vs = _clip(v, vt_min, vt_max)
    a = k1 * (R * math.sin(w * t) - p) + k2 * R * w * math.cos(w * t) + k3 * vs
    return vs, _clip(a, a_min, a_max)


@njit(cache=True)
def _rk4(p, v, t0, dt, n_steps, record, params):
    R, w, k1, k2, k3, a_min, a_max, vt_min, vt_max = params
    m = n_steps + 1 if record else 1
    out_p = np.empty(m)
    out_v = np.empty(m)
    out_a = np.empty(m)
    out_cmd = np.empty(m)
    if record:
        out_p[0] = p
        out_v[0] = v
    failed = -1
    for i in range(n_steps):
        t = t0 + i * dt
        if record:
            vs = _clip(v, vt_min, vt_max)
            cmd = k1 * (R * math.sin(w * t) - p) + k2 * R * w * math.cos(w * t) + k3 * vs
            out_cmd[i] = cmd
            out_a[i] = _clip(cmd, a_min, a_max)
        dp1, dv1 = _deriv(t, p, v, R, w, k1, k2, k3, a_min, a_max, vt_min, vt_max)
        dp2, dv2 = _deriv(t + 0.5 * dt, p + 0.5 * dt * dp1, v + 0.5 * dt * dv1,
                          R, w, k1, k2, k3, a_min, a_max, vt_min, vt_max)
        dp3, dv3 = _deriv(t + 0.5 * dt, p + 0.5 * dt * dp2, v + 0.5 * dt * dv2,
                          R, w, k1, k2, k3, a_min, a_max, vt_min, vt_max)
        dp4, dv4 = _deriv(t + dt, p + dt * dp3, v + dt * dv3,
                          R, w, k1, k2, k3, a_min, a_max, vt_min, vt_max)
        p = p + dt / 6.0 * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
        v = v + dt / 6.0 * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4)
        if not (math.isfinite(p) and math.isfinite(v)):
            failed = i + 1
            break
        if record:
            out_p[i + 1] = p
            out_v[i + 1] = v
    if record and failed < 0:
        t = t0 + n_steps * dt
        vs = _clip(v, vt_min, vt_max)
        cmd = k1 * (R * math.sin(w * t) - p) + k2 * R * w * math.cos(w * t) + k3 * vs
        out_cmd[n_steps] = cmd
        out_a[n_steps] = _clip(cmd, a_min, a_max)
    return p, v, failed, out_p, out_v, out_a, out_cmd


@dataclass
class SimTrajectory:
    """Uniformly sampled closed-loop run.

    ``velocity`` is the raw (pre-clip) oscillatory speed state; the applied
    speed and acceleration are clipped copies.
    """

    dt: float
    t: np.ndarray
    leader: np.ndarray
    follower: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    accel_command: np.ndarray
    speed_bounds: tuple = (-math.inf, math.inf)

    @property
    def applied_velocity(self) -> np.ndarray:
        return np.clip(self.velocity, *self.speed_bounds)

    def to_csv(self, path) -> None:
        table = np.column_stack([self.t, self.leader, self.follower,
                                 self.velocity, self.acceleration])
        np.savetxt(path, table, delimiter=",", fmt="%.9g", comments="",
                   header="t,leader,follower,velocity,acceleration")


@dataclass(frozen=True)
class HarmonicFit:
    amplitude: float
    phase: float
    residual_fraction: float

    @property
    def phasor(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))


def step_size(omega: float, settings: SolverSettings = SolverSettings()):
    """Integrator step and steps per period.

    The step is the largest value not exceeding ``settings.dt``, 0.01 s and
    a thousandth of the period that divides the period exactly.
    """
    period = 2 * math.pi / omega
    cap = min(settings.dt, 0.01, 1e-3 * period)
    per_period = math.ceil(period / cap - 1e-9)
    return period / per_period, per_period


def _params(scenario, omega, R):
    g, lim = scenario.gains, scenario.limits
    return (float(R), float(omega), g.k1, g.k2, g.k3,
            lim.a_min, lim.a_max, lim.vt_min, lim.vt_max)


def _run(scenario, omega, R, p0, v0, t0, dt, n_steps, record=True):
    p, v, failed, P, V, A, C = _rk4(float(p0), float(v0), float(t0), dt, int(n_steps),
                                    record, _params(scenario, omega, R))
    if failed >= 0:
        raise Divergence(failed)
    return p, v, P, V, A, C


def _trajectory(scenario, omega, R, t0, dt, P, V, A, C):
    t = t0 + dt * np.arange(P.size)
    return SimTrajectory(dt, t, R * np.sin(omega * t), P, V, A, C,
                         scenario.limits.speed_bounds)


def simulate(scenario: Scenario, omega: float, settings: SolverSettings | None = None,
             duration: float | None = None, initial_position: float = 0.0,
             initial_velocity: float = 0.0) -> SimTrajectory:
    """Integrate from ``t = 0`` and return every sample.

    ``duration`` defaults to ``settle_periods + measure_periods`` periods and
    is rounded up to a whole number of steps.
    """
    settings = settings or scenario.solver
    dt, per_period = step_size(omega, settings)
    if duration is None:
        n_steps = (settings.settle_periods + settings.measure_periods) * per_period
    else:
        n_steps = math.ceil(duration / dt - 1e-9)
    R = scenario.leader_amplitude
    _, _, P, V, A, C = _run(scenario, omega, R, initial_position, initial_velocity,
                            0.0, dt, n_steps)
    return _trajectory(scenario, omega, R, 0.0, dt, P, V, A, C)


def _project(t, y, omega):
    theta = omega * t
    span = theta[-1] - theta[0]
    y11 = 2.0 * np.trapezoid(y * np.sin(theta), theta) / span
    y12 = 2.0 * np.trapezoid(y * np.cos(theta), theta) / span
    energy = np.trapezoid(y * y, theta) / span
    return y11, y12, energy


def extract_first_harmonic(t, y, omega: float, periods: int | None = None) -> HarmonicFit:
    """Amplitude and phase of ``y`` relative to ``sin(omega*t)``.

    ``t`` must be uniform.  With ``periods`` given only that many trailing
    periods are used; either way the window must hold a whole number of
    periods.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    period = 2 * math.pi / omega
    if periods is not None:
        dt = t[1] - t[0]
        n = int(round(periods * period / dt))
        if n >= t.size:
            raise ValueError(f"trajectory shorter than {periods} periods")
        t, y = t[-n - 1:], y[-n - 1:]
    cycles = (t[-1] - t[0]) / period
    if cycles < 1 - 1e-9 or abs(cycles - round(cycles)) > 1e-6:
        raise ValueError(f"window spans {cycles:.6g} periods, need a whole number")
    y11, y12, energy = _project(t, y, omega)
    amplitude = math.hypot(y11, y12)
    residual = 0.0 if energy == 0 else 1.0 - 0.5 * amplitude ** 2 / energy
    return HarmonicFit(amplitude, math.atan2(y12, y11), min(max(residual, 0.0), 1.0))


def estimate_frequency_response(scenario: Scenario, omega: float,
                                settings: SolverSettings | None = None):
    """Measured ``|F|`` and phase of the follower at ``omega``.

    Settles for ``settle_periods``, then keeps integrating in blocks of
    ``measure_periods`` until every single-period fit in the latest block
    agrees with the last one to 0.1 %, up to ``max_periods`` in total.
    Checking the whole block rather than just the last pair of periods
    rejects slow transients that barely move from one period to the next.
    Returns the response point and the fit over the last
    ``measure_periods`` periods.
    """
    settings = settings or scenario.solver
    R = scenario.leader_amplitude
    if not R > 0:
        raise ValueError("simulated frequency response needs R > 0")
    dt, per_period = step_size(omega, settings)
    p, v, *_ = _run(scenario, omega, R, 0.0, 0.0, 0.0, dt,
                    settings.settle_periods * per_period, record=False)
    elapsed = settings.settle_periods
    block = settings.measure_periods
    history = []
    window = max(block, 2)
    while True:
        t0 = elapsed * per_period * dt
        p, v, P, V, A, C = _run(scenario, omega, R, p, v, t0, dt, block * per_period)
        elapsed += block
        t = t0 + dt * np.arange(P.size)
        history += [extract_first_harmonic(t[k * per_period:(k + 1) * per_period + 1],
                                           P[k * per_period:(k + 1) * per_period + 1], omega)
                    for k in range(block)]
        history = history[-window:]
        last = history[-1].phasor
        if len(history) == window and \
                max(abs(f.phasor - last) for f in history) <= GATE_RTOL * abs(last):
            break
        if elapsed + block > settings.max_periods:
            raise NonConvergence(
                f"no steady state after {elapsed} periods at omega={omega:.6g}", history[-2:])
    fit = extract_first_harmonic(t, P, omega)
    point = FrequencyResponsePoint(omega, fit.amplitude / R, wrap_phase(fit.phase),
                                   Method.SIMULATION)
    return point, fit


@dataclass
class DecayReport:
    initial_offset: float
    horizon: float
    final_envelope: float
    threshold: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.threshold = 1e-3 * abs(self.initial_offset)
        self.passed = self.final_envelope <= self.threshold


def decay_check(scenario: Scenario, initial_offset: float,
                settings: SolverSettings | None = None, horizon: float = 300.0) -> DecayReport:
    """Release the follower from a position offset with a still leader.

    Passes when the largest ``|p|`` over the final tenth of ``horizon``
    stays below a thousandth of the offset.
    """
    if scenario.leader_amplitude != 0:
        raise ValueError("decay_check needs a scenario with R = 0")
    settings = settings or scenario.solver
    dt = min(settings.dt, 0.01)
    n_steps = math.ceil(horizon / dt)
    _, _, P, *_ = _run(scenario, 1.0, 0.0, initial_offset, 0.0, 0.0, dt, n_steps)
    tail = P[int(0.9 * n_steps):]
    return DecayReport(initial_offset, n_steps * dt, float(np.max(np.abs(tail))))
