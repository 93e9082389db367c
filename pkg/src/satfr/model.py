"""Domain types for the saturated car-following loop.

Everything here lives in the oscillatory coordinate system: positions and
speeds are deviations from a nominal trajectory that travels at the
equilibrium speed ``v_e``.  Inactive saturations are stored as infinite
bounds so the describing-function code never needs a separate branch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

__all__ = [
    "ValidationError", "ControllerGains", "SaturationLimits", "SolverSettings",
    "Scenario", "LoopConfig", "derive_loop_gains", "derive_oscillatory_limits",
    "classify_loop", "default_frequency_grid", "FREQ_FLOOR_HZ", "FREQ_CEIL_HZ",
]

FREQ_FLOOR_HZ = 0.002
FREQ_CEIL_HZ = 0.5

# symmetric-limit tolerance used for the asymmetry warning
_ASYM_RTOL = 1e-9


class ValidationError(ValueError):
    """Raised when a scenario or one of its parts breaks an invariant.

    ``field`` names the offending input so callers can report it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class LoopConfig(enum.Enum):
    CONTROL_ONLY = "control_only"
    STATE_ONLY = "state_only"
    BOTH = "both"
    LINEAR = "linear"


@dataclass(frozen=True)
class ControllerGains:
    """Feedback gains of ``a = k_d*dd + k_v*dv`` and their loop-form image.

    ``k1``, ``k2``, ``k3`` are the coefficients of
    ``a = k1*(p_n - p_{n+1}) + k2*dp_n + k3*dp_{n+1}`` in oscillatory
    coordinates.  Use :func:`derive_loop_gains` rather than filling them in
    by hand.
    """

    k_d: float
    k_v: float
    tau: float
    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        for name in ("k_d", "k_v", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(name, "must be finite")
        if self.k_d <= 0:
            raise ValidationError("k_d", f"must be > 0, got {self.k_d}")
        if self.k_v <= 0:
            raise ValidationError("k_v", f"must be > 0, got {self.k_v}")
        if self.tau < 0:
            raise ValidationError("tau", f"must be >= 0, got {self.tau}")
        expected = (self.k_d, self.k_v, -self.k_v - self.k_d * self.tau)
        if (self.k1, self.k2, self.k3) != expected:
            raise ValidationError(
                "k1,k2,k3", "inconsistent with (k_d, k_v, tau); "
                "use derive_loop_gains")


def derive_loop_gains(k_d: float, k_v: float, tau: float) -> ControllerGains:
    """Map ``(k_d, k_v, tau)`` onto the oscillatory loop gains.

    >>> g = derive_loop_gains(1.0, 2.0, 1.0)
    >>> (g.k1, g.k2, g.k3)
    (1.0, 2.0, -3.0)
    """
    k_d, k_v, tau = float(k_d), float(k_v), float(tau)
    return ControllerGains(k_d, k_v, tau, k_d, k_v, -k_v - k_d * tau)


def derive_oscillatory_limits(v_min: float, v_max: float, v_e: float):
    """Shift absolute speed limits into oscillatory coordinates."""
    if not v_min <= v_e <= v_max:
        raise ValidationError(
            "v_e", f"equilibrium speed {v_e} outside [{v_min}, {v_max}]")
    return v_min - v_e, v_max - v_e


@dataclass(frozen=True)
class SaturationLimits:
    """Acceleration and speed bounds.

    Omitted bounds default to +-inf, which switches that saturation off.
    The oscillatory speed bounds ``vt_min``/``vt_max`` and the activity
    flags are derived, not passed in.
    """

    a_min: float = -math.inf
    a_max: float = math.inf
    v_min: float = -math.inf
    v_max: float = math.inf
    v_e: float = 0.0
    vt_min: float = field(init=False)
    vt_max: float = field(init=False)
    accel_active: bool = field(init=False)
    speed_active: bool = field(init=False)

    def __post_init__(self):
        if math.isnan(self.a_min) or math.isnan(self.a_max):
            raise ValidationError("a_min/a_max", "NaN bound")
        if not self.a_min < 0:
            raise ValidationError("a_min", f"must be < 0, got {self.a_min}")
        if not self.a_max > 0:
            raise ValidationError("a_max", f"must be > 0, got {self.a_max}")
        if not math.isfinite(self.v_e):
            raise ValidationError("v_e", "must be finite")
        if not self.v_min < self.v_max:
            raise ValidationError(
                "v_min/v_max", f"need v_min < v_max, got [{self.v_min}, {self.v_max}]")
        vt_min, vt_max = derive_oscillatory_limits(self.v_min, self.v_max, self.v_e)
        if vt_min == 0 or vt_max == 0:
            # a zero oscillatory bound pins the speed to one side of v_e;
            # the describing function needs lo < 0 < hi
            raise ValidationError(
                "v_e", "equilibrium speed must lie strictly inside the speed limits")
        object.__setattr__(self, "vt_min", vt_min)
        object.__setattr__(self, "vt_max", vt_max)
        object.__setattr__(self, "accel_active",
                           math.isfinite(self.a_min) or math.isfinite(self.a_max))
        object.__setattr__(self, "speed_active",
                           math.isfinite(vt_min) or math.isfinite(vt_max))

    @property
    def accel_bounds(self):
        return self.a_min, self.a_max

    @property
    def speed_bounds(self):
        return self.vt_min, self.vt_max

    @property
    def a_bound(self) -> float:
        """Smallest finite acceleration bound magnitude (inf if inactive)."""
        return min(-self.a_min, self.a_max)

    @property
    def vt_bound(self) -> float:
        return min(-self.vt_min, self.vt_max)

    def asymmetry_warnings(self) -> list[str]:
        out = []
        if self.accel_active and not math.isclose(
                -self.a_min, self.a_max, rel_tol=_ASYM_RTOL):
            out.append(
                f"asymmetric acceleration limits [{self.a_min}, {self.a_max}]: "
                "describing-function accuracy degrades with asymmetry")
        if self.speed_active and not math.isclose(
                -self.vt_min, self.vt_max, rel_tol=_ASYM_RTOL):
            out.append(
                f"asymmetric oscillatory speed limits [{self.vt_min}, {self.vt_max}]: "
                "describing-function accuracy degrades with asymmetry")
        return out


def classify_loop(limits: SaturationLimits) -> LoopConfig:
    if limits.accel_active and limits.speed_active:
        return LoopConfig.BOTH
    if limits.accel_active:
        return LoopConfig.CONTROL_ONLY
    if limits.speed_active:
        return LoopConfig.STATE_ONLY
    return LoopConfig.LINEAR


@dataclass(frozen=True)
class SolverSettings:
    """Numerical knobs shared by the analytic and simulation paths.

    ``b_ini_max=None`` lets the balance solver pick its own sweep ceiling.
    ``max_periods`` caps how long the simulator may run while waiting for
    steady state.
    """

    b_ini_max: float | None = None
    sweep_points: int = 200
    root_tol: float = 1e-10
    theta_samples: int = 720
    dt: float = 1e-3
    settle_periods: int = 15
    measure_periods: int = 5
    max_periods: int = 200
    freq_floor_hz: float = FREQ_FLOOR_HZ

    def __post_init__(self):
        if self.b_ini_max is not None and not self.b_ini_max > 0:
            raise ValidationError("b_ini_max", "must be > 0")
        if self.sweep_points < 50:
            raise ValidationError("sweep_points", "must be >= 50")
        if not self.root_tol > 0:
            raise ValidationError("root_tol", "must be > 0")
        if self.theta_samples < 128:
            raise ValidationError("theta_samples", "must be >= 128")
        if not self.dt > 0:
            raise ValidationError("dt", "must be > 0")
        for name in ("settle_periods", "measure_periods", "max_periods"):
            if getattr(self, name) < 1:
                raise ValidationError(name, "must be >= 1")
        if self.max_periods < self.settle_periods + self.measure_periods:
            raise ValidationError(
                "max_periods", "must cover settle_periods + measure_periods")
        if not self.freq_floor_hz > 0:
            raise ValidationError("freq_floor_hz", "must be > 0")


def default_frequency_grid(fmin=FREQ_FLOOR_HZ, fmax=FREQ_CEIL_HZ, points=50,
                           spacing="log") -> tuple[float, ...]:
    if points < 1:
        raise ValidationError("fpoints", "must be >= 1")
    if not 0 < fmin <= fmax:
        raise ValidationError("fmin/fmax", f"need 0 < fmin <= fmax, got {fmin}, {fmax}")
    if points == 1:
        return (float(fmin),)
    if spacing == "log":
        step = (math.log(fmax) - math.log(fmin)) / (points - 1)
        grid = [math.exp(math.log(fmin) + i * step) for i in range(points)]
    elif spacing == "linear":
        step = (fmax - fmin) / (points - 1)
        grid = [fmin + i * step for i in range(points)]
    else:
        raise ValidationError("spacing", f"unknown spacing {spacing!r}")
    grid[0], grid[-1] = float(fmin), float(fmax)
    return tuple(grid)


@dataclass(frozen=True)
class Scenario:
    """Unit of analysis: one follower, one leader amplitude, one grid.

    ``standstill_distance`` is carried for bookkeeping only; it cancels in
    oscillatory coordinates.
    """

    gains: ControllerGains
    limits: SaturationLimits
    leader_amplitude: float
    freq_grid: tuple[float, ...] = field(default_factory=default_frequency_grid)
    solver: SolverSettings = field(default_factory=SolverSettings)
    standstill_distance: float = 0.0

    def __post_init__(self):
        R = self.leader_amplitude
        if not (math.isfinite(R) and R >= 0):
            raise ValidationError("leader_amplitude", f"must be finite and >= 0, got {R}")
        grid = tuple(float(f) for f in self.freq_grid)
        object.__setattr__(self, "freq_grid", grid)
        if not grid:
            raise ValidationError("freq_grid", "empty")
        if any(not math.isfinite(f) or f <= 0 for f in grid):
            raise ValidationError("freq_grid", "all frequencies must be finite and > 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("freq_grid", "must be strictly increasing")
        if grid[0] < self.solver.freq_floor_hz * (1 - 1e-12):
            raise ValidationError(
                "freq_grid", f"lowest frequency {grid[0]} Hz below floor "
                f"{self.solver.freq_floor_hz} Hz")

    @property
    def loop(self) -> LoopConfig:
        return classify_loop(self.limits)

    @property
    def omegas(self) -> tuple[float, ...]:
        return tuple(2 * math.pi * f for f in self.freq_grid)

    def warnings(self) -> list[str]:
        return self.limits.asymmetry_warnings()

    def with_amplitude(self, R: float) -> "Scenario":
        return Scenario(self.gains, self.limits, R, self.freq_grid,
                        self.solver, self.standstill_distance)

    def with_grid(self, freq_grid) -> "Scenario":
        return Scenario(self.gains, self.limits, self.leader_amplitude,
                        tuple(freq_grid), self.solver, self.standstill_distance)
