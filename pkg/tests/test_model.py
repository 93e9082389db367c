import math

import pytest
from hypothesis import given, strategies as st

from satfr.model import (LoopConfig, SaturationLimits, Scenario, SolverSettings,
                         ValidationError, classify_loop, default_frequency_grid,
                         derive_loop_gains, derive_oscillatory_limits)

pos = st.floats(0.01, 100, allow_nan=False)


def test_default_gains():
    g = derive_loop_gains(1.0, 2.0, 1.0)
    assert (g.k1, g.k2, g.k3) == (1.0, 2.0, -3.0)


def test_truck_gains():
    g = derive_loop_gains(1.0, 0.4, 0.4)
    assert (g.k1, g.k2) == (1.0, 0.4)
    assert g.k3 == pytest.approx(-0.8, abs=1e-15)


@pytest.mark.parametrize("k_d,k_v,tau,field", [(0, 1, 1, "k_d"), (1, -1, 1, "k_v"),
                                               (1, 1, -0.1, "tau")])
def test_gain_validation(k_d, k_v, tau, field):
    with pytest.raises(ValidationError) as exc:
        derive_loop_gains(k_d, k_v, tau)
    assert exc.value.field == field


@given(pos, pos, st.floats(0, 10))
def test_gain_round_trip(k_d, k_v, tau):
    g = derive_loop_gains(k_d, k_v, tau)
    assert (g.k1, g.k2) == (k_d, k_v)
    assert (-g.k3 - g.k2) / g.k1 == pytest.approx(tau, abs=1e-9 * (1 + tau))
    assert g.k3 < 0


def test_oscillatory_limits():
    assert derive_oscillatory_limits(0.0, 20.0, 10.0) == (-10.0, 10.0)
    with pytest.raises(ValidationError):
        derive_oscillatory_limits(0.0, 20.0, 25.0)


@given(st.floats(-50, 50), st.floats(0.1, 50), st.floats(0.1, 50), st.floats(-100, 100))
def test_limit_shift(v_e, below, above, shift):
    a = SaturationLimits(v_min=v_e - below, v_max=v_e + above, v_e=v_e)
    b = SaturationLimits(v_min=v_e - below + shift, v_max=v_e + above + shift, v_e=v_e + shift)
    assert a.vt_min == pytest.approx(b.vt_min, abs=1e-9)
    assert a.vt_max == pytest.approx(b.vt_max, abs=1e-9)


def test_limits_defaults_and_flags():
    lim = SaturationLimits(-5, 5, 0, 20, 10)
    assert lim.speed_bounds == (-10, 10) and lim.a_bound == 5 and lim.vt_bound == 10
    assert classify_loop(lim) is LoopConfig.BOTH
    assert classify_loop(SaturationLimits(-1, 1)) is LoopConfig.CONTROL_ONLY
    assert classify_loop(SaturationLimits(v_min=-1, v_max=1)) is LoopConfig.STATE_ONLY
    assert classify_loop(SaturationLimits()) is LoopConfig.LINEAR


@pytest.mark.parametrize("kwargs", [dict(a_min=1), dict(a_max=0), dict(v_min=5, v_max=5),
                                    dict(v_min=0, v_max=20, v_e=0),
                                    dict(a_min=math.nan)])
def test_limit_validation(kwargs):
    with pytest.raises(ValidationError):
        SaturationLimits(**kwargs)


def test_asymmetry_warning():
    assert SaturationLimits(-5, 5, 0, 20, 10).asymmetry_warnings() == []
    warns = SaturationLimits(-3, 5, 0, 20, 5).asymmetry_warnings()
    assert len(warns) == 2


def test_frequency_grid():
    grid = default_frequency_grid()
    assert len(grid) == 50 and grid[0] == 0.002 and grid[-1] == 0.5
    assert all(b > a for a, b in zip(grid, grid[1:]))
    lin = default_frequency_grid(0.1, 0.5, 5, "linear")
    assert lin == pytest.approx((0.1, 0.2, 0.3, 0.4, 0.5))


def test_scenario_validation():
    g = derive_loop_gains(1, 2, 1)
    lim = SaturationLimits(-5, 5)
    with pytest.raises(ValidationError, match="leader_amplitude"):
        Scenario(g, lim, -1.0)
    with pytest.raises(ValidationError, match="increasing"):
        Scenario(g, lim, 1.0, (0.2, 0.1))
    with pytest.raises(ValidationError, match="floor"):
        Scenario(g, lim, 1.0, (0.001, 0.1))
    s = Scenario(g, lim, 1.0, (0.1,))
    assert s.omegas == pytest.approx((2 * math.pi * 0.1,))
    assert s.with_amplitude(2.0).leader_amplitude == 2.0


@pytest.mark.parametrize("kwargs", [dict(sweep_points=10), dict(theta_samples=64),
                                    dict(dt=0), dict(max_periods=5)])
def test_solver_validation(kwargs):
    with pytest.raises(ValidationError):
        SolverSettings(**kwargs)
