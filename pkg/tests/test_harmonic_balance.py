import math

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from satfr.describing_functions import df_saturation
from satfr.harmonic_balance import (BalanceProblem, Method, NoRootFound, UndefinedResponse,
                                    balance_residual, check_no_limit_cycle,
                                    effective_gain, frequency_response, limits_reached,
                                    linear_frequency_response, solve_candidates,
                                    wrap_phase)
from satfr.model import LoopConfig, SaturationLimits, SolverSettings, derive_loop_gains

G = derive_loop_gains(1.0, 2.0, 1.0)
W01 = 2 * math.pi * 0.1
ACCEL = SaturationLimits(-5, 5)
BOTH = SaturationLimits(-5, 5, 0, 20, 10)


def problem(loop, limits, R, w=W01, gains=G):
    return BalanceProblem(loop, gains, limits, R, w)


def test_effective_gain():
    assert effective_gain(3.0, problem(LoopConfig.LINEAR, SaturationLimits(), 1)) == 1
    assert effective_gain(10, problem(LoopConfig.CONTROL_ONLY, ACCEL, 1)) == pytest.approx(
        0.608998, abs=1e-6)
    # speed input 10*0.609/0.628 < 10 stays unsaturated
    assert effective_gain(10, problem(LoopConfig.BOTH, BOTH, 1)) == pytest.approx(
        0.608998, abs=1e-6)


def test_linear_closed_form():
    p = linear_frequency_response(G, W01)
    assert p.method is Method.LINEAR
    assert p.magnitude == pytest.approx(0.811205, abs=1e-6)
    assert p.phase == pytest.approx(-0.361480, abs=1e-6)
    mag, ph = oracles.linear_response(1, 2, -3, W01)
    assert (p.magnitude, p.phase) == pytest.approx((mag, ph), abs=1e-14)


def test_truck_crossing():
    g = derive_loop_gains(1, 0.4, 0.4)
    w = math.sqrt(2 * g.k1 + g.k2 ** 2 - g.k3 ** 2)
    assert linear_frequency_response(g, w).magnitude == pytest.approx(1.0, abs=1e-12)
    assert w / (2 * math.pi) == pytest.approx(0.196, abs=1e-3)
    assert linear_frequency_response(g, 0.5 * w).magnitude > 1


def test_residual_sign_change_near_27():
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 20)
    root = oracles.bisect(lambda b: balance_residual(b, p)[0], 20, 40)
    assert root == pytest.approx(27.0, abs=0.2)
    (cand,) = solve_candidates(p)
    assert cand.B == pytest.approx(root, rel=1e-9)


def test_saturated_response():
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 20)
    (cand,) = solve_candidates(p)
    fr = frequency_response(cand, p)
    assert fr.magnitude == pytest.approx(0.80, abs=0.01)
    assert fr.phase == pytest.approx(-1.02, abs=0.01)
    assert limits_reached(cand, p)


def test_linear_regime_degenerates():
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 0.5)
    (cand,) = solve_candidates(p)
    assert not limits_reached(cand, p)
    fr, lin = frequency_response(cand, p), linear_frequency_response(G, W01)
    assert fr.magnitude == pytest.approx(lin.magnitude, rel=1e-9)
    assert fr.phase == pytest.approx(lin.phase, abs=1e-9)


def test_linear_root_is_closed_form():
    p = problem(LoopConfig.LINEAR, SaturationLimits(), 1.0)
    (cand,) = solve_candidates(p)
    assert cand.B == pytest.approx(0.3204, abs=1e-3)
    assert frequency_response(cand, p).magnitude == pytest.approx(0.811205, abs=1e-6)


def test_zero_amplitude():
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 0.0)
    assert solve_candidates(p) == []
    assert balance_residual(3.0, p)[0] > 0


def test_undefined_response_at_R0():
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 20)
    (cand,) = solve_candidates(p)
    with pytest.raises(UndefinedResponse):
        frequency_response(cand, problem(LoopConfig.CONTROL_ONLY, ACCEL, 0.0))


def test_small_ceiling_is_extended():
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 20)
    (small,) = solve_candidates(p, SolverSettings(b_ini_max=1.0))
    (default,) = solve_candidates(p)
    assert small.B == pytest.approx(default.B, rel=1e-9)


def test_no_root_error_carries_endpoints():
    exc = NoRootFound("none", g_low=-1.0, g_high=-0.5, b_max=10.0)
    assert (exc.g_low, exc.g_high, exc.b_max) == (-1.0, -0.5, 10.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 1), st.floats(0.002, 0.5))
def test_scaling_in_linear_regime(R, f):
    w = 2 * math.pi * f
    p1 = problem(LoopConfig.BOTH, BOTH, R, w)
    p2 = problem(LoopConfig.BOTH, BOTH, 2 * R, w)
    (c1,), (c2,) = solve_candidates(p1), solve_candidates(p2)
    if limits_reached(c2, p2):
        return
    assert c2.B == pytest.approx(2 * c1.B, rel=1e-8)
    f1, f2 = frequency_response(c1, p1), frequency_response(c2, p2)
    assert f1.magnitude == pytest.approx(f2.magnitude, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([LoopConfig.CONTROL_ONLY, LoopConfig.STATE_ONLY, LoopConfig.BOTH]),
       st.floats(0.5, 60), st.floats(0.005, 0.5))
def test_roots_verify(loop, R, f):
    p = problem(loop, BOTH, R, 2 * math.pi * f)
    for c in solve_candidates(p):
        scale = R * abs(p.forcing)
        assert abs(balance_residual(c.B, p)[0]) <= 1e-8 * scale
        assert c.phi == pytest.approx(balance_residual(c.B, p)[1])


def test_phase_matches_case_formula_branch():
    # heavily saturated: 1 - k1 N / w^2 < 0 is the "+pi" branch
    p = problem(LoopConfig.CONTROL_ONLY, ACCEL, 20, w=0.3)
    B = 8.0
    N = df_saturation(B, -5, 5).value
    assert 1 - N / 0.09 < 0
    g, phi = balance_residual(B, p)
    g_o, phi_o = oracles.case_formula_balance(B, N, 1, 2, -3, 0.3, 20)
    assert g == pytest.approx(g_o, abs=1e-12)
    assert wrap_phase(phi - phi_o) == pytest.approx(0, abs=1e-12)


def test_wrap_phase():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


@pytest.mark.parametrize("gains,limits", [(G, ACCEL),
                                          (derive_loop_gains(1, 0.4, 0.4),
                                           SaturationLimits(v_min=-10, v_max=10))])
def test_no_limit_cycle(gains, limits):
    omegas = [2 * math.pi * f for f in (0.002, 0.05, 0.1, 0.5)]
    rep = check_no_limit_cycle(gains, limits, omegas, b_max=100.0)
    assert rep.no_limit_cycle and rep.roots == [] and rep.min_g_over_B > 0
