import dataclasses
import math

import numpy as np
import pytest

import oracles
from satfr.harmonic_balance import BalanceProblem, solve_candidates
from satfr.model import LoopConfig, SaturationLimits, Scenario, SolverSettings, derive_loop_gains
from satfr.time_domain_oracle import (Divergence, NonConvergence, decay_check,
                                      estimate_frequency_response, extract_first_harmonic,
                                      simulate, step_size)

G = derive_loop_gains(1.0, 2.0, 1.0)
W01 = 2 * math.pi * 0.1
BOTH = SaturationLimits(-5, 5, 0, 20, 10)


def test_pure_sinusoid_fit():
    w = 0.7
    t = np.linspace(0, 3 * 2 * math.pi / w, 3001)
    fit = extract_first_harmonic(t, 3 * np.sin(w * t - 0.5), w)
    assert fit.amplitude == pytest.approx(3, abs=1e-6)
    assert fit.phase == pytest.approx(-0.5, abs=1e-6)


def test_third_harmonic_residual():
    w = 1.3
    t = np.linspace(0, 2 * 2 * math.pi / w, 4001)
    fit = extract_first_harmonic(t, 3 * np.sin(w * t) + 0.3 * np.sin(3 * w * t), w)
    assert fit.amplitude == pytest.approx(3, abs=1e-6)
    assert fit.residual_fraction == pytest.approx(0.01 / 1.01, abs=1e-6)


def test_window_must_be_whole_periods():
    w = 1.0
    t = np.linspace(0, 1.5 * 2 * math.pi, 1001)
    with pytest.raises(ValueError, match="whole number"):
        extract_first_harmonic(t, np.sin(t), w)


def test_step_divides_period():
    dt, n = step_size(W01)
    assert dt <= 1e-3 and n * dt == pytest.approx(10.0, abs=1e-12)
    dt, _ = step_size(2 * math.pi * 0.5, SolverSettings(dt=0.01))
    assert dt <= 0.002


def test_linear_oracle_matches_closed_form():
    scn = Scenario(G, SaturationLimits(), 1.0, (0.1,))
    point, _ = estimate_frequency_response(scn, W01)
    mag, ph = oracles.linear_response(1, 2, -3, W01)
    assert point.magnitude == pytest.approx(mag, rel=1e-3)
    assert point.phase == pytest.approx(ph, abs=1e-3)


@pytest.mark.parametrize("f", [0.002, 0.02, 0.2, 0.5])
def test_linear_regime_across_grid(f):
    w = 2 * math.pi * f
    scn = Scenario(G, BOTH, 0.5, (f,))
    point, _ = estimate_frequency_response(scn, w)
    mag, ph = oracles.linear_response(1, 2, -3, w)
    assert point.magnitude == pytest.approx(mag, rel=1e-3)
    assert abs(math.remainder(point.phase - ph, 2 * math.pi)) < 1e-3


def test_saturated_reference_point():
    scn = Scenario(G, SaturationLimits(-5, 5), 20.0, (0.1,))
    point, fit = estimate_frequency_response(scn, W01)
    assert point.magnitude == pytest.approx(0.78, abs=0.02)
    assert fit.residual_fraction < 0.05


def test_saturation_enforced():
    scn = Scenario(G, BOTH, 30.0, (0.1,))
    tr = simulate(scn, W01, duration=100.0)
    assert tr.acceleration.min() >= -5 and tr.acceleration.max() <= 5
    assert np.abs(tr.accel_command).max() > 5
    v = tr.applied_velocity
    assert v.min() >= -10 and v.max() <= 10
    assert np.all(np.diff(tr.t) == pytest.approx(tr.dt))


def test_step_halving():
    scn = Scenario(G, BOTH, 20.0, (0.3,))
    w = 2 * math.pi * 0.3
    coarse, _ = estimate_frequency_response(scn, w)
    fine_scn = dataclasses.replace(scn, solver=SolverSettings(dt=5e-4))
    fine, _ = estimate_frequency_response(fine_scn, w)
    assert fine.magnitude == pytest.approx(coarse.magnitude, rel=1e-4)


@pytest.mark.parametrize("f", [0.3, 0.5])
def test_resubstitution_closure(f):
    # away from saturation onset the DF amplitude is reproduced by simulation
    w = 2 * math.pi * f
    lim = SaturationLimits(-5, 5)
    (cand,) = solve_candidates(BalanceProblem(LoopConfig.CONTROL_ONLY, G, lim, 20.0, w))
    tr = simulate(Scenario(G, lim, 20.0, (f,)), w, duration=60 * 2 * math.pi / w)
    fit = extract_first_harmonic(tr.t, tr.accel_command, w, periods=5)
    assert fit.amplitude == pytest.approx(cand.B, rel=0.01)


def test_nonconvergence_reports_fits():
    scn = Scenario(G, BOTH, 20.0, (0.1,),
                   SolverSettings(settle_periods=1, measure_periods=2, max_periods=3))
    with pytest.raises(NonConvergence) as exc:
        estimate_frequency_response(scn, W01)
    assert len(exc.value.fits) == 2


def test_divergence_detected():
    # leader amplitude beyond float range overflows on the first step
    scn = Scenario(G, SaturationLimits(), 1e308, (0.1,))
    with pytest.raises(Divergence) as exc:
        simulate(scn, W01, duration=1.0)
    assert exc.value.step >= 1


@pytest.mark.parametrize("offset", [0.1, 1.0, 10.0])
def test_decay(offset):
    scn = Scenario(derive_loop_gains(1, 0.4, 0.4), SaturationLimits(-1, 1, 0, 20, 10), 0.0)
    rep = decay_check(scn, offset)
    assert rep.passed and rep.threshold == pytest.approx(1e-3 * offset)


def test_decay_zero_offset_is_trivial():
    rep = decay_check(Scenario(G, BOTH, 0.0), 0.0)
    assert rep.final_envelope == 0.0


def test_decay_needs_still_leader():
    with pytest.raises(ValueError):
        decay_check(Scenario(G, BOTH, 1.0), 1.0)


def test_trajectory_csv(tmp_path):
    tr = simulate(Scenario(G, BOTH, 1.0, (0.1,)), W01, duration=0.01)
    tr.to_csv(tmp_path / "traj.csv")
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "t,leader,follower,velocity,acceleration"
    assert len(lines) == tr.t.size + 1
