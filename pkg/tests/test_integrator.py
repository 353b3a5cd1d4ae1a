"""Adaptive integrator, event location, and trajectory classification."""
from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from monopole.errors import DomainError, NoEventError
from monopole.integrator import (ClassifyMode, IntegratorControls, OutcomeTag,
                                 classify, in_tube, integrate, refine_event)
from monopole.model import PhaseState, ps_exact
from monopole.origin_series import ShootPoint, initial_state

import oracles


def _start(alpha, beta, lam, t0=1e-3):
    return initial_state(ShootPoint(alpha, beta), lam, t0)


def test_controls_validation():
    with pytest.raises(DomainError):
        IntegratorControls(rel_tol=0.0)
    with pytest.raises(DomainError):
        IntegratorControls(t_max=-1.0)
    with pytest.raises(DomainError):
        IntegratorControls(event_tol=0.0)


def test_bps_trajectory_tracks_closed_form():
    traj = integrate(_start(1 / 6, 1 / 3, 0.0), 0.0, IntegratorControls())
    assert traj.ended == "t_max"
    # the start rides the separatrix, so step noise grows like e^t; the
    # bounds track that growth rather than pretending it away
    for t, tol in ((0.5, 1e-9), (1.0, 1e-9), (2.0, 2e-9), (5.0, 5e-8), (10.0, 5e-6)):
        got = traj.state_at(t)
        exact = ps_exact(t)
        assert_allclose(got.f, exact.f, atol=tol)
        assert_allclose(got.rho, exact.rho, atol=tol)
    out = classify(traj, ClassifyMode.F_FATE)
    assert out.tag is OutcomeTag.CONVERGED
    out_rho = classify(traj, ClassifyMode.RHO_FATE)
    assert out_rho.tag is OutcomeTag.CONVERGED


def test_against_scipy_reference():
    # Same start, independent integrator and independent rhs transcription.
    # The window stops short of the FZero event near t = 2.17.
    start = _start(0.3, 0.1, 0.0)
    traj = integrate(start, 0.0, IntegratorControls(t_max=2.0))
    assert traj.ended == "t_max"
    sol = solve_ivp(lambda t, y: oracles.deriv(t, y, 0.0),
                    (start.t, 2.0), list(start.as_tuple()),
                    method="RK45", rtol=1e-12, atol=1e-14, dense_output=True)
    assert sol.success
    for t in (0.5, 1.2, 2.0 - 1e-9):
        mine = traj.state_at(t)
        ref = sol.sol(t)
        assert_allclose(mine.f, ref[0], rtol=1e-8, atol=1e-10)
        assert_allclose(mine.fp, ref[1], rtol=1e-8, atol=1e-10)
        assert_allclose(mine.rho, ref[2], rtol=1e-8, atol=1e-10)
        assert_allclose(mine.rhop, ref[3], rtol=1e-8, atol=1e-10)


def test_fzero_event_against_rk4_oracle():
    # Overcritical alpha: f crosses zero; radii agree with the fixed-step oracle.
    traj = integrate(_start(0.3, 0.1, 0.0), 0.0, IntegratorControls())
    out = classify(traj, ClassifyMode.F_FATE)
    assert out.tag is OutcomeTag.F_ZERO
    ref = oracles.rk4_shoot(0.3, 0.1, 0.0)
    assert ref["f_event"][0] == "FZero"
    assert abs(out.t_event - ref["f_event"][1]) < 1e-3


def test_fprime_zero_event_against_rk4_oracle():
    traj = integrate(_start(0.05, 0.6, 0.0), 0.0, IntegratorControls())
    out = classify(traj, ClassifyMode.F_FATE)
    assert out.tag is OutcomeTag.FPRIME_ZERO
    ref = oracles.rk4_shoot(0.05, 0.6, 0.0)
    assert ref["f_event"][0] == "FPrimeZero"
    assert abs(out.t_event - ref["f_event"][1]) < 1e-3


def test_rho_cross_vev_recorded_before_gauge_event():
    # Mid-field start with the Higgs racing upward: rho crosses its vacuum
    # value first, and the crossing stays recorded even though the gauge
    # turn later terminates the trajectory.
    start = PhaseState(t=1.0, f=0.5, fp=-0.3, rho=0.8, rhop=1.5)
    traj = integrate(start, 1.0, IntegratorControls())
    out = classify(traj, ClassifyMode.RHO_FATE)
    assert out.tag is OutcomeTag.RHO_CROSS_VEV
    assert_allclose(traj.state_at(out.t_event).rho, 1.0, atol=1e-8)
    assert classify(traj, ClassifyMode.F_FATE).tag is OutcomeTag.FPRIME_ZERO


def test_higgs_blowup_channel():
    # Far above the vacuum the quartic term is explosive; both fates must
    # report the blowup with the Higgs channel named.
    start = PhaseState(t=1.0, f=0.3, fp=-0.2, rho=1.4, rhop=8.0)
    traj = integrate(start, 1.0, IntegratorControls())
    assert traj.ended == "blowup"
    for mode in (ClassifyMode.F_FATE, ClassifyMode.RHO_FATE):
        out = classify(traj, mode)
        assert out.tag is OutcomeTag.BLOWUP
        assert out.detail == "rho"


def test_rho_prime_zero_event():
    # tiny beta: rho turns over before reaching the vacuum value
    traj = integrate(_start(0.05, 1e-3, 1.0), 1.0, IntegratorControls())
    out = classify(traj, ClassifyMode.RHO_FATE)
    assert out.tag in (OutcomeTag.RHO_PRIME_ZERO, OutcomeTag.RHO_ZERO)
    ref = oracles.rk4_shoot(0.05, 1e-3, 1.0, h=1e-4, t_end=3.0)
    assert ref["rho_event"] is not None
    assert abs(out.t_event - ref["rho_event"][1]) < 1e-3


def test_subcritical_pair_reaches_horizon():
    traj = integrate(_start(0.05, 0.1, 0.0), 0.0, IntegratorControls())
    out = classify(traj, ClassifyMode.F_FATE)
    assert out.tag is OutcomeTag.HORIZON
    assert traj.t_end == pytest.approx(12.0)


def test_max_step_is_honored():
    c = IntegratorControls(t_max=4.0, max_step=0.05)
    traj = integrate(_start(1 / 6, 1 / 3, 0.0), 0.0, c)
    gaps = np.diff(traj.ts)
    assert gaps.max() <= 0.05 + 1e-12


def test_resample_matches_state_at():
    traj = integrate(_start(1 / 6, 1 / 3, 0.0), 0.0, IntegratorControls(t_max=5.0))
    ts = np.linspace(0.01, 4.9, 37)
    table = np.asarray(traj.resample(ts))
    for i in (0, 17, 36):
        s = traj.state_at(ts[i])
        assert_allclose(table[i], (s.f, s.fp, s.rho, s.rhop), rtol=1e-13, atol=1e-15)


def test_state_at_outside_range():
    traj = integrate(_start(1 / 6, 1 / 3, 0.0), 0.0, IntegratorControls(t_max=5.0))
    with pytest.raises(DomainError):
        traj.state_at(11.0)
    with pytest.raises(DomainError):
        traj.state_at(1e-6)


def test_refine_event_synthetic_root():
    # Interpolant with f = cos t: the predicate f has a root at pi/2.
    def interp(t):
        return PhaseState(t=t, f=math.cos(t), fp=-math.sin(t), rho=0.5, rhop=0.0)

    t_event, state = refine_event(interp, 1.0, 2.0, lambda s: s.f, event_tol=1e-12)
    assert abs(t_event - math.pi / 2) < 1e-10
    assert abs(state.f) < 1e-10
    with pytest.raises(NoEventError):
        refine_event(interp, 0.2, 1.0, lambda s: s.f)


def test_in_tube_uses_extrapolated_asymptote():
    c = IntegratorControls()
    # pointwise rho gap of 1/t is fine as long as rho + t rho' is near 1
    t = 10.0
    near = PhaseState(t=t, f=1e-4, fp=-1e-4, rho=0.95, rhop=0.005)
    assert in_tube(near, c)
    # descending Higgs is never converging
    falling = PhaseState(t=t, f=1e-4, fp=-1e-4, rho=0.95, rhop=-1e-4)
    assert not in_tube(falling, c)
    # asymptote short of the vacuum value
    low = PhaseState(t=t, f=1e-4, fp=-1e-4, rho=0.9, rhop=0.005)
    assert not in_tube(low, c)
    # live gauge field
    bad_f = PhaseState(t=t, f=0.5, fp=0.0, rho=0.95, rhop=0.005)
    assert not in_tube(bad_f, c)


def test_equilibrium_start_is_held_bitwise():
    traj = integrate(_start(0.0, 0.0, 1.0), 1.0, IntegratorControls())
    assert traj.ended == "t_max"
    assert all(tuple(y) == (1.0, 0.0, 0.0, 0.0) for y in traj.ys)


def test_bps_deviation_budget_at_default_tolerance():
    # rel_tol 1e-10 noise seeded early grows like e^t along the
    # separatrix, so ~1e-10 e^10 sets the attainable budget at t = 10
    traj = integrate(_start(1 / 6, 1 / 3, 0.0), 0.0,
                     IntegratorControls(t_max=10.0))
    dev = 0.0
    for t in np.linspace(1e-3, 10.0, 4000):
        s = traj.state_at(t)
        e = ps_exact(t)
        dev = max(dev, abs(s.f - e.f), abs(s.rho - e.rho))
    assert dev < 1e-6


def test_tolerance_consistency_modulo_separatrix_growth():
    # runs at rel_tol 1e-8 and 1e-10 agree within 10x the looser
    # tolerance once the system's own e^t deviation growth is divided
    # out; the raw gap at t = 10 is that bound times e^t and no
    # integrator can do better on this problem
    start = _start(1 / 6, 1 / 3, 0.0)
    tight = integrate(start, 0.0, IntegratorControls(t_max=10.0))
    loose = integrate(start, 0.0, IntegratorControls(
        t_max=10.0, rel_tol=1e-8, abs_tol=1e-10))
    worst = 0.0
    for t in np.linspace(1e-3, 10.0, 4000):
        a, b = tight.state_at(t), loose.state_at(t)
        gap = max(abs(a.f - b.f), abs(a.rho - b.rho))
        worst = max(worst, gap * math.exp(-t))
    assert worst < 10.0 * 1e-8


def test_refine_event_locates_higgs_half_crossing():
    # independent root of coth t - 1/t = 1/2
    lo, hi = 1.0, 3.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 1.0 / math.tanh(mid) - 1.0 / mid > 0.5:
            hi = mid
        else:
            lo = mid
    reference = 0.5 * (lo + hi)
    traj = integrate(_start(1 / 6, 1 / 3, 0.0), 0.0, IntegratorControls())
    t_event, state = refine_event(traj.state_at, 1.5, 2.0,
                                  lambda s: s.rho - 0.5, event_tol=1e-12)
    # budget: the trajectory's own ~4e-10 field error over the ~0.31
    # local slope, on top of the refinement tolerance
    assert abs(t_event - reference) < 5e-9
    assert abs(state.rho - 0.5) < 1e-10
