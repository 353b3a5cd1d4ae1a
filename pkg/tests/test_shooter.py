"""Nested bisections, tail grafting, and the parameter sweep."""
from __future__ import annotations

import math
from dataclasses import replace

import pytest
from numpy.testing import assert_allclose

from monopole.errors import DomainError
from monopole.integrator import (ClassifyMode, IntegratorControls, OutcomeTag,
                                 classify)
from monopole.origin_series import ShootPoint
from monopole.shooter import (Bracket, SolveReport, bisect_alpha,
                              bracket_alpha, graft_tail, shoot, sweep)
from monopole.model import ModelParams, nondimensionalize, ps_exact


CONTROLS = IntegratorControls()


def test_bracket_validation():
    with pytest.raises(DomainError):
        Bracket(lo=0.2, hi=0.1, lo_outcome=None, hi_outcome=None)
    with pytest.raises(DomainError):
        Bracket(lo=-0.1, hi=0.2, lo_outcome=None, hi_outcome=None)
    b = Bracket(lo=0.1, hi=0.4, lo_outcome=None, hi_outcome=None)
    assert b.width == pytest.approx(0.3)


def test_immediate_turn_guard():
    # fp(t0) >= 0 means the quartic term already dominates at the handoff;
    # the shot is classified from the series itself without integrating.
    traj = shoot(ShootPoint(1e-4, 100.0), 0.0, CONTROLS)
    assert traj.ended == "immediate"
    out = classify(traj, ClassifyMode.F_FATE)
    assert out.tag is OutcomeTag.FPRIME_ZERO


def test_bracket_alpha_endpoints_disagree():
    br = bracket_alpha(0.1, 0.0, CONTROLS)
    assert 0.0 < br.lo < br.hi
    assert br.lo_outcome is OutcomeTag.FPRIME_ZERO
    assert br.hi_outcome is OutcomeTag.F_ZERO


def test_bisect_alpha_resolves_separatrix():
    # at lambda_hat = 0 the rescaling t -> ct maps the closed-form profile
    # onto the whole gauge separatrix, giving alpha*(beta) = beta/2 exactly
    br = bracket_alpha(0.1, 0.0, CONTROLS)
    res = bisect_alpha(br, 0.1, 0.0, CONTROLS, tol_alpha=1e-9)
    assert res.resolved == "bisection"
    assert res.achieved_width <= 1e-9
    assert_allclose(res.alpha_star, 0.05, rtol=0, atol=2e-9)
    # stepping off the separatrix flips the two gauge fates; the offset
    # needs the longer horizon to grow past the tube
    far = replace(CONTROLS, t_max=48.0)
    lo = shoot(ShootPoint(res.alpha_star - 1e-5, 0.1), 0.0, far)
    hi = shoot(ShootPoint(res.alpha_star + 1e-5, 0.1), 0.0, far)
    assert classify(lo, ClassifyMode.F_FATE).tag is OutcomeTag.FPRIME_ZERO
    assert classify(hi, ClassifyMode.F_FATE).tag is OutcomeTag.F_ZERO


def test_bisect_alpha_horizon_floor():
    # beta far below beta*(lambda_hat): the collapsing Higgs field acts as
    # a mass term that smothers both gauge fates, so the bisection bottoms
    # out on an undecided midpoint and reports the resolution floor
    br = bracket_alpha(0.5, 1.0, CONTROLS)
    res = bisect_alpha(br, 0.5, 1.0, CONTROLS, tol_alpha=1e-9)
    assert res.resolved == "horizon"
    assert res.achieved_width > 1e-9
    assert res.trajectory.ended == "t_max"
    assert br.lo < res.alpha_star < br.hi


def test_graft_tail_continuity(lam0):
    g = lam0.profile
    assert g.t_graft <= g.base.t_end
    assert g.t_report > g.t_graft
    # the fitted far field must meet the numerical profile smoothly
    assert abs(g.mismatch_f) < 1e-6
    assert abs(g.mismatch_rho) < 1e-6
    eps = 1e-9
    below = g.state_at(g.t_graft - eps)
    above = g.state_at(g.t_graft + eps)
    assert_allclose(below.f, above.f, rtol=0, atol=1e-6)
    assert_allclose(below.rho, above.rho, rtol=0, atol=1e-6)


def test_graft_tail_models(lam0, lam1):
    # lambda_hat = 0: f ~ A t e^{-t} and a 1/t Coulomb gap in the Higgs
    g0 = lam0.profile
    t = g0.t_graft + 1.0
    s = g0.tail_state(t)
    expect_f = g0.f_fit.amplitude * t * math.exp(-g0.f_fit.rate * t)
    assert_allclose(s.f, expect_f, rtol=1e-12)
    gap = 1.0 - s.rho
    assert_allclose(gap, g0.higgs_fit.amplitude / t, rtol=1e-6)
    # doubling the radius halves the Coulomb gap
    gap2 = 1.0 - g0.tail_state(2.0 * t).rho
    assert_allclose(gap2 / gap, 0.5, rtol=1e-6)
    # lambda_hat = 1: plain exponential f and an exponential Higgs gap
    g1 = lam1.profile
    t1 = g1.t_graft + 1.0
    s1 = g1.tail_state(t1)
    expect_f1 = g1.f_fit.amplitude * math.exp(-g1.f_fit.rate * t1)
    assert_allclose(s1.f, expect_f1, rtol=1e-12)
    gap1 = 1.0 - s1.rho
    expect_gap1 = g1.higgs_fit.amplitude * math.exp(-g1.higgs_fit.rate * t1) / t1
    assert_allclose(gap1, expect_gap1, rtol=1e-9)
    # the gap decays at the fitted rate, not the Coulomb power law
    gap1b = 1.0 - g1.tail_state(t1 + 1.0).rho
    ratio = gap1b / gap1
    expect_ratio = math.exp(-g1.higgs_fit.rate) * t1 / (t1 + 1.0)
    assert_allclose(ratio, expect_ratio, rtol=1e-6)


def test_solve_report_bps(lam0):
    assert lam0.converged
    assert lam0.alpha_resolved == "bisection"
    assert abs(lam0.alpha_star_hat - 1.0 / 6.0) < 1e-6
    assert abs(lam0.beta_star_hat - 1.0 / 3.0) < 1e-6
    assert lam0.alpha_bracket.width < 1e-10
    assert lam0.beta_bracket.width < 1e-10
    # unscaled report: physical values equal the dimensionless ones
    assert lam0.alpha_star == lam0.alpha_star_hat
    assert lam0.beta_star == lam0.beta_star_hat


def test_solve_report_profile_matches_closed_form(lam0):
    g = lam0.profile
    for t in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
        exact = ps_exact(t)
        got = g.state_at(t)
        assert_allclose(got.f, exact.f, atol=5e-8)
        assert_allclose(got.rho, exact.rho, atol=5e-8)


def test_scaled_frame_mapping(lam0):
    scaled = nondimensionalize(ModelParams(lam=0.0, g0=2.0, rho0=3.0))
    rep = SolveReport(
        lambda_hat=0.0, alpha_star_hat=lam0.alpha_star_hat,
        beta_star_hat=lam0.beta_star_hat, alpha_bracket=lam0.alpha_bracket,
        beta_bracket=lam0.beta_bracket, converged=True, profile=None,
        audit=None, residual_norm=None, energy=None, outcome_log=[],
        n_beta_evaluations=0, alpha_resolved="bisection", controls=None,
        scaled=scaled)
    assert_allclose(rep.alpha_star, 36.0 * lam0.alpha_star_hat, rtol=1e-15)
    assert_allclose(rep.beta_star, 18.0 * lam0.beta_star_hat, rtol=1e-15)


def test_sweep_grid_and_order():
    alphas = [0.05, 0.3]
    betas = [0.1, 0.6]
    grid = sweep(alphas, betas, 0.0, controls=CONTROLS, workers=1)
    rows = list(grid.rows())
    assert [(a, b) for a, b, _, _ in rows] == [
        (0.05, 0.1), (0.05, 0.6), (0.3, 0.1), (0.3, 0.6)]
    tags = [tag for _, _, tag, _ in rows]
    assert tags == ["Horizon", "FPrimeZero", "FZero", "FZero"]
    # parallel execution returns the identical grid
    grid2 = sweep(alphas, betas, 0.0, controls=CONTROLS, workers=2)
    assert [r for r in grid2.rows()] == rows


def test_sweep_prefers_rho_fate_when_informative():
    # gauge channel still undecided at this short horizon; the Higgs
    # turnover is the informative outcome and must be the reported one
    short = replace(CONTROLS, t_max=3.0)
    grid = sweep([0.05], [1e-3], 1.0, controls=short, workers=1)
    (_, _, tag, t_event) = next(iter(grid.rows()))
    assert tag in ("RhoPrimeZero", "RhoZero")
    assert t_event is not None
