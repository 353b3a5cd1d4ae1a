"""Far-field fits, audits, residuals, mass, and the fluctuation probe."""
from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

import oracles
from monopole import analysis
from monopole.errors import (AuditDomainError, DomainError, FitDomainError,
                             SturmDomainError)
from monopole.integrator import IntegratorControls, integrate
from monopole.model import PhaseState, energy_density, ps_exact


def _vacuum_trajectory(lambda_hat=1.0):
    # f = 0, rho = 1 solves both equations exactly, so the integrator
    # holds it constant: a trajectory with an identically zero component
    start = PhaseState(t=1.0, f=0.0, fp=0.0, rho=1.0, rhop=0.0)
    return integrate(start, lambda_hat, IntegratorControls())


# ---------------------------------------------------------------- fit_decay

def test_fit_decay_gauge_rate_massless(lam0):
    fit = analysis.fit_decay(lam0.profile.base, (6.0, 10.0), "f")
    assert fit.prefactor == "t"
    assert abs(fit.rate - 1.0) < 0.02
    assert fit.window == (6.0, 10.0)
    assert fit.n_samples == 201


def test_fit_decay_higgs_rate_massive(lam1):
    tg = lam1.profile.t_graft
    fit = analysis.fit_decay(lam1.profile, (tg - 2.0, tg), "one_minus_rho")
    assert fit.prefactor == "1/t"
    assert abs(fit.rate - math.sqrt(2.0)) < 0.07
    ffit = analysis.fit_decay(lam1.profile, (tg - 2.0, tg), "f")
    assert ffit.prefactor == "1"
    assert abs(ffit.rate - 1.0) < 0.05


def test_fit_decay_rejects_zero_component():
    traj = _vacuum_trajectory()
    with pytest.raises(FitDomainError):
        analysis.fit_decay(traj, (2.0, 10.0), "f")


def test_fit_decay_domain_errors(lam0):
    traj = lam0.profile.base
    with pytest.raises(FitDomainError):
        analysis.fit_decay(traj, (6.0, 99.0), "f")  # beyond the samples
    with pytest.raises(FitDomainError):
        analysis.fit_decay(traj, (8.0, 6.0), "f")  # inverted window
    with pytest.raises(FitDomainError):
        analysis.fit_decay(traj, (6.0, 10.0), "f", n_samples=5)
    with pytest.raises(DomainError):
        analysis.fit_decay(traj, (6.0, 10.0), "rho")  # unknown component


def test_stable_fit_horizon(lam0, lam1):
    assert analysis.stable_fit_horizon(lam0.profile.base) == 12.0
    assert analysis.stable_fit_horizon(lam1.profile.base) == 8.5


# ---------------------------------------------------- monotonicity_audit

def test_audit_margins_match_closed_form(lam0):
    aud = analysis.monotonicity_audit(lam0.profile)
    assert aud.passes
    assert aud.f_in_01 and aud.fp_negative and aud.rho_in_01 and aud.rhop_positive
    assert aud.window == (1e-3, 12.0)
    m = aud.worst_margins
    t0, th = 1e-3, 12.0
    # the f-channel edge margins inherit the e^t-amplified alpha* offset,
    # the Higgs-channel ones sit on the series head and are much tighter
    assert_allclose(m["f_min"], th / math.sinh(th), rtol=5e-3)
    assert_allclose(m["one_minus_f_min"], t0 ** 2 / 6.0 - 7.0 * t0 ** 4 / 360.0,
                    rtol=1e-6)
    assert_allclose(m["minus_fp_min"],
                    (th * math.cosh(th) - math.sinh(th)) / math.sinh(th) ** 2,
                    rtol=5e-3)
    assert_allclose(m["rho_min"], t0 / 3.0 - t0 ** 3 / 45.0, rtol=1e-6)
    assert_allclose(m["one_minus_rho_min"],
                    1.0 - (1.0 / math.tanh(th) - 1.0 / th), rtol=1e-6)
    assert_allclose(m["rhop_min"],
                    1.0 / th ** 2 - 1.0 / math.sinh(th) ** 2, rtol=1e-6)


def test_audit_fails_on_vacuum_table():
    ts = np.linspace(1.0, 5.0, 101)
    ones, zeros = np.ones_like(ts), np.zeros_like(ts)
    aud = analysis.monotonicity_audit((ts, ones, zeros, zeros, zeros))
    assert not aud.passes
    assert not aud.f_in_01        # f touches 1
    assert not aud.fp_negative    # f' is zero, not negative
    assert not aud.rho_in_01
    assert not aud.rhop_positive


def test_audit_rejects_failed_runs(lam0):
    boom = integrate(PhaseState(t=1.0, f=0.3, fp=-0.2, rho=1.4, rhop=8.0),
                     1.0, IntegratorControls())
    assert boom.ended == "blowup"
    with pytest.raises(AuditDomainError):
        analysis.monotonicity_audit(boom)
    with pytest.raises(AuditDomainError):
        analysis.monotonicity_audit(lam0.profile, t_lo=6.0, t_hi=99.0)


# --------------------------------------------------------- residual_norm

def _ps_table(h: float, lo: float = 0.05, hi: float = 10.0):
    n = int(round((hi - lo) / h))
    ts = np.linspace(lo, hi, n + 1)
    states = [ps_exact(t) for t in ts]
    return ts, np.array([s.f for s in states]), np.array([s.rho for s in states])


def test_residual_on_closed_form_samples():
    ts, fs, rhos = _ps_table(1e-3)
    r1 = analysis.residual_norm((ts, fs, rhos), lambda_hat=0.0)
    assert r1 < 1e-5
    ts2, fs2, rhos2 = _ps_table(2e-3)
    r2 = analysis.residual_norm((ts2, fs2, rhos2), lambda_hat=0.0)
    # O(h^2) differencing: halving the spacing cuts the norm ~4x
    assert r1 <= 0.35 * r2
    assert 3.5 < r2 / r1 < 4.5


def test_residual_zero_on_vacuum():
    ts = np.linspace(1.0, 2.0, 101)
    r = analysis.residual_norm((ts, np.zeros_like(ts), np.ones_like(ts)),
                               lambda_hat=1.0)
    assert r == 0.0


def test_residual_trajectory_route(lam0):
    r = analysis.residual_norm(lam0.profile, h=1e-3)
    assert r < 1e-5


def test_residual_domain_errors():
    ts, fs, rhos = _ps_table(1e-2, lo=1.0, hi=2.0)
    with pytest.raises(DomainError):
        analysis.residual_norm((ts, fs, rhos))  # lambda_hat required
    bad = np.concatenate([ts[:-1], [ts[-1] + 3e-3]])
    with pytest.raises(DomainError):
        analysis.residual_norm((bad, fs, rhos), lambda_hat=0.0)
    with pytest.raises(DomainError):
        analysis.residual_norm((ts[:4], fs[:4], rhos[:4]), lambda_hat=0.0)


# --------------------------------------------------------- mass_integral

def test_mass_matches_independent_quadrature(lam0):
    m = analysis.mass_integral(lam0.profile)
    val, err = quad(lambda t: energy_density(ps_exact(t), 0.0),
                    1e-8, 60.0, limit=200)
    # beyond the cut both Coulomb densities integrate in closed form;
    # the Higgs gap is exactly 1/t there so its B^2 equals 1
    exact = val + 1.0 / 60.0
    assert err < 1e-9
    assert_allclose(m, exact, atol=5e-7)
    assert_allclose(m, 1.0, atol=1e-6)


def test_mass_requires_far_cut_beyond_graft(lam0):
    with pytest.raises(DomainError):
        analysis.mass_integral(lam0.profile, t_far=5.0)


# ------------------------------------------------------ linearized_probe

def test_probe_flat_background_node():
    res = analysis.linearized_probe(None)
    assert res.mass_term
    assert_allclose(res.first_zero, oracles.tan_root(), rtol=0, atol=1e-10)
    # the probe is linear in the initial slope
    res2 = analysis.linearized_probe(None, qp0=2.0)
    assert res2.first_zero == res.first_zero


def test_probe_sturm_ordering():
    flat = analysis.linearized_probe(None).first_zero
    lowered = analysis.linearized_probe(lambda u: 0.5).first_zero
    assert lowered <= flat + 1e-10


def test_probe_short_window_reports_no_node():
    res = analysis.linearized_probe(None, u_end=2.0)
    assert res.first_zero is None
    assert res.u_end == pytest.approx(2.0)


def test_probe_on_solved_profiles(lam0, lam1):
    res1 = analysis.linearized_probe(lam1.profile)
    assert res1.mass_term
    assert res1.first_zero is not None
    assert res1.first_zero <= 4.4934094579090642 + 1e-3
    assert abs(res1.first_zero - 3.7368) < 0.05
    # no mass scale at lambda_hat = 0: the probe has no restoring force
    res0 = analysis.linearized_probe(lam0.profile)
    assert not res0.mass_term
    assert res0.first_zero is None


def test_probe_domain_errors():
    with pytest.raises(SturmDomainError):
        analysis.linearized_probe(lambda u: 1.1)
    with pytest.raises(SturmDomainError):
        analysis.linearized_probe(lambda u: 0.0)
    with pytest.raises(DomainError):
        analysis.linearized_probe(None, u0=0.0)
    with pytest.raises(DomainError):
        analysis.linearized_probe(None, step=-1e-3)
