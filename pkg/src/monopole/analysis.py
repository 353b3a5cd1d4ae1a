"""Diagnostics for solved monopole profiles.

Far-field decay fits, independent finite-difference residuals of the
field equations, range/monotonicity audits, the mass integral, and the
l = 1 angular fluctuation probe.  Everything here consumes finished
trajectories (or plain sample arrays); nothing feeds back into the
shooting loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AuditDomainError, DomainError, FitDomainError,
                     SturmDomainError)

__all__ = [
    "DecayFit",
    "AuditReport",
    "ProbeResult",
    "fit_decay",
    "stable_fit_horizon",
    "monotonicity_audit",
    "residual_norm",
    "mass_integral",
    "linearized_probe",
]


def _as_trajectory(profile):
    """Split a Trajectory or GraftedProfile into (trajectory, graft-or-None)."""
    base = getattr(profile, "base", None)
    if base is not None:
        return base, profile
    return profile, None


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of a far-field decay law.

    The fitted model is amplitude * prefactor(t) * e^{-rate t}, where the
    prefactor ("1", "t", or "1/t") was divided out before taking logs.
    """

    rate: float
    amplitude: float
    prefactor: str
    window: tuple[float, float]
    n_samples: int
    max_log_residual: float


def fit_decay(profile, window, component: str, n_samples: int = 201) -> DecayFit:
    """Fit the decay of one field component over a radial window.

    component "f" fits log f against t (log(f / t) when lambda_hat = 0,
    where the gauge tail carries a linear prefactor); "one_minus_rho"
    fits log((1 - rho) t), the Higgs gap with its 1/t prefactor removed.
    Samples must be strictly positive across the window.
    """
    traj, _ = _as_trajectory(profile)
    lo, hi = float(window[0]), float(window[1])
    if not (traj.ts[0] <= lo < hi <= traj.t_end):
        raise FitDomainError(
            f"fit window [{lo}, {hi}] outside trajectory range "
            f"[{traj.ts[0]}, {traj.t_end}]")
    if n_samples < 10:
        raise FitDomainError("need at least 10 samples for a decay fit")
    ts = np.linspace(lo, hi, n_samples)
    cols = np.asarray(traj.resample(ts))
    lam = traj.lambda_hat
    if component == "f":
        vals = cols[:, 0]
        prefactor = "1"
        if lam == 0.0:
            vals = vals / ts
            prefactor = "t"
    elif component == "one_minus_rho":
        vals = (1.0 - cols[:, 2]) * ts
        prefactor = "1/t"
    else:
        raise DomainError(f"unknown fit component {component!r}")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise FitDomainError(
            f"{component} samples not strictly positive on [{lo}, {hi}]")
    y = np.log(vals)
    slope, intercept = np.polyfit(ts, y, 1)
    resid = y - (slope * ts + intercept)
    return DecayFit(rate=-float(slope), amplitude=float(math.exp(intercept)),
                    prefactor=prefactor, window=(lo, hi), n_samples=n_samples,
                    max_log_residual=float(np.max(np.abs(resid))))


def stable_fit_horizon(traj, fit_span: float = 2.0, floor: float = 6.0,
                       step: float = 0.5, residual_cap: float = 0.05) -> float:
    """Largest radius at which both far-field fits are still clean.

    Near the end of a separatrix run the samples are dominated by the
    exponentially amplified deviation (e^t in the gauge channel,
    e^{sqrt(2 lambda_hat) t} in the Higgs channel), which bends the
    log-linear fits.  Back off from the end in half-unit steps until the
    fit residuals are small and the rates have physical signs; the floor
    is returned when nothing qualifies.
    """
    t_hi = min(traj.t_end, traj.controls.t_max)
    lam = traj.lambda_hat
    while t_hi >= floor:
        window = (t_hi - fit_span, t_hi)
        try:
            h_fit = fit_decay(traj, window, "one_minus_rho")
            f_fit = fit_decay(traj, window, "f")
        except FitDomainError:
            t_hi -= step
            continue
        h_ok = h_fit.max_log_residual < residual_cap and (
            lam == 0.0 or h_fit.rate > 0.0)
        f_ok = f_fit.max_log_residual < residual_cap and f_fit.rate > 0.0
        if h_ok and f_ok:
            return t_hi
        t_hi -= step
    return floor


@dataclass
class AuditReport:
    """Range and monotonicity verdicts with their worst-case margins."""

    f_in_01: bool
    fp_negative: bool
    rho_in_01: bool
    rhop_positive: bool
    worst_margins: dict
    window: tuple[float, float]
    n_samples: int
    residual_max: float | None = None

    @property
    def passes(self) -> bool:
        return (self.f_in_01 and self.fp_negative
                and self.rho_in_01 and self.rhop_positive)


def monotonicity_audit(profile, t_lo: float | None = None,
                       t_hi: float | None = None,
                       spacing: float = 5e-3) -> AuditReport:
    """Check 0 < f < 1, f' < 0, 0 < rho < 1, rho' > 0 on a fine grid.

    Accepts a trajectory (resampled through its dense output) or a plain
    sample table (ts, f, fp, rho, rhop).  A trajectory that ended in an
    out-of-tube event or a blowup is not a solution candidate and is
    rejected with AuditDomainError rather than graded.
    """
    if isinstance(profile, tuple):
        ts, fs, fps, rhos, rhops = (np.asarray(c, dtype=float) for c in profile)
        window = (float(ts[0]), float(ts[-1]))
    else:
        traj, grafted = _as_trajectory(profile)
        if traj.ended == "blowup" or traj.terminal_f_event() is not None:
            raise AuditDomainError(
                "trajectory ended in a failure event, not a solution candidate")
        lo = traj.ts[0] if t_lo is None else float(t_lo)
        hi = (grafted.t_graft if grafted is not None else traj.t_end) \
            if t_hi is None else float(t_hi)
        if not (traj.ts[0] <= lo < hi <= traj.t_end):
            raise AuditDomainError(
                f"audit window [{lo}, {hi}] outside trajectory range")
        n = max(int(math.ceil((hi - lo) / spacing)) + 1, 2)
        ts = np.linspace(lo, hi, n)
        cols = np.asarray(traj.resample(ts))
        fs, fps, rhos, rhops = cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3]
        window = (lo, hi)
    margins = {
        "f_min": float(np.min(fs)),
        "one_minus_f_min": float(np.min(1.0 - fs)),
        "minus_fp_min": float(np.min(-fps)),
        "rho_min": float(np.min(rhos)),
        "one_minus_rho_min": float(np.min(1.0 - rhos)),
        "rhop_min": float(np.min(rhops)),
    }
    return AuditReport(
        f_in_01=margins["f_min"] > 0.0 and margins["one_minus_f_min"] > 0.0,
        fp_negative=margins["minus_fp_min"] > 0.0,
        rho_in_01=margins["rho_min"] > 0.0 and margins["one_minus_rho_min"] > 0.0,
        rhop_positive=margins["rhop_min"] > 0.0,
        worst_margins=margins, window=window, n_samples=len(ts))


def residual_norm(profile, t_lo: float | None = None, t_hi: float | None = None,
                  h: float = 1e-3, lambda_hat: float | None = None) -> float:
    """Sup-norm of the field equations under central second differences.

    Only sampled values of (t, f, rho) enter; all derivatives are formed
    by O(h^2) finite differences, so the figure cross-checks the
    integrator instead of restating its own right-hand side.  Accepts a
    trajectory (resampled uniformly at spacing h) or raw uniformly spaced
    arrays (ts, f, rho), which require lambda_hat.
    """
    if isinstance(profile, tuple):
        ts, fs, rhos = (np.asarray(c, dtype=float) for c in profile)
        if lambda_hat is None:
            raise DomainError("lambda_hat is required with raw samples")
        lam = float(lambda_hat)
        dt = np.diff(ts)
        h = float(dt[0])
        if h <= 0.0 or np.max(np.abs(dt - h)) > 1e-9 * h:
            raise DomainError("raw samples must be uniformly spaced")
    else:
        traj, grafted = _as_trajectory(profile)
        lam = traj.lambda_hat if lambda_hat is None else float(lambda_hat)
        lo = max(0.05, traj.ts[0]) if t_lo is None else float(t_lo)
        hi = (grafted.t_graft if grafted is not None else traj.t_end) \
            if t_hi is None else float(t_hi)
        if not (traj.ts[0] <= lo < hi <= traj.t_end):
            raise DomainError(f"residual window [{lo}, {hi}] outside trajectory")
        n = int(math.floor((hi - lo) / h)) + 1
        ts = lo + h * np.arange(n)
        cols = np.asarray(traj.resample(ts))
        fs, rhos = cols[:, 0], cols[:, 2]
    if len(ts) < 5:
        raise DomainError("need at least 5 samples for second differences")
    t, f, r = ts[1:-1], fs[1:-1], rhos[1:-1]
    h2 = h * h
    fpp = (fs[2:] - 2.0 * fs[1:-1] + fs[:-2]) / h2
    rpp = (rhos[2:] - 2.0 * rhos[1:-1] + rhos[:-2]) / h2
    rp = (rhos[2:] - rhos[:-2]) / (2.0 * h)
    res_f = fpp - f * (f * f - 1.0) / (t * t) - r * r * f
    res_r = rpp + 2.0 * rp / t - 2.0 * f * f * r / (t * t) - lam * (r * r - 1.0) * r
    return float(max(np.max(np.abs(res_f)), np.max(np.abs(res_r))))


def _density(ts, fs, fps, rhos, rhops, lam):
    # Same integrand as model.energy_density, vectorized for quadrature.
    t2 = ts * ts
    f2m1 = fs * fs - 1.0
    r2m1 = rhos * rhos - 1.0
    return (fps * fps + f2m1 * f2m1 / (2.0 * t2) + fs * fs * rhos * rhos
            + (ts * rhops) ** 2 / 2.0 + 0.25 * lam * (ts * r2m1) ** 2)


def _simpson(y, h: float) -> float:
    if len(y) % 2 == 0:
        raise DomainError("Simpson rule needs an odd sample count")
    return h / 3.0 * float(y[0] + y[-1]
                           + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2]))


def _odd_grid(lo: float, hi: float, target_h: float):
    n_int = max(int(math.ceil((hi - lo) / target_h)), 2)
    if n_int % 2:
        n_int += 1
    return np.linspace(lo, hi, n_int + 1), (hi - lo) / n_int


def mass_integral(grafted, t_far: float = 400.0, core_spacing: float = 2e-3,
                  tail_spacing: float = 5e-2) -> float:
    """Dimensionless monopole mass: the energy density integrated outward.

    Simpson quadrature on the dense numerical profile up to the graft
    radius, then on the fitted tail model up to t_far; beyond t_far the
    surviving Coulomb-like densities are added in closed form,
    (1 - f^2)^2 / (2 t^2) -> 1 / (2 t^2) plus, at lambda_hat = 0 only,
    B^2 / (2 t^2) from the power-law Higgs gradient.  The region below
    the handoff radius contributes its series value c2 t0^3 / 3.
    """
    traj = grafted.base
    lam = traj.lambda_hat
    tg = grafted.t_graft
    if t_far <= tg:
        raise DomainError(f"t_far = {t_far} must exceed t_graft = {tg}")
    t0 = traj.ts[0]

    alpha = traj.alpha if traj.alpha is not None else 0.0
    beta = traj.beta if traj.beta is not None else 0.0
    head = (6.0 * alpha * alpha + 1.5 * beta * beta + 0.25 * lam) * t0 ** 3 / 3.0

    ts, h = _odd_grid(t0, tg, core_spacing)
    cols = np.asarray(traj.resample(ts))
    core = _simpson(_density(ts, cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3],
                             lam), h)

    ts, h = _odd_grid(tg, t_far, tail_spacing)
    kf, af = grafted.f_fit.rate, grafted.f_fit.amplitude
    kh, bh = grafted.higgs_fit.rate, grafted.higgs_fit.amplitude
    ef = af * np.exp(-kf * ts)
    if lam == 0.0:
        fs, fps = ef * ts, ef * (1.0 - kf * ts)
        gap = bh / ts
        rhops = bh / (ts * ts)
    else:
        fs, fps = ef, -kf * ef
        gap = bh * np.exp(-kh * ts) / ts
        rhops = gap * (kh + 1.0 / ts)
    tail = _simpson(_density(ts, fs, fps, 1.0 - gap, rhops, lam), h)

    remainder = (1.0 + (bh * bh if lam == 0.0 else 0.0)) / (2.0 * t_far)
    return head + core + tail + remainder


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of one angular fluctuation probe."""

    first_zero: float | None
    u_end: float
    q_end: float
    qp_end: float
    mass_term: bool
    n_steps: int


def linearized_probe(profile=None, u_end: float = 8.0, u0: float = 1e-3,
                     step: float = 1e-3, qp0: float = 1.0) -> ProbeResult:
    """Radial Sturm probe of the l = 1 angular fluctuation operator.

    Integrates Q'' = -(2/u) Q' - (1 - 2 p(u)^2 / u^2) Q outward on the
    regular branch and reports the first node.  With the vacuum
    background p = 1 (profile None) the node is the first positive root
    of the spherical Bessel function j1, near u = 4.4934; any background
    with p < 1 somewhere pulls the node inward, so node(profile) <=
    node(vacuum) witnesses that the monopole is no stiffer than the
    vacuum.  A solved profile enters through u = sqrt(lambda_hat) t, its
    natural mass units; at lambda_hat = 0 there is no mass scale, the
    mass term is dropped, and the regular branch has no node (first_zero
    is None).  p values outside (0, 1] raise SturmDomainError.
    """
    if not (0.0 < u0 < u_end) or step <= 0.0:
        raise DomainError("need 0 < u0 < u_end and a positive step")
    mass = 1.0
    if profile is None:
        def p_of(u):
            return 1.0
    elif callable(profile):
        p_of = profile
    else:
        traj, grafted = _as_trajectory(profile)
        lam = traj.lambda_hat
        alpha = traj.alpha if traj.alpha is not None else 0.0
        scale = 1.0 if lam == 0.0 else 1.0 / math.sqrt(lam)
        if lam == 0.0:
            mass = 0.0
        src = grafted if grafted is not None else traj
        t_lo = traj.ts[0]
        t_cap = None if grafted is not None else traj.t_end

        def p_of(u):
            t = u * scale
            if t < t_lo:
                return 1.0 - alpha * t * t  # series head below the handoff
            if t_cap is not None and t > t_cap:
                t = t_cap  # past the samples the tail is exponentially small
            return src.state_at(t).f

    def rhs(u, q, qp):
        p = p_of(u)
        if not (0.0 < p <= 1.0 + 1e-9):
            raise SturmDomainError(f"p(u) = {p} at u = {u} is outside (0, 1]")
        return qp, -(2.0 / u) * qp - (mass - 2.0 * p * p / (u * u)) * q

    n = max(int(math.ceil((u_end - u0) / step)), 1)
    h = (u_end - u0) / n
    u, q, qp = u0, u0 * qp0, qp0
    first_zero = None
    for _ in range(n):
        k1q, k1p = rhs(u, q, qp)
        k2q, k2p = rhs(u + 0.5 * h, q + 0.5 * h * k1q, qp + 0.5 * h * k1p)
        k3q, k3p = rhs(u + 0.5 * h, q + 0.5 * h * k2q, qp + 0.5 * h * k2p)
        k4q, k4p = rhs(u + h, q + h * k3q, qp + h * k3p)
        q1 = q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        qp1 = qp + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        u1 = u + h
        if first_zero is None and q != 0.0 and (q > 0.0) != (q1 > 0.0):
            first_zero = _hermite_root(u, q, qp, u1, q1, qp1)
        u, q, qp = u1, q1, qp1
    return ProbeResult(first_zero=first_zero, u_end=u, q_end=q, qp_end=qp,
                       mass_term=mass == 1.0, n_steps=n)


def _hermite_root(ta, ya, da, tb, yb, db) -> float:
    """Root of the cubic Hermite interpolant on a sign-changing step."""
    h = tb - ta

    def val(s):
        s2, s3 = s * s, s * s * s
        return ((2.0 * s3 - 3.0 * s2 + 1.0) * ya + (s3 - 2.0 * s2 + s) * h * da
                + (-2.0 * s3 + 3.0 * s2) * yb + (s3 - s2) * h * db)

    lo, hi = 0.0, 1.0
    flo = val(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = val(mid)
        if fm == 0.0:
            return ta + mid * h
        if (flo > 0.0) == (fm > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return ta + 0.5 * (lo + hi) * h
