"""Two-parameter topological shooting for the monopole boundary value problem.

The boundary value problem is solved as two nested one-dimensional
bisections on the origin data (alpha, beta):

  inner   at fixed beta, the gauge channel dichotomy (f' turns up versus
          f crosses zero) brackets and bisects alpha to the separatrix
          alpha*(beta);
  outer   the Higgs fate of the alpha*(beta) trajectory (stalling versus
          overshooting the vacuum) drives a bisection in beta.

Near the double separatrix every numerical trajectory eventually peels
off, since the gauge deviation grows like e^t and, for lambda_hat > 0,
the Higgs deviation like e^{sqrt(2 lambda_hat) t}.  Two consequences
shape the code: a run that is still inside the convergence tube at the
horizon is not accepted but re-shot at a longer horizon, where the
exponential separation makes the verdict visible; and the solver
finishes with a polish pass at profile-grade tolerance, reporting a
profile that demonstrably entered the tube.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from . import analysis
from .errors import BracketingError, DomainError, IntegrityError, MonopoleError
from .integrator import (ClassifyMode, Event, IntegratorControls, Outcome,
                         OutcomeTag, Trajectory, classify, integrate)
from .model import PhaseState, ScaledParams
from .origin_series import ShootPoint, initial_state, series_coefficients

__all__ = [
    "Bracket",
    "AlphaResult",
    "GraftedProfile",
    "SolveReport",
    "OutcomeGrid",
    "shoot",
    "bracket_alpha",
    "bisect_alpha",
    "bisect_beta",
    "graft_tail",
    "sweep",
]

_ALPHA_FLOOR = 1e-12
_ALPHA_CEIL = 1e12
_BETA_FLOOR = 1e-12
_BETA_CEIL = 1e12
_ESCALATIONS = (1, 2, 4)


def shoot(point: ShootPoint, lambda_hat: float,
          controls: IntegratorControls) -> Trajectory:
    """Series handoff at controls.t0 followed by adaptive integration.

    When alpha is so small that the truncated series already has f'
    non-negative at t0, the turning point sits below the handoff radius;
    the crossing is then read off the series directly instead of starting
    the integrator on the wrong side of the event.
    """
    start = initial_state(point, lambda_hat, controls.t0)
    if point.alpha > 0.0 and start.fp >= 0.0:
        c = series_coefficients(point, lambda_hat)
        t_c = math.sqrt(point.alpha / (2.0 * c.a4))
        t2 = t_c * t_c
        state = PhaseState(
            t=t_c,
            f=1.0 - point.alpha * t2 + c.a4 * t2 * t2,
            fp=0.0,
            rho=point.beta * t_c + c.b3 * t_c * t2,
            rhop=point.beta + 3.0 * c.b3 * t2,
        )
        traj = Trajectory(t0=t_c, lambda_hat=lambda_hat, controls=controls,
                          ts=[t_c], ys=[state.as_tuple()], ended="immediate",
                          alpha=point.alpha, beta=point.beta)
        traj.f_events.append(Event(tag=OutcomeTag.FPRIME_ZERO, t=t_c, state=state))
        return traj
    traj = integrate(start, lambda_hat, controls)
    traj.alpha = point.alpha
    traj.beta = point.beta
    return traj


def _gauge_fate(point: ShootPoint, lambda_hat: float,
                controls: IntegratorControls) -> tuple[Outcome, Trajectory]:
    """FFate with horizon escalation.

    Undecided runs, including runs still inside the tube at the horizon,
    retry at 2x and 4x t_max: the e^t growth of the gauge deviation turns
    any offset above the integration noise floor into an out-of-tube
    event there.  The last outcome survives exhaustion.
    """
    traj = None
    out = None
    for mult in _ESCALATIONS:
        c = controls if mult == 1 else replace(controls, t_max=controls.t_max * mult)
        traj = shoot(point, lambda_hat, c)
        out = classify(traj, ClassifyMode.F_FATE)
        if out.tag not in (OutcomeTag.HORIZON, OutcomeTag.CONVERGED):
            return out, traj
    return out, traj


def _extrapolated_vev_gap(traj: Trajectory) -> float:
    """b - 1 where b = rho + t rho' is the extrapolated Higgs asymptote."""
    state = traj.last_state()
    return state.rho + state.t * state.rhop - 1.0


@dataclass(frozen=True)
class Bracket:
    """A sign-changing parameter interval with the observed endpoint outcomes."""

    lo: float
    hi: float
    lo_outcome: OutcomeTag
    hi_outcome: OutcomeTag

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __post_init__(self):
        if not (self.hi > self.lo > 0.0):
            raise DomainError(f"bracket needs hi > lo > 0, got [{self.lo}, {self.hi}]")


@dataclass
class AlphaResult:
    """Inner bisection verdict at one beta."""

    alpha_star: float
    bracket: Bracket
    trajectory: Trajectory          # run at alpha_star over the plain horizon
    n_iterations: int
    resolved: str = "bisection"     # | "rho_blowup" | "tube" | "horizon"
    achieved_width: float = 0.0


def bracket_alpha(beta: float, lambda_hat: float, controls: IntegratorControls,
                  seed: float = 1.0 / 6.0) -> Bracket:
    """Expand geometrically from seed until the gauge dichotomy straddles.

    Probes that neither turn up nor cross (Higgs-channel blowups in the
    large-beta regime) cannot be assigned a side and are skipped.  Failure
    to find both sides within [1e-12, 1e12] raises BracketingError carrying
    every probed outcome.
    """
    if not (beta > 0.0):
        raise DomainError(f"bracket_alpha needs beta > 0, got {beta}")
    if not (_ALPHA_FLOOR <= seed <= _ALPHA_CEIL):
        raise DomainError(f"seed {seed} outside [{_ALPHA_FLOOR}, {_ALPHA_CEIL}]")
    outcomes: dict[float, OutcomeTag] = {}

    def probe(a: float) -> OutcomeTag:
        out, _ = _gauge_fate(ShootPoint(alpha=a, beta=beta), lambda_hat, controls)
        outcomes[a] = out.tag
        return out.tag

    lo = hi = None
    lo_tag = hi_tag = None
    tag = probe(seed)
    if tag is OutcomeTag.FPRIME_ZERO:
        lo, lo_tag = seed, tag
    elif tag is OutcomeTag.F_ZERO:
        hi, hi_tag = seed, tag

    x = seed
    while hi is None:
        x *= 4.0
        if x > _ALPHA_CEIL:
            raise BracketingError(
                f"no f-crossing side found up to alpha = {_ALPHA_CEIL}", outcomes)
        tag = probe(x)
        if tag is OutcomeTag.F_ZERO:
            hi, hi_tag = x, tag
        elif tag is OutcomeTag.FPRIME_ZERO:
            lo, lo_tag = x, tag
    x = seed
    while lo is None:
        x /= 4.0
        if x < _ALPHA_FLOOR:
            raise BracketingError(
                f"no turning side found down to alpha = {_ALPHA_FLOOR}", outcomes)
        tag = probe(x)
        if tag is OutcomeTag.FPRIME_ZERO:
            lo, lo_tag = x, tag
        elif tag is OutcomeTag.F_ZERO:
            hi, hi_tag = x, tag   # tighten from above while descending
    return Bracket(lo=lo, hi=hi, lo_outcome=lo_tag, hi_outcome=hi_tag)


def bisect_alpha(bracket: Bracket, beta: float, lambda_hat: float,
                 controls: IntegratorControls, tol_alpha: float = 1e-8) -> AlphaResult:
    """Bisect the gauge dichotomy down to tol_alpha.

    A midpoint whose run ends in a Higgs-channel blowup with the gauge
    field still undecided is accepted as the working separatrix: for
    lambda_hat > 0 the Higgs deviation grows faster than the gauge
    deviation, so close enough to the separatrix the rho channel always
    explodes first and caps the achievable alpha resolution.  A
    gauge-channel blowup inside a valid bracket contradicts the bracket
    endpoints and raises IntegrityError.
    """
    if tol_alpha <= 0.0:
        raise DomainError("tol_alpha must be positive")
    lo, hi = bracket.lo, bracket.hi
    n = 0
    resolved = "bisection"
    alpha_star = None
    while hi - lo > tol_alpha:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # float resolution
        out, _ = _gauge_fate(ShootPoint(alpha=mid, beta=beta), lambda_hat, controls)
        n += 1
        if out.tag is OutcomeTag.FPRIME_ZERO:
            lo = mid
        elif out.tag is OutcomeTag.F_ZERO:
            hi = mid
        elif out.tag is OutcomeTag.BLOWUP:
            if out.detail == "rho":
                alpha_star, resolved = mid, "rho_blowup"
                break
            raise IntegrityError(
                f"gauge-channel blowup ({out.detail}) at alpha = {mid} inside "
                f"bracket [{lo}, {hi}]: endpoints cannot both be valid")
        else:
            # Converged or Horizon after full escalation: the offset is
            # below the resolvable floor, accept the midpoint.
            alpha_star = mid
            resolved = "tube" if out.tag is OutcomeTag.CONVERGED else "horizon"
            break
    if alpha_star is None:
        alpha_star = 0.5 * (lo + hi)
    final = shoot(ShootPoint(alpha=alpha_star, beta=beta), lambda_hat, controls)
    return AlphaResult(alpha_star=alpha_star,
                       bracket=Bracket(lo, hi, bracket.lo_outcome, bracket.hi_outcome),
                       trajectory=final, n_iterations=n,
                       resolved=resolved, achieved_width=hi - lo)


def _alpha_at(beta: float, lambda_hat: float, controls: IntegratorControls,
              seed: float, tol_alpha: float, warm_center: float | None = None,
              warm_margin: float = 0.0) -> AlphaResult:
    """Inner solve, reusing a verified bracket around a nearby answer."""
    bracket = None
    if warm_center is not None and warm_margin > 0.0 \
            and warm_center - warm_margin > 0.0:
        lo = warm_center - warm_margin
        hi = warm_center + warm_margin

        def tag_at(a: float) -> OutcomeTag:
            out, _ = _gauge_fate(ShootPoint(alpha=a, beta=beta),
                                 lambda_hat, controls)
            return out.tag

        lo_tag = tag_at(lo)
        if lo_tag is OutcomeTag.FPRIME_ZERO:
            hi_tag = tag_at(hi)
            if hi_tag is OutcomeTag.F_ZERO:
                bracket = Bracket(lo, hi, lo_tag, hi_tag)
    if bracket is None:
        bracket = bracket_alpha(beta, lambda_hat, controls, seed=seed)
    return bisect_alpha(bracket, beta, lambda_hat, controls, tol_alpha)


def _higgs_fate(result: AlphaResult, lambda_hat: float,
                controls: IntegratorControls) -> tuple[Outcome, Trajectory]:
    """RhoFate of the alpha-separatrix trajectory, escalating the horizon.

    Far from the tube the extrapolated asymptote decides immediately;
    escalation is reserved for runs that are still genuinely ambiguous.
    """
    traj = result.trajectory
    point = ShootPoint(alpha=result.alpha_star, beta=traj.beta)
    out = classify(traj, ClassifyMode.RHO_FATE)
    for mult in _ESCALATIONS[1:]:
        if out.tag is not OutcomeTag.HORIZON:
            return out, traj
        if abs(_extrapolated_vev_gap(traj)) > 10.0 * controls.tube_rho:
            return out, traj
        c = replace(controls, t_max=controls.t_max * mult)
        traj = shoot(point, lambda_hat, c)
        out = classify(traj, ClassifyMode.RHO_FATE)
    return out, traj


@dataclass
class GraftedProfile:
    """Numerical profile up to t_graft continued by its fitted far field.

    Beyond t_graft the gauge field follows amp * e^{-rate t} (times t when
    lambda_hat = 0) and the Higgs gap follows amp * e^{-rate t} / t
    (pure amp / t when lambda_hat = 0), with rates and amplitudes fitted
    on [t_graft - fit_span, t_graft].
    """

    base: Trajectory
    t_graft: float
    t_report: float
    f_fit: "analysis.DecayFit"
    higgs_fit: "analysis.DecayFit"
    mismatch_f: float
    mismatch_rho: float

    @property
    def lambda_hat(self) -> float:
        return self.base.lambda_hat

    def tail_state(self, t: float) -> PhaseState:
        lam = self.base.lambda_hat
        kf, af = self.f_fit.rate, self.f_fit.amplitude
        kh, bh = self.higgs_fit.rate, self.higgs_fit.amplitude
        ef = af * math.exp(-kf * t)
        if lam == 0.0:
            f, fp = ef * t, ef * (1.0 - kf * t)
            gap = bh / t
            rho, rhop = 1.0 - gap, bh / (t * t)
        else:
            f, fp = ef, -kf * ef
            gap = bh * math.exp(-kh * t) / t
            rho, rhop = 1.0 - gap, gap * (kh + 1.0 / t)
        return PhaseState(t=t, f=f, fp=fp, rho=rho, rhop=rhop)

    def state_at(self, t: float) -> PhaseState:
        if t > self.t_graft:
            return self.tail_state(t)
        return self.base.state_at(t)


def graft_tail(traj: Trajectory, t_graft: float | None = None,
               t_report: float | None = None, fit_span: float = 2.0) -> GraftedProfile:
    """Fit the far-field decay laws and continue the profile analytically.

    t_graft defaults to the largest radius at which both log fits are
    still clean (backing off from the end in half-unit steps); near the
    separatrix the late samples are dominated by the amplified unstable
    mode and carry no signal.
    """
    if t_graft is None:
        t_graft = analysis.stable_fit_horizon(traj, fit_span=fit_span)
    if not (traj.t0 + fit_span < t_graft <= traj.t_end):
        raise DomainError(f"t_graft = {t_graft} outside usable range")
    if t_report is None:
        t_report = t_graft + 8.0
    if t_report < t_graft:
        raise DomainError("t_report must not precede t_graft")
    window = (t_graft - fit_span, t_graft)
    f_fit = analysis.fit_decay(traj, window, "f")
    h_fit = analysis.fit_decay(traj, window, "one_minus_rho")
    g = GraftedProfile(base=traj, t_graft=t_graft, t_report=t_report,
                       f_fit=f_fit, higgs_fit=h_fit,
                       mismatch_f=0.0, mismatch_rho=0.0)
    at = traj.state_at(t_graft)
    model = g.tail_state(t_graft)
    g.mismatch_f = abs(model.f - at.f)
    g.mismatch_rho = abs(model.rho - at.rho)
    return g


@dataclass
class SolveReport:
    """Everything the outer bisection learned, in the dimensionless frame.

    When the solve was posed with physical couplings, alpha_star and
    beta_star additionally carry the physical-frame values; the _hat
    fields are always dimensionless.
    """

    lambda_hat: float
    alpha_star_hat: float
    beta_star_hat: float
    alpha_bracket: Bracket
    beta_bracket: Bracket
    converged: bool
    profile: GraftedProfile | None
    audit: "analysis.AuditReport | None"
    residual_norm: float | None
    energy: float | None
    outcome_log: list = field(default_factory=list)
    n_beta_evaluations: int = 0
    alpha_resolved: str = "bisection"
    controls: IntegratorControls | None = None
    scaled: ScaledParams | None = None

    @property
    def alpha_star(self) -> float:
        if self.scaled is None:
            return self.alpha_star_hat
        return self.scaled.alpha_to_physical(self.alpha_star_hat)

    @property
    def beta_star(self) -> float:
        if self.scaled is None:
            return self.beta_star_hat
        return self.scaled.beta_to_physical(self.beta_star_hat)


def bisect_beta(lambda_hat: float, controls: IntegratorControls | None = None,
                tol_alpha: float = 1e-8, tol_beta: float = 1e-8,
                seed_alpha: float = 1.0 / 6.0, seed_beta: float = 1.0 / 3.0,
                polish: bool = True, scaled: ScaledParams | None = None) -> SolveReport:
    """Outer bisection in beta over the Higgs fate of alpha*(beta).

    Stalling outcomes (RhoPrimeZero, RhoZero, or an extrapolated
    asymptote below the vacuum) mean beta is too small; overshooting
    outcomes (RhoCrossVev or an asymptote above) mean too large.
    Tube-converged midpoints are recorded as candidates and the bisection
    continues to tol_beta, so the answer carries a genuine two-sided
    bracket.

    The search runs at the caller's tolerances first, then, when polish
    is on, re-brackets the answer at profile-grade integration tolerance
    and pushes both parameter tolerances toward the deviation-noise
    floor.  The reported profile is re-integrated with a small step cap
    so that downstream finite differences see interpolation noise well
    below the residual target.
    """
    if lambda_hat < 0.0:
        raise DomainError(f"lambda_hat must be >= 0, got {lambda_hat}")
    if tol_alpha <= 0.0 or tol_beta <= 0.0:
        raise DomainError("tolerances must be positive")
    if controls is None:
        controls = IntegratorControls()

    state = {"alpha_seed": seed_alpha, "warm_center": None, "warm_margin": 0.0,
             "beta_width": None, "candidate": None, "n_eval": 0, "log": []}

    def side_of(beta: float, c: IntegratorControls, tol_a: float) -> str:
        warm_center = state["warm_center"]
        margin = 0.0
        if warm_center is not None and state["beta_width"] is not None:
            # alpha*(beta) moves O(1) per unit beta; cover that plus the
            # slack of the previous inner solve.
            margin = max(4.0 * state["beta_width"], 64.0 * tol_a,
                         2.0 * state["warm_margin"])
        ar = _alpha_at(beta, lambda_hat, c, state["alpha_seed"], tol_a,
                       warm_center=warm_center, warm_margin=margin)
        state["alpha_seed"] = ar.alpha_star
        state["warm_center"] = ar.alpha_star
        state["warm_margin"] = max(ar.achieved_width, tol_a)
        out, traj = _higgs_fate(ar, lambda_hat, c)
        state["n_eval"] += 1
        if out.tag in (OutcomeTag.RHO_PRIME_ZERO, OutcomeTag.RHO_ZERO):
            side = "A"
        elif out.tag is OutcomeTag.RHO_CROSS_VEV:
            side = "B"
        else:
            # No decisive event (the lambda_hat = 0 regime, or a run cut
            # short by a blowup): read the asymptote's side directly.
            gap = _extrapolated_vev_gap(traj)
            side = "A" if gap < 0.0 else "B"
            if out.tag is OutcomeTag.CONVERGED:
                state["candidate"] = (beta, ar)
        state["log"].append((beta, ar.alpha_star, out.tag.value, side))
        return side

    def run_bisection(lo: float, hi: float, c: IntegratorControls,
                      tol_a: float, tol_b: float) -> tuple[float, float]:
        while hi - lo > tol_b:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            state["beta_width"] = hi - lo
            if side_of(mid, c, tol_a) == "A":
                lo = mid
            else:
                hi = mid
        return lo, hi

    # Stage one: caller tolerances.
    lo, hi, lo_tag, hi_tag = _expand_beta(side_of, seed_beta, controls, tol_alpha)
    lo, hi = run_bisection(lo, hi, controls, tol_alpha, tol_beta)

    # Stage two: profile-grade polish around the stage-one answer.
    pcontrols = replace(controls,
                        rel_tol=min(controls.rel_tol, 1e-12),
                        abs_tol=min(controls.abs_tol, 1e-14))
    if polish:
        tol_alpha_f, tol_beta_f = min(tol_alpha, 1e-11), min(tol_beta, 1e-11)
        fincontrols = pcontrols
        beta_c = 0.5 * (lo + hi)
        w = max(hi - lo, tol_beta)
        state["beta_width"] = 16.0 * w
        plo, phi = _verify_beta_bracket(side_of, beta_c, w, pcontrols, tol_alpha_f)
        lo, hi = run_bisection(plo, phi, pcontrols, tol_alpha_f, tol_beta_f)
    else:
        tol_alpha_f, tol_beta_f = tol_alpha, tol_beta
        fincontrols = controls
    beta_bracket = Bracket(lo, hi, lo_tag, hi_tag)

    beta_star = 0.5 * (lo + hi)
    state["beta_width"] = max(hi - lo, tol_beta_f)
    margin = max(4.0 * state["beta_width"], 64.0 * tol_alpha_f,
                 2.0 * state["warm_margin"])
    ar_star = _alpha_at(beta_star, lambda_hat, fincontrols, state["alpha_seed"],
                        tol_alpha_f, warm_center=state["warm_center"],
                        warm_margin=margin)

    # Profile-grade rerun with a small step cap: interpolation wiggle in
    # the dense output scales like (local error)/(step/3)^2 under second
    # differences, so capping the step keeps finite-difference residuals
    # an order below the acceptance threshold.
    fcontrols = replace(fincontrols, max_step=5e-3)

    def profile_run(a: float, b: float) -> tuple[bool, Trajectory]:
        traj = shoot(ShootPoint(alpha=a, beta=b), lambda_hat, fcontrols)
        ok = (classify(traj, ClassifyMode.F_FATE).tag is OutcomeTag.CONVERGED
              and classify(traj, ClassifyMode.RHO_FATE).tag is OutcomeTag.CONVERGED)
        return ok, traj

    converged, profile_traj = profile_run(ar_star.alpha_star, beta_star)
    if not converged and state["candidate"] is not None:
        cand_beta, cand_ar = state["candidate"]
        ok, cand_traj = profile_run(cand_ar.alpha_star, cand_beta)
        if ok:
            beta_star, ar_star = cand_beta, cand_ar
            profile_traj, converged = cand_traj, True

    profile = audit = None
    residual = energy = None
    try:
        profile = graft_tail(profile_traj)
        audit = analysis.monotonicity_audit(profile_traj, t_hi=profile.t_graft)
        # Sup of the FD residual sits at the left edge, dominated by the
        # O(h^2) truncation of the 2 rho'/t term (rho''' ~ 6 b3 there), so
        # the spacing sets the figure, not the solver.  A quarter millistep
        # keeps it well under 1e-6 even at lambda_hat ~ 1 couplings while
        # staying far above the dense-output noise floor.
        residual = analysis.residual_norm(profile_traj, t_hi=profile.t_graft,
                                          h=2.5e-4)
        audit.residual_max = residual
        energy = analysis.mass_integral(profile)
    except MonopoleError:
        # Diagnostics are only meaningful for a tube-bound profile; report
        # the parameter estimates and let converged=False tell the story.
        profile = None
        audit = None
        residual = energy = None
        converged = False

    return SolveReport(
        lambda_hat=lambda_hat, alpha_star_hat=ar_star.alpha_star,
        beta_star_hat=beta_star, alpha_bracket=ar_star.bracket,
        beta_bracket=beta_bracket, converged=converged, profile=profile,
        audit=audit, residual_norm=residual, energy=energy,
        outcome_log=state["log"], n_beta_evaluations=state["n_eval"],
        alpha_resolved=ar_star.resolved, controls=controls, scaled=scaled)


def _expand_beta(side_of, seed_beta: float, controls: IntegratorControls,
                 tol_alpha: float):
    """Geometric expansion from seed_beta until the Higgs dichotomy straddles."""
    if not (_BETA_FLOOR <= seed_beta <= _BETA_CEIL):
        raise DomainError(f"seed_beta {seed_beta} outside [{_BETA_FLOOR}, {_BETA_CEIL}]")

    lo = hi = None
    if side_of(seed_beta, controls, tol_alpha) == "A":
        lo = seed_beta
    else:
        hi = seed_beta
    x = seed_beta
    while hi is None:
        x *= 4.0
        if x > _BETA_CEIL:
            raise BracketingError(
                f"no overshooting side found up to beta = {_BETA_CEIL}", None)
        if side_of(x, controls, tol_alpha) == "B":
            hi = x
        else:
            lo = x
    x = seed_beta
    while lo is None:
        x /= 4.0
        if x < _BETA_FLOOR:
            raise BracketingError(
                f"no stalling side found down to beta = {_BETA_FLOOR}", None)
        if side_of(x, controls, tol_alpha) == "A":
            lo = x
        else:
            hi = x
    return lo, hi, OutcomeTag.RHO_PRIME_ZERO, OutcomeTag.RHO_CROSS_VEV


def _verify_beta_bracket(side_of, center: float, width: float,
                         controls: IntegratorControls, tol_alpha: float):
    """Re-establish an (A, B) bracket around a known answer at new tolerances."""
    w = 8.0 * width
    for _ in range(12):
        lo = max(center - w, _BETA_FLOOR)
        hi = center + w
        if side_of(lo, controls, tol_alpha) == "A" \
                and side_of(hi, controls, tol_alpha) == "B":
            return lo, hi
        w *= 8.0
    raise BracketingError(
        f"could not re-bracket beta near {center} at polish tolerance", None)


def sweep(alphas, betas, lambda_hat: float,
          controls: IntegratorControls | None = None,
          workers: int | None = None) -> "OutcomeGrid":
    """Classify every (alpha, beta) pair on the grid, gauge fate first.

    Rows (fixed alpha) are independent; workers > 1 distributes them over
    processes.  Output ordering is row-major by alpha then beta regardless
    of worker count.
    """
    alphas = [float(a) for a in alphas]
    betas = [float(b) for b in betas]
    if not alphas or not betas:
        raise DomainError("sweep needs non-empty grids")
    if controls is None:
        controls = IntegratorControls()
    if workers is None:
        workers = int(os.environ.get("MONOPOLE_THREADS", "1"))
    args = [(a, betas, lambda_hat, controls) for a in alphas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, args))
    else:
        rows = [_sweep_row(arg) for arg in args]
    tags = [[cell[0] for cell in row] for row in rows]
    t_events = [[cell[1] for cell in row] for row in rows]
    return OutcomeGrid(alphas=alphas, betas=betas, tags=tags, t_events=t_events,
                       lambda_hat=lambda_hat)


def _sweep_row(arg):
    alpha, betas, lambda_hat, controls = arg
    row = []
    for beta in betas:
        traj = shoot(ShootPoint(alpha=alpha, beta=beta), lambda_hat, controls)
        out = classify(traj, ClassifyMode.F_FATE)
        if out.tag in (OutcomeTag.CONVERGED, OutcomeTag.HORIZON):
            rho_out = classify(traj, ClassifyMode.RHO_FATE)
            if rho_out.tag is not OutcomeTag.HORIZON:
                out = rho_out
        row.append((out.tag.value, out.t_event))
    return row


@dataclass
class OutcomeGrid:
    """Row-major outcome table of a parameter sweep."""

    alphas: list[float]
    betas: list[float]
    tags: list[list[str]]
    t_events: list[list[float | None]]
    lambda_hat: float

    def rows(self):
        """Yield (alpha, beta, tag, t_event) in row-major order."""
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.betas):
                yield a, b, self.tags[i][j], self.t_events[i][j]
