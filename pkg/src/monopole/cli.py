"""Command line front end.

Subcommands: solve, sweep, validate, probe, series.  Exit codes are
0 success, 1 usage, 2 solver failure, 3 validation or audit failure,
4 I/O failure.  A flat key=value config file can preload any option;
explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import ast
import json
import math
import os
import sys

from . import analysis
from .errors import MonopoleError
from .integrator import IntegratorControls
from .model import ModelParams, nondimensionalize, ps_exact
from .origin_series import DEFAULT_T0, ShootPoint, initial_state, picard_verify
from .shooter import bisect_beta, sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVE = 2
EXIT_VALIDATE = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which collides with the
    # solver-failure code; route all usage problems to 1.
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _coerce(text: str):
    low = text.strip()
    if low.lower() in ("true", "false"):
        return low.lower() == "true"
    try:
        return ast.literal_eval(low)
    except (ValueError, SyntaxError):
        return low


def _apply_config(ns: argparse.Namespace, argv: list[str]) -> None:
    """Overlay config-file values onto options not set on the command line."""
    if not getattr(ns, "config", None):
        return
    with open(ns.config, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MonopoleError(
                    f"{ns.config}:{line_no}: expected key = value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not hasattr(ns, key):
                raise MonopoleError(f"{ns.config}:{line_no}: unknown option {key!r}")
            flag = "--" + key.replace("_", "-")
            if any(arg == flag or arg.startswith(flag + "=") for arg in argv):
                continue  # explicit flag wins
            setattr(ns, key, _coerce(value))


def _controls_from(ns: argparse.Namespace) -> IntegratorControls:
    return IntegratorControls(rel_tol=ns.rel_tol, abs_tol=ns.abs_tol,
                              t_max=ns.t_max, t0=ns.t0)


def _add_solve_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda-hat", type=float, default=None,
                   help="dimensionless quartic coupling lambda / g0^2")
    p.add_argument("--lam", type=float, default=None,
                   help="physical quartic coupling (with --g0 and --rho0)")
    p.add_argument("--g0", type=float, default=None, help="gauge coupling")
    p.add_argument("--rho0", type=float, default=None, help="Higgs vacuum value")
    p.add_argument("--tol-alpha", type=float, default=1e-8)
    p.add_argument("--tol-beta", type=float, default=1e-8)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--t-max", type=float, default=12.0)
    p.add_argument("--t0", type=float, default=DEFAULT_T0)
    p.add_argument("--no-polish", action="store_true",
                   help="stop at the first-stage tolerances")
    p.add_argument("--config", default=None, help="key = value option file")


def _resolve_frame(ns: argparse.Namespace, parser: argparse.ArgumentParser):
    physical = [ns.lam, ns.g0, ns.rho0]
    given = [v for v in physical if v is not None]
    if ns.lambda_hat is not None and given:
        parser.error("--lambda-hat conflicts with --lam/--g0/--rho0")
    if given and len(given) != 3:
        parser.error("--lam, --g0 and --rho0 must be given together")
    if ns.lambda_hat is not None:
        return ns.lambda_hat, None
    if given:
        scaled = nondimensionalize(ModelParams(lam=ns.lam, g0=ns.g0, rho0=ns.rho0))
        return scaled.lambda_hat, scaled
    parser.error("either --lambda-hat or the physical triple is required")


def _run_solve(ns: argparse.Namespace, parser) -> tuple:
    lambda_hat, scaled = _resolve_frame(ns, parser)
    report = bisect_beta(lambda_hat, controls=_controls_from(ns),
                         tol_alpha=ns.tol_alpha, tol_beta=ns.tol_beta,
                         polish=not ns.no_polish, scaled=scaled)
    return report, lambda_hat


def _report_dict(rep) -> dict:
    d = {
        "lambda_hat": rep.lambda_hat,
        "alpha_star_hat": rep.alpha_star_hat,
        "beta_star_hat": rep.beta_star_hat,
        "alpha_star": rep.alpha_star,
        "beta_star": rep.beta_star,
        "alpha_bracket_lo": rep.alpha_bracket.lo,
        "alpha_bracket_hi": rep.alpha_bracket.hi,
        "beta_bracket_lo": rep.beta_bracket.lo,
        "beta_bracket_hi": rep.beta_bracket.hi,
        "alpha_resolved": rep.alpha_resolved,
        "converged": rep.converged,
        "n_beta_evaluations": rep.n_beta_evaluations,
    }
    if rep.controls is not None:
        d["rel_tol"] = rep.controls.rel_tol
        d["abs_tol"] = rep.controls.abs_tol
        d["t_max"] = rep.controls.t_max
        d["t0"] = rep.controls.t0
    if rep.residual_norm is not None:
        d["residual_norm"] = rep.residual_norm
    if rep.energy is not None:
        d["energy"] = rep.energy
    if rep.profile is not None:
        g = rep.profile
        d.update(t_graft=g.t_graft, t_report=g.t_report,
                 f_rate=g.f_fit.rate, f_amplitude=g.f_fit.amplitude,
                 higgs_rate=g.higgs_fit.rate, higgs_amplitude=g.higgs_fit.amplitude,
                 mismatch_f=g.mismatch_f, mismatch_rho=g.mismatch_rho)
    if rep.audit is not None:
        d["audit_passes"] = rep.audit.passes
        for key, value in rep.audit.worst_margins.items():
            d["audit_" + key] = value
    return d


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _profile_table(grafted, step: float) -> list:
    # Snap the step so the grid lands exactly on t_report; a uniform grid
    # lets the CSV be fed straight back into residual_norm.
    t_lo = grafted.base.ts[0]
    span = grafted.t_report - t_lo
    n = max(int(round(span / step)), 4)
    h = span / n
    return [grafted.state_at(t_lo + i * h) for i in range(n + 1)]


def _profile_csv(states) -> str:
    lines = ["t,f,fp,rho,rhop"]
    for s in states:
        lines.append(",".join(_fmt(v) for v in (s.t, s.f, s.fp, s.rho, s.rhop)))
    return "\n".join(lines) + "\n"


def _cmd_solve(ns: argparse.Namespace, parser) -> int:
    if ns.out:
        try:
            os.makedirs(ns.out, exist_ok=True)
        except OSError as exc:
            print(f"monopole solve: cannot create {ns.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        ns.report_out = os.path.join(ns.out, "report.json")
        ns.profile_out = os.path.join(ns.out, "profile.csv")
    report, _ = _run_solve(ns, parser)
    d = _report_dict(report)
    csv_text = None
    if ns.profile_out and report.profile is not None:
        states = _profile_table(report.profile, ns.grid_step)
        csv_text = _profile_csv(states)
        # Residual of the samples as written, so the CSV can be re-read and
        # checked against the report without touching the solver state.
        d["profile_residual"] = analysis.residual_norm(
            (tuple(s.t for s in states), tuple(s.f for s in states),
             tuple(s.rho for s in states)), lambda_hat=report.lambda_hat)
    text = json.dumps(d, sort_keys=True, indent=2) + "\n"
    try:
        _write_text(ns.report_out, text)
        if csv_text is not None:
            _write_text(ns.profile_out, csv_text)
    except OSError as exc:
        print(f"monopole solve: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"alpha_star_hat = {_fmt(report.alpha_star_hat)}  "
          f"beta_star_hat = {_fmt(report.beta_star_hat)}  "
          f"converged = {report.converged}")
    if not report.converged:
        return EXIT_SOLVE
    if report.audit is not None and not report.audit.passes:
        print("monopole solve: converged but the monotonicity audit failed",
              file=sys.stderr)
        return EXIT_VALIDATE
    return EXIT_OK


def _cmd_sweep(ns: argparse.Namespace, parser) -> int:
    def grid(spec, lo, hi, count, name):
        if spec:
            try:
                return [float(v) for v in spec.split(",")]
            except ValueError:
                parser.error(f"--{name}s must be a comma-separated float list")
        if lo is None or hi is None:
            parser.error(f"either --{name}s or --{name}-min/--{name}-max is required")
        if count < 2 or hi <= lo:
            parser.error(f"--{name}-count must be >= 2 with max > min")
        return [lo + (hi - lo) * i / (count - 1) for i in range(count)]

    alphas = grid(ns.alphas, ns.alpha_min, ns.alpha_max, ns.alpha_count, "alpha")
    betas = grid(ns.betas, ns.beta_min, ns.beta_max, ns.beta_count, "beta")
    workers = ns.workers
    if workers is None:
        workers = int(os.environ.get("MONOPOLE_THREADS", "1"))
    grid_out = sweep(alphas, betas, ns.lambda_hat,
                     controls=_controls_from(ns), workers=workers)
    lines = ["alpha,beta,outcome,t_event"]
    for a, b, tag, t_event in grid_out.rows():
        t_txt = "" if t_event is None else _fmt(t_event)
        lines.append(f"{_fmt(a)},{_fmt(b)},{tag},{t_txt}")
    try:
        _write_text(ns.out, "\n".join(lines) + "\n")
    except OSError as exc:
        print(f"monopole sweep: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"swept {len(alphas)}x{len(betas)} points at lambda_hat = "
          f"{_fmt(ns.lambda_hat)}")
    return EXIT_OK


def _cmd_validate(ns: argparse.Namespace, parser) -> int:
    if ns.mutate_rhs_sign:
        # Self-check hook: corrupt the integrator's derivative and prove the
        # validation notices.  Restored before returning.
        from . import integrator as _integrator
        orig = _integrator._rhs

        def _flipped(t, f, fp, rho, rhop, lam):
            d = orig(t, f, fp, rho, rhop, lam)
            return (d[0], -d[1], d[2], d[3])

        _integrator._rhs = _flipped
        try:
            return _validate_checks(ns, parser)
        finally:
            _integrator._rhs = orig
    return _validate_checks(ns, parser)


def _validate_checks(ns: argparse.Namespace, parser) -> int:
    if ns.quick:
        ns.tol_alpha = max(ns.tol_alpha, 1e-6)
        ns.tol_beta = max(ns.tol_beta, 1e-6)
        ns.no_polish = True
    ns.lambda_hat, ns.lam, ns.g0, ns.rho0 = 0.0, None, None, None
    try:
        report, _ = _run_solve(ns, parser)
    except MonopoleError as exc:
        print(f"FAIL solve raised: {exc}")
        return EXIT_VALIDATE
    loose = 100.0 if ns.quick else 1.0
    thr_param = ns.param_tol * loose
    thr_field = ns.field_tol * loose

    checks = [
        ("alpha_star_hat vs 1/6", abs(report.alpha_star_hat - 1.0 / 6.0), thr_param),
        ("beta_star_hat vs 1/3", abs(report.beta_star_hat - 1.0 / 3.0), thr_param),
    ]
    if report.profile is not None:
        worst_f = worst_rho = 0.0
        for t in (0.5, 1.0, 2.0, 5.0):
            got = report.profile.state_at(t)
            exact = ps_exact(t)
            worst_f = max(worst_f, abs(got.f - exact.f))
            worst_rho = max(worst_rho, abs(got.rho - exact.rho))
        checks.append(("max |f - exact| at probe radii", worst_f, thr_field))
        checks.append(("max |rho - exact| at probe radii", worst_rho, thr_field))
        rate_tol = 0.02 * (10.0 if ns.quick else 1.0)
        checks.append(("f decay rate vs 1",
                       abs(report.profile.f_fit.rate - 1.0), rate_tol))
        checks.append(("Higgs gap rate vs 0 (1/t tail)",
                       abs(report.profile.higgs_fit.rate), rate_tol))
        # The massless Higgs channel has no restoring term, so the probe on
        # a lambda_hat = 0 profile must report no zero; the flat-background
        # probe pins the machinery against the tan u = u root.
        flat = analysis.linearized_probe(None)
        checks.append(("flat probe zero vs 4.4934",
                       abs((flat.first_zero or math.inf) - 4.4934094579090642),
                       1e-3))
        profile_probe = analysis.linearized_probe(report.profile)
        if profile_probe.first_zero is not None:
            print("FAIL massless-channel probe reported a spurious zero")
            failed_probe = True
        else:
            print("PASS massless-channel probe reports no zero")
            failed_probe = False
    if report.energy is not None:
        checks.append(("energy vs 1", abs(report.energy - 1.0), ns.energy_tol))
    if report.residual_norm is not None and not ns.quick:
        checks.append(("residual sup-norm", report.residual_norm, 1e-6))

    failed = not report.converged and not ns.quick
    if failed:
        print("FAIL solve did not converge")
    if report.profile is not None:
        failed = failed or failed_probe
    if report.audit is not None:
        ok = report.audit.passes
        failed = failed or not ok
        print(f"{'PASS' if ok else 'FAIL'} monotonicity audit")
    for name, value, threshold in checks:
        ok = value < threshold
        failed = failed or not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {_fmt(value)} "
              f"(threshold {_fmt(threshold)})")
    return EXIT_VALIDATE if failed else EXIT_OK


def _cmd_probe(ns: argparse.Namespace, parser) -> int:
    if ns.flat:
        result = analysis.linearized_probe(None, u_end=ns.u_end)
    else:
        report, _ = _run_solve(ns, parser)
        if report.profile is None:
            print("monopole probe: solve produced no profile", file=sys.stderr)
            return EXIT_SOLVE
        result = analysis.linearized_probe(report.profile, u_end=ns.u_end)
    zero = "none" if result.first_zero is None else _fmt(result.first_zero)
    print(f"first_zero = {zero}  mass_term = {result.mass_term}")
    return EXIT_OK


def _cmd_series(ns: argparse.Namespace, parser) -> int:
    point = ShootPoint(alpha=ns.alpha, beta=ns.beta)
    state = initial_state(point, ns.lambda_hat, ns.t0)
    print("t,f,fp,rho,rhop")
    print(",".join(_fmt(v) for v in (state.t, state.f, state.fp,
                                     state.rho, state.rhop)))
    if ns.picard:
        hist = picard_verify(point, ns.lambda_hat, n_iters=ns.picard_iters)
        ratios = ", ".join(_fmt(r) for r in hist.ratios)
        print(f"picard s_max = {_fmt(hist.s_max)}  ratios = [{ratios}]")
        print(f"picard f({_fmt(hist.t_end)}) = {_fmt(hist.f_end)}  "
              f"rho = {_fmt(hist.rho_end)}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="monopole",
                     description="Shooting solver for the static monopole profile")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the boundary value problem",
                       parents=[], conflict_handler="resolve")
    _add_solve_options(p)
    p.add_argument("--report-out", default="-", help="JSON report path ('-' stdout)")
    p.add_argument("--profile-out", default=None, help="profile CSV path")
    p.add_argument("--out", default=None,
                   help="directory shorthand: writes report.json and profile.csv")
    p.add_argument("--grid-step", type=float, default=1e-2)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="classify outcomes on a parameter grid")
    p.add_argument("--lambda-hat", type=float, required=True)
    p.add_argument("--alphas", default=None, help="comma-separated alpha values")
    p.add_argument("--alpha-min", type=float, default=None)
    p.add_argument("--alpha-max", type=float, default=None)
    p.add_argument("--alpha-count", type=int, default=5)
    p.add_argument("--betas", default=None, help="comma-separated beta values")
    p.add_argument("--beta-min", type=float, default=None)
    p.add_argument("--beta-max", type=float, default=None)
    p.add_argument("--beta-count", type=int, default=5)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--t-max", type=float, default=12.0)
    p.add_argument("--t0", type=float, default=DEFAULT_T0)
    p.add_argument("--workers", type=int, default=None,
                   help="process count (default MONOPOLE_THREADS or 1)")
    p.add_argument("--out", default="-", help="CSV output path ('-' stdout)")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate",
                       help="solve at lambda_hat = 0 and compare to closed form")
    _add_solve_options(p)
    p.add_argument("--quick", action="store_true",
                   help="coarse tolerances, no polish, widened thresholds")
    p.add_argument("--param-tol", type=float, default=1e-6)
    p.add_argument("--field-tol", type=float, default=1e-5)
    p.add_argument("--energy-tol", type=float, default=1e-3)
    p.add_argument("--mutate-rhs-sign", action="store_true",
                   help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("probe", help="l = 1 angular fluctuation probe")
    _add_solve_options(p)
    p.add_argument("--flat", action="store_true",
                   help="probe the flat background p = 1 instead of solving")
    p.add_argument("--u-end", type=float, default=8.0)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("series", help="print the series handoff state")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--lambda-hat", type=float, default=0.0)
    p.add_argument("--t0", type=float, default=DEFAULT_T0)
    p.add_argument("--picard", action="store_true",
                   help="also report the origin-layer contraction ratios")
    p.add_argument("--picard-iters", type=int, default=6)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_series)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        _apply_config(ns, argv)
    except OSError as exc:
        print(f"monopole: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except MonopoleError as exc:
        print(f"monopole: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return ns.func(ns, parser)
    except MonopoleError as exc:
        print(f"monopole {ns.command}: {exc}", file=sys.stderr)
        return EXIT_SOLVE


if __name__ == "__main__":
    sys.exit(main())
