"""Command-line front end.

Exit codes: 0 success, 2 no solution, 3 verification failure, 64 config
error, 66 missing or unreadable input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import artifacts as art
from .config import DEFAULTS, ConfigError, RunConfig, dumps_toml, load_config
from .continuation import (
    NotCauchyError,
    blowup_family,
    eps_continuation,
    lambda_sweep,
    largest_converged_lambda,
    mu_probe,
    singular_limit,
)
from .problem import check_hypothesis_H
from .shooting import ShootingError, brackets_from_scan, first_eigenpair, scan, solve_bvp
from .verify import apriori_bound, blowup_rescale, check_cone_bound, verify_profile

log = logging.getLogger("singular_plap")

EXIT_OK, EXIT_NO_SOLUTION, EXIT_VERIFY, EXIT_CONFIG, EXIT_NOINPUT = 0, 2, 3, 64, 66


def _out(args) -> Path:
    d = Path(getattr(args, "out", None) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _profile_svg(profile, title: str) -> str:
    return art.svg_plot([(profile.r, profile.u, "u(r)")], title=title, xlabel="r", ylabel="u")


def _eigen(cfg: RunConfig):
    P = cfg.problem
    return first_eigenpair(P.p, P.dim_N, P.radius_R, cfg.ctrl)


def _full_report(profile, cfg: RunConfig):
    return verify_profile(profile, cfg.problem, _eigen(cfg), int(cfg.raw["verify"]["test_count"]))


def cmd_solve(cfg: RunConfig, args) -> int:
    P = cfg.problem
    out = _out(args)
    grid, misses, terms = scan(P, *cfg.scan, ctrl=cfg.ctrl, n_jobs=args.threads)
    art.write_shots_csv(out / "scan.csv", grid, misses, terms)
    brackets = brackets_from_scan(grid, misses)
    if not brackets:
        print("no solution: the miss function has no sign change in the scan range")
        return EXIT_NO_SOLUTION
    branch = int(cfg.raw["solve"]["branch"])
    if not 0 <= branch < len(brackets):
        print(f"no solution: branch {branch} requested, {len(brackets)} found")
        return EXIT_NO_SOLUTION
    try:
        prof = solve_bvp(P, brackets[branch], cfg.ctrl)
    except ShootingError as exc:
        print(f"no solution: {exc}")
        return EXIT_NO_SOLUTION
    art.write_profile_csv(out / "profile.csv", prof)
    (out / "profile.svg").write_text(_profile_svg(prof, f"a* = {prof.a:.10g}"))
    rep = _full_report(prof, cfg)
    (out / "report.json").write_text(rep.to_json())
    print(f"a* = {art.fmt(prof.a)}  ({len(brackets)} bracket(s))  report: "
          f"{'pass' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_verify(cfg: RunConfig, args) -> int:
    path = Path(args.profile)
    try:
        prof = art.read_profile_csv(path, cfg.problem)
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    rep = _full_report(prof, cfg)
    text = rep.to_json()
    if getattr(args, "out", None):
        (_out(args) / "report.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_sweep(cfg: RunConfig, args) -> int:
    lambdas = [float(x) for x in cfg.raw["sweep"]["lambdas"]]
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ConfigError("sweep.lambdas must be ascending")
    out = _out(args)
    records = lambda_sweep(cfg.problem, lambdas, cfg.scan, cfg.ctrl, n_jobs=args.threads)
    art.write_bifurcation_csv(out / "bifurcation.csv", records)
    series = []
    for b in sorted({r.branch for r in records if r.converged}):
        rs = [r for r in records if r.branch == b]
        series.append(([r.param_value for r in rs], [r.sup_norm for r in rs], f"branch {b}"))
    (out / "bifurcation.svg").write_text(art.svg_plot(
        series, title="sup norm against lambda", xlabel="lambda", ylabel="log10 sup|u|",
        logy=True, markers=True))
    lam_max = largest_converged_lambda(records)
    print(f"{sum(r.converged for r in records)} converged record(s); "
          f"largest lambda with a solution: {lam_max}")
    return EXIT_OK


def cmd_continue(cfg: RunConfig, args) -> int:
    c = cfg.raw["continuation"]
    out = _out(args)
    path = eps_continuation(cfg.problem, float(c["eps0"]), float(c["factor"]), int(c["steps"]),
                            cfg.scan, cfg.ctrl)
    art.write_eps_path_csv(out / "eps_path.csv", path)
    if not path.profiles:
        print(f"no solution: {path.diagnostic}")
        return EXIT_NO_SOLUTION
    for e, d in zip(path.eps_values[1:], path.increments):
        print(f"eps={e:.6g}  cauchy increment={d:.6e}")
    if path.diagnostic or len(path) < 3:
        print(f"path incomplete: {path.diagnostic or 'fewer than 3 steps'}")
        return EXIT_VERIFY
    tol = float(c["tol_rel"]) * path.profiles[-1].sup_norm
    try:
        limit = singular_limit(path, tol)
    except NotCauchyError as exc:
        print(f"not converged: {exc}")
        return EXIT_VERIFY
    art.write_profile_csv(out / "limit_profile.csv", limit)
    (out / "limit_profile.svg").write_text(_profile_svg(limit, f"eps -> 0 limit, a* = {limit.a:.10g}"))
    zero = cfg.problem.with_(eps=0.0)
    rep = verify_profile(limit, zero, _eigen(cfg), int(cfg.raw["verify"]["test_count"]))
    rep.add("eps_ordering", min(o.worst_gap for o in path.ordering),
            -1e-9 * limit.sup_norm, path.ordered)
    sup, stable = apriori_bound(path.profiles)
    rep.add("apriori_bound", sup, 1e-3, stable)
    c_est = check_cone_bound(limit)
    rep.add("cone_constant", c_est, 0.0, c_est > 0.0)
    (out / "limit_report.json").write_text(rep.to_json())
    print(f"limit a* = {art.fmt(limit.a)}  report: {'pass' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_eigen(cfg: RunConfig, args) -> int:
    ep = _eigen(cfg)
    out = _out(args)
    art.write_eigen_csv(out / "eigen.csv", ep)
    print(f"lambda1 = {art.fmt(ep.lambda1)}")
    return EXIT_OK


def cmd_probe(cfg: RunConfig, args) -> int:
    mus = [float(m) for m in cfg.raw["probe"]["mus"]]
    if any(b <= a for a, b in zip(mus, mus[1:])):
        raise ConfigError("probe.mus must be strictly ascending")
    out = _out(args)
    rows = mu_probe(cfg.problem, mus, cfg.scan, cfg.ctrl, _eigen(cfg))
    art.write_mu_probe_csv(out / "mu_probe.csv", rows)
    ok = True
    for row in rows:
        pic = all(pc.passed for pc in row.picone)
        ok &= row.consistent and pic
        print(f"mu={row.mu:g}  exists={row.exists}  k={row.k:.6g}  "
              f"{'ok' if row.consistent and pic else 'INCONSISTENT'}")
    none = [row.mu for row in rows if not row.exists]
    print(f"smallest mu without a solution: {none[0] if none else 'none in range'}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_blowup(cfg: RunConfig, args) -> int:
    b = cfg.raw["blowup"]
    heights = [float(h) for h in b["heights"]]
    if len(heights) < 2:
        raise ConfigError("blowup.heights needs at least two values")
    if any(y <= x for x, y in zip(heights, heights[1:])):
        raise ConfigError("blowup.heights must be strictly increasing")
    P = cfg.problem
    out = _out(args)
    fam = blowup_family(P, heights, float(b["x_max"]), cfg.ctrl)
    res = blowup_rescale(fam, P, int(cfg.raw["verify"]["test_count"]))
    art.write_rescaled_csv(out / "rescaled_profiles.csv", res.rescaled)
    v0_ok = all(rp.v.u[0] == 1.0 and rp.v.u.max() <= 1.0 + 1e-12 for rp in res.rescaled)
    pure = not P.singular and P.f.is_zero and P.mu == 0.0
    if pure:
        trend_ok = all(r < 1e-6 for r in res.residuals)
    elif P.singular:
        # the singular contribution at the centre must fall >= 10x per decade of H
        trend_ok = all(s2 * (h2 / h1) <= s1 for (h1, s1), (h2, s2) in zip(
            zip(heights, res.singular_center), zip(heights[1:], res.singular_center[1:])))
    else:
        trend_ok = res.residuals_decreasing
    doc = {
        "heights": heights,
        "scales": [rp.M for rp in res.rescaled],
        "v0": [float(rp.v.u[0]) for rp in res.rescaled],
        "window": res.window,
        "residuals": res.residuals,
        "residuals_lambda_free": res.residuals_lambda_free,
        "residuals_decreasing": res.residuals_decreasing,
        "singular_center": res.singular_center,
        "f_center": res.f_center,
        "pure_power": pure,
        "pass": bool(v0_ok and trend_ok),
    }
    (out / "blowup_report.json").write_text(json.dumps(doc, indent=2) + "\n")
    (out / "rescaled_profiles.svg").write_text(art.svg_plot(
        [(rp.v.r, rp.v.u, f"H={rp.H:g}") for rp in res.rescaled],
        title="rescaled profiles v(x) = u(Mx)/H", xlabel="x", ylabel="v"))
    for h, r in zip(heights, res.residuals):
        print(f"H={h:g}  residual={r:.3e}")
    return EXIT_OK if doc["pass"] else EXIT_VERIFY


def cmd_check_f(cfg: RunConfig, args) -> int:
    rep = check_hypothesis_H(cfg.problem.f, cfg.problem.q)
    print(json.dumps({"pass": rep.passed, "structural": rep.structural_ok,
                      "positivity": rep.positivity_ok, "min_t": rep.min_t,
                      "min_value": rep.min_value, "witness_t": rep.witness_t}, indent=2))
    return EXIT_OK if rep.passed else EXIT_VERIFY


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "continue": cmd_continue,
    "eigen": cmd_eigen,
    "verify": cmd_verify,
    "probe": cmd_probe,
    "blowup": cmd_blowup,
    "check-f": cmd_check_f,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                        help="TOML configuration (defaults are used for missing keys)")
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS,
                        help="output directory (default: current directory)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker processes for scans and sweeps")
    common.add_argument("--print-defaults", action="store_true", default=argparse.SUPPRESS,
                        help="print the default configuration and exit")
    parser = argparse.ArgumentParser(
        prog="singular-plap", parents=[common],
        description="Radial solver for -Delta_p u = lambda(u^-delta + u^q + f(u)) + mu on a ball.")
    sub = parser.add_subparsers(dest="command")
    for name, help_ in (
        ("solve", "solve the Dirichlet problem for one parameter set"),
        ("sweep", "lambda sweep, writes bifurcation.csv"),
        ("continue", "eps -> 0 continuation, writes eps_path.csv"),
        ("eigen", "first eigenpair of the p-Laplacian on the ball"),
        ("verify", "re-run the verification checks on a stored profile"),
        ("probe", "mu probe, writes mu_probe.csv"),
        ("blowup", "rescale a family of large solutions"),
        ("check-f", "check the growth hypothesis on f"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name == "verify":
            sp.add_argument("profile", help="profile CSV with header r,u,du")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "print_defaults", False):
        sys.stdout.write(dumps_toml(DEFAULTS))
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG
    args.threads = max(1, int(getattr(args, "threads", 1)))
    try:
        cfg = load_config(getattr(args, "config", None))
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
