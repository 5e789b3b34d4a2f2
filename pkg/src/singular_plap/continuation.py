"""Parameter paths: epsilon to the singular limit, lambda sweeps, mu probes."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .problem import ProblemParams, picone_threshold
from .radial_ode import IntegratorControl, RadialProfile
from .shooting import (
    DEFAULT_SCAN,
    EigenPair,
    ShootingError,
    bracket_scan,
    first_eigenpair,
    shoot,
    solve_bvp,
)
from .verify import (
    OrderingResult,
    PiconeResult,
    check_cone_bound,
    eps_monotonicity,
    picone_check,
    weak_residual,
)

__all__ = [
    "SweepRecord",
    "EpsPath",
    "MuProbeRow",
    "NotCauchyError",
    "eps_continuation",
    "singular_limit",
    "lambda_sweep",
    "largest_converged_lambda",
    "mu_probe",
    "sup_distance",
    "blowup_family",
]

log = logging.getLogger(__name__)


class NotCauchyError(RuntimeError):
    def __init__(self, msg: str, increments: list[float]):
        super().__init__(msg)
        self.increments = increments


@dataclass
class SweepRecord:
    param_value: float
    a_star: float
    sup_norm: float
    converged: bool
    weak_residual: float
    branch: int = -1
    profile: RadialProfile | None = field(default=None, repr=False, compare=False)


@dataclass
class EpsPath:
    eps_values: np.ndarray
    profiles: list[RadialProfile]
    increments: list[float]
    ordering: list[OrderingResult]
    limit_profile: RadialProfile | None = None
    diagnostic: str | None = None

    @property
    def a_stars(self) -> list[float]:
        return [pr.a for pr in self.profiles]

    @property
    def sup_norms(self) -> list[float]:
        return [pr.sup_norm for pr in self.profiles]

    @property
    def ordered(self) -> bool:
        return all(o.passed for o in self.ordering)

    def __len__(self):
        return len(self.profiles)


def sup_distance(u: RadialProfile, v: RadialProfile) -> float:
    """Max ``|u - v|`` over the radii both profiles share."""
    common, i, j = np.intersect1d(u.r, v.r, assume_unique=True, return_indices=True)
    if common.size < 2:
        raise ValueError("profiles share no grid")
    return float(np.max(np.abs(u.u[i] - v.u[j])))


def _local_bracket(params, a0, ctrl, rel=1e-3, grow=2.0, max_expand=40):
    """Grow a bracket around ``a0`` in both directions until the miss changes sign."""
    m0 = shoot(a0, params, ctrl).miss
    if m0 == 0.0:
        return a0, a0
    step = rel
    for _ in range(max_expand):
        for a in (a0 * (1.0 + step), a0 / (1.0 + step)):
            m = shoot(a, params, ctrl).miss
            if math.isfinite(m) and (m > 0) != (m0 > 0):
                return (min(a, a0), max(a, a0))
        step *= grow
    return None


def _solve_near(params, a_prev, ctrl, scan):
    br = _local_bracket(params, a_prev, ctrl)
    if br is None:
        brackets = bracket_scan(params, *scan, ctrl=ctrl)
        if not brackets:
            return None
        br = min(brackets, key=lambda b: abs(math.log(math.sqrt(b[0] * b[1]) / a_prev)))
    return solve_bvp(params, br, ctrl)


def eps_continuation(params: ProblemParams, eps0: float = 0.1, factor: float = 0.25,
                     n: int = 10, scan: tuple = DEFAULT_SCAN,
                     ctrl: IntegratorControl = IntegratorControl()) -> EpsPath:
    """Follow the smallest-amplitude solution along ``eps_k = eps0 * factor^k``.

    The first step scans for brackets; later steps grow a local bracket around
    the previous centre value.  Adjacent profiles are checked for the
    ordering ``u_{eps_(k+1)} >= u_{eps_k}``.  A failed solve truncates the
    path and sets ``diagnostic``.
    """
    if not eps0 > 0.0 or n < 1:
        raise ValueError("need eps0 > 0 and n >= 1")
    if not 0.0 < factor <= 1.0:
        raise ValueError("factor must lie in (0, 1]")
    eps_values = eps0 * factor ** np.arange(n)
    profiles: list[RadialProfile] = []
    increments: list[float] = []
    ordering: list[OrderingResult] = []
    diagnostic = None
    for k, eps in enumerate(eps_values):
        pk = params.with_(eps=float(eps))
        try:
            if not profiles:
                brackets = bracket_scan(pk, *scan, ctrl=ctrl)
                if not brackets:
                    diagnostic = f"no bracket at eps={eps:.6g}"
                    break
                prof = solve_bvp(pk, brackets[0], ctrl)
            else:
                prof = _solve_near(pk, profiles[-1].a, ctrl, scan)
                if prof is None:
                    diagnostic = f"lost the branch at eps={eps:.6g}"
                    break
        except ShootingError as exc:
            diagnostic = f"unconverged at eps={eps:.6g}: {exc}"
            break
        if profiles:
            increments.append(sup_distance(prof, profiles[-1]))
            ordering.append(eps_monotonicity(prof, profiles[-1]))
        profiles.append(prof)
    if diagnostic:
        log.warning("eps path truncated: %s", diagnostic)
    return EpsPath(eps_values=eps_values[: len(profiles)], profiles=profiles,
                   increments=increments, ordering=ordering, diagnostic=diagnostic)


def singular_limit(path: EpsPath, tol: float | None = None) -> RadialProfile:
    """Declare the path converged when its last increment is below ``tol``.

    ``tol`` defaults to ``1e-6`` times the last sup norm.  The last profile is
    returned, with the measured cone constant in ``meta["cone_constant"]``.
    """
    if len(path) < 3:
        raise ValueError("need at least three profiles")
    last = path.profiles[-1]
    tol = 1e-6 * last.sup_norm if tol is None else tol
    inc = path.increments[-1]
    if not inc < tol:
        raise NotCauchyError(f"last increment {inc:.3e} exceeds tolerance {tol:.3e}",
                             list(path.increments))
    last.meta["cone_constant"] = check_cone_bound(last)
    path.limit_profile = last
    return last


def _sweep_point(args):
    lam, params, scan, ctrl = args
    pl = params.with_(lam=float(lam))
    out = []
    for br in bracket_scan(pl, *scan, ctrl=ctrl):
        try:
            prof = solve_bvp(pl, br, ctrl)
        except ShootingError:
            continue
        out.append(SweepRecord(float(lam), prof.a, prof.sup_norm, True,
                               weak_residual(prof, pl), profile=prof))
    if not out:
        out.append(SweepRecord(float(lam), math.nan, math.nan, False, math.nan))
    return out


def lambda_sweep(params: ProblemParams, lambdas, scan: tuple = DEFAULT_SCAN,
                 ctrl: IntegratorControl = IntegratorControl(),
                 n_jobs: int = 1) -> list[SweepRecord]:
    """Solve for every bracket at each lambda and label branches.

    A solution joins the branch of the previous lambda whose centre value is
    nearest (each branch used once, ties to the smaller ``a*``); unmatched
    solutions open new branches.  A lambda without solutions gives one
    unconverged record with ``branch = -1``.
    """
    lambdas = [float(x) for x in lambdas]
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be ascending")
    if any(x <= 0 for x in lambdas):
        raise ValueError("lambdas must be positive")
    jobs = [(lam, params, scan, ctrl) for lam in lambdas]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            per_lambda = list(ex.map(_sweep_point, jobs))
    else:
        per_lambda = [_sweep_point(j) for j in jobs]

    records: list[SweepRecord] = []
    active: dict[int, float] = {}
    next_id = 0
    for recs in per_lambda:
        conv = sorted((r for r in recs if r.converged), key=lambda r: r.a_star)
        used: set[int] = set()
        new_active = {}
        for rec in conv:
            cands = [(abs(math.log(rec.a_star / a)), a, b) for b, a in active.items() if b not in used]
            if cands:
                _, _, b = min(cands)
            else:
                b = next_id
                next_id += 1
            used.add(b)
            rec.branch = b
            new_active[b] = rec.a_star
        if conv:
            active = new_active
        records.extend(conv if conv else recs)
    return records


def largest_converged_lambda(records: list[SweepRecord]) -> float | None:
    vals = [r.param_value for r in records if r.converged]
    return max(vals) if vals else None


@dataclass
class MuProbeRow:
    mu: float
    exists: bool
    k: float
    lambda1: float
    profiles: list[RadialProfile] = field(default_factory=list, repr=False)
    picone: list[PiconeResult] = field(default_factory=list, repr=False)

    @property
    def consistent(self) -> bool:
        """False when a solution coexists with ``k > lambda1 (1 + 1e-6)``."""
        return not (self.exists and self.k > self.lambda1 * (1.0 + 1e-6))


def mu_probe(params: ProblemParams, mus, scan: tuple = DEFAULT_SCAN,
             ctrl: IntegratorControl = IntegratorControl(),
             eigenpair: EigenPair | None = None) -> list[MuProbeRow]:
    """Existence of solutions as ``mu`` grows, next to the Picone constant ``k(mu)``."""
    if eigenpair is None:
        eigenpair = first_eigenpair(params.p, params.dim_N, params.radius_R)
    rows = []
    for mu in mus:
        pm = params.with_(mu=float(mu))
        profs = []
        for br in bracket_scan(pm, *scan, ctrl=ctrl):
            try:
                profs.append(solve_bvp(pm, br, ctrl))
            except ShootingError:
                continue
        k = picone_threshold(pm) if (pm.lam > 0.0 or pm.mu > 0.0) else math.nan
        pic = [picone_check(pr, eigenpair, pm) for pr in profs]
        row = MuProbeRow(mu=float(mu), exists=bool(profs), k=k,
                         lambda1=eigenpair.lambda1, profiles=profs, picone=pic)
        if not row.consistent:
            log.error("mu=%g: solution found although k=%g > lambda1=%g", mu, k, row.lambda1)
        rows.append(row)
    return rows


def blowup_family(params: ProblemParams, heights, x_max: float = 40.0,
                  ctrl: IntegratorControl = IntegratorControl()) -> list[RadialProfile]:
    """Shots ``u(0) = H`` on balls of radius ``x_max * M(H)``, ``M^p = H^(p-1-q)``.

    Scaling the ball with ``M`` puts every rescaled profile on the same
    ``x``-grid; each shot stops at its first zero or at the ball radius.
    """
    p, q = params.p, params.q
    out = []
    for H in heights:
        M = float(H) ** ((p - 1.0 - q) / p)
        out.append(shoot(float(H), params.with_(radius_R=x_max * M), ctrl).profile)
    return out
