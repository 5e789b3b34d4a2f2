"""Shooting on the centre value and the first radial eigenpair.

The miss function ``m(a)`` is ``u(R) > 0`` when the profile reaches the
boundary without vanishing and ``r_cross - R < 0`` when it vanishes early, so
a sign change of ``m`` brackets a Dirichlet solution.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .problem import ProblemParams
from .radial_ode import (
    IntegratorControl,
    RadialProfile,
    Termination,
    integrate_profile,
    integrate_radial,
    phi_p,
)

__all__ = [
    "ShotResult",
    "EigenPair",
    "ShootingError",
    "shoot",
    "miss_of",
    "bracket_scan",
    "brackets_from_scan",
    "scan",
    "solve_bvp",
    "first_eigenpair",
]

log = logging.getLogger(__name__)

DEFAULT_SCAN = (1e-3, 1e3, 64)


class ShootingError(RuntimeError):
    """Root finding on the centre value failed; ``best`` holds the best iterate."""

    def __init__(self, msg: str, best: "ShotResult | None" = None):
        super().__init__(msg)
        self.best = best


@dataclass
class ShotResult:
    a: float
    miss: float
    profile: RadialProfile

    @property
    def terminated(self) -> Termination:
        return self.profile.terminated


def miss_of(profile: RadialProfile, R: float) -> float:
    if profile.terminated is Termination.DIVERGED:
        return math.inf
    if profile.terminated is Termination.HIT_ZERO:
        return profile.r_cross - R
    return float(profile.u[-1])


def shoot(a: float, params: ProblemParams,
          ctrl: IntegratorControl = IntegratorControl()) -> ShotResult:
    prof = integrate_profile(a, params, ctrl)
    return ShotResult(a=a, miss=miss_of(prof, params.radius_R), profile=prof)


def _shot_row(args):
    a, params, ctrl = args
    s = shoot(a, params, ctrl)
    return s.miss, s.terminated.value


def scan(params: ProblemParams, a_min: float, a_max: float, n: int,
         ctrl: IntegratorControl = IntegratorControl(), n_jobs: int = 1):
    """Shoot on a log-spaced grid; returns ``(a_grid, misses, terminations)``."""
    if not 0.0 < a_min < a_max:
        raise ValueError("need 0 < a_min < a_max")
    if n < 2:
        raise ValueError("need n >= 2")
    grid = np.geomspace(a_min, a_max, n)
    jobs = [(float(a), params, ctrl) for a in grid]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            rows = list(ex.map(_shot_row, jobs))
    else:
        rows = [_shot_row(j) for j in jobs]
    misses = np.array([m for m, _ in rows])
    return grid, misses, [t for _, t in rows]


def bracket_scan(params: ProblemParams, a_min: float = DEFAULT_SCAN[0],
                 a_max: float = DEFAULT_SCAN[1], n: int = DEFAULT_SCAN[2],
                 ctrl: IntegratorControl = IntegratorControl(),
                 n_jobs: int = 1) -> list[tuple[float, float]]:
    """Adjacent log-grid pairs ``[a_i, a_{i+1}]`` across which the miss changes sign."""
    grid, misses, _ = scan(params, a_min, a_max, n, ctrl, n_jobs)
    return brackets_from_scan(grid, misses)


def brackets_from_scan(grid, misses) -> list[tuple[float, float]]:
    out = []
    for i in range(len(grid) - 1):
        m0, m1 = misses[i], misses[i + 1]
        if np.isfinite(m0) and np.isfinite(m1) and (m0 > 0) != (m1 > 0):
            out.append((float(grid[i]), float(grid[i + 1])))
    return out


def solve_bvp(params: ProblemParams, bracket: tuple[float, float],
              ctrl: IntegratorControl = IntegratorControl(),
              max_iter: int = 200) -> RadialProfile:
    """Converge the centre value inside ``bracket``.

    Bisection shrinks the bracket to relative width 1e-4, then an Illinois
    (modified regula falsi) iteration on a slope-matched miss polishes it.  Stops once the shot on
    the undershooting side has ``0 <= u(R) < 1e-10 a`` and miss below
    ``1e-10 R``; that profile (``ReachedR``) is returned.
    """
    R = params.radius_R
    lo, hi = bracket
    s_lo, s_hi = shoot(lo, params, ctrl), shoot(hi, params, ctrl)
    for s in (s_lo, s_hi):
        if s.miss == 0.0 and s.terminated is Termination.REACHED_R:
            return s.profile
    if (s_lo.miss > 0) == (s_hi.miss > 0):
        raise ShootingError(f"miss does not change sign on [{lo}, {hi}]")
    pos, neg = (s_lo, s_hi) if s_lo.miss > 0 else (s_hi, s_lo)

    def done(s):
        return (s.terminated is Termination.REACHED_R
                and 0.0 <= s.profile.u[-1] < 1e-10 * s.a
                and abs(s.miss) < 1e-10 * R)

    def smooth(s):
        # r_cross - R times |u'(r_cross)| continues u(R) across the root
        if s.terminated is Termination.HIT_ZERO:
            return s.miss * abs(s.profile.du[-1])
        return s.miss

    fp, fn = smooth(pos), smooth(neg)
    last = None
    for it in range(max_iter):
        if done(pos):
            pos.profile.meta["iterations"] = it
            return pos.profile
        width = abs(pos.a - neg.a)
        if width <= 4 * np.finfo(float).eps * max(pos.a, neg.a):
            break
        if width > 1e-4 * max(pos.a, neg.a) or not np.isfinite(fp):
            a = 0.5 * (pos.a + neg.a)
            last = None
        else:
            a = (pos.a * fn - neg.a * fp) / (fn - fp)
            if not min(pos.a, neg.a) < a < max(pos.a, neg.a):
                a = 0.5 * (pos.a + neg.a)
        s = shoot(a, params, ctrl)
        if s.miss > 0:
            pos, fp = s, smooth(s)
            if last == "pos":
                fn *= 0.5
            last = "pos"
        else:
            neg, fn = s, smooth(s)
            if last == "neg":
                fp *= 0.5
            last = "neg"
    raise ShootingError(
        f"no convergence after {max_iter} iterations (best a={pos.a}, miss={pos.miss})",
        best=pos,
    )


@dataclass
class EigenPair:
    lambda1: float
    phi1: RadialProfile


def first_eigenpair(p: float, N: int, R: float = 1.0,
                    ctrl: IntegratorControl = IntegratorControl()) -> EigenPair:
    """First Dirichlet eigenpair of the radial p-Laplacian on ``B_R``.

    Shoots ``-(r^(N-1) phi_p(phi'))' = L r^(N-1) phi_p(phi)``, ``phi(0) = 1``,
    and root-finds ``L`` on the first-zero miss, which decreases
    strictly in ``L``.
    """
    params = ProblemParams(dim_N=N, p=p, lam=0.0, mu=0.0, radius_R=R, check_window=False)

    def run(L, stop=True):
        c = ctrl if stop else IntegratorControl(**{**ctrl.__dict__, "stop_at_zero": False})
        return integrate_radial(1.0, lambda u: L * phi_p(u, p), params, c)

    def miss(L):
        return miss_of(run(L), R)

    lo, hi = 1e-3, 1e3
    for _ in range(60):
        if miss(lo) > 0:
            break
        lo /= 10.0
    else:
        raise ShootingError("could not bracket the first eigenvalue from below")
    for _ in range(60):
        if miss(hi) < 0:
            break
        hi *= 10.0
    else:
        raise ShootingError("could not bracket the first eigenvalue from above")
    # tighten geometrically so the bracket stays clear of higher eigenvalues
    while hi / lo > 2.0:
        mid = math.sqrt(lo * hi)
        if miss(mid) > 0:
            lo = mid
        else:
            hi = mid
    L = brentq(miss, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    prof = run(L, stop=False)
    u = prof.u.copy()
    if abs(u[-1]) < 1e-6:
        u[-1] = 0.0
    phi1 = RadialProfile(r=prof.r, u=u, du=prof.du, params=params, meta={"lambda1": L})
    return EigenPair(lambda1=L, phi1=phi1)
