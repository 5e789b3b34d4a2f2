"""Radial reduction of the p-Laplacian and its initial-value integration.

For radial ``u`` on a ball, ``-Delta_p u = h(u)`` becomes the first-order
system in the momentum ``w = -r^(N-1) phi_p(u')``::

    u' = -phi_p_inv(w / r^(N-1)),      w' = r^(N-1) h(u),

which never divides by ``phi_p'(u')`` (zero for p > 2, infinite for p < 2 at
the centre).  Integration starts at ``r0 = 1e-6 R`` from a two-term series and
uses a Dormand-Prince 5(4) pair with its fourth-order continuous extension.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .problem import ProblemParams, eval_g

__all__ = [
    "Termination",
    "IntegratorControl",
    "RadialProfile",
    "FluxState",
    "phi_p",
    "phi_p_inv",
    "series_start",
    "integrate_profile",
    "integrate_radial",
    "constant_rhs_oracle",
]


class Termination(str, enum.Enum):
    REACHED_R = "ReachedR"
    HIT_ZERO = "HitZero"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class IntegratorControl:
    """Step-size control and output settings.

    ``atol``/``rtol`` are tighter than the usual 1e-10/1e-8 because the
    epsilon-ordering checks compare neighbouring profiles at 1e-9 of their
    sup norm.
    """

    rtol: float = 1e-11
    atol: float = 1e-14
    r0_frac: float = 1e-6
    n_uniform: int = 2048
    max_steps: int = 200_000
    u_max: float = 1e12
    w_max: float = 1e290
    clamp_frac: float = 0.05
    u_floor_rel: float = 1e-13
    stop_at_zero: bool = True


@dataclass(frozen=True)
class FluxState:
    r: float
    u: float
    w: float


def phi_p(s, p: float):
    """``|s|^(p-2) s`` with ``phi_p(0) = 0``; works on scalars and arrays."""
    if p == 2.0:
        return s
    a = np.abs(s)
    if np.ndim(s) == 0:
        return 0.0 if s == 0 else float(a ** (p - 2.0) * s)
    out = np.zeros_like(a, dtype=float)
    nz = a > 0
    out[nz] = a[nz] ** (p - 2.0) * np.asarray(s)[nz]
    return out


def phi_p_inv(s, p: float):
    """Inverse of :func:`phi_p`: ``|s|^((2-p)/(p-1)) s``."""
    if p == 2.0:
        return s
    e = (2.0 - p) / (p - 1.0)
    a = np.abs(s)
    if np.ndim(s) == 0:
        return 0.0 if s == 0 else float(a ** e * s)
    out = np.zeros_like(a, dtype=float)
    nz = a > 0
    out[nz] = a[nz] ** e * np.asarray(s)[nz]
    return out


def _phi_inv_scalar(s: float, p: float) -> float:
    if p == 2.0 or s == 0.0:
        return s
    return math.copysign(abs(s) ** (1.0 / (p - 1.0)), s)


@dataclass
class RadialProfile:
    """A radial profile sampled on an ascending grid starting at ``r = 0``.

    ``u`` and ``du`` are values and radial derivatives; ``a = u[0]``.  When
    ``terminated`` is ``HitZero`` the last grid point is the located crossing
    radius ``r_cross`` (with ``u = 0`` there).
    """

    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    params: ProblemParams | None = None
    terminated: Termination = Termination.REACHED_R
    r_cross: float | None = None
    reduced_accuracy: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.du = np.asarray(self.du, dtype=float)
        n = len(self.r)
        if n < 2 or len(self.u) != n or len(self.du) != n:
            raise ValueError("r, u, du must share one length >= 2")
        if self.r[0] != 0.0:
            raise ValueError("profile grid must start at r = 0")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("profile grid must be strictly increasing")

    @property
    def a(self) -> float:
        return float(self.u[0])

    center_value = a

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u)))

    @property
    def dim_N(self) -> int:
        if self.params is None:
            raise ValueError("profile has no params; pass dim_N explicitly")
        return self.params.dim_N

    def momentum(self, p: float | None = None, dim_N: int | None = None) -> np.ndarray:
        p = self.params.p if p is None else p
        N = self.dim_N if dim_N is None else dim_N
        return -self.r ** (N - 1) * phi_p(self.du, p)

    def interpolant(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.r, self.u, self.du)

    def derivative_interpolant(self) -> CubicSpline:
        return CubicSpline(self.r, self.du)

    def __call__(self, r):
        return self.interpolant()(r)


# --------------------------------------------------------------------------
# Dormand-Prince 5(4) tableau with Shampine's continuous extension

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40)
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class _Step:
    __slots__ = ("r0", "h", "y0", "Q")

    def __init__(self, r0, h, y0, K):
        self.r0, self.h, self.y0 = r0, h, y0
        self.Q = np.asarray(K).T @ _P  # (2, 4)

    def __call__(self, r):
        x = (np.asarray(r, dtype=float) - self.r0) / self.h
        powers = np.stack([x, x * x, x ** 3, x ** 4])
        return self.y0[:, None] + self.h * (self.Q @ powers)


def series_start(a: float, params: ProblemParams, r0: float,
                 forcing: float | None = None) -> tuple[float, float]:
    """Two-term expansion ``(u(r0), u'(r0))`` about the centre value ``a``.

    With ``G = g(a)`` (or the given ``forcing``)::

        u(r)  ~ a - (G/N)^(1/(p-1)) (p-1)/p r^(p/(p-1))
        u'(r) ~ -(G r / N)^(1/(p-1))
    """
    p, N = params.p, params.dim_N
    G = eval_g(a, params) if forcing is None else forcing
    if G < 0.0:
        raise ValueError(f"negative forcing {G} at the centre")
    if G == 0.0:
        return a, 0.0
    e = 1.0 / (p - 1.0)
    du = -((G * r0 / N) ** e)
    u = a - (G / N) ** e * (p - 1.0) / p * r0 ** (p / (p - 1.0))
    return u, du


def integrate_radial(
    a: float,
    forcing: Callable[[float], float],
    params: ProblemParams,
    ctrl: IntegratorControl = IntegratorControl(),
    r_end: float | None = None,
    singular_zero: bool = False,
) -> RadialProfile:
    """Integrate ``-(r^(N-1) phi_p(u'))' = r^(N-1) forcing(u)`` from the centre.

    ``forcing`` must accept any real ``u`` unless ``singular_zero`` is set, in
    which case it is only called with ``u > 0``: steps are clamped so ``u``
    drops by at most ``ctrl.clamp_frac`` per step, stage values reaching zero
    cause a rejection, and once ``u < u_floor_rel * a`` the crossing is
    extrapolated linearly and flagged ``reduced_accuracy``.
    """
    p, N = params.p, params.dim_N
    R = params.radius_R if r_end is None else r_end
    Nm1 = N - 1
    r0 = ctrl.r0_frac * R
    G = forcing(a)
    u0, du0 = series_start(a, params, r0, forcing=G)
    w0 = G * r0 ** N / N

    def rhs(r, u, w):
        rn = r ** Nm1 if Nm1 else 1.0
        return -_phi_inv_scalar(w / rn, p), rn * forcing(u)

    uniform = np.linspace(0.0, R, ctrl.n_uniform)
    rs = [0.0, r0]
    us = [a, u0]
    dus = [0.0, du0]
    steps: list[_Step] = []

    r, u, w = r0, u0, w0
    k1 = rhs(r, u, w)
    h = r0
    u_floor = ctrl.u_floor_rel * abs(a)
    clamp = singular_zero
    terminated = Termination.REACHED_R
    r_cross = None
    reduced = False
    n_steps = 0

    while r < R:
        n_steps += 1
        if n_steps > ctrl.max_steps:
            terminated = Termination.DIVERGED
            break
        if clamp and u < u_floor:
            slope = k1[0]
            rc = r + u / -slope if slope < 0 else r
            terminated, r_cross, reduced = Termination.HIT_ZERO, min(rc, R), True
            break
        h = min(h, R - r)
        if clamp and k1[0] < 0.0:
            h = min(h, ctrl.clamp_frac * u / -k1[0])
        if R - r - h < 1e-14 * R:
            h = R - r
        K = [k1]
        bad = False
        for s in range(1, 6):
            us_ = u + h * sum(_A[s][j] * K[j][0] for j in range(s))
            ws_ = w + h * sum(_A[s][j] * K[j][1] for j in range(s))
            if clamp and us_ <= 0.0:
                bad = True
                break
            K.append(rhs(r + _C[s] * h, us_, ws_))
        if bad:
            h *= 0.5
            if h < 1e-15 * R:
                terminated, r_cross, reduced = Termination.HIT_ZERO, r, True
                break
            continue
        un = u + h * sum(_B[j] * K[j][0] for j in range(6))
        wn = w + h * sum(_B[j] * K[j][1] for j in range(6))
        if clamp and un <= 0.0:
            h *= 0.5
            continue
        if not (math.isfinite(un) and math.isfinite(wn)):
            terminated = Termination.DIVERGED
            break
        k7 = rhs(r + h, un, wn)
        K.append(k7)
        eu = h * sum(_E[j] * K[j][0] for j in range(7))
        ew = h * sum(_E[j] * K[j][1] for j in range(7))
        su = ctrl.atol + ctrl.rtol * max(abs(u), abs(un))
        sw = ctrl.atol + ctrl.rtol * max(abs(w), abs(wn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ew / sw) ** 2))
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        step = _Step(r, h, np.array([u, w]), K)
        r_new = r + h if h != R - r else R
        crossed = ctrl.stop_at_zero and un <= 0.0
        if crossed:
            ud = lambda x: float(step(x)[0, 0])  # noqa: E731
            if u <= 0.0:
                rc = r
            elif ud(r_new) > 0.0:
                rc = r_new
            else:
                rc = brentq(ud, r, r_new, xtol=1e-16 * R, rtol=1e-15)
            inside = uniform[(uniform > r) & (uniform < rc)]
            if inside.size:
                Y = step(inside)
                rs.extend(inside)
                us.extend(Y[0])
                dus.extend(-phi_p_inv(Y[1] / inside ** Nm1, p))
            if rc > rs[-1]:
                wc = float(step(rc)[1, 0])
                rs.append(rc)
                us.append(0.0)
                dus.append(-_phi_inv_scalar(wc / rc ** Nm1 if Nm1 else wc, p))
            terminated, r_cross = Termination.HIT_ZERO, rc
            break

        inside = uniform[(uniform > r) & (uniform < r_new)]
        if inside.size:
            Y = step(inside)
            rs.extend(inside)
            us.extend(Y[0])
            dus.extend(-phi_p_inv(Y[1] / inside ** Nm1, p))
        r, u, w = r_new, un, wn
        k1 = k7
        rs.append(r)
        us.append(u)
        dus.append(k7[0])
        steps.append(step)
        if abs(u) > ctrl.u_max or abs(w) > ctrl.w_max:
            terminated = Termination.DIVERGED
            break
        h *= min(10.0, 0.9 * err ** -0.2) if err > 0 else 10.0

    rs_a = np.asarray(rs)
    # uniform points below r0 come from the series
    small = uniform[(uniform > 0.0) & (uniform < r0)]
    if small.size:
        su_, sdu_ = zip(*(series_start(a, params, x, forcing=G) for x in small))
        rs_a = np.concatenate([[0.0], small, rs_a[1:]])
        us = [a, *su_, *us[1:]]
        dus = [0.0, *sdu_, *dus[1:]]
    order = np.argsort(rs_a, kind="stable")
    rs_a = rs_a[order]
    keep = np.concatenate([[True], np.diff(rs_a) > 0])
    prof = RadialProfile(
        r=rs_a[keep],
        u=np.asarray(us)[order][keep],
        du=np.asarray(dus)[order][keep],
        params=params,
        terminated=terminated,
        r_cross=r_cross,
        reduced_accuracy=reduced,
    )
    prof.meta["n_steps"] = n_steps
    return prof


def integrate_profile(a: float, params: ProblemParams,
                      ctrl: IntegratorControl = IntegratorControl()) -> RadialProfile:
    """Integrate the radial problem for ``g`` of ``params`` from ``u(0) = a``.

    Stops at ``R`` (``ReachedR``), at the first zero of ``u`` (``HitZero``,
    crossing bracketed on the dense output) or on overflow (``Diverged``).
    With ``eps = 0`` and the singular term active the integration runs in
    clamped singular mode.
    """
    if not a > 0.0:
        raise ValueError(f"centre value must be > 0, got {a}")
    singular_zero = params.singular and params.eps == 0.0 and params.lam > 0.0
    if singular_zero:
        def forcing(u):
            return eval_g(u, params)
    elif params.lam == 0.0:
        mu = params.mu

        def forcing(u):
            return mu
    else:
        def forcing(u):
            return eval_g(u if u > 0.0 else 0.0, params)
    return integrate_radial(a, forcing, params, ctrl, singular_zero=singular_zero)


def constant_rhs_oracle(c: float, params: ProblemParams, n: int = 2048) -> RadialProfile:
    """Exact solution of ``-Delta_p u = c`` in ``B_R`` with ``u(R) = 0``."""
    p, N, R = params.p, params.dim_N, params.radius_R
    r = np.linspace(0.0, R, n)
    e = p / (p - 1.0)
    k = (c / N) ** (1.0 / (p - 1.0)) if c > 0 else 0.0
    u = k * (p - 1.0) / p * (R ** e - r ** e)
    du = -k * r ** (1.0 / (p - 1.0))
    return RadialProfile(r=r, u=u, du=du, params=params)
