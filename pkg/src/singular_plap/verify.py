"""Numerical checks of the qualitative properties of computed profiles.

Every check works on the arrays of a :class:`RadialProfile` (``r``, ``u``,
``du``) plus the problem parameters, so a profile re-read from CSV gives the
same answers as the in-memory one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .problem import ProblemParams, eval_f, eval_g_array
from .radial_ode import RadialProfile, Termination, phi_p
from .shooting import EigenPair

__all__ = [
    "CheckEntry",
    "VerificationReport",
    "IntegrabilityError",
    "weak_residual",
    "bump",
    "hardy_integrability",
    "hardy_comparison_bound",
    "check_cone_bound",
    "check_radial_monotonicity",
    "eps_monotonicity",
    "picone_check",
    "monotone_operator_check",
    "RescaledProfile",
    "BlowupResult",
    "blowup_rescale",
    "apriori_bound",
    "verify_profile",
]

WEAK_RESIDUAL_TOL = 1e-6
PICONE_REL_TOL = 1e-6
ORDERING_REL_TOL = 1e-9

_GL_X, _GL_W = leggauss(6)


class IntegrabilityError(ValueError):
    """The singular integral could not be certified finite."""


def _gauss(edges: np.ndarray, nodes=(_GL_X, _GL_W)):
    """Composite Gauss-Legendre points and weights over consecutive ``edges``."""
    gx, gw = nodes
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    x = (a + b) * 0.5 + half * gx[None, :]
    w = half * gw[None, :]
    return x.ravel(), w.ravel()


def _edges(r: np.ndarray, lo: float, hi: float) -> np.ndarray:
    inner = r[(r > lo) & (r < hi)]
    return np.concatenate([[lo], inner, [hi]])


def _dim(profile: RadialProfile, dim_N: int | None) -> int:
    if dim_N is not None:
        return dim_N
    return profile.dim_N


def bump(r, center: float, width: float):
    """``max(0, 1 - ((r - c)/w)^2)^3`` and its derivative."""
    s = (np.asarray(r, dtype=float) - center) / width
    inside = np.abs(s) < 1.0
    one = np.where(inside, 1.0 - s * s, 0.0)
    return one ** 3, np.where(inside, -6.0 * s * one ** 2 / width, 0.0)


def _bump_layout(r_max: float, count: int):
    centers = r_max * (0.1 + 0.8 * np.arange(count) / max(count - 1, 1))
    return centers, 0.05 * r_max


def weak_residual(
    profile: RadialProfile,
    params: ProblemParams | None = None,
    test_count: int = 8,
    forcing: Callable[[np.ndarray], np.ndarray] | None = None,
    window: float | None = None,
) -> float:
    """Largest normalized weak-form residual over interior bump test functions.

    For each bump ``phi_j`` supported in ``[0.05, 0.95] * window`` this is::

        |int phi_p(u') phi_j' r^(N-1) dr - int g(u) phi_j r^(N-1) dr| / int |phi_j'| dr

    evaluated by 6-point Gauss-Legendre on every grid cell of the support,
    with ``u`` from the cubic Hermite interpolant of ``(u, u')`` and ``u'``
    from a cubic spline.  ``forcing`` overrides ``g`` (it receives ``u``).
    """
    params = profile.params if params is None else params
    p, N = params.p, params.dim_N
    if forcing is None:
        def forcing(u):
            return eval_g_array(u, params)
    r_max = profile.r_end if window is None else min(window, profile.r_end)
    U, DU = profile.interpolant(), profile.derivative_interpolant()
    centers, width = _bump_layout(r_max, test_count)
    worst = 0.0
    for c in centers:
        x, wq = _gauss(_edges(profile.r, c - width, c + width))
        b, db = bump(x, c, width)
        rn = x ** (N - 1)
        lhs = np.sum(wq * phi_p(DU(x), p) * db * rn)
        rhs = np.sum(wq * forcing(U(x)) * b * rn)
        # total variation of the bump is exactly 2
        worst = max(worst, abs(lhs - rhs) / 2.0)
    return float(worst)


def check_cone_bound(profile: RadialProfile) -> float:
    """``min u(r) / (R - r)`` over the grid, with ``-u'(R)`` as the value at ``R``."""
    R = profile.r_end
    sup = profile.sup_norm
    if sup == 0.0 or abs(profile.u[-1]) > 1e-8 * sup:
        raise ValueError("cone bound needs a profile vanishing at its outer radius")
    inner = profile.u[:-1] / (R - profile.r[:-1])
    return float(min(np.min(inner), -profile.du[-1]))


def _require_positive(profile: RadialProfile):
    if np.any(profile.u[:-1] <= 0.0):
        i = int(np.argmax(profile.u[:-1] <= 0.0))
        raise ValueError(f"profile is not positive inside the ball (u <= 0 at r={profile.r[i]:.6g})")


def hardy_integrability(profile: RadialProfile, params: ProblemParams | None = None,
                        phi: Callable[[np.ndarray], np.ndarray] | None = None,
                        boundary_frac: float = 0.05) -> float:
    """``int_0^R phi(r) u(r)^-delta r^(N-1) dr`` for the singular exponent.

    The last ``boundary_frac`` of the interval is integrated in the variable
    ``t = (R - r)^(1 - delta)``, which cancels the ``(R - r)^-delta`` growth of
    the integrand allowed by a positive cone constant.  Raises
    :class:`IntegrabilityError` when the cone constant is not positive.
    """
    params = profile.params if params is None else params
    delta, N = params.delta, params.dim_N
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"need 0 <= delta < 1, got {delta}")
    _require_positive(profile)
    C = check_cone_bound(profile)
    if not C > 0.0:
        raise IntegrabilityError(f"cone constant {C:.3e} is not positive")
    if phi is None:
        def phi(r):
            return np.ones_like(r)
    R = profile.r_end
    U = profile.interpolant()
    eta = boundary_frac * R
    x, wq = _gauss(_edges(profile.r, 0.0, R - eta))
    interior = np.sum(wq * phi(x) * U(x) ** -delta * x ** (N - 1))
    e = 1.0 / (1.0 - delta)
    t, wt = _gauss(np.linspace(0.0, eta ** (1.0 - delta), 257))
    r = R - t ** e
    jac = e * t ** (e - 1.0)
    edge = np.sum(wt * phi(r) * U(r) ** -delta * r ** (N - 1) * jac)
    val = float(interior + edge)
    if not math.isfinite(val):
        raise IntegrabilityError("integral evaluated to a non-finite value")
    return val


def hardy_comparison_bound(profile: RadialProfile, params: ProblemParams | None = None,
                           phi_sup: float = 1.0) -> float:
    """``|phi|_inf C^-delta int_0^R (R - r)^-delta r^(N-1) dr`` from the cone bound."""
    params = profile.params if params is None else params
    C = check_cone_bound(profile)
    R, N = profile.r_end, params.dim_N
    val, _ = integrate.quad(lambda r: r ** (N - 1), 0.0, R, weight="alg",
                            wvar=(0.0, -params.delta), epsabs=0.0, epsrel=1e-13)
    return float(phi_sup * C ** -params.delta * val)


@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    worst_index: int
    worst_du: float


def check_radial_monotonicity(profile: RadialProfile) -> MonotonicityResult:
    """``u' < 0`` at every ``r > 0`` and ``u`` strictly decreasing on the grid.

    Consecutive equal values are tolerated only where the decrease predicted
    by ``u'`` is below floating-point resolution of ``u``.
    """
    du = profile.du[1:]
    worst = int(np.argmax(du)) + 1
    ok_du = bool(np.all(du < 0.0))
    dr = np.diff(profile.r)
    dec = np.diff(profile.u)
    resolvable = np.abs(profile.du[1:]) * dr > 4 * np.finfo(float).eps * np.abs(profile.u[1:])
    ok_u = bool(np.all((dec < 0.0) | ((dec == 0.0) & ~resolvable)))
    return MonotonicityResult(passed=ok_du and ok_u, worst_index=worst,
                              worst_du=float(profile.du[worst]))


@dataclass(frozen=True)
class OrderingResult:
    passed: bool
    worst_gap: float
    worst_r: float
    common_points: int


def eps_monotonicity(lower_eps_profile: RadialProfile, higher_eps_profile: RadialProfile,
                     rel_tol: float = ORDERING_REL_TOL) -> OrderingResult:
    """Check ``u_lower >= u_higher - rel_tol * sup`` on the shared grid points."""
    lo, hi = lower_eps_profile, higher_eps_profile
    common, i, j = np.intersect1d(lo.r, hi.r, assume_unique=True, return_indices=True)
    if common.size < 16:
        raise ValueError(f"grid mismatch: only {common.size} shared radii")
    gap = lo.u[i] - hi.u[j]
    k = int(np.argmin(gap))
    sup = max(lo.sup_norm, hi.sup_norm)
    return OrderingResult(passed=bool(gap[k] >= -rel_tol * sup), worst_gap=float(gap[k]),
                          worst_r=float(common[k]), common_points=int(common.size))


@dataclass(frozen=True)
class PiconeResult:
    lhs: float
    rhs: float
    passed: bool


def picone_check(profile: RadialProfile, eigenpair: EigenPair,
                 params: ProblemParams | None = None,
                 h: Callable[[np.ndarray], np.ndarray] | None = None,
                 rel_tol: float = PICONE_REL_TOL) -> PiconeResult:
    """Compare ``int h phi1^p / u^(p-1) r^(N-1)`` with ``lambda1 int phi1^p r^(N-1)``.

    ``h`` defaults to ``g(u)``; it receives the interpolated ``u`` values.
    """
    params = profile.params if params is None else params
    p, N = params.p, params.dim_N
    _require_positive(profile)
    if h is None:
        def h(u):
            return eval_g_array(u, params)
    R = profile.r_end
    if abs(eigenpair.phi1.r_end - R) > 1e-12 * R:
        raise ValueError("eigenfunction and profile live on different balls")
    U, PHI = profile.interpolant(), eigenpair.phi1.interpolant()
    x, wq = _gauss(_edges(np.union1d(profile.r, eigenpair.phi1.r), 0.0, R))
    u, ph = U(x), np.maximum(PHI(x), 0.0)
    rn = x ** (N - 1)
    php = ph ** p
    lhs = float(np.sum(wq * h(u) * php / u ** (p - 1.0) * rn))
    rhs = float(eigenpair.lambda1 * np.sum(wq * php * rn))
    return PiconeResult(lhs=lhs, rhs=rhs, passed=bool(lhs <= rhs * (1.0 + rel_tol)))


@dataclass(frozen=True)
class LindqvistResult:
    lhs: float
    passed: bool
    pointwise_min: float
    gradient_p_norm: float
    c_measured: float | None


def monotone_operator_check(w: RadialProfile, v: RadialProfile, p: float,
                            dim_N: int | None = None) -> LindqvistResult:
    """``int (phi_p(w') - phi_p(v'))(w' - v') r^(N-1) dr >= 0`` on a shared grid.

    Equality is accepted only when the derivative arrays coincide.  For
    ``p >= 2`` the ratio to ``int |w' - v'|^p r^(N-1) dr`` is reported as
    ``c_measured``.
    """
    if w.r.shape != v.r.shape or not np.array_equal(w.r, v.r):
        raise ValueError("grid mismatch")
    for prof in (w, v):
        if abs(prof.u[-1]) > 1e-8 * max(prof.sup_norm, 1.0):
            raise ValueError("profiles must vanish at the outer radius")
    N = _dim(w, dim_N)
    rn = w.r ** (N - 1)
    diff = w.du - v.du
    dens = (phi_p(w.du, p) - phi_p(v.du, p)) * diff
    lhs = float(integrate.simpson(dens * rn, x=w.r))
    grad = float(integrate.simpson(np.abs(diff) ** p * rn, x=w.r))
    identical = bool(np.array_equal(w.du, v.du))
    pmin = float(np.min(dens))
    passed = pmin >= 0.0 and lhs >= 0.0 and (identical or lhs > 0.0) and (not identical or lhs == 0.0)
    c = lhs / grad if (p >= 2.0 and grad > 0.0) else None
    return LindqvistResult(lhs=lhs, passed=passed, pointwise_min=pmin,
                           gradient_p_norm=grad, c_measured=c)


@dataclass
class RescaledProfile:
    H: float
    M: float
    v: RadialProfile


@dataclass
class BlowupResult:
    rescaled: list[RescaledProfile]
    residuals: list[float]
    residuals_lambda_free: list[float]
    residuals_decreasing: bool
    window: float
    singular_center: list[float]
    f_center: list[float]

    @property
    def heights(self) -> list[float]:
        return [rp.H for rp in self.rescaled]


def blowup_rescale(profiles: Sequence[RadialProfile], params: ProblemParams,
                   test_count: int = 8) -> BlowupResult:
    """Rescale ``v(x) = u(M x) / H`` with ``M^p = H^(p-1-q)``, ``H = u(0)``.

    Under this scaling ``-Delta_p v = lambda v^q`` exactly for the pure-power
    equation, while the singular and ``f`` contributions pick up a factor
    ``H^-q`` and fade as ``H`` grows.  Residuals against ``lambda v^q`` (and
    the lambda-free ``v^q``) are measured on the window shared by all
    members.
    """
    if len(profiles) < 2:
        raise ValueError("need at least two profiles")
    Hs = [float(pr.u[0]) for pr in profiles]
    if any(b <= a for a, b in zip(Hs, Hs[1:])):
        raise ValueError("profiles must have strictly increasing centre values")
    p, q, lam = params.p, params.q, params.lam
    rescaled = []
    for pr, H in zip(profiles, Hs):
        M = H ** ((p - 1.0 - q) / p)
        vp = params.with_(radius_R=pr.r_end / M, check_window=False)
        v = RadialProfile(r=pr.r / M, u=pr.u / H, du=pr.du * (M / H), params=vp,
                          terminated=pr.terminated)
        rescaled.append(RescaledProfile(H=H, M=M, v=v))
    window = min(rp.v.r_end for rp in rescaled)

    def power(s, c):
        return c * np.maximum(s, 0.0) ** q

    res = [weak_residual(rp.v, rp.v.params, test_count, lambda s: power(s, lam), window)
           for rp in rescaled]
    res_free = [weak_residual(rp.v, rp.v.params, test_count, lambda s: power(s, 1.0), window)
                for rp in rescaled]
    sing = [(H ** -q * (H + params.eps) ** -params.delta if params.singular else 0.0) for H in Hs]
    fc = [H ** -q * eval_f(H, params.f) for H in Hs]
    return BlowupResult(
        rescaled=rescaled,
        residuals=res,
        residuals_lambda_free=res_free,
        residuals_decreasing=all(b <= a for a, b in zip(res, res[1:])),
        window=window,
        singular_center=sing,
        f_center=fc,
    )


def apriori_bound(profiles: Sequence[RadialProfile], rel_tol: float = 1e-3) -> tuple[float, bool]:
    """Largest sup norm over the family and whether the last two agree to ``rel_tol``."""
    sups = [pr.sup_norm for pr in profiles]
    if not sups:
        raise ValueError("empty family")
    bounded = all(math.isfinite(s) for s in sups) and not any(
        pr.terminated is Termination.DIVERGED for pr in profiles)
    if len(sups) == 1:
        return sups[0], bounded
    stable = abs(sups[-1] - sups[-2]) < rel_tol * max(abs(sups[-1]), abs(sups[-2]))
    return max(sups), bool(bounded and stable)


@dataclass
class CheckEntry:
    name: str
    measured: Any
    threshold: Any
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "measured": self.measured,
                "threshold": self.threshold, "pass": bool(self.passed)}


@dataclass
class VerificationReport:
    entries: list[CheckEntry] = field(default_factory=list)

    def add(self, name: str, measured, threshold, passed: bool) -> None:
        self.entries.append(CheckEntry(name, measured, threshold, bool(passed)))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self) -> str:
        doc = {"overall_pass": self.passed, "checks": [e.to_dict() for e in self.entries]}
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        doc = json.loads(text)
        return cls([CheckEntry(c["name"], c["measured"], c["threshold"], c["pass"])
                    for c in doc["checks"]])


def verify_profile(profile: RadialProfile, params: ProblemParams,
                   eigenpair: EigenPair | None = None, test_count: int = 8) -> VerificationReport:
    """Run the single-profile checks and collect them into a report."""
    rep = VerificationReport()
    a = profile.a
    rep.add("boundary_condition", abs(float(profile.u[-1])), 1e-10 * a,
            profile.r_end == params.radius_R and abs(profile.u[-1]) <= 1e-10 * a)
    wr = weak_residual(profile, params, test_count)
    rep.add("weak_residual", wr, WEAK_RESIDUAL_TOL, wr < WEAK_RESIDUAL_TOL)
    mono = check_radial_monotonicity(profile)
    rep.add("radial_monotonicity", mono.worst_du, 0.0, mono.passed)
    rep.add("interior_maximum", float(profile.r[int(np.argmax(profile.u))]), 0.0,
            int(np.argmax(profile.u)) == 0)
    try:
        C = check_cone_bound(profile)
    except ValueError:
        C = float("nan")
    rep.add("cone_bound", C, 0.0, C > 0.0)
    if params.singular and params.lam > 0.0 and 0.0 < params.delta < 1.0:
        try:
            val = hardy_integrability(profile, params)
            bound = hardy_comparison_bound(profile, params)
            rep.add("hardy_integrability", val, bound, val <= bound)
        except ValueError:
            rep.add("hardy_integrability", None, None, False)
    if eigenpair is not None:
        res = picone_check(profile, eigenpair, params)
        rep.add("picone", [res.lhs, res.rhs], PICONE_REL_TOL, res.passed)
    return rep
