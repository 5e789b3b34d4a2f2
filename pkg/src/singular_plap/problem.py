"""Problem data for -Delta_p u = lambda (u^-delta + u^q + f(u)) + mu on a ball.

The perturbation ``f`` is a finite monomial sum carrying a constant ``c0`` for
the growth condition ``f(t) + c0 t^q >= 0``.  ``ProblemParams`` holds every
scalar of the (regularized) equation and is immutable; use
``dataclasses.replace`` or :meth:`ProblemParams.with_` to derive variants.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import optimize

__all__ = [
    "FSpec",
    "ProblemParams",
    "HypothesisReport",
    "SingularEvaluationError",
    "eval_f",
    "eval_df",
    "eval_g",
    "eval_g_array",
    "check_hypothesis_H",
    "g_nonincreasing_on",
    "picone_threshold",
    "picone_minimizer",
]

H_GRID_POINTS = 200
H_GRID_RANGE = (1e-8, 1e8)


class SingularEvaluationError(ValueError):
    """Raised when the singular term is evaluated at u = 0 with eps = 0."""


@dataclass(frozen=True)
class FSpec:
    """Perturbation ``f(t) = sum(alpha_i * t**s_i)`` with witness ``c0``."""

    monomials: tuple[tuple[float, float], ...] = ()
    c0: float = 0.5

    def __post_init__(self):
        mons = tuple((float(a), float(s)) for a, s in self.monomials)
        object.__setattr__(self, "monomials", mons)
        if not 0.0 < self.c0 < 1.0:
            raise ValueError(f"c0 must lie in (0, 1), got {self.c0}")
        for _, s in mons:
            if not s > 0.0:
                raise ValueError(f"monomial powers must be > 0 so that f(0) = 0, got {s}")

    @property
    def is_zero(self) -> bool:
        return all(a == 0.0 for a, _ in self.monomials)

    def max_power(self) -> float:
        return max((s for _, s in self.monomials), default=0.0)


@dataclass(frozen=True)
class ProblemParams:
    """All scalars of the radial problem.

    Parameters
    ----------
    dim_N, p, q, delta : dimension and exponents.
    lam, eps, mu : lambda, regularization epsilon (0 = singular), shift mu.
    radius_R : ball radius.
    f : perturbation, see :class:`FSpec`.
    singular : include the ``(u + eps)^-delta`` term.  Disabling it (and
        setting ``f`` to zero) gives the pure-power problem used for blow-up
        rescaling.
    check_window : enforce ``1 < p < N``, the subcritical window for ``q``,
        ``0 < delta < 1`` and ``s_i < q``.  Pass ``False`` for oracle
        configurations (``N = 1``, constant forcing) or boundary probes.
    """

    dim_N: int = 3
    p: float = 2.0
    q: float = 3.0
    delta: float = 0.5
    lam: float = 0.05
    eps: float = 0.0
    mu: float = 0.0
    radius_R: float = 1.0
    f: FSpec = field(default_factory=FSpec)
    singular: bool = True
    check_window: bool = True

    def __post_init__(self):
        if int(self.dim_N) != self.dim_N or self.dim_N < 1:
            raise ValueError(f"dim_N must be an integer >= 1, got {self.dim_N}")
        object.__setattr__(self, "dim_N", int(self.dim_N))
        if not self.p > 1.0:
            raise ValueError(f"p must be > 1, got {self.p}")
        if not self.radius_R > 0.0:
            raise ValueError(f"radius_R must be > 0, got {self.radius_R}")
        for name in ("lam", "eps", "mu"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.delta >= 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.check_window:
            N, p, q = self.dim_N, self.p, self.q
            if not p < N:
                raise ValueError(
                    f"p={p} >= N={N} is outside the Sobolev window; "
                    "pass check_window=False to allow it"
                )
            q_crit = p * N / (N - p) - 1.0
            if not p - 1.0 < q < q_crit:
                raise ValueError(f"q={q} must lie in ({p - 1.0}, {q_crit})")
            if not 0.0 < self.delta < 1.0:
                raise ValueError(f"delta={self.delta} must lie in (0, 1)")
            if any(s >= q for _, s in self.f.monomials):
                raise ValueError("every monomial power of f must be < q")

    @property
    def q_critical(self) -> float:
        """``p N / (N - p) - 1``, infinite when ``p >= N``."""
        if self.p >= self.dim_N:
            return math.inf
        return self.p * self.dim_N / (self.dim_N - self.p) - 1.0

    def with_(self, **changes) -> "ProblemParams":
        return dataclasses.replace(self, **changes)

    @classmethod
    def constant_forcing(cls, c: float, p: float, dim_N: int, radius_R: float = 1.0,
                         **kw) -> "ProblemParams":
        """Parameters with ``g == c`` (lambda = 0, mu = c)."""
        return cls(dim_N=dim_N, p=p, lam=0.0, mu=c, radius_R=radius_R,
                   check_window=False, **kw)

    # flat config section: N, p, q, delta, lambda, eps, mu, R, f.monomials, f.c0
    def to_config(self) -> dict[str, Any]:
        return {
            "N": self.dim_N,
            "p": self.p,
            "q": self.q,
            "delta": self.delta,
            "lambda": self.lam,
            "eps": self.eps,
            "mu": self.mu,
            "R": self.radius_R,
            "singular": self.singular,
            "check_window": self.check_window,
            "f": {
                "monomials": [[a, s] for a, s in self.f.monomials],
                "c0": self.f.c0,
            },
        }

    @classmethod
    def from_config(cls, section: Mapping[str, Any]) -> "ProblemParams":
        allowed = {"N", "p", "q", "delta", "lambda", "eps", "mu", "R", "f",
                   "singular", "check_window"}
        unknown = set(section) - allowed
        if unknown:
            raise KeyError(f"unknown problem keys: {sorted(unknown)}")
        fsec = dict(section.get("f", {}))
        unknown_f = set(fsec) - {"monomials", "c0"}
        if unknown_f:
            raise KeyError(f"unknown problem.f keys: {sorted(unknown_f)}")
        mons = fsec.get("monomials", [])
        for m in mons:
            if len(m) != 2:
                raise ValueError(f"f.monomials entries must be [alpha, s] pairs, got {m!r}")
        fspec = FSpec(monomials=tuple(tuple(m) for m in mons), c0=float(fsec.get("c0", 0.5)))
        defaults = cls()
        return cls(
            dim_N=section.get("N", defaults.dim_N),
            p=float(section.get("p", defaults.p)),
            q=float(section.get("q", defaults.q)),
            delta=float(section.get("delta", defaults.delta)),
            lam=float(section.get("lambda", defaults.lam)),
            eps=float(section.get("eps", defaults.eps)),
            mu=float(section.get("mu", defaults.mu)),
            radius_R=float(section.get("R", defaults.radius_R)),
            f=fspec,
            singular=bool(section.get("singular", True)),
            check_window=bool(section.get("check_window", True)),
        )


def eval_f(t: float, f: FSpec) -> float:
    """Evaluate the monomial sum at ``t >= 0``; exactly 0 at ``t = 0``."""
    if t < 0.0:
        raise ValueError(f"f is defined for t >= 0 only, got {t}")
    if t == 0.0:
        return 0.0
    return math.fsum(a * t ** s for a, s in f.monomials)


def eval_df(t: float, f: FSpec) -> float:
    if t <= 0.0:
        return math.fsum(a * s * t ** (s - 1.0) for a, s in f.monomials if s == 1.0)
    return math.fsum(a * s * t ** (s - 1.0) for a, s in f.monomials)


def eval_g(t: float, params: ProblemParams) -> float:
    """Right-hand side ``lam*((t+eps)^-delta + t^q + f(t)) + mu``."""
    if t < 0.0:
        raise ValueError(f"g is defined for t >= 0 only, got {t}")
    lam = params.lam
    if lam == 0.0:
        return params.mu
    s = 0.0
    if params.singular:
        base = t + params.eps
        if base == 0.0:
            raise SingularEvaluationError("singular term evaluated at u = 0 with eps = 0")
        s = base ** -params.delta
    if t > 0.0:
        s += t ** params.q
        if params.f.monomials:
            s += eval_f(t, params.f)
    return lam * s + params.mu


def eval_g_array(t, params: ProblemParams) -> np.ndarray:
    """Vectorized :func:`eval_g` for ``t >= 0`` (``inf`` at a singular zero)."""
    t = np.asarray(t, dtype=float)
    if params.lam == 0.0:
        return np.full_like(t, params.mu)
    with np.errstate(divide="ignore"):
        s = (t + params.eps) ** -params.delta if params.singular else np.zeros_like(t)
    s = s + t ** params.q
    for a, e in params.f.monomials:
        s = s + a * t ** e
    return params.lam * s + params.mu


def _dg(t: float, params: ProblemParams) -> float:
    d = params.q * t ** (params.q - 1.0) if t > 0.0 else 0.0
    d += eval_df(t, params.f)
    if params.singular:
        d -= params.delta * (t + params.eps) ** (-params.delta - 1.0)
    return params.lam * d


def g_nonincreasing_on(params: ProblemParams, T: float, n: int = 200) -> bool:
    """True when ``g`` is strictly decreasing on a grid over ``[0, T]``.

    Checks ``d/dt g(t) < 0`` at ``n`` points; with ``eps = 0`` the grid starts
    just above 0.
    """
    lo = 0.0 if params.eps > 0.0 else T * 1e-12
    ts = np.linspace(lo, T, n)
    return all(_dg(float(t), params) < 0.0 for t in ts)


@dataclass(frozen=True)
class HypothesisReport:
    passed: bool
    structural_ok: bool
    positivity_ok: bool
    min_t: float
    min_value: float
    witness_t: float | None
    message: str = ""


def check_hypothesis_H(f: FSpec, q: float) -> HypothesisReport:
    """Check ``f(0)=0``, ``f(t)/t^q -> 0`` and ``f(t) + c0 t^q >= 0``.

    The structural part is analytic (every power below ``q``).  Positivity is
    sampled on 200 log-spaced points in ``[1e-8, 1e8]`` and refined by scalar
    minimization around every sampled local minimum.  ``witness_t`` is the
    smallest sampled ``t`` where positivity fails (the small-``t`` failure
    mode of a negative low-order term); ``min_t``/``min_value`` locate the
    most negative value found.
    """
    if not q > 0.0:
        raise ValueError(f"q must be > 0, got {q}")
    structural = all(s < q for _, s in f.monomials)

    def h(t):
        return eval_f(t, f) + f.c0 * t ** q

    ts = np.geomspace(*H_GRID_RANGE, H_GRID_POINTS)
    vals = np.array([h(float(t)) for t in ts])
    best = int(np.argmin(vals))
    min_t, min_val = float(ts[best]), float(vals[best])
    # refine each interior local minimum in log t
    for i in range(1, len(ts) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            res = optimize.minimize_scalar(
                lambda x: h(math.exp(x)),
                bounds=(math.log(ts[i - 1]), math.log(ts[i + 1])),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < min_val:
                min_t, min_val = float(math.exp(res.x)), float(res.fun)
    failing = np.nonzero(vals < 0.0)[0]
    witness = float(ts[failing[0]]) if failing.size else None
    positive = min_val >= 0.0
    msg = ""
    if not structural:
        msg = "a monomial power is >= q, so f(t)/t^q does not vanish at infinity"
    elif not positive:
        msg = f"f(t) + c0 t^q < 0 (min {min_val:.3e} at t={min_t:.3e})"
    return HypothesisReport(
        passed=structural and positive,
        structural_ok=structural,
        positivity_ok=positive,
        min_t=min_t,
        min_value=min_val,
        witness_t=witness,
        message=msg,
    )


def picone_minimizer(params: ProblemParams) -> tuple[float, float, bool]:
    """Return ``(k, t_star, degenerate)`` for
    ``k = inf_{t>0} (mu + lam (1 - c0) t^q) / t^(p-1)``.

    ``t_star`` is ``0`` when ``mu = 0`` and ``inf`` in the degenerate case
    ``lam (1 - c0) = 0 < mu``.
    """
    p, q, mu = params.p, params.q, params.mu
    b = params.lam * (1.0 - params.f.c0)
    if not q > p - 1.0:
        raise ValueError(f"need q > p - 1, got q={q}, p={p}")
    if b == 0.0 and mu == 0.0:
        raise ValueError("need lam > 0 or mu > 0")
    if mu == 0.0:
        return 0.0, 0.0, False
    if b == 0.0:
        return 0.0, math.inf, True
    t_star = ((p - 1.0) * mu / ((q - p + 1.0) * b)) ** (1.0 / q)
    k = (mu + b * t_star ** q) / t_star ** (p - 1.0)
    return k, t_star, False


def picone_threshold(params: ProblemParams) -> float:
    """Closed-form Picone constant, cross-checked by a log-grid minimization."""
    k, t_star, degenerate = picone_minimizer(params)
    if degenerate or t_star == 0.0:
        return k
    b = params.lam * (1.0 - params.f.c0)
    p, q, mu = params.p, params.q, params.mu

    def obj(x):
        t = math.exp(x)
        return (mu + b * t ** q) / t ** (p - 1.0)

    xs = np.linspace(math.log(t_star) - 20.0, math.log(t_star) + 20.0, 401)
    vals = [obj(x) for x in xs]
    i = int(np.argmin(vals))
    res = optimize.minimize_scalar(obj, bounds=(xs[max(i - 1, 0)], xs[min(i + 1, 400)]),
                                   method="bounded", options={"xatol": 1e-12})
    if abs(res.fun - k) > 1e-8 * k:
        raise ArithmeticError(f"Picone constant mismatch: closed form {k}, grid {res.fun}")
    return k

