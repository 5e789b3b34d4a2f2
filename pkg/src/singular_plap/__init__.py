"""Radial shooting solver for singular p-Laplacian Dirichlet problems on a ball.

Solves ``-Delta_p u = lambda (u^-delta + u^q + f(u)) + mu`` with ``u = 0`` on
the boundary, via an epsilon-regularised singular term, and checks the
computed profiles against the properties the solutions are known to have.
"""

from .continuation import (
    EpsPath,
    MuProbeRow,
    NotCauchyError,
    SweepRecord,
    blowup_family,
    eps_continuation,
    lambda_sweep,
    mu_probe,
    singular_limit,
)
from .problem import FSpec, ProblemParams, check_hypothesis_H, eval_f, eval_g, picone_threshold
from .radial_ode import (
    IntegratorControl,
    RadialProfile,
    Termination,
    constant_rhs_oracle,
    integrate_profile,
)
from .shooting import EigenPair, ShootingError, bracket_scan, first_eigenpair, shoot, solve_bvp
from .verify import VerificationReport, blowup_rescale, verify_profile

__version__ = "0.1.0"

__all__ = [
    "FSpec",
    "ProblemParams",
    "check_hypothesis_H",
    "eval_f",
    "eval_g",
    "picone_threshold",
    "IntegratorControl",
    "RadialProfile",
    "Termination",
    "constant_rhs_oracle",
    "integrate_profile",
    "EigenPair",
    "ShootingError",
    "bracket_scan",
    "first_eigenpair",
    "shoot",
    "solve_bvp",
    "EpsPath",
    "MuProbeRow",
    "NotCauchyError",
    "SweepRecord",
    "blowup_family",
    "eps_continuation",
    "lambda_sweep",
    "mu_probe",
    "singular_limit",
    "VerificationReport",
    "blowup_rescale",
    "verify_profile",
]
