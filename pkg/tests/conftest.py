import pytest

from singular_plap import ProblemParams, eps_continuation, first_eigenpair
from singular_plap.shooting import bracket_scan, solve_bvp

# the reference singular problem: p=2, N=3, R=1, delta=0.5, q=3, f=0, lambda=0.05
REF = ProblemParams(dim_N=3, p=2.0, q=3.0, delta=0.5, lam=0.05, eps=1e-3)


@pytest.fixture(scope="session")
def ref_params():
    return REF


@pytest.fixture(scope="session")
def eig_2_3():
    return first_eigenpair(2.0, 3, 1.0)


@pytest.fixture(scope="session")
def ref_solution():
    brackets = bracket_scan(REF)
    return solve_bvp(REF, brackets[0])


@pytest.fixture(scope="session")
def eps_path():
    return eps_continuation(REF, eps0=0.1, factor=0.25, n=10)
