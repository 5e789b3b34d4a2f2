import math

import numpy as np
import pytest

from singular_plap.continuation import (
    EpsPath,
    NotCauchyError,
    eps_continuation,
    lambda_sweep,
    largest_converged_lambda,
    mu_probe,
    singular_limit,
    sup_distance,
)
from singular_plap.problem import ProblemParams
from singular_plap.verify import check_radial_monotonicity, weak_residual

SMALL_SCAN = (1e-2, 1e2, 24)


class TestEpsPath:
    def test_ordering_and_shrinking(self, eps_path):
        assert len(eps_path) == 10 and eps_path.diagnostic is None
        assert eps_path.ordered
        inc = eps_path.increments
        assert all(b < a for a, b in zip(inc, inc[1:]))
        # centre values grow as eps decreases
        assert all(b > a for a, b in zip(eps_path.a_stars, eps_path.a_stars[1:]))

    def test_default_tolerance_not_met(self, eps_path):
        # ten quarter-steps leave a last increment of about 1.5e-5 sup
        with pytest.raises(NotCauchyError) as exc:
            singular_limit(eps_path)
        assert exc.value.increments == eps_path.increments

    def test_limit_at_measured_tolerance(self, eps_path, ref_params):
        limit = singular_limit(eps_path, tol=2e-5 * eps_path.profiles[-1].sup_norm)
        assert limit is eps_path.profiles[-1] is eps_path.limit_profile
        assert limit.meta["cone_constant"] > 0
        assert weak_residual(limit, ref_params.with_(eps=0.0)) < 1e-6
        assert check_radial_monotonicity(limit).passed

    def test_no_forcing_empty_path(self):
        params = ProblemParams(lam=0.0, mu=0.0, check_window=False)
        path = eps_continuation(params, n=3, scan=(0.1, 10.0, 8))
        assert len(path) == 0 and "no bracket" in path.diagnostic

    def test_equal_eps_identical(self, ref_params):
        path = eps_continuation(ref_params, eps0=1e-3, factor=1.0, n=2, scan=SMALL_SCAN)
        a, b = path.profiles
        np.testing.assert_array_equal(a.u, b.u)
        assert path.increments == [0.0] and path.ordering[0].worst_gap == 0.0

    def test_constant_rhs_converges_immediately(self):
        params = ProblemParams.constant_forcing(6.0, 2.0, 3)
        path = eps_continuation(params, n=3, scan=(0.5, 2.0, 8))
        assert path.increments == [0.0, 0.0]
        assert singular_limit(path).a == pytest.approx(1.0, rel=1e-9)

    def test_invalid_arguments(self, ref_params):
        with pytest.raises(ValueError):
            eps_continuation(ref_params, eps0=0.0)
        with pytest.raises(ValueError):
            eps_continuation(ref_params, factor=1.5)

    def test_short_path_rejected(self, ref_params):
        path = EpsPath(np.array([0.1]), [], [], [])
        with pytest.raises(ValueError):
            singular_limit(path)


def test_sup_distance(eps_path):
    a, b = eps_path.profiles[-2:]
    assert sup_distance(a, b) == pytest.approx(eps_path.increments[-1], rel=0, abs=0)
    assert sup_distance(a, a) == 0.0


class TestLambdaSweep:
    def test_branches(self, ref_params):
        recs = lambda_sweep(ref_params, [0.05, 0.1], SMALL_SCAN)
        assert [r.branch for r in recs] == [0, 1, 0, 1]
        small = [r for r in recs if r.branch == 0]
        assert small[0].a_star < small[1].a_star
        assert all(r.converged and r.weak_residual < 1e-6 for r in recs)
        assert largest_converged_lambda(recs) == 0.1

    def test_matches_single_solve(self, ref_params, ref_solution):
        rec = lambda_sweep(ref_params, [0.05], SMALL_SCAN)[0]
        assert rec.a_star == pytest.approx(ref_solution.a, rel=1e-8)

    def test_duplicates_identical(self, ref_params):
        recs = lambda_sweep(ref_params, [0.05, 0.05], (1e-2, 1.0, 12))
        assert recs[0].a_star == recs[1].a_star and recs[0].branch == recs[1].branch

    def test_no_solution(self, ref_params):
        recs = lambda_sweep(ref_params, [50.0], SMALL_SCAN)
        assert len(recs) == 1 and not recs[0].converged and recs[0].branch == -1
        assert math.isnan(recs[0].a_star)
        assert largest_converged_lambda(recs) is None

    def test_parallel_matches_serial(self, ref_params):
        lams = [0.02, 0.05]
        a = lambda_sweep(ref_params, lams, (1e-2, 1.0, 12))
        b = lambda_sweep(ref_params, lams, (1e-2, 1.0, 12), n_jobs=2)
        assert [(r.a_star, r.branch) for r in a] == [(r.a_star, r.branch) for r in b]

    @pytest.mark.parametrize("lams", [[0.1, 0.05], [0.0, 0.1]])
    def test_invalid(self, ref_params, lams):
        with pytest.raises(ValueError):
            lambda_sweep(ref_params, lams)


def test_mu_probe(ref_params, eig_2_3):
    rows = mu_probe(ref_params, [0.0, 1.0, 1e3], SMALL_SCAN, eigenpair=eig_2_3)
    assert rows[0].exists and rows[0].k == 0.0
    assert rows[1].exists and rows[1].k < eig_2_3.lambda1
    assert not rows[2].exists and rows[2].k > eig_2_3.lambda1
    assert all(r.consistent for r in rows)
    assert all(pc.passed for r in rows for pc in r.picone)
