import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singular_plap.problem import ProblemParams
from singular_plap.radial_ode import RadialProfile, constant_rhs_oracle, phi_p
from singular_plap.shooting import shoot
from singular_plap.verify import (
    IntegrabilityError,
    VerificationReport,
    apriori_bound,
    blowup_rescale,
    bump,
    check_cone_bound,
    check_radial_monotonicity,
    eps_monotonicity,
    hardy_comparison_bound,
    hardy_integrability,
    monotone_operator_check,
    picone_check,
    verify_profile,
    weak_residual,
)
from singular_plap.continuation import blowup_family

R = np.linspace(0.0, 1.0, 2049)


def profile(u, du, params=None):
    return RadialProfile(r=R, u=np.asarray(u, float), du=np.asarray(du, float), params=params)


def test_bump_shape():
    b, db = bump(np.array([0.0, 0.5, 1.0, 2.0]), 0.5, 0.5)
    np.testing.assert_allclose(b, [0.0, 1.0, 0.0, 0.0])
    assert db[1] == 0.0


class TestWeakResidual:
    def test_oracle(self):
        params = ProblemParams.constant_forcing(6.0, 2.0, 3)
        assert weak_residual(constant_rhs_oracle(6.0, params), params) < 1e-8

    @pytest.mark.parametrize("p, N", [(1.5, 2), (3.0, 5)])
    def test_oracle_other_p(self, p, N):
        params = ProblemParams.constant_forcing(6.0, p, N)
        assert weak_residual(constant_rhs_oracle(6.0, params), params) < 1e-8

    def test_flat_profile(self):
        params = ProblemParams(lam=0.0, mu=0.0, check_window=False)
        assert weak_residual(profile(np.full_like(R, 0.4), np.zeros_like(R)), params) == 0.0

    def test_detects_wrong_forcing(self):
        params = ProblemParams.constant_forcing(6.0, 2.0, 3)
        wrong = ProblemParams.constant_forcing(7.0, 2.0, 3)
        assert weak_residual(constant_rhs_oracle(6.0, params), wrong) > 1e-3


class TestConeBound:
    def test_parabola(self):
        assert check_cone_bound(profile(1 - R ** 2, -2 * R)) == pytest.approx(1.0, abs=1e-14)

    def test_square_degenerates(self):
        assert check_cone_bound(profile((1 - R) ** 2, -2 * (1 - R))) == 0.0

    def test_needs_zero_at_edge(self):
        with pytest.raises(ValueError):
            check_cone_bound(profile(np.full_like(R, 0.3), np.zeros_like(R)))


class TestHardy:
    params = ProblemParams(delta=0.5)

    def test_finite_for_parabola(self):
        prof = profile(1 - R ** 2, -2 * R, self.params)
        val = hardy_integrability(prof, self.params)
        # int_0^1 (1 - r^2)^-1/2 r^2 dr = pi / 4
        assert val == pytest.approx(math.pi / 4, rel=1e-6)
        assert val <= hardy_comparison_bound(prof, self.params)

    def test_with_bump(self):
        prof = profile(1 - R ** 2, -2 * R, self.params)
        val = hardy_integrability(prof, self.params, phi=lambda r: bump(r, 0.5, 0.3)[0])
        assert 0.0 < val < math.pi / 4

    def test_delta_zero(self):
        params = ProblemParams(delta=0.0, check_window=False)
        prof = profile(1 - R ** 2, -2 * R, params)
        assert hardy_integrability(prof, params) == pytest.approx(1 / 3, rel=1e-10)

    def test_interior_zero_fails(self):
        u = np.abs(0.5 - R) * (1 - R)
        with pytest.raises(ValueError):
            hardy_integrability(profile(u, np.gradient(u, R), self.params), self.params)

    def test_degenerate_cone_fails(self):
        prof = profile((1 - R) ** 2, -2 * (1 - R), self.params)
        with pytest.raises(IntegrabilityError):
            hardy_integrability(prof, self.params)


class TestRadialMonotonicity:
    def test_oracle_passes(self):
        params = ProblemParams.constant_forcing(6.0, 3.0, 3)
        assert check_radial_monotonicity(constant_rhs_oracle(6.0, params)).passed

    def test_flat_fails(self):
        res = check_radial_monotonicity(profile(np.full_like(R, 0.2), np.zeros_like(R)))
        assert not res.passed and res.worst_du == 0.0

    def test_bump_in_profile_fails(self):
        u = 1 - R ** 2 + 0.1 * bump(R, 0.5, 0.1)[0]
        du = -2 * R + 0.1 * bump(R, 0.5, 0.1)[1]
        res = check_radial_monotonicity(profile(u, du))
        assert not res.passed and 0.4 < R[res.worst_index] < 0.6


class TestEpsMonotonicity:
    def test_identical(self):
        p = profile(1 - R ** 2, -2 * R)
        res = eps_monotonicity(p, p)
        assert res.passed and res.worst_gap == 0.0

    def test_antisymmetry(self):
        lo = profile(1.1 * (1 - R ** 2), -2.2 * R)
        hi = profile(1 - R ** 2, -2 * R)
        assert eps_monotonicity(lo, hi).passed
        assert not eps_monotonicity(hi, lo).passed

    def test_grid_mismatch(self):
        other = RadialProfile(r=np.linspace(0, 1, 7) ** 2, u=np.ones(7), du=np.zeros(7))
        with pytest.raises(ValueError):
            eps_monotonicity(profile(1 - R ** 2, -2 * R), other)


class TestPicone:
    def test_equality_case(self, eig_2_3):
        phi = eig_2_3.phi1
        lam1 = eig_2_3.lambda1
        res = picone_check(phi, eig_2_3, phi.params, h=lambda u: lam1 * phi_p(u, 2.0))
        assert abs(res.lhs - res.rhs) <= 1e-8 * res.rhs

    def test_synthetic_violation(self, eig_2_3):
        phi = eig_2_3.phi1
        lam1 = eig_2_3.lambda1
        res = picone_check(phi, eig_2_3, phi.params, h=lambda u: (lam1 + 1) * phi_p(u, 2.0))
        assert not res.passed

    def test_solution_passes(self, ref_solution, ref_params, eig_2_3):
        assert picone_check(ref_solution, eig_2_3, ref_params).passed


def smooth_profile(coef, N_grid=R):
    """Random smooth profile vanishing at r = 1: (1 - r^2) (c0 + c1 r^2 + c2 r^4)."""
    c = np.asarray(coef)
    poly = c[0] + c[1] * N_grid ** 2 + c[2] * N_grid ** 4
    dpoly = 2 * c[1] * N_grid + 4 * c[2] * N_grid ** 3
    u = (1 - N_grid ** 2) * poly
    du = -2 * N_grid * poly + (1 - N_grid ** 2) * dpoly
    return RadialProfile(r=N_grid, u=u, du=du)


class TestLindqvist:
    def test_identical(self):
        w = smooth_profile([1.0, 0.2, 0.1])
        res = monotone_operator_check(w, w, 3.0, dim_N=3)
        assert res.lhs == 0.0 and res.passed

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-2, 2).map(lambda x: round(x, 6)), min_size=6, max_size=6),
           st.sampled_from([1.5, 2.0, 3.0]))
    def test_random_pairs_nonnegative(self, c, p):
        w, v = smooth_profile(c[:3]), smooth_profile(c[3:])
        res = monotone_operator_check(w, v, p, dim_N=3)
        assert res.passed and res.pointwise_min >= 0.0

    def test_p2_identity(self):
        w, v = smooth_profile([1.0, -0.5, 0.3]), smooth_profile([0.2, 0.4, -1.0])
        res = monotone_operator_check(w, v, 2.0, dim_N=3)
        from scipy.integrate import simpson
        ref = simpson((w.du - v.du) ** 2 * R ** 2, x=R)
        assert res.lhs == pytest.approx(ref, rel=1e-10)
        assert res.c_measured == pytest.approx(1.0, rel=1e-12)

    def test_grid_mismatch(self):
        w = smooth_profile([1.0, 0.0, 0.0])
        v = smooth_profile([1.0, 0.0, 0.0], np.linspace(0, 1, 33))
        with pytest.raises(ValueError):
            monotone_operator_check(w, v, 2.0)


class TestBlowup:
    pure = ProblemParams(eps=0.0, singular=False)

    def test_pure_power_scale_invariant(self):
        fam = blowup_family(self.pure, [10.0, 100.0, 1000.0])
        res = blowup_rescale(fam, self.pure)
        for rp in res.rescaled:
            assert rp.v.u[0] == 1.0 and rp.v.u.max() == 1.0
        assert max(res.residuals) < 1e-6

    def test_singular_contribution_fades(self):
        params = ProblemParams(eps=1e-3)
        fam = blowup_family(params, [10.0, 100.0, 1000.0])
        res = blowup_rescale(fam, params)
        s = res.singular_center
        assert s[0] / s[1] >= 10 and s[1] / s[2] >= 10
        assert res.residuals_decreasing

    def test_single_profile_error(self):
        with pytest.raises(ValueError):
            blowup_rescale([shoot(10.0, self.pure).profile], self.pure)

    def test_non_monotone_heights(self):
        fam = blowup_family(self.pure, [100.0, 10.0])
        with pytest.raises(ValueError):
            blowup_rescale(fam, self.pure)


def test_apriori_bound():
    ps = [profile(s * (1 - R ** 2), -2 * s * R) for s in (0.5, 0.9, 0.9999, 1.0)]
    sup, stable = apriori_bound(ps)
    assert sup == 1.0 and stable
    assert not apriori_bound(ps[:2])[1]


class TestReport:
    def test_json_roundtrip(self):
        rep = VerificationReport()
        rep.add("a", 1.5, 2.0, True)
        rep.add("b", [1.0, 2.0], 1e-6, False)
        back = VerificationReport.from_json(rep.to_json())
        assert back.to_json() == rep.to_json()
        assert not back.passed and back["a"].passed

    def test_reference_solution(self, ref_solution, ref_params, eig_2_3):
        rep = verify_profile(ref_solution, ref_params, eig_2_3)
        assert rep.passed, rep.to_json()
        names = [e.name for e in rep.entries]
        assert "hardy_integrability" in names and "picone" in names

    def test_flat_profile_fails(self):
        params = ProblemParams(lam=0.0, mu=0.0, check_window=False)
        rep = verify_profile(profile(np.full_like(R, 0.4), np.zeros_like(R)), params)
        assert not rep.passed
        assert not rep["boundary_condition"].passed
