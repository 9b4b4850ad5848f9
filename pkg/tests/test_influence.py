import numpy as np
import pytest
from scipy import stats

import ginicov as gc

NORMAL2 = gc.EllipticalSpec("normal", 2)


def normal_abs_moment(r):
    """E|Z - r| for standard normal Z, closed form."""
    return 2 * stats.norm.pdf(r) + r * (2 * stats.norm.cdf(r) - 1)


class TestClosedFormCurves:
    def test_cov(self):
        assert gc.alpha_beta_cov(0.0) == gc.AlphaBeta(0.0, 1.0)
        assert gc.alpha_beta_cov(3.0).alpha == 9.0

    def test_tyler(self):
        for r in (0.0, 1.0, 7.5):
            ab = gc.alpha_beta_tyler(r, 2)
            assert ab.alpha == 4.0 and np.isclose(ab.beta, 2.0)

    def test_kotz_at_zero(self):
        d = 3
        spec = gc.EllipticalSpec("kotz", d)
        ab = gc.alpha_beta_kotz(0.0, spec)
        assert ab.alpha == 0.0
        assert np.isclose(ab.beta, 2 * d / gc.c_first(spec))

    def test_kotz_linear_slope_at_own_model(self):
        d = 3
        spec = gc.EllipticalSpec("kotz", d)
        for r in (0.5, 2.0, 4.0):
            assert np.isclose(gc.alpha_beta_kotz(r, spec).alpha, (d + 2) * r / (d + 1))

    def test_kotz_normal_value(self):
        ab = gc.alpha_beta_kotz(2.0, NORMAL2)
        assert np.isclose(ab.alpha, 16 / (3 * np.sqrt(np.pi / 2)), atol=1e-12)
        assert np.isclose(ab.alpha, 4.255, atol=5e-4)


class TestTrGiniCurves:
    def test_alpha_zero_at_origin(self):
        ab = gc.alpha_beta_trgini(0.0, NORMAL2, mc_size=10**5, seed=1)
        assert abs(ab.alpha) < 3 * ab.se_alpha + 1e-12

    def test_beta_at_origin_closed_form(self):
        # beta(0) = 4 - 4 c1/c, and c = sqrt(2) c1 at the normal
        ab = gc.alpha_beta_trgini(0.0, NORMAL2, mc_size=2 * 10**5, seed=2)
        expected = 4 - 4 / np.sqrt(2)
        assert abs(ab.beta - expected) < 4 * ab.se_beta

    def test_d1_reduction_identity(self):
        # alpha(r) - beta(r) = 4 E|X - r|/c - 4 in one dimension
        spec = gc.EllipticalSpec("normal", 1)
        c = gc.c_pairwise(spec).value
        for r in (0.0, 0.5, 1.0, 2.0, 4.0):
            ab = gc.alpha_beta_trgini(r, spec, mc_size=10**5, seed=int(10 * r) + 3)
            expected = 4 * normal_abs_moment(r) / c - 4
            tol = 3 * np.hypot(ab.se_alpha, ab.se_beta)
            assert abs((ab.alpha - ab.beta) - expected) < tol

    def test_curve_grid(self):
        curve = gc.if_curve("tr-gini", NORMAL2, rmax=3.0, points=7, mc_size=2000, seed=4)
        assert curve.grid.shape == (7,)
        assert np.all(np.isfinite(curve.alpha)) and np.all(np.isfinite(curve.beta))


class TestIfGcm:
    def test_d1_reduction(self):
        # 2 E|X - x| - 2 sigma_g at the standard normal
        spec = gc.EllipticalSpec("normal", 1)
        x = np.array([1.3])
        got = gc.if_gcm(x, spec, mc_size=4 * 10**5, seed=5)[0, 0]
        expected = 2 * normal_abs_moment(1.3) - 2 * 2 / np.sqrt(np.pi)
        assert abs(got - expected) < 0.01

    def test_center_off_diagonals_vanish(self):
        got = gc.if_gcm(np.zeros(2), NORMAL2, mc_size=2 * 10**5, seed=6)
        assert abs(got[0, 1]) < 0.01

    def test_symmetry(self):
        x = np.array([1.0, 0.5])
        a = gc.if_gcm(x, NORMAL2, mc_size=4 * 10**5, seed=7)
        b = gc.if_gcm(-x, NORMAL2, mc_size=4 * 10**5, seed=7)
        assert np.abs(a - b).max() < 0.02

    def test_sample_plug_in(self):
        data = gc.draw(NORMAL2, 4 * 10**4, 8).data
        x = np.array([2.0, 0.0])
        plug = gc.if_gcm(x, data)
        model = gc.if_gcm(x, NORMAL2, mc_size=4 * 10**4, seed=9)
        assert np.abs(plug - model).max() < 0.05


class TestEmpiricalIf:
    def test_cov_closed_form(self):
        est = lambda rows: np.cov(rows, rowvar=False)
        got = gc.empirical_if(est, [2.0, 0.0], NORMAL2, eps=1e-3, n=10**5, seed=10)
        assert np.abs(got - np.diag([3.0, -1.0])).max() < 0.15

    def test_eps_independence(self):
        est = lambda rows: np.cov(rows, rowvar=False)
        a = gc.empirical_if(est, [2.0, 0.0], NORMAL2, eps=1e-2, n=10**5, seed=11)
        b = gc.empirical_if(est, [2.0, 0.0], NORMAL2, eps=1e-3, n=10**5, seed=11)
        assert np.abs(a - b).max() / np.abs(b).max() < 0.10

    def test_tyler_alpha_extraction(self):
        est = lambda rows: gc.tyler_m(rows, np.zeros(2)).estimate
        for r in (0.7, 3.0):
            m = gc.empirical_if(est, [r, 0.0], NORMAL2, eps=1e-3, n=10**5, seed=12)
            alpha = m[0, 0] - m[1, 1]
            assert abs(alpha - 4.0) < 0.25

    def test_eps_domain(self):
        with pytest.raises(ValueError):
            gc.empirical_if(lambda rows: np.eye(2), [0.0, 0.0], NORMAL2, eps=0.0)


class TestAsv:
    def test_tyler(self):
        got = gc.asv_offdiag("tyler", NORMAL2)
        assert got.value == 2.0 and got.method == "closed-form"

    def test_cov_is_tau(self):
        spec = gc.EllipticalSpec("t", 3, nu=8.0)
        assert gc.asv_offdiag("cov", spec).value == gc.tau_regular(spec)

    def test_kotz_at_own_model(self):
        for d in (2, 3, 5):
            got = gc.asv_offdiag("kotz-m", gc.EllipticalSpec("kotz", d))
            assert np.isclose(got.value, (d + 2) / (d + 1))

    def test_zonoid_at_kotz(self):
        for d in (2, 3, 5):
            got = gc.asv_offdiag("zonoid", gc.EllipticalSpec("kotz", d))
            assert np.isclose(got.value, (d + 4) / (d + 2))

    def test_moment_guard(self):
        with pytest.raises(gc.MomentUndefinedError):
            gc.asv_offdiag("kotz-m", gc.EllipticalSpec("t", 2, nu=2.0))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            gc.asv_offdiag("duembgen", NORMAL2)

    def test_trgini_components_identity(self):
        comp = gc.asv_trgini_components(NORMAL2, outer=2000, inner=200, seed=13)
        assert np.isclose(comp.cov_diag, comp.asv_diag - 2 * comp.asv_offdiag)
        assert comp.asv_offdiag > 0 and comp.se_offdiag > 0


class TestAreTable:
    def test_tyler_closed_cells(self):
        specs = [gc.EllipticalSpec("t", 2, nu=5.0), gc.EllipticalSpec("kotz", 4)]
        report = gc.are_table(specs, ["tyler"])
        assert np.isclose(report.rows[0].are, 1.50, atol=0.005)
        assert np.isclose(report.rows[1].are, 0.93, atol=0.005)

    def test_kotz_cell(self):
        report = gc.are_table([gc.EllipticalSpec("t", 2, nu=5.0)], ["kotz-m"])
        assert np.isclose(report.rows[0].are, 2.25, atol=0.01)

    def test_are_equals_ratio_exactly(self):
        spec = gc.EllipticalSpec("kotz", 3)
        report = gc.are_table([spec], ["tyler", "kotz-m", "zonoid"])
        tau = gc.tau_regular(spec)
        for row in report.rows:
            assert abs(row.are - tau / row.asv) < 1e-12

    def test_duembgen_reference_rows(self):
        report = gc.are_table([NORMAL2], ["duembgen"])
        row = report.rows[0]
        assert row.method == "reference" and row.are == 0.91 and np.isnan(row.asv)

    def test_undefined_moment_cells_marked(self):
        report = gc.are_table([gc.EllipticalSpec("t", 2, nu=3.0)], ["tyler", "kotz-m"])
        assert all(row.method == "undefined" and np.isnan(row.are) for row in report.rows)

    def test_render(self):
        report = gc.are_table([NORMAL2], ["tyler", "duembgen"])
        text = report.render()
        assert "tyler" in text and "reference" in text


class TestCurveObjects:
    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            gc.IFCurve("cov", np.array([0.0, 0.0, 1.0]), np.zeros(3), np.zeros(3))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            gc.IFCurve("cov", np.array([0.0, 1.0]), np.zeros(3), np.zeros(2))

    def test_cov_curve_values(self):
        curve = gc.if_curve("cov", NORMAL2, rmax=4.0, points=5)
        assert np.allclose(curve.alpha, curve.grid**2)
        assert np.allclose(curve.beta, 1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            gc.if_curve("gcm", NORMAL2, rmax=1.0, points=3)
