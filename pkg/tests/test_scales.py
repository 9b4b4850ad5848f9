import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ginicov as gc
from ginicov.scales import _kth_pair_distance

scale_lists = st.lists(
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False), min_size=2, max_size=30
)


class TestToShape:
    def test_identity(self):
        assert np.array_equal(gc.to_shape(np.eye(3)).w, np.eye(3))

    def test_scaled_identity(self):
        assert np.allclose(gc.to_shape(5 * np.eye(2)).w, np.eye(2))

    def test_diagonal(self):
        assert np.allclose(gc.to_shape(np.diag([3.0, 1.0])).w, np.diag([1.5, 0.5]))

    def test_scale_invariance(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        # c=2 is exact in binary floating point, arbitrary c up to rounding
        assert np.array_equal(gc.to_shape(m).w, gc.to_shape(2.0 * m).w)
        assert np.abs(gc.to_shape(m).w - gc.to_shape(7.3 * m).w).max() < 1e-15

    def test_idempotent(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        w = gc.to_shape(m).w
        assert np.abs(gc.to_shape(w).w - w).max() < 1e-15

    def test_zero_trace(self):
        with pytest.raises(gc.ZeroTraceError):
            gc.to_shape(np.zeros((2, 2)))

    def test_kind_propagates(self):
        sm = gc.ScatterMatrix(np.eye(2), kind="gcm")
        assert gc.to_shape(sm).kind == "gcm"


class TestSampleCovariance:
    def test_hand_case(self):
        m = gc.sample_covariance([[0.0, 0.0], [2.0, 0.0]]).m
        assert np.allclose(m, [[2.0, 0.0], [0.0, 0.0]])

    def test_row_permutation_invariant(self):
        rng = np.random.default_rng(60)
        data = rng.standard_normal((30, 2))
        perm = rng.permutation(30)
        assert np.allclose(gc.sample_covariance(data).m, gc.sample_covariance(data[perm]).m)

    def test_monte_carlo(self):
        data = gc.draw(gc.EllipticalSpec("normal", 2), 10**5, 61).data
        assert np.abs(gc.sample_covariance(data).m - np.eye(2)).max() < 0.02


class TestMad:
    def test_hand_case(self):
        assert np.isclose(gc.mad([1.0, 2.0, 3.0]), 1.4826)

    def test_constant(self):
        assert gc.mad([2.0, 2.0, 2.0]) == 0.0

    def test_normal_consistency(self):
        rng = np.random.default_rng(62)
        assert abs(gc.mad(rng.standard_normal(10**6)) - 1) < 0.01

    @given(scale_lists, st.floats(-50, 50, allow_nan=False), st.floats(-5, 5, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_equivariance(self, xs, b, a):
        xs = np.asarray(xs)
        assert np.isclose(gc.mad(a * xs + b), abs(a) * gc.mad(xs), atol=1e-9)


class TestQn:
    def test_two_points(self):
        assert np.isclose(gc.qn([1.0, 2.0]), 2.2219)

    def test_constant(self):
        assert gc.qn(np.ones(10)) == 0.0

    def test_normal_consistency(self):
        rng = np.random.default_rng(63)
        assert abs(gc.qn(rng.standard_normal(10**5)) - 1) < 0.02

    @given(scale_lists, st.floats(-50, 50, allow_nan=False), st.floats(-5, 5, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_equivariance(self, xs, b, a):
        xs = np.asarray(xs)
        assert np.isclose(gc.qn(a * xs + b), abs(a) * gc.qn(xs), atol=1e-9)

    def test_bisection_matches_materialized(self):
        rng = np.random.default_rng(64)
        xs = rng.standard_normal(500)
        n = xs.size
        h = n // 2 + 1
        k = h * (h - 1) // 2
        ii, jj = np.triu_indices(n, 1)
        direct = float(np.partition(np.abs(xs[ii] - xs[jj]), k - 1)[k - 1])
        assert _kth_pair_distance(xs, k) == pytest.approx(direct, abs=1e-12)

    def test_order_statistic_definition(self):
        rng = np.random.default_rng(65)
        xs = rng.standard_normal(11)
        h = 11 // 2 + 1
        k = h * (h - 1) // 2
        dists = sorted(
            abs(xs[i] - xs[j]) for i in range(11) for j in range(i + 1, 11)
        )
        assert np.isclose(gc.qn(xs), 2.2219 * dists[k - 1])


class TestMrcm:
    def test_spherical(self):
        data = gc.draw(gc.EllipticalSpec("normal", 2), 10**4, 66).data
        m = gc.mrcm(data, "mad").m
        assert np.abs(np.diag(m) - 1).max() < 0.1
        assert abs(m[0, 1]) < 0.03

    def test_axis_aligned_eigenvalues(self):
        spec = gc.EllipticalSpec("normal", 2, scatter=np.diag([4.0, 1.0]))
        data = gc.draw(spec, 10**4, 67).data
        eigs = np.sort(np.linalg.eigvalsh(gc.mrcm(data, "mad").m))
        assert abs(eigs[1] / eigs[0] - 4.0) < 0.4

    def test_translation_invariance(self):
        rng = np.random.default_rng(68)
        data = rng.standard_normal((200, 2))
        a = gc.mrcm(data, "qn").m
        b = gc.mrcm(data + np.array([5.0, -2.0]), "qn").m
        assert np.abs(a - b).max() < 1e-8

    def test_degenerate_direction(self):
        rng = np.random.default_rng(69)
        data = np.column_stack([rng.standard_normal(50), np.full(50, 2.0)])
        with pytest.raises(gc.DegenerateSampleError):
            gc.mrcm(data, "mad")

    def test_unknown_scale(self):
        with pytest.raises(ValueError):
            gc.mrcm(np.random.default_rng(0).standard_normal((20, 2)), "sn")

    def test_psd(self):
        rng = np.random.default_rng(70)
        data = rng.standard_normal((100, 3))
        assert np.linalg.eigvalsh(gc.mrcm(data, "qn").m)[0] >= 0


def test_estimator_family_comparison(spherical_shapes_10k):
    # all trace-normalized estimates approach the identity on the shared
    # spherical sample
    for name, w in spherical_shapes_10k.items():
        assert np.abs(w - np.eye(2)).max() < 0.05, name
