import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpiforge.compact import (
    accumulated_alpha,
    min_accumulated_alpha,
    occupancy,
    occupancy_sweep,
    sparsity_excess,
    sparsity_loss,
    threshold_alpha,
    total_loss,
)
from mpiforge.cues import TauMap
from mpiforge.errors import EmptyInputError, InvalidRangeError, ShapeMismatchError
from mpiforge.mpi import VALUE_EPS, Mpi, init_mpi, render_view
from mpiforge.metrics import ssim as ssim_metric

from conftest import frontal_camera, random_camera, random_mpi


def excess_oracle(a, tau):
    import math

    terms = []
    for y in range(a.shape[0]):
        for x in range(a.shape[1]):
            terms.append(max(a[y, x] - tau[y, x], 0.0))
    return math.fsum(terms)


class TestAccumulatedAlpha:
    def test_all_zero(self):
        cam = frontal_camera(width=4, height=4)
        logits = np.zeros((3, 4, 4, 4))
        logits[..., 3] = -745.0
        m = Mpi(logits, [4.0, 2.0, 1.0], cam)
        assert np.all(accumulated_alpha(m) == 0.0)

    def test_uniform_half(self):
        cam = frontal_camera(width=3, height=3)
        logits = np.zeros((4, 3, 3, 4))  # sigmoid(0) = 0.5 exactly
        m = Mpi(logits, [8.0, 4.0, 2.0, 1.0], cam)
        np.testing.assert_array_equal(accumulated_alpha(m), 2.0)

    def test_matches_scalar_sum(self, rng):
        m = random_mpi(rng, width=3, height=3, num_planes=5)
        a = accumulated_alpha(m)
        alpha = m.alpha().astype(np.float64)
        for y in range(3):
            for x in range(3):
                assert a[y, x] == sum(alpha[d, y, x] for d in range(5))


class TestSparsityExcess:
    def test_under_budget_is_free(self):
        assert sparsity_excess(np.array([[2.0]]), np.array([[3]])) == 0.0

    def test_over_budget_charges_difference(self):
        assert sparsity_excess(np.array([[5.0]]), np.array([[3]])) == 2.0

    def test_two_pixel_hand_evaluation(self):
        a = np.array([[2.5, 7.1]])
        tau = TauMap(np.array([[3, 6]]))
        assert sparsity_excess(a, tau) == (7.1 - 6.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            sparsity_excess(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_matches_brute_force(self, rng):
        for _ in range(50):
            a = rng.uniform(0, 8, (4, 5))
            tau = rng.choice([3, 6], (4, 5)).astype(float)
            assert sparsity_excess(a, tau) == excess_oracle(a, tau)


class TestMinAccumulatedAlpha:
    def test_background_covers_all_views(self):
        cam = frontal_camera(width=10, height=10)
        m = init_mpi(np.full((3, 10, 10, 3), 0.5), [6.0, 3.0, 1.5], cam)
        views = [
            frontal_camera(width=10, height=10, center=(dx, dy, 0.0))
            for dx, dy in [(-0.2, -0.2), (0.2, -0.2), (-0.2, 0.2), (0.2, 0.2)]
        ]
        assert min_accumulated_alpha(m, views) >= 1 - 2 * VALUE_EPS * 3

    def test_transparent_leaks_at_most_clamp(self):
        cam = frontal_camera(width=6, height=6)
        m = init_mpi(np.full((4, 6, 6, 3), 0.5), [8.0, 4.0, 2.0, 1.0], cam)
        drop = m.logits.copy()
        drop[0, ..., 3] = np.log(VALUE_EPS) - np.log1p(-VALUE_EPS)
        m = m.with_logits(drop)
        assert min_accumulated_alpha(m, []) <= 4 * VALUE_EPS + 1e-6

    def test_no_input_cameras_uses_reference_only(self, rng):
        m = random_mpi(rng, width=5, height=5, num_planes=3)
        assert min_accumulated_alpha(m, []) == accumulated_alpha(m).min()


class TestSparsityLoss:
    def test_zero_when_satisfied(self):
        assert sparsity_loss(0.0, 1.0, 100) == 0.0

    def test_unit_hole_penalty(self):
        assert sparsity_loss(0.0, 0.0, 100) == 1.0

    def test_hand_evaluation(self):
        assert abs(sparsity_loss(1.1, 0.4, 2) - (0.55 + 0.6)) < 1e-12

    def test_zero_iff_no_excess_and_full_coverage(self, rng):
        for _ in range(100):
            excess = float(rng.choice([0.0, rng.uniform(0.01, 5)]))
            a_min = float(rng.uniform(0, 2))
            loss = sparsity_loss(excess, a_min, 64)
            assert (loss == 0.0) == (excess == 0.0 and a_min >= 1.0)

    def test_bad_pixel_count(self):
        with pytest.raises(InvalidRangeError):
            sparsity_loss(1.0, 1.0, 0)


class TestTotalLoss:
    def test_weighted_sum(self):
        assert abs(total_loss(0.2, 1.0, 0.1) - 0.3) < 1e-15

    def test_zero_sparsity(self):
        assert total_loss(0.77, 0.0, 0.1) == 0.77

    def test_zero_lambda(self):
        assert total_loss(0.4, 123.0, 0.0) == 0.4


class TestThresholdAlpha:
    def test_zero_threshold_keeps_positive_alphas(self, rng):
        m = random_mpi(rng, width=4, height=4, num_planes=3, masked=True)
        out = threshold_alpha(m, 0.0)
        assert np.array_equal(out.zero_mask, m.zero_mask)
        assert np.array_equal(out.values(), m.values())

    def test_selective_masking(self):
        cam = frontal_camera(width=1, height=3)
        logits = np.zeros((1, 3, 1, 4))
        from mpiforge.mpi import logit

        logits[0, :, 0, 3] = logit(np.array([0.1, 0.5, 0.9]))
        m = Mpi(logits, [2.0], cam)
        out = threshold_alpha(m, 0.3)
        got = out.alpha()[0, :, 0]
        assert got[0] == 0.0
        np.testing.assert_allclose(got[1:], [0.5, 0.9], atol=1e-7)

    def test_idempotent(self, rng):
        m = random_mpi(rng, width=4, height=4, num_planes=3)
        once = threshold_alpha(m, 0.4)
        twice = threshold_alpha(once, 0.4)
        assert np.array_equal(once.zero_mask, twice.zero_mask)

    def test_out_of_range(self, rng):
        m = random_mpi(rng, width=2, height=2, num_planes=2)
        for t in (-0.1, 0.96, 2.0):
            with pytest.raises(InvalidRangeError):
                threshold_alpha(m, t)

    @given(t1=st.floats(0.0, 0.95), t2=st.floats(0.0, 0.95), seed=st.integers(0, 2**31))
    @settings(max_examples=30, deadline=None)
    def test_occupancy_monotone(self, t1, t2, seed):
        rng = np.random.default_rng(seed)
        m = random_mpi(rng, width=4, height=4, num_planes=3)
        lo, hi = sorted([t1, t2])
        assert occupancy(threshold_alpha(m, hi)) <= occupancy(threshold_alpha(m, lo))


class TestOccupancy:
    def test_fully_masked(self, rng):
        m = random_mpi(rng, width=3, height=3, num_planes=2)
        m = m.with_mask(np.ones((2, 3, 3), dtype=bool))
        assert occupancy(m) == 0.0

    def test_background_only(self):
        cam = frontal_camera(width=4, height=4)
        m = init_mpi(np.full((4, 4, 4, 3), 0.5), [8.0, 4.0, 2.0, 1.0], cam)
        mask = np.ones((4, 4, 4), dtype=bool)
        mask[0] = False
        assert occupancy(m.with_mask(mask)) == 0.25

    def test_matches_counting_oracle(self, rng):
        m = random_mpi(rng, width=4, height=4, num_planes=3, masked=True)
        alpha = m.alpha()
        count = sum(
            1
            for d in range(3)
            for y in range(4)
            for x in range(4)
            if alpha[d, y, x] > 0
        )
        assert occupancy(m) == count / alpha.size


class TestOccupancySweep:
    def test_requires_views_and_valid_thresholds(self, rng):
        m = random_mpi(rng, width=12, height=12, num_planes=2)
        with pytest.raises(EmptyInputError):
            occupancy_sweep(m, [], [0.0])
        views = [(m.reference, np.zeros((12, 12, 3)))]
        with pytest.raises(InvalidRangeError):
            occupancy_sweep(m, views, [0.5, 0.2])
        with pytest.raises(InvalidRangeError):
            occupancy_sweep(m, views, [0.0, 0.97])

    def test_threshold_zero_equals_direct_render(self, rng):
        m = random_mpi(rng, width=16, height=16, num_planes=3)
        gt = rng.random((16, 16, 3))
        curve = occupancy_sweep(m, [(m.reference, gt)], [0.0])
        direct = ssim_metric(render_view(m, m.reference), gt)
        assert abs(curve.records[0].ssim - direct) <= 1e-9

    def test_occupancy_non_increasing(self, rng):
        m = random_mpi(rng, width=12, height=12, num_planes=4)
        gt = rng.random((12, 12, 3))
        thresholds = [0.0, 0.2, 0.4, 0.6, 0.8, 0.95]
        curve = occupancy_sweep(m, [(m.reference, gt)], thresholds)
        occ = [r.occupancy for r in curve.records]
        assert all(b <= a for a, b in zip(occ, occ[1:]))

    def test_csv_format(self, rng):
        m = random_mpi(rng, width=12, height=12, num_planes=2)
        gt = rng.random((12, 12, 3))
        curve = occupancy_sweep(m, [(m.reference, gt)], [0.0, 0.5])
        lines = curve.to_csv().strip().split("\n")
        assert lines[0] == "threshold,occupancy,ssim,l1"
        assert len(lines) == 3
        for line in lines[1:]:
            parts = line.split(",")
            assert len(parts) == 4
            for p in parts:
                float(p)
                assert len(p.split(".")[1]) == 6


class TestExcessGradient:
    def test_finite_difference_matches_subgradient(self, rng):
        # d excess / d alpha_d(x) = [A(x) > tau(x)] away from the kink
        h = 1e-3
        for _ in range(20):
            d_planes = int(rng.integers(2, 5))
            alpha = rng.uniform(0, 1, (d_planes, 3, 3))
            tau = rng.choice([3, 6], (3, 3)).astype(float)
            a = alpha.sum(axis=0)
            if np.any(np.abs(a - tau) < 3 * h):
                continue
            grad = (a > tau).astype(float)

            def excess(al):
                return np.maximum(al.sum(axis=0) - tau, 0.0).sum()

            for _ in range(5):
                d = int(rng.integers(d_planes))
                y, x = int(rng.integers(3)), int(rng.integers(3))
                up = alpha.copy()
                up[d, y, x] += h
                down = alpha.copy()
                down[d, y, x] -= h
                fd = (excess(up) - excess(down)) / (2 * h)
                assert abs(fd - grad[y, x]) <= 1e-4
