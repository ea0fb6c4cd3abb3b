import numpy as np
import pytest

from mpiforge.errors import ShapeMismatchError, ValidationError
from mpiforge.metrics import (
    MetricReport,
    l1,
    metric_report,
    psnr,
    ssim,
    synthesis_error,
)


def constant_pair_ssim(mu_x: float, mu_y: float) -> float:
    """Closed form for constant images: zero variance and covariance."""
    c1 = 0.01**2
    c2 = 0.03**2
    return ((2 * mu_x * mu_y + c1) * c2) / ((mu_x**2 + mu_y**2 + c1) * c2)


class TestSsim:
    def test_identical_images(self, rng):
        img = rng.random((20, 24, 3))
        assert abs(ssim(img, img) - 1.0) <= 1e-9

    def test_constant_images_closed_form(self):
        a = np.full((16, 16), 0.2)
        b = np.full((16, 16), 0.4)
        expected = constant_pair_ssim(0.2, 0.4)
        assert abs(ssim(a, b) - expected) <= 1e-9
        # frozen value from the closed form: (0.16 + 1e-4) / (0.2 + 1e-4)
        assert abs(expected - 0.1601 / 0.2001) < 1e-15

    def test_heavy_noise_scores_low(self, rng):
        # smooth base image so broadband noise destroys local structure
        ys, xs = np.mgrid[0:32, 0:32] / 31.0
        img = 0.5 + 0.3 * np.sin(3.1 * xs + 1.0) * np.sin(2.3 * ys + 0.4)
        noisy = np.clip(img + rng.uniform(-0.5, 0.5, img.shape), 0.0, 1.0)
        assert ssim(img, noisy) < 0.5

    def test_symmetry(self, rng):
        a = rng.random((18, 18, 3))
        b = rng.random((18, 18, 3))
        assert abs(ssim(a, b) - ssim(b, a)) <= 1e-12

    def test_bounded_above_by_one(self, rng):
        for _ in range(5):
            a = rng.random((14, 14))
            b = np.clip(a + rng.normal(0, 0.05, a.shape), 0, 1)
            assert ssim(a, b) <= 1.0 + 1e-12

    def test_luma_weights_sum_to_one(self):
        from mpiforge.metrics import _LUMA

        assert abs(_LUMA.sum() - 1.0) < 1e-12

    def test_dim_mismatch(self, rng):
        with pytest.raises(ShapeMismatchError):
            ssim(np.zeros((12, 12)), np.zeros((12, 13)))

    def test_too_small_image(self):
        with pytest.raises(ValidationError):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))


class TestSynthesisError:
    def test_identical_is_zero(self, rng):
        img = rng.random((16, 16, 3))
        assert synthesis_error(img, img) == 0.0

    def test_constant_offset_closed_form(self):
        a = np.full((16, 16), 0.3)
        b = np.full((16, 16), 0.4)
        expected = 0.1 + (1.0 - constant_pair_ssim(0.3, 0.4)) / 2.0
        assert abs(synthesis_error(a, b) - expected) <= 1e-9

    def test_symmetric(self, rng):
        a = rng.random((14, 14, 3))
        b = rng.random((14, 14, 3))
        assert abs(synthesis_error(a, b) - synthesis_error(b, a)) <= 1e-12


class TestOtherMetrics:
    def test_l1(self):
        a = np.zeros((4, 4))
        b = np.full((4, 4), 0.25)
        assert l1(a, b) == 0.25

    def test_psnr_known_value(self):
        a = np.zeros((8, 8))
        b = np.full((8, 8), 0.1)
        assert abs(psnr(a, b) - 20.0) < 1e-9

    def test_psnr_identical_capped(self):
        a = np.full((8, 8), 0.5)
        assert psnr(a, a) == 120.0

    def test_report(self, rng):
        a = rng.random((16, 16, 3))
        rep = metric_report(a, a)
        assert isinstance(rep, MetricReport)
        assert abs(rep.ssim - 1.0) <= 1e-9 and rep.l1 == 0.0
