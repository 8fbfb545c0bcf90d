import numpy as np
import pytest

from gdlearn._data import (
    SyntheticSpec,
    apply_noise,
    gen_synthetic,
    noise_ramp,
    salt_pepper_count,
)
from gdlearn.errors import InvalidParameterError
from gdlearn.model import (
    GrayImage,
    HomogeneousGaussianPlusSaltPepper,
    NonhomogeneousGaussian,
    NonhomogeneousGaussianPlusSaltPepper,
    NoiseSpec,
    PerColumnSparsity,
    SaltPepper,
    TotalSparsity,
)
from tests.fixtures.instances import gradient_image


class TestGenSynthetic:
    def test_per_column_sparsity(self):
        data = gen_synthetic(SyntheticSpec(), seed=1)

        assert data.D_true.shape == (20, 50)
        assert np.allclose(np.linalg.norm(data.D_true, axis=0), 1.0)
        assert data.A_true.nnz_per_column().tolist() == [3] * 1500
        assert np.allclose(data.X_clean, data.D_true @ data.A_true.to_dense())

    def test_total_sparsity(self):
        spec = SyntheticSpec(d=6, m=10, n=40, sparsity=TotalSparsity(57))

        data = gen_synthetic(spec, seed=2)

        assert data.A_true.nnz == 57

    def test_noiseless_signals_are_an_exact_copy(self):
        data = gen_synthetic(SyntheticSpec(d=5, m=8, n=30), seed=3)

        assert np.array_equal(data.X_noisy, data.X_clean)

    def test_noise_has_the_requested_deviation(self):
        data = gen_synthetic(SyntheticSpec(noise_sigma=0.1), seed=4)

        noise = data.X_noisy - data.X_clean
        assert np.std(noise) == pytest.approx(0.1, rel=0.05)

    def test_noise_level_does_not_change_the_clean_signals(self):
        clean = gen_synthetic(SyntheticSpec(d=5, m=8, n=30), seed=5)
        noisy = gen_synthetic(SyntheticSpec(d=5, m=8, n=30, noise_sigma=0.5), seed=5)

        assert np.array_equal(clean.X_clean, noisy.X_clean)
        assert np.array_equal(clean.D_true, noisy.D_true)

    def test_is_deterministic(self):
        spec = SyntheticSpec(d=5, m=8, n=30, noise_sigma=0.2)

        a, b = gen_synthetic(spec, 6), gen_synthetic(spec, 6)

        assert np.array_equal(a.X_noisy, b.X_noisy)

    def test_rejects_k_above_atom_count(self):
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(m=3, sparsity=PerColumnSparsity(4))

    def test_rejects_negative_noise(self):
        with pytest.raises(InvalidParameterError):
            SyntheticSpec(noise_sigma=-0.1)


class TestNoiseRamp:
    def test_runs_from_delta_to_zero(self):
        ramp = noise_ramp(5, 7, 30.0)

        assert ramp[0, 0] == 30.0
        assert ramp[-1, -1] == 0.0
        assert ramp[2, 3] == pytest.approx(15.0)

    def test_single_pixel_takes_delta(self):
        assert noise_ramp(1, 1, 4.0).tolist() == [[4.0]]


class TestApplyNoise:
    def test_salt_pepper_corrupts_exactly_p_percent(self):
        img = GrayImage(np.full((256, 256), 128.0))

        out = apply_noise(img, SaltPepper(10.0), seed=1)

        changed = out.pixels != 128.0
        assert int(changed.sum()) == 6554
        assert set(np.unique(out.pixels[changed]).tolist()) <= {0.0, 255.0}

    def test_salt_pepper_count_rounds_half_up(self):
        assert salt_pepper_count(10, 5.0) == 1
        assert salt_pepper_count(10, 4.0) == 0
        assert salt_pepper_count(65536, 10.0) == 6554

    def test_nonhomogeneous_variance_follows_the_ramp(self):
        img = GrayImage(np.zeros((16, 16)))
        corner = list[float]()
        far = list[float]()
        for seed in range(400):
            out = apply_noise(img, NonhomogeneousGaussian(20.0), seed)
            corner.append(out.pixels[0, 0])
            far.append(out.pixels[-1, -1])

        assert np.var(corner) == pytest.approx(400.0, rel=0.3)
        assert np.all(np.array(far) == 0.0)

    def test_noise_deviation_falls_along_rows_and_columns(self):
        img = GrayImage(np.full((8, 8), 128.0))
        noise = np.stack(
            [
                apply_noise(img, NonhomogeneousGaussian(50.0), seed).pixels - 128.0
                for seed in range(200)
            ]
        )

        by_row = np.sqrt(np.mean(noise**2, axis=(0, 2)))
        by_col = np.sqrt(np.mean(noise**2, axis=(0, 1)))

        assert np.all(np.diff(by_row) < 0)
        assert np.all(np.diff(by_col) < 0)

    @pytest.mark.parametrize(
        "spec",
        [
            NonhomogeneousGaussian(0.0),
            SaltPepper(0.0),
            HomogeneousGaussianPlusSaltPepper(0.0, 0.0),
            NonhomogeneousGaussianPlusSaltPepper(0.0, 0.0),
        ],
    )
    def test_zero_noise_leaves_the_image_unchanged(self, spec: NoiseSpec):
        img = gradient_image(12, 10)

        assert np.array_equal(apply_noise(img, spec, seed=3).pixels, img.pixels)

    def test_clip_keeps_the_intensity_range(self):
        img = GrayImage(np.full((32, 32), 250.0))

        spec = HomogeneousGaussianPlusSaltPepper(30.0, 5.0)

        out = apply_noise(img, spec, 2, clip=True)

        assert out.pixels.max() <= 255.0
        assert out.pixels.min() >= 0.0

    def test_is_deterministic(self):
        img = gradient_image(16, 16)
        spec = NonhomogeneousGaussianPlusSaltPepper(25.0, 3.0)

        a, b = apply_noise(img, spec, 9), apply_noise(img, spec, 9)

        assert np.array_equal(a.pixels, b.pixels)
