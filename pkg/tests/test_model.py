import math

import numpy as np
import pytest
from scipy import stats

from spikedpca.errors import DegenerateSignal, InvalidParameter
from spikedpca.model import (
    LatentLaw,
    SpikedModel,
    decompose_covariance,
    sample_covariance,
    sample_model,
)
from spikedpca.rng import SEED_MAX, stream, validate_seed


class TestSpikedModel:
    def test_rejects_negative_parameters(self):
        with pytest.raises(InvalidParameter):
            SpikedModel(signal_norm=-1.0, noise_level=1.0, dimension=3)
        with pytest.raises(InvalidParameter):
            SpikedModel(signal_norm=1.0, noise_level=-0.1, dimension=3)
        with pytest.raises(InvalidParameter):
            SpikedModel(signal_norm=1.0, noise_level=0.1, dimension=0)

    def test_population_covariance(self):
        model = SpikedModel(signal_norm=2.0, noise_level=0.5, dimension=3)
        expected = np.diag([4.25, 0.25, 0.25])
        np.testing.assert_allclose(model.population_covariance(), expected)

    def test_latent_law_accepts_strings(self):
        model = SpikedModel(1.0, 1.0, 2, latent_law="rademacher")
        assert model.latent_law is LatentLaw.RADEMACHER


class TestSeeds:
    def test_seed_range(self):
        assert validate_seed(SEED_MAX) == SEED_MAX
        with pytest.raises(InvalidParameter):
            validate_seed(-1)
        with pytest.raises(InvalidParameter):
            validate_seed(SEED_MAX + 1)

    def test_streams_are_keyed(self):
        a = stream(3, (1, 0)).standard_normal(5)
        b = stream(3, (1, 0)).standard_normal(5)
        c = stream(3, (2, 0)).standard_normal(5)
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, c)


class TestSampling:
    def test_shapes_and_reproducibility(self, model):
        first = sample_model(model, 50, seed=11)
        second = sample_model(model, 50, seed=11)
        assert first.samples.shape == (50, 200)
        assert first.latents_u.shape == (50,)
        np.testing.assert_array_equal(first.samples, second.samples)

    def test_samples_are_read_only(self, realization):
        with pytest.raises(ValueError):
            realization.samples[0, 0] = 1.0

    def test_prefix_property(self, model):
        big = sample_model(model, 40, seed=5, stream_key=(3,))
        small = sample_model(model, 10, seed=5, stream_key=(3,))
        np.testing.assert_array_equal(big.head(10).samples, small.samples)

    def test_with_noise_level_keeps_latents(self, realization):
        quiet = realization.with_noise_level(0.0)
        np.testing.assert_array_equal(quiet.latents_xi, realization.latents_xi)
        np.testing.assert_allclose(quiet.samples[:, 1:], 0.0)

    def test_rejects_bad_n(self, model):
        with pytest.raises(InvalidParameter):
            sample_model(model, 0, seed=1)

    @pytest.mark.parametrize("law", list(LatentLaw))
    def test_latent_moments(self, law):
        u = law.draw(stream(1, (0,)), 200_000)
        assert abs(np.mean(u)) < 0.01
        assert abs(np.mean(u**2) - law.second_moment) < 0.02
        assert abs(np.mean(u**4) - law.fourth_moment) < 0.1


class TestCovariance:
    def test_sample_covariance_divides_by_n(self, realization):
        x = np.asarray(realization.samples)
        np.testing.assert_allclose(sample_covariance(realization), x.T @ x / 50)

    def test_centering_logs_warning(self, realization, caplog):
        sample_covariance(realization, center=True)
        assert "outside the theory" in caplog.text

    def test_zero_noise_is_rank_one(self, model):
        real = sample_model(model.with_noise_level(0.0), 25, seed=2)
        s = sample_covariance(real)
        decomp = decompose_covariance(real)
        expected = np.zeros_like(s)
        expected[0, 0] = decomp.kappa**2
        np.testing.assert_allclose(s, expected, atol=1e-12)

    def test_decomposition_reassembles(self, realization):
        decomp = decompose_covariance(realization)
        np.testing.assert_allclose(
            decomp.covariance(), sample_covariance(realization), rtol=1e-12, atol=1e-12
        )

    def test_l1_first_entry_doubles_rho1(self, realization):
        decomp = decompose_covariance(realization)
        assert decomp.L1[0, 0] == pytest.approx(2.0 * decomp.kappa * decomp.rho[0])

    def test_rademacher_kappa_is_signal_norm(self, rademacher_model):
        real = sample_model(rademacher_model, 40, seed=9)
        decomp = decompose_covariance(real)
        assert decomp.s_u == 1.0
        assert decomp.kappa == rademacher_model.signal_norm

    def test_zero_signal_is_degenerate(self):
        real = sample_model(SpikedModel(0.0, 1.0, 4), 10, seed=1)
        with pytest.raises(DegenerateSignal):
            decompose_covariance(real)


class TestLatentStatistics:
    N = 30

    @pytest.fixture(scope="class")
    def decompositions(self):
        model = SpikedModel(signal_norm=1.0, noise_level=0.5, dimension=200)
        return [
            decompose_covariance(sample_model(model, self.N, seed=17, stream_key=(trial,)))
            for trial in range(50)
        ]

    def test_scaled_rho_is_standard_normal(self, decompositions):
        scaled = np.concatenate([math.sqrt(self.N) * d.rho for d in decompositions])
        assert scaled.size >= 10_000
        assert stats.kstest(scaled, "norm").pvalue > 1e-3

    def test_scaled_beta_diagonal_is_chi_square(self, decompositions):
        diag = np.concatenate([self.N * np.diag(d.beta) for d in decompositions])
        count = diag.size
        mean_se = math.sqrt(2 * self.N / count)
        # fourth central moment of chi^2_n is 12 n^2 + 48 n
        var_se = math.sqrt((12 * self.N**2 + 48 * self.N - (2 * self.N) ** 2) / count)
        assert abs(diag.mean() - self.N) < 5 * mean_se
        assert abs(diag.var(ddof=1) - 2 * self.N) < 5 * var_se


def test_sample_covariance_matches_explicit_sum():
    model = SpikedModel(signal_norm=1.3, noise_level=0.7, dimension=4)
    real = sample_model(model, 6, seed=23)
    x = real.samples
    expected = np.zeros((4, 4))
    for j in range(4):
        for k in range(4):
            total = 0.0
            for i in range(6):
                total += x[i, j] * x[i, k]
            expected[j, k] = total / 6
    np.testing.assert_allclose(sample_covariance(real), expected, rtol=1e-13, atol=1e-15)
