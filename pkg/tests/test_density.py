import numpy as np
import pytest

from spikedpca.density import DensityKind, NoiseDensity
from spikedpca.errors import InvalidParameter, IoFailure
from spikedpca.rng import stream


class TestConstructors:
    def test_point_mass(self):
        h = NoiseDensity.point_mass(2.0)
        assert h.mu1 == 2.0
        assert h.mu2_sq == 0.0
        assert h.support_max == 2.0

    def test_uniform_moments(self):
        h = NoiseDensity.uniform(0.5, 1.5)
        assert h.mass == pytest.approx(1.0)
        assert h.mu1 == pytest.approx(1.0)
        assert h.mu2_sq == pytest.approx(1.0 / 12.0)

    def test_tabulated_triangle(self):
        h = NoiseDensity.tabulated([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
        assert h.kind is DensityKind.TABULATED
        assert h.mass == pytest.approx(1.0)
        assert h.mu1 == pytest.approx(1.0)
        assert h.mu2_sq == pytest.approx(1.0 / 6.0)

    def test_tabulated_trims_empty_ends(self):
        h = NoiseDensity.tabulated([0, 1, 2, 3, 4, 5], [0, 0, 1, 1, 0, 0])
        assert h.support_min == 1.0
        assert h.support_max == 4.0

    @pytest.mark.parametrize(
        "grid, values",
        [([0, 1], [1]), ([1, 0], [1, 1]), ([0, 1], [-1, 1]), ([0, 1], [0, 0])],
    )
    def test_tabulated_rejects(self, grid, values):
        with pytest.raises(InvalidParameter):
            NoiseDensity.tabulated(grid, values)

    def test_uniform_rejects_empty_support(self):
        with pytest.raises(InvalidParameter):
            NoiseDensity.uniform(1.0, 1.0)


class TestParse:
    def test_point(self):
        assert NoiseDensity.parse("point:3").support_min == 3.0
        assert NoiseDensity.parse("point").support_min == 1.0

    def test_uniform(self):
        h = NoiseDensity.parse("uniform:0.5:1.5")
        assert (h.support_min, h.support_max) == (0.5, 1.5)

    def test_csv(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("rho,density\n0.5,1\n1.5,1\n")
        h = NoiseDensity.parse(f"csv:{path}")
        assert h.mu1 == pytest.approx(1.0)

    def test_missing_csv(self, tmp_path):
        with pytest.raises(IoFailure):
            NoiseDensity.parse(f"csv:{tmp_path / 'absent.csv'}")

    @pytest.mark.parametrize("text", ["gamma:1", "uniform:1", "point:abc"])
    def test_rejects(self, text):
        with pytest.raises(InvalidParameter):
            NoiseDensity.parse(text)


class TestSampling:
    def test_uniform_sample_moments(self):
        draws = NoiseDensity.uniform(0.5, 1.5).sample(100_000, stream(1, (0,)))
        assert draws.min() >= 0.5 and draws.max() <= 1.5
        assert np.mean(draws) == pytest.approx(1.0, abs=0.01)

    def test_tabulated_sample_moments(self):
        h = NoiseDensity.tabulated([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        draws = h.sample(200_000, stream(2, (0,)))
        assert np.mean(draws) == pytest.approx(1.0, abs=0.01)
        assert np.var(draws) == pytest.approx(1.0 / 6.0, abs=0.01)

    def test_point_mass_sample(self):
        draws = NoiseDensity.point_mass(2.0).sample(5, stream(0))
        np.testing.assert_array_equal(draws, 2.0)


def test_scaled():
    h = NoiseDensity.uniform(0.5, 1.5).scaled(2.0)
    assert h.mu1 == pytest.approx(2.0)
    assert h.support_max == 3.0
