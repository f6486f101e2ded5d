import time

import numpy as np
import pytest

from spikedpca.arrowhead import ArrowheadMatrix, arrowhead_eig, arrowhead_reduce
from spikedpca.errors import InvalidParameter
from spikedpca.model import decompose_covariance, sample_covariance


def random_arrowhead(p, seed):
    rng = np.random.default_rng(seed)
    return ArrowheadMatrix(
        head=rng.standard_normal(),
        shaft=rng.standard_normal(p - 1),
        tail=rng.standard_normal(p - 1),
    )


def check_eigenpairs(a, w, v, rtol=1e-10):
    dense = a.dense()
    reference = np.linalg.eigvalsh(dense)[::-1]
    scale = np.max(np.abs(reference))
    np.testing.assert_allclose(w, reference, rtol=rtol, atol=rtol * scale)
    np.testing.assert_allclose(v.T @ v, np.eye(a.size), atol=1e-8)
    np.testing.assert_allclose(dense @ v, v * w, atol=1e-8 * scale)


class TestArrowheadMatrix:
    def test_dense_layout(self):
        a = ArrowheadMatrix(head=1.0, shaft=[2.0, 3.0], tail=[4.0, 5.0])
        np.testing.assert_array_equal(
            a.dense(), [[1.0, 2.0, 3.0], [2.0, 4.0, 0.0], [3.0, 0.0, 5.0]]
        )

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(InvalidParameter):
            ArrowheadMatrix(head=1.0, shaft=[1.0], tail=[1.0, 2.0])

    def test_dict_round_trip(self):
        a = ArrowheadMatrix(head=0.5, shaft=[1.0, -1.0], tail=[2.0, 0.0])
        b = ArrowheadMatrix.from_dict(a.to_dict())
        np.testing.assert_array_equal(a.dense(), b.dense())

    def test_from_dict_missing_key(self):
        with pytest.raises(InvalidParameter):
            ArrowheadMatrix.from_dict({"head": 1.0, "shaft": [1.0]})


class TestReduce:
    def test_basis_rotates_to_arrowhead(self, realization):
        s = sample_covariance(realization)
        a, basis = arrowhead_reduce(s)
        np.testing.assert_allclose(basis @ s @ basis.T, a.dense(), atol=1e-12)
        np.testing.assert_allclose(basis @ basis.T, np.eye(s.shape[0]), atol=1e-12)

    def test_head_is_first_entry(self, realization):
        s = sample_covariance(realization)
        decomp = decompose_covariance(realization)
        a, _ = arrowhead_reduce(s)
        sigma = decomp.sigma
        expected = decomp.kappa**2 + 2 * sigma * decomp.kappa * decomp.rho[0] + sigma**2 * decomp.beta[0, 0]
        assert a.head == pytest.approx(expected, rel=1e-12)

    def test_one_by_one(self):
        with pytest.raises(InvalidParameter):
            arrowhead_reduce(np.array([[1.0]]))


class TestArrowheadEig:
    @pytest.mark.parametrize("p", [2, 3, 10, 50])
    def test_matches_dense(self, p):
        a = random_arrowhead(p, seed=p)
        w, v = arrowhead_eig(a)
        check_eigenpairs(a, w, v)

    def test_oracle_batch(self):
        start = time.perf_counter()
        for i in range(100):
            p = (10, 100, 500)[i % 3]
            a = random_arrowhead(p, seed=1000 + i)
            w, _ = arrowhead_eig(a)
            reference = np.linalg.eigvalsh(a.dense())[::-1]
            scale = np.max(np.abs(reference))
            np.testing.assert_allclose(w, reference, rtol=1e-10, atol=1e-10 * scale)
        assert time.perf_counter() - start < 10.0

    def test_two_by_two(self):
        a = ArrowheadMatrix(head=2.0, shaft=[1.0], tail=[0.0])
        w, v = arrowhead_eig(a)
        root2 = np.sqrt(2.0)
        np.testing.assert_allclose(w, [1.0 + root2, 1.0 - root2], rtol=1e-12, atol=1e-12)
        norm = np.sqrt(1.0 + (root2 - 1.0) ** 2)
        expected = np.array([[1.0, 1.0 - root2], [root2 - 1.0, 1.0]]) / norm
        np.testing.assert_allclose(v, expected, atol=1e-12)

    @pytest.mark.parametrize("p", [3, 25, 200])
    def test_trace_and_frobenius_conserved(self, p):
        a = random_arrowhead(p, seed=40 + p)
        w, _ = arrowhead_eig(a)
        trace = a.head + np.sum(a.tail)
        frobenius = a.head**2 + np.sum(a.tail**2) + 2.0 * np.sum(a.shaft**2)
        assert np.sum(w) == pytest.approx(trace, abs=1e-10)
        assert np.sum(w**2) == pytest.approx(frobenius, rel=1e-9)

    def test_zero_shaft_entry_is_deflated(self):
        a = ArrowheadMatrix(head=1.0, shaft=[0.0, 1.0], tail=[5.0, 2.0])
        w, v = arrowhead_eig(a)
        assert 5.0 in w.tolist()
        col = v[:, w.tolist().index(5.0)]
        np.testing.assert_allclose(np.abs(col), [0.0, 1.0, 0.0])
        check_eigenpairs(a, w, v)

    def test_all_zero_shaft(self):
        a = ArrowheadMatrix(head=2.0, shaft=[0.0, 0.0], tail=[3.0, 1.0])
        w, v = arrowhead_eig(a)
        np.testing.assert_array_equal(w, [3.0, 2.0, 1.0])
        np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 0, 2]])

    def test_repeated_tail_values(self):
        a = ArrowheadMatrix(head=0.3, shaft=[1.0, 2.0, 0.5, 0.7], tail=[1.0, 1.0, 1.0, -2.0])
        w, v = arrowhead_eig(a)
        assert np.sum(np.isclose(w, 1.0, atol=1e-12)) == 2
        check_eigenpairs(a, w, v)

    def test_roots_interlace_poles(self):
        a = random_arrowhead(20, seed=9)
        w, _ = arrowhead_eig(a)
        poles = np.sort(a.tail)[::-1]
        assert w[0] > poles[0]
        assert w[-1] < poles[-1]
        for j in range(poles.size - 1):
            assert poles[j + 1] < w[j + 1] < poles[j]

    def test_sample_covariance_spectrum(self, realization):
        s = sample_covariance(realization)
        a, basis = arrowhead_reduce(s)
        w, v = arrowhead_eig(a)
        reference = np.linalg.eigvalsh(s)[::-1]
        np.testing.assert_allclose(w, reference, rtol=1e-9, atol=1e-9 * reference[0])
        top = basis.T @ v[:, 0]
        assert abs(top @ np.linalg.eigh(s)[1][:, -1]) == pytest.approx(1.0, abs=1e-8)
