import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hierwalk as hw
from hierwalk.errors import DimensionMismatch, NotHermitian

P2_LAPLACIAN = np.array([[1.0, -1.0], [-1.0, 1.0]])


def c3_laplacian():
    P = np.full((3, 3), 0.5) - 0.5 * np.eye(3)
    return np.eye(3) - P


class TestEigh:
    def test_scalar_zero(self):
        system = hw.eigh(np.array([[0.0]]))
        np.testing.assert_allclose(system.values, [0.0])
        np.testing.assert_allclose(system.vectors, [[1.0]])

    def test_p2_laplacian(self):
        system = hw.eigh(P2_LAPLACIAN)
        np.testing.assert_allclose(system.values, [0.0, 2.0], atol=1e-15)
        s = 1 / np.sqrt(2)
        # canonical phases make the dominant entry of each column positive
        np.testing.assert_allclose(np.abs(system.vectors), [[s, s], [s, s]], atol=1e-15)
        np.testing.assert_allclose(system.vectors[:, 0], [s, s], atol=1e-15)
        np.testing.assert_allclose(system.vectors[:, 1] * np.sign(system.vectors[0, 1]),
                                   [s, -s], atol=1e-15)

    def test_c3_degenerate_group(self):
        # circulant eigenvalues 1 - cos(2 pi k / 3): 0, 3/2, 3/2
        system = hw.eigh(c3_laplacian())
        np.testing.assert_allclose(system.values, [0.0, 1.5, 1.5], atol=1e-12)
        assert [len(g) for g in system.groups] == [1, 2]

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            hw.eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_non_square(self):
        with pytest.raises(DimensionMismatch):
            hw.eigh(np.zeros((2, 3)))

    def test_reconstruction_and_orthonormality_random(self):
        rng = np.random.default_rng(7)
        for n in (2, 3, 6, 10):
            A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            A = (A + A.conj().T) / 2.0
            system = hw.eigh(A)
            assert system.orthonormality_defect() <= 1e-10
            assert np.max(np.abs(system.reconstruct() - A)) <= 1e-9

    def test_involution_on_grouped_values(self):
        """Rebuild from the eigensystem, decompose again: same grouped values."""
        system = hw.eigh(c3_laplacian())
        again = hw.eigh(system.reconstruct())
        np.testing.assert_allclose(again.values, system.values, atol=1e-9)
        assert [len(g) for g in again.groups] == [len(g) for g in system.groups]


class TestTransitionSpectrum:
    def test_p2_values(self):
        system = hw.eigh(P2_LAPLACIAN)
        spec = hw.transition_spectrum(system, np.array([0.5, 0.5]))
        np.testing.assert_allclose(spec.values, [1.0, -1.0], atol=1e-15)

    def test_loop_vertex(self):
        spec = hw.transition_spectrum(hw.eigh(np.array([[0.0]])), np.array([1.0]))
        np.testing.assert_allclose(spec.values, [1.0])
        np.testing.assert_allclose(spec.right_vectors, [[1.0]])
        np.testing.assert_allclose(spec.left_vectors, [[1.0]])

    def test_c3_values(self):
        spec = hw.transition_spectrum(hw.eigh(c3_laplacian()), np.full(3, 1 / 3))
        np.testing.assert_allclose(spec.values, [1.0, -0.5, -0.5], atol=1e-12)

    def test_biorthogonality_and_reconstruction(self):
        rng = np.random.default_rng(3)
        flux = rng.uniform(0.1, 1.0, size=(4, 4))
        flux = (flux + flux.T) / 2.0
        pi = flux.sum(axis=1) / flux.sum()
        P = flux / flux.sum(axis=1)[:, None]
        spec = hw.transition_spectrum(hw.eigh(hw.normalized_laplacian(P, pi).matrix), pi)
        n = 4
        np.testing.assert_allclose(spec.left_vectors @ spec.right_vectors, np.eye(n), atol=1e-9)
        np.testing.assert_allclose(spec.reconstruct(), P, atol=1e-9)
        # stochastic P always keeps the eigenvalue-1 branch
        assert np.min(np.abs(spec.values - 1.0)) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hw.transition_spectrum(hw.eigh(P2_LAPLACIAN), np.array([1.0]))


class TestShiftToNonnegative:
    def test_already_nonnegative_min_shift(self):
        system = hw.eigh(P2_LAPLACIAN)
        shifted, record = hw.shift_to_nonnegative(system, "min-shift")
        np.testing.assert_allclose(shifted.values, [0.0, 2.0], atol=1e-15)
        assert record.offset == pytest.approx(0.0, abs=1e-15)

    def test_min_shift_negative_spectrum(self):
        system = hw.eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))  # values (-1, 1)
        shifted, record = hw.shift_to_nonnegative(system, "min-shift")
        np.testing.assert_allclose(shifted.values, [0.0, 2.0], atol=1e-15)
        assert record.offset == pytest.approx(-1.0)
        np.testing.assert_allclose(shifted.vectors, system.vectors)

    def test_max_reflect(self):
        system = hw.eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        reflected, record = hw.shift_to_nonnegative(system, "max-reflect")
        np.testing.assert_allclose(reflected.values, [0.0, 2.0], atol=1e-15)
        assert record.offset == pytest.approx(1.0)
        # the eigenvector of the old maximum now sits at the new minimum
        np.testing.assert_allclose(reflected.vectors[:, 0], system.vectors[:, 1])
        assert reflected.values[0] >= -1e-12

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            hw.shift_to_nonnegative(hw.eigh(P2_LAPLACIAN), "reflect-min")


class TestTupleIterator:
    def test_single_system(self):
        entries = list(hw.tuple_iterator([hw.eigh(P2_LAPLACIAN)]))
        assert [e[0] for e in entries] == [(0,), (1,)]

    def test_two_by_two_lexicographic(self):
        s = hw.eigh(P2_LAPLACIAN)
        assert [e[0] for e in hw.tuple_iterator([s, s])] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_two_by_three(self):
        entries = list(hw.tuple_iterator([hw.eigh(P2_LAPLACIAN), hw.eigh(c3_laplacian())]))
        assert len(entries) == 6
        assert entries[-1][0] == (1, 2)

    def test_values_and_vectors_follow_labels(self):
        s2, s3 = hw.eigh(P2_LAPLACIAN), hw.eigh(c3_laplacian())
        for idx, values, vectors in hw.tuple_iterator([s2, s3]):
            assert values == (pytest.approx(s2.values[idx[0]]), pytest.approx(s3.values[idx[1]]))
            np.testing.assert_allclose(vectors[1], s3.vectors[:, idx[1]])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            next(hw.tuple_iterator([]))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=4))
def test_tuple_iterator_count_and_order(dims):
    systems = [hw.eigh(np.diag(np.arange(n, dtype=float))) for n in dims]
    seen = [idx for idx, _, _ in hw.tuple_iterator(systems)]
    assert len(seen) == int(np.prod(dims))
    assert len(set(seen)) == len(seen)
    assert seen == sorted(seen)
