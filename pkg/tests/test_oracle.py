import numpy as np
import pytest

import hierwalk as hw
from hierwalk import oracle
from hierwalk.errors import DimensionCapExceeded, ExponentOverflow, ShapeMismatch

from conftest import global_hamiltonian


class TestMatrixExp:
    def test_zero_matrix(self):
        np.testing.assert_allclose(oracle.matrix_exp(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        out = oracle.matrix_exp(np.diag([1.0, -2.0]))
        np.testing.assert_allclose(out, np.diag([np.e, np.exp(-2.0)]), atol=1e-12)

    def test_rotation_closed_form(self):
        theta = np.pi / 2
        M = np.array([[0.0, theta], [-theta, 0.0]])
        np.testing.assert_allclose(oracle.matrix_exp(M), [[0.0, 1.0], [-1.0, 0.0]], atol=1e-12)

    def test_series_matches_eigendecomposition(self):
        rng = np.random.default_rng(0)
        for n in (2, 8, 32, 64):
            A = rng.normal(size=(n, n))
            A = (A + A.T) / 2.0
            series = oracle.matrix_exp(A)
            eig = oracle.matrix_exp(A, hermitian_hint=True)
            assert np.max(np.abs(series - eig)) <= 1e-9, n

    def test_inverse(self):
        rng = np.random.default_rng(1)
        A = rng.normal(size=(5, 5))
        out = oracle.matrix_exp(A) @ oracle.matrix_exp(-A)
        np.testing.assert_allclose(out, np.eye(5), atol=1e-9)

    def test_semigroup(self):
        rng = np.random.default_rng(2)
        A = rng.normal(size=(4, 4))
        lhs = oracle.matrix_exp(0.7 * A) @ oracle.matrix_exp(0.3 * A)
        np.testing.assert_allclose(lhs, oracle.matrix_exp(A), atol=1e-8)

    def test_entry_cap(self):
        with pytest.raises(ExponentOverflow):
            oracle.matrix_exp(np.array([[2e3]]))

    def test_imaginary_hermitian_is_unitary(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(6, 6))
        A = (A + A.T) / 2.0
        U = oracle.matrix_exp(1j * A)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(6), atol=1e-9)


class TestCompare:
    def test_equal(self):
        report = oracle.compare(np.eye(3), np.eye(3), 1e-12)
        assert report.passed and report.max_abs_diff == 0.0

    def test_detects_single_entry(self):
        B = np.eye(3)
        B[0, 0] += 1e-6
        report = oracle.compare(np.eye(3), B, 1e-8)
        assert not report.passed
        assert report.location == (0, 0)
        assert report.max_abs_diff == pytest.approx(1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            oracle.compare(np.eye(2), np.eye(3), 1e-8)


class TestDenseHdtrw:
    def test_rows_stochastic(self, model_p2c3):
        P = oracle.dense_hdtrw(model_p2c3.global_walk.graph.transition,
                               [loc.graph.transition for loc in model_p2c3.locals])
        np.testing.assert_allclose(P.sum(axis=1), np.ones(12), atol=1e-12)

    def test_spectral_reconstruction_cross_check(self, model_p2p2):
        """Blockwise decomposition of the deformed walk rebuilt against the
        direct semigroup assembly."""
        times = np.array([0.4, 0.9])
        rec = hw.reconstruct_hctrw(model_p2p2, hw.hctrw_spectral(model_p2p2, times))
        direct = hw.build_hctrw(model_p2p2, times)
        report = oracle.compare(rec, direct, 1e-8)
        assert report.passed


class TestDenseJoint:
    def test_vertex_basis_time_zero_is_product(self, model_p2c3):
        rng = np.random.default_rng(4)
        psi_g = hw.random_state(2, rng)
        psis = [hw.random_state(2, rng), hw.random_state(3, rng)]
        out = oracle.dense_joint_distribution(
            global_hamiltonian(model_p2c3), [loc.laplacian for loc in model_p2c3.locals],
            0.0, psi_g.amplitudes, [p.amplitudes for p in psis], basis="vertex")
        expected = np.outer(np.abs(psis[0].amplitudes) ** 2, np.abs(psis[1].amplitudes) ** 2)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_d0_branch_equals_vertex(self, model_d0):
        psi_g = np.array([1.0 + 0j])
        psi0 = np.array([0.8, 0.6j])
        H = np.array([[1.0]])
        hams = [model_d0.locals[0].laplacian]
        for t in (0.5, np.pi):
            branch = oracle.dense_joint_distribution(H, hams, t, psi_g, [psi0], basis="branch")
            vertex = oracle.dense_joint_distribution(H, hams, t, psi_g, [psi0], basis="vertex")
            assert np.max(np.abs(branch - vertex)) <= 1e-10

    def test_vertex_basis_differs_in_general(self, model_p2p2):
        """The two marginalizations are different objects away from d=0."""
        psi_g = np.array([1.0, 1.0j]) / np.sqrt(2)
        psis = [np.array([1.0, 0.0j]), np.array([1.0, 0.0j])]
        H = global_hamiltonian(model_p2p2)
        hams = [loc.laplacian for loc in model_p2p2.locals]
        branch = oracle.dense_joint_distribution(H, hams, 0.7, psi_g, psis, basis="branch")
        vertex = oracle.dense_joint_distribution(H, hams, 0.7, psi_g, psis, basis="vertex")
        assert np.max(np.abs(branch - vertex)) > 1e-3
        assert vertex.min() >= -1e-12  # the vertex marginal is a true law
        assert vertex.sum() == pytest.approx(1.0, abs=1e-10)

    def test_reference_cross_check_at_t1(self, model_p2p2):
        """Dual implementation agreement on the reference model at t=1."""
        psi_g = np.array([1.0, 1.0j]) / np.sqrt(2)
        psis = [np.array([1.0, 0.0j]), np.array([0.6, 0.8j])]
        H = global_hamiltonian(model_p2p2)
        hams = [loc.laplacian for loc in model_p2p2.locals]
        ref = oracle.dense_joint_distribution(H, hams, 1.0, psi_g, psis, basis="branch")
        mine = hw.kbar_joint_distribution(
            np.array([0.5, 0.5]), tuple(loc.system for loc in model_p2p2.locals), 1.0,
            hw.QuantumState(psi_g), [hw.QuantumState(p) for p in psis])
        assert np.max(np.abs(ref - mine.probabilities)) <= 1e-8

    def test_dimension_cap(self, model_p2p2):
        with pytest.raises(DimensionCapExceeded):
            oracle.dense_joint_distribution(
                global_hamiltonian(model_p2p2),
                [loc.laplacian for loc in model_p2p2.locals],
                1.0, np.array([1.0, 0.0]), [np.array([1.0, 0.0])] * 2,
                basis="branch", cap=4)
