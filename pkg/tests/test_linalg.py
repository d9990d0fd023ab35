import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmls.linalg import (DimensionError, NotHermitianError, SingularMatrixError,
                         condition_number, eigh, evolve, jacobi_eigh,
                         partial_trace_leading_qubits, projector, trace_distance)

from conftest import random_hermitian, random_state

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def _contract_trace(rho, anc, sys):
    """Loop-based partial trace over the leading factor."""
    out = np.zeros((sys, sys), dtype=complex)
    for a in range(anc):
        for i in range(sys):
            for j in range(sys):
                out[i, j] += rho[a * sys + i, a * sys + j]
    return out


class TestEigh:

    def test_diagonal(self):
        es = eigh(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(es.eigenvalues, [1, 3])
        np.testing.assert_allclose(np.abs(es.eigenvectors), [[0, 1], [1, 0]])

    def test_pauli_x(self):
        np.testing.assert_allclose(eigh(X).eigenvalues, [-1, 1], atol=1e-15)

    def test_reconstruct_random(self, rng):
        m = random_hermitian(rng, 8)
        np.testing.assert_allclose(eigh(m).reconstruct(), m, atol=1e-9)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError) as exc:
            eigh(np.array([[1, 2], [0, 1]]))
        assert exc.value.max_asymmetry == pytest.approx(2.0)

    @pytest.mark.parametrize("dim", [1, 2, 5, 12])
    def test_jacobi_matches_lapack(self, rng, dim):
        m = random_hermitian(rng, dim)
        jac = jacobi_eigh(m)
        lap = eigh(m)
        np.testing.assert_allclose(jac.eigenvalues, lap.eigenvalues, atol=1e-12)
        np.testing.assert_allclose(jac.reconstruct(), m, atol=1e-12)
        v = jac.eigenvectors
        np.testing.assert_allclose(v.conj().T @ v, np.eye(dim), atol=1e-12)

    def test_jacobi_degenerate(self):
        m = np.kron(np.eye(2), X)
        np.testing.assert_allclose(jacobi_eigh(m).eigenvalues, [-1, -1, 1, 1], atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 16), st.integers(0, 2 ** 32 - 1))
    def test_spectral_invariants(self, dim, seed):
        m = random_hermitian(np.random.default_rng(seed), dim)
        es = eigh(m)
        v = es.eigenvectors
        np.testing.assert_allclose(v @ v.conj().T, np.eye(dim), atol=1e-10)
        assert abs(es.eigenvalues.sum() - np.trace(m).real) <= 1e-9 * dim
        resid = np.linalg.norm(m @ v - v * es.eigenvalues, axis=0)
        assert resid.max() <= 1e-9 * dim
        assert np.all(np.diff(es.eigenvalues) >= 0)


class TestEvolve:

    def test_zero_time(self, rng):
        psi = random_state(rng, 6)
        np.testing.assert_allclose(evolve(psi, random_hermitian(rng, 6), 0.0), psi, atol=1e-14)

    def test_pauli_z_half_pi(self):
        # exp(-i pi Z / 2) = -i Z, and Z|+> = |->
        out = evolve(PLUS, Z, np.pi / 2)
        np.testing.assert_allclose(out, -1j * MINUS, atol=1e-15)
        assert abs(np.vdot(MINUS, out)) == pytest.approx(1.0)

    def test_group_property(self, rng):
        h = random_hermitian(rng, 7)
        psi = random_state(rng, 7)
        np.testing.assert_allclose(evolve(evolve(psi, h, 0.3), h, 1.1), evolve(psi, h, 1.4),
                                   atol=1e-9)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            evolve(random_state(rng, 3), np.eye(4), 1.0)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            evolve(KET0, Z, -1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.floats(0, 50), st.integers(0, 2 ** 32 - 1))
    def test_unitary(self, dim, t, seed):
        r = np.random.default_rng(seed)
        h = random_hermitian(r, dim)
        phi, psi = random_state(r, dim), random_state(r, dim)
        a, b = evolve(phi, h, t), evolve(psi, h, t)
        assert abs(np.linalg.norm(b) - 1) <= 1e-10
        assert abs(abs(np.vdot(a, b)) - abs(np.vdot(phi, psi))) <= 1e-9


class TestTraceDistance:

    def test_identical(self, rng):
        rho = projector(random_state(rng, 4))
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal(self):
        assert trace_distance(projector(KET0), projector(KET1)) == pytest.approx(1.0)

    def test_plus_vs_zero(self):
        # difference has eigenvalues +-1/sqrt(2)
        assert trace_distance(projector(PLUS), projector(KET0)) == pytest.approx(
            1 / np.sqrt(2), abs=1e-12)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            trace_distance(np.eye(2) / 2, np.eye(4) / 4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
    def test_metric(self, dim, seed):
        r = np.random.default_rng(seed)

        def mixed():
            w = r.dirichlet(np.ones(3))
            return sum(wi * projector(random_state(r, dim)) for wi in w)

        a, b, c = mixed(), mixed(), mixed()
        assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-12)
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9


class TestPartialTrace:

    def test_product(self, rng):
        sigma = projector(random_state(rng, 4))
        out = partial_trace_leading_qubits(np.kron(projector(KET0), sigma), 1)
        np.testing.assert_allclose(out, sigma, atol=1e-15)

    def test_bell(self):
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        np.testing.assert_allclose(partial_trace_leading_qubits(projector(bell), 1),
                                   np.eye(2) / 2, atol=1e-15)

    def test_plus_b(self, rng):
        b = random_state(rng, 8)
        rho = projector(np.kron(PLUS, b))
        out = partial_trace_leading_qubits(rho, 1)
        np.testing.assert_allclose(out, _contract_trace(rho, 2, 8), atol=1e-15)
        np.testing.assert_allclose(out, projector(b), atol=1e-12)

    def test_two_qubits_matches_loop(self, rng):
        psi = random_state(rng, 16)
        rho = projector(psi)
        np.testing.assert_allclose(partial_trace_leading_qubits(rho, 2),
                                   _contract_trace(rho, 4, 4), atol=1e-15)

    def test_too_many(self):
        with pytest.raises(DimensionError):
            partial_trace_leading_qubits(np.eye(4) / 4, 3)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    def test_factorizes(self, k, m, seed):
        r = np.random.default_rng(seed)
        a = projector(random_state(r, 2 ** k))
        s = projector(random_state(r, 2 ** m))
        out = partial_trace_leading_qubits(np.kron(a, s), k)
        np.testing.assert_allclose(out, s, atol=1e-12)
        assert abs(np.trace(out) - 1) <= 1e-10


class TestConditionNumber:

    @pytest.mark.parametrize("diag, expected", [
        ([1, 1, 1], 1.0),
        ([1, 0.5], 2.0),
        ([1, -0.1, 0.5], 10.0),
    ])
    def test_diagonal(self, diag, expected):
        assert condition_number(np.diag(diag)) == pytest.approx(expected)

    def test_singular(self):
        with pytest.raises(SingularMatrixError) as exc:
            condition_number(np.diag([1.0, 0.0]))
        assert exc.value.min_abs_eig == 0.0
