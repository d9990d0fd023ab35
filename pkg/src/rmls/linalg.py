"""Dense complex Hermitian linear algebra.

Operators are plain ``numpy`` complex arrays; this module validates them on
entry and provides the handful of primitives the rest of the package needs:
spectral decomposition, exact unitary evolution, and density-matrix metrics.

Qubit ordering convention: ancilla qubits are the *leading* tensor factors,
so ``kron(Z, eye(N))`` acts on the first ancilla and partial traces remove
the leading ``2**k`` block index.
"""

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    state_norm: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-10
    singular: float = 1e-12


DEFAULT_TOL = Tolerances()


class LinalgError(ValueError):
    pass


class NotHermitianError(LinalgError):
    def __init__(self, max_asymmetry: float, tol: float):
        super().__init__(
            f"matrix is not Hermitian: max |M - M^H| = {max_asymmetry:.3e} > {tol:.1e}")
        self.max_asymmetry = max_asymmetry


class DimensionError(LinalgError):
    pass


class SingularMatrixError(LinalgError):
    def __init__(self, min_abs_eig: float):
        super().__init__(f"matrix is singular: min |eigenvalue| = {min_abs_eig:.3e}")
        self.min_abs_eig = min_abs_eig


class EigenSystem(NamedTuple):
    """Eigenvalues in ascending order and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_hermitian(m, tol: float = DEFAULT_TOL.hermitian) -> np.ndarray:
    """Return ``m`` as a square complex array, rejecting non-Hermitian input."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > tol:
        raise NotHermitianError(asym, tol)
    return m


def as_state(psi, tol: float = DEFAULT_TOL.state_norm) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 1:
        raise DimensionError(f"expected a non-empty vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise LinalgError(f"state is not normalized: norm = {norm!r}")
    return psi


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def ket(index: int, dim: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[index] = 1.0
    return e


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def phase_align(reference, psi) -> np.ndarray:
    """Multiply ``psi`` by the unit phase that makes ``<reference|psi>`` real and >= 0."""
    overlap = np.vdot(reference, psi)
    if abs(overlap) == 0.0:
        return np.asarray(psi, dtype=complex)
    return psi * (abs(overlap) / overlap)


def eigh(m, tol: float = DEFAULT_TOL.hermitian) -> EigenSystem:
    """Full spectral decomposition of a Hermitian matrix (LAPACK ``zheevd``)."""
    m = as_hermitian(m, tol)
    w, v = np.linalg.eigh(m)
    return EigenSystem(w, v)


def jacobi_eigh(m, tol: float = DEFAULT_TOL.hermitian, max_sweeps: int = 60) -> EigenSystem:
    """Cyclic complex Jacobi eigensolver.

    Each rotation first removes the phase of the pivot ``m[p, q]`` and then
    applies the real Jacobi rotation of the resulting symmetric 2x2 block.
    Sweeps continue until the off-diagonal Frobenius norm falls below
    ``1e-15 * ||m||_F``. Slow (pure Python pivot loop) but independent of
    LAPACK, which makes it useful as a cross-check.
    """
    a = as_hermitian(m, tol).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(a) ** 2 - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= 1e-300:
                    continue
                phase = b / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        raise LinalgError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], v[:, order])


def evolve(psi, h: Union[np.ndarray, EigenSystem], t: float) -> np.ndarray:
    """Return ``exp(-i h t) psi`` computed from the spectral decomposition of ``h``.

    ``h`` may be a Hermitian matrix or a precomputed :class:`EigenSystem`.
    ``psi`` may also be a ``(dim, k)`` block of column states.
    """
    if t < 0:
        raise ValueError(f"evolution time must be non-negative, got {t}")
    es = h if isinstance(h, EigenSystem) else eigh(h)
    psi = np.asarray(psi, dtype=complex)
    dim = es.eigenvalues.shape[0]
    if psi.shape[0] != dim:
        raise DimensionError(f"state has dimension {psi.shape[0]}, Hamiltonian has {dim}")
    v = es.eigenvectors
    phases = np.exp(-1j * es.eigenvalues * t)
    coeffs = v.conj().T @ psi
    if psi.ndim == 1:
        return v @ (phases * coeffs)
    return v @ (phases[:, None] * coeffs)


def check_density_matrix(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    rho = as_hermitian(rho, tol.hermitian)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol.trace:
        raise LinalgError(f"density matrix trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -tol.psd:
        raise LinalgError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def trace_distance(rho, sigma) -> float:
    """(1/2) * sum of |eigenvalues| of ``rho - sigma``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    # symmetrize away rounding-level asymmetry before the Hermitian solver
    diff = 0.5 * (diff + diff.conj().T)
    return float(min(max(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))), 0.0), 1.0))


def partial_trace_leading_qubits(rho, k: int) -> np.ndarray:
    """Trace out the ``k`` leading qubits of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if k < 0:
        raise ValueError("number of traced qubits must be non-negative")
    anc = 1 << k
    if rho.shape != (dim, dim) or dim % anc != 0 or anc > dim:
        raise DimensionError(f"cannot trace {k} leading qubits from a {rho.shape} matrix")
    sys_dim = dim // anc
    return np.einsum("aiaj->ij", rho.reshape(anc, sys_dim, anc, sys_dim))


def condition_number(a, tol: Tolerances = DEFAULT_TOL) -> float:
    """max |lambda| / min |lambda| of a Hermitian matrix."""
    w = np.abs(np.linalg.eigvalsh(as_hermitian(a, tol.hermitian)))
    lo = float(w.min())
    if lo <= tol.singular:
        raise SingularMatrixError(lo)
    return float(w.max()) / lo
