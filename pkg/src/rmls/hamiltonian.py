"""Interpolating Hamiltonians whose null vectors track ``A(s)^{-1} |b_bar>``.

Two embeddings of ``A`` into an always-invertible family ``A(s)``:

* ``GENERAL``: ``A(s) = (1-s) Z (x) 1 + s X (x) A`` on one extra qubit, with
  ``|b_bar> = |+> (x) |b>``;
* ``POSITIVE``: ``A(s) = (1-s) 1 + s A`` (needs ``A > 0``), ``|b_bar> = |b>``.

From ``A(s)`` and ``P = 1 - |b_bar><b_bar|`` we build the frustration-free
``H(s) = A(s) P A(s)`` (ground-state family) and its off-diagonal square root
``H'(s) = |0><1| (x) A(s) P + |1><0| (x) P A(s)`` (gap-amplified family).
"""

import enum
from dataclasses import dataclass

import numpy as np

from .instance import InstanceError, QlspInstance, exact_solution
from .linalg import eigh, normalize

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # (X + iY)/2 = |0><1|
SIGMA_MINUS = SIGMA_PLUS.T.copy()
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


class EmbeddingMode(enum.Enum):
    GENERAL = "general"
    POSITIVE = "positive"


class Family(enum.Enum):
    GROUND = "ground"
    AMPLIFIED = "amplified"


def ancilla_count(mode: EmbeddingMode, family: Family) -> int:
    """Number of leading ancilla qubits for a (mode, family) pair."""
    return (mode is EmbeddingMode.GENERAL) + (family is Family.AMPLIFIED)


def check_mode(A: np.ndarray, mode: EmbeddingMode) -> None:
    if mode is EmbeddingMode.POSITIVE:
        lo = float(np.linalg.eigvalsh(A)[0])
        if lo <= 0:
            raise InstanceError(
                f"positive embedding needs a positive definite A; min eigenvalue is {lo:.6g}")


def embed_A(A, s: float, mode: EmbeddingMode = EmbeddingMode.GENERAL) -> np.ndarray:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    A = np.asarray(A, dtype=complex)
    check_mode(A, mode)
    eye = np.eye(A.shape[0], dtype=complex)
    if mode is EmbeddingMode.POSITIVE:
        return (1 - s) * eye + s * A
    return (1 - s) * np.kron(PAULI_Z, eye) + s * np.kron(PAULI_X, A)


def barred_b(b, mode: EmbeddingMode = EmbeddingMode.GENERAL) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    if mode is EmbeddingMode.POSITIVE:
        return b.copy()
    return np.kron(KET_PLUS, b)


def _complement_projector(v: np.ndarray) -> np.ndarray:
    return np.eye(v.size, dtype=complex) - np.outer(v, v.conj())


def gap_lower_bound(s: float, kappa: float) -> float:
    """(1-s)^2 + (s/kappa)^2, a lower bound on the gap of H(s)."""
    return (1 - s) ** 2 + (s / kappa) ** 2


@dataclass(frozen=True)
class HamiltonianSlice:
    s: float
    mode: EmbeddingMode
    family: Family
    H: np.ndarray

    @property
    def dim(self) -> int:
        return self.H.shape[0]


class HamiltonianFamily:
    """Builds slices for one instance; caches ``A``, ``|b_bar>`` and ``P``."""

    def __init__(self, inst: QlspInstance, mode: EmbeddingMode = EmbeddingMode.GENERAL):
        check_mode(inst.A, mode)
        self.inst = inst
        self.mode = mode
        self.b_bar = barred_b(inst.b, mode)
        self.P = _complement_projector(self.b_bar)

    @property
    def dim(self) -> int:
        return self.b_bar.size

    def A_of_s(self, s: float) -> np.ndarray:
        return embed_A(self.inst.A, s, self.mode)

    def B(self, s: float) -> np.ndarray:
        return self.A_of_s(s) @ self.P

    def H(self, s: float) -> np.ndarray:
        a = self.A_of_s(s)
        h = a @ self.P @ a
        return 0.5 * (h + h.conj().T)

    def Hprime(self, s: float) -> np.ndarray:
        b = self.B(s)
        return np.kron(SIGMA_PLUS, b) + np.kron(SIGMA_MINUS, b.conj().T)

    def slice(self, s: float, family: Family) -> HamiltonianSlice:
        h = self.H(s) if family is Family.GROUND else self.Hprime(s)
        return HamiltonianSlice(s, self.mode, family, h)

    def eigenpath_state(self, s: float) -> np.ndarray:
        """normalize(A(s)^{-1} |b_bar>) by a pivoted dense solve."""
        return normalize(np.linalg.solve(self.A_of_s(s), self.b_bar))

    def initial_state(self, family: Family) -> np.ndarray:
        """Start of the eigenpath, ``|x(0)>`` (``|-, b>`` in the general embedding).

        ``|b_bar>`` itself is only the starting point in the positive
        embedding; in the general one it is orthogonal to ``|x(0)>``.
        """
        x0 = self.eigenpath_state(0.0)
        if family is Family.GROUND:
            return x0
        return np.kron(np.array([1, 0], dtype=complex), x0)

    def target_state(self, family: Family) -> np.ndarray:
        """Full-register state the ideal traversal ends in."""
        x1 = self.eigenpath_state(1.0)
        if family is Family.GROUND:
            return x1
        return np.kron(np.array([1, 0], dtype=complex), x1)


def build_H(inst: QlspInstance, s: float, mode=EmbeddingMode.GENERAL) -> HamiltonianSlice:
    return HamiltonianFamily(inst, mode).slice(s, Family.GROUND)


def build_Hprime(inst: QlspInstance, s: float, mode=EmbeddingMode.GENERAL) -> HamiltonianSlice:
    return HamiltonianFamily(inst, mode).slice(s, Family.AMPLIFIED)


def eigenpath_state(inst: QlspInstance, s: float, mode=EmbeddingMode.GENERAL) -> np.ndarray:
    return HamiltonianFamily(inst, mode).eigenpath_state(s)


@dataclass(frozen=True)
class SpectralReport:
    """Spectral diagnostics of one slice, all from a single diagonalization.

    ``gap`` is the second-smallest eigenvalue for the ground-state family and
    the smallest nonzero ``|eigenvalue|`` for the amplified family;
    ``gap_bound`` is the matching lower bound (``gap_lower_bound`` or its
    square root). ``symmetry_defect`` is the Hermiticity defect of ``H`` for
    the ground-state family and ``max |(Z(x)1) H' (Z(x)1) + H'|`` for the
    amplified one. ``psd_defect`` is ``max(0, -lambda_min)`` (ground) or the
    largest mismatch between the spectrum and its negation (amplified).
    """

    s: float
    family: Family
    kernel_dim: int
    gap: float
    gap_bound: float
    symmetry_defect: float
    psd_defect: float
    eigenvalues: np.ndarray

    @property
    def ok(self) -> bool:
        want = 1 if self.family is Family.GROUND else 2
        return self.kernel_dim == want and self.gap >= self.gap_bound - 1e-9


def kernel_threshold(h: np.ndarray, rel: float = 1e-7) -> float:
    return rel * max(np.linalg.norm(h, 2), 1e-300)


def spectral_report(fam: HamiltonianFamily, s: float, family: Family) -> SpectralReport:
    kappa = fam.inst.kappa
    sl = fam.slice(s, family)
    h = sl.H
    w = eigh(h).eigenvalues
    thresh = kernel_threshold(h)
    nonzero = np.abs(w) > thresh
    kernel_dim = int(np.count_nonzero(~nonzero))
    bound = gap_lower_bound(s, kappa)
    if family is Family.GROUND:
        gap = float(w[1]) if w.size > 1 else float("inf")
        sym = float(np.max(np.abs(h - h.conj().T)))
        psd = max(0.0, -float(w[0]))
    else:
        gap = float(np.min(np.abs(w[nonzero]))) if nonzero.any() else float("inf")
        bound = np.sqrt(bound)
        zz = np.kron(PAULI_Z, np.eye(h.shape[0] // 2))
        sym = float(np.max(np.abs(zz @ h @ zz + h)))
        psd = float(np.max(np.abs(w + w[::-1])))
    return SpectralReport(s, family, kernel_dim, gap, float(bound), sym, psd, w)


def no_transition_amplitude(fam: HamiltonianFamily, s: float, s_prime: float) -> float:
    """|<0, x(s)| H'(s') |1, b_bar>|."""
    zero = np.array([1, 0], dtype=complex)
    one = np.array([0, 1], dtype=complex)
    bra = np.kron(zero, fam.eigenpath_state(s))
    k = np.kron(one, fam.b_bar)
    return float(abs(np.vdot(bra, fam.Hprime(s_prime) @ k)))


def block_square_defect(fam: HamiltonianFamily, s: float) -> float:
    """Entrywise distance between H'(s)^2 and diag(H(s), P A(s)^2 P)."""
    hp = fam.Hprime(s)
    a = fam.A_of_s(s)
    m = fam.dim
    expected = np.zeros_like(hp)
    expected[:m, :m] = fam.H(s)
    expected[m:, m:] = fam.P @ a @ a @ fam.P
    return float(np.max(np.abs(hp @ hp - expected)))


def isospectral_defect(fam: HamiltonianFamily, s: float) -> float:
    """Mismatch between the nonzero spectra of B B^H and B^H B."""
    b = fam.B(s)
    w1 = np.linalg.eigvalsh(b @ b.conj().T)
    w2 = np.linalg.eigvalsh(b.conj().T @ b)
    thresh = 1e-7 * max(w1.max(), 1e-300)
    nz1, nz2 = w1[w1 > thresh], w2[w2 > thresh]
    if nz1.size != nz2.size:
        return float("inf")
    return float(np.max(np.abs(nz1 - nz2))) if nz1.size else 0.0


def ground_state_target(inst: QlspInstance, mode: EmbeddingMode) -> np.ndarray:
    """Expected eigenpath endpoint at s = 1 expressed through the exact solution."""
    x = exact_solution(inst)
    return x if mode is EmbeddingMode.POSITIVE else np.kron(KET_PLUS, x)
