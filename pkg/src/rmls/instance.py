"""QLSP instances: random generation with kappa post-selection, exact solves, I/O.

A ``.qlsp`` file is plain text::

    # rmls qlsp instance v1
    n 4
    d 4
    seed 7
    kappa 10.000263...
    meta kappa_target 10
    ...
    A <nnz>
    <row> <col> <re> <im>      # upper triangle only, 0-based
    b <N>
    <re> <im>

Floats are written with 17 significant digits so a save/load round trip is
exact.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .linalg import (DEFAULT_TOL, SingularMatrixError, as_hermitian, condition_number,
                     normalize)
from .seeds import derived_rng

NORM_TOL = 1e-9
FORMAT_HEADER = "# rmls qlsp instance v1"


class InstanceError(ValueError):
    pass


class PostSelectionError(InstanceError):
    def __init__(self, target: float, closest: float, attempts: int):
        super().__init__(
            f"no matrix with kappa within tolerance of {target} after {attempts} attempts; "
            f"closest kappa achieved: {closest!r}")
        self.target = target
        self.closest = closest
        self.attempts = attempts


class QlspFormatError(InstanceError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    d: int
    kappa_target: float
    kappa_tol: float = 1e-3
    b_sparsity: Optional[int] = None   # defaults to d
    max_attempts: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 1 <= self.d <= 2 ** self.n:
            raise ValueError(f"d must lie in [1, {2 ** self.n}]")
        if self.kappa_target < 1:
            raise ValueError("kappa_target must be >= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        bs = self.d if self.b_sparsity is None else self.b_sparsity
        if not 1 <= bs <= 2 ** self.n:
            raise ValueError(f"b_sparsity must lie in [1, {2 ** self.n}]")

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def b_nonzeros(self) -> int:
        return self.d if self.b_sparsity is None else self.b_sparsity


@dataclass
class QlspInstance:
    """Hermitian ``A`` with unit spectral norm, unit vector ``b``, and cached kappa."""

    n: int
    A: np.ndarray
    b: np.ndarray
    d: int
    kappa: float = field(default=0.0)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        N = 2 ** self.n
        self.A = as_hermitian(self.A)
        self.b = np.asarray(self.b, dtype=complex)
        if self.A.shape != (N, N) or self.b.shape != (N,):
            raise InstanceError(
                f"expected A of shape {(N, N)} and b of length {N}, "
                f"got {self.A.shape} and {self.b.shape}")
        w = np.linalg.eigvalsh(self.A)
        norm = float(np.max(np.abs(w)))
        if abs(norm - 1.0) > NORM_TOL:
            raise InstanceError(f"spectral norm of A is {norm!r}, expected 1 (tol {NORM_TOL})")
        row_nnz = int(np.max(np.count_nonzero(self.A, axis=1)))
        if row_nnz > self.d:
            raise InstanceError(f"A has a row with {row_nnz} nonzeros, exceeds d = {self.d}")
        if abs(np.linalg.norm(self.b) - 1.0) > DEFAULT_TOL.state_norm:
            raise InstanceError(f"b has norm {np.linalg.norm(self.b)!r}, expected 1")
        self.kappa = condition_number(self.A)

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.A)[0])

    @property
    def is_positive_definite(self) -> bool:
        return self.min_eigenvalue > 0


def _sparsity_pattern(N: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric boolean mask with at most ``d`` entries per row.

    Upper-triangle positions (diagonal included) are visited in random order
    and accepted while both affected rows still have room.
    """
    rows, cols = np.triu_indices(N)
    order = rng.permutation(rows.size)
    count = [0] * N
    full = 0
    mask = np.zeros((N, N), dtype=bool)
    for i, j in zip(rows[order].tolist(), cols[order].tolist()):
        if i == j:
            if count[i] < d:
                count[i] += 1
                full += count[i] == d
                mask[i, i] = True
        elif count[i] < d and count[j] < d:
            count[i] += 1
            count[j] += 1
            full += (count[i] == d) + (count[j] == d)
            mask[i, j] = mask[j, i] = True
        if full == N:
            break
    return mask


def random_sparse_hermitian(cfg: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    """Random d-sparse Hermitian matrix with spectral norm 1.

    Entries on a random symmetric pattern have independent real and imaginary
    parts uniform in [-1, 1]; the matrix is Hermitized as (M + M^H)/2 and
    divided by its spectral norm. Draws repeat on (numerically) singular output.
    """
    return _draw_hermitian(cfg, rng)[0]


def _draw_hermitian(cfg, rng):
    N = cfg.N
    while True:
        mask = _sparsity_pattern(N, cfg.d, rng)
        m = rng.uniform(-1, 1, (N, N)) + 1j * rng.uniform(-1, 1, (N, N))
        m = np.where(mask, m, 0)
        m = 0.5 * (m + m.conj().T)
        w = np.abs(np.linalg.eigvalsh(m))
        top = w.max()
        if w.min() > DEFAULT_TOL.singular * max(top, 1.0):
            return m / top, top / w.min()


def random_sparse_b(n: int, b_sparsity: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vector with exactly ``b_sparsity`` nonzero complex amplitudes."""
    N = 2 ** n
    if not 1 <= b_sparsity <= N:
        raise ValueError(f"b_sparsity must lie in [1, {N}]")
    support = rng.choice(N, size=b_sparsity, replace=False)
    b = np.zeros(N, dtype=complex)
    while True:
        amp = rng.normal(size=b_sparsity) + 1j * rng.normal(size=b_sparsity)
        if np.all(amp != 0):
            break
    b[support] = amp
    return normalize(b)


def _scan_attempts(cfg: GeneratorConfig, start: int, stop: int):
    """Return (first accepted attempt index or None, closest kappa) over [start, stop)."""
    closest = None
    for attempt in range(start, stop):
        _, kappa = _draw_hermitian(cfg, derived_rng(cfg.seed, 0, attempt))
        if closest is None or abs(kappa - cfg.kappa_target) < abs(closest - cfg.kappa_target):
            closest = kappa
        if abs(kappa - cfg.kappa_target) <= cfg.kappa_tol:
            return attempt, closest
    return None, closest


def generate_with_kappa(cfg: GeneratorConfig, workers: int = 1,
                        chunk: int = 2000) -> QlspInstance:
    """Rejection-sample ``A`` until |kappa - target| <= tol, then draw ``b``.

    Attempt ``k`` uses its own generator derived from ``(seed, 0, k)`` and
    ``b`` uses ``(seed, 1)``. With ``workers > 1`` blocks of attempts are
    scanned in separate processes; the accepted matrix is always the one with
    the lowest attempt index, so the result does not depend on ``workers``.
    """
    closest = None
    accepted = None
    if workers <= 1:
        accepted, closest = _scan_attempts(cfg, 0, cfg.max_attempts)
    else:
        from concurrent.futures import ProcessPoolExecutor

        starts = range(0, cfg.max_attempts, chunk)
        with ProcessPoolExecutor(workers) as pool:
            for lo in range(0, len(starts), workers):
                batch = [(s, min(s + chunk, cfg.max_attempts)) for s in starts[lo:lo + workers]]
                results = pool.map(_scan_attempts, [cfg] * len(batch),
                                   [b[0] for b in batch], [b[1] for b in batch])
                for hit, near in results:
                    if near is not None and (closest is None or abs(near - cfg.kappa_target)
                                             < abs(closest - cfg.kappa_target)):
                        closest = near
                    if hit is not None and accepted is None:
                        accepted = hit
                if accepted is not None:
                    break
    if accepted is None:
        raise PostSelectionError(cfg.kappa_target, closest, cfg.max_attempts)
    a, _ = _draw_hermitian(cfg, derived_rng(cfg.seed, 0, accepted))
    b = random_sparse_b(cfg.n, cfg.b_nonzeros, derived_rng(cfg.seed, 1))
    meta = {
        "seed": cfg.seed,
        "kappa_target": cfg.kappa_target,
        "kappa_tol": cfg.kappa_tol,
        "b_sparsity": cfg.b_nonzeros,
        "attempts": accepted + 1,
    }
    return QlspInstance(cfg.n, a, b, cfg.d, metadata=meta)


def exact_solution(inst: QlspInstance) -> np.ndarray:
    """Normalized ``A^{-1} b``."""
    try:
        x = np.linalg.solve(inst.A, inst.b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(0.0) from exc
    return normalize(x)


def solution_residual(inst: QlspInstance) -> float:
    """||A x_unnormalized - b|| for the direct solve."""
    x = np.linalg.solve(inst.A, inst.b)
    return float(np.linalg.norm(inst.A @ x - inst.b))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_instance(inst: QlspInstance) -> str:
    lines = [FORMAT_HEADER, f"n {inst.n}", f"d {inst.d}",
             f"seed {inst.metadata.get('seed', 0)}", f"kappa {_fmt(inst.kappa)}"]
    for key in sorted(inst.metadata):
        if key != "seed":
            val = inst.metadata[key]
            lines.append(f"meta {key} {_fmt(val) if isinstance(val, float) else val}")
    rows, cols = np.nonzero(np.triu(inst.A))
    lines.append(f"A {rows.size}")
    for i, j in zip(rows.tolist(), cols.tolist()):
        z = inst.A[i, j]
        lines.append(f"{i} {j} {_fmt(z.real)} {_fmt(z.imag)}")
    lines.append(f"b {inst.N}")
    lines.extend(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in inst.b)
    return "\n".join(lines) + "\n"


def save_instance(inst: QlspInstance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def _parse_meta_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def loads_instance(text: str, path="<string>") -> QlspInstance:
    lines = text.splitlines()
    pos = 0

    def fail(msg, line=None):
        raise QlspFormatError(path, pos if line is None else line, msg)

    def next_line():
        nonlocal pos
        while pos < len(lines):
            pos += 1
            raw = lines[pos - 1].strip()
            if raw and not raw.startswith("#"):
                return raw.split()
        fail("unexpected end of file")

    def number(tok, conv, what):
        try:
            return conv(tok)
        except ValueError:
            fail(f"bad {what}: {tok!r}")

    header = {}
    meta = {}
    while True:
        toks = next_line()
        key = toks[0]
        if key == "A":
            break
        if key == "meta":
            if len(toks) != 3:
                fail("expected 'meta <key> <value>'")
            meta[toks[1]] = _parse_meta_value(toks[2])
        elif key in ("n", "d", "seed", "kappa"):
            if len(toks) != 2:
                fail(f"expected '{key} <value>'")
            header[key] = number(toks[1], float if key == "kappa" else int, key)
        else:
            fail(f"unknown header field {key!r}")
    for key in ("n", "d"):
        if key not in header:
            fail(f"missing header field {key!r}")
    n, d = header["n"], header["d"]
    if n < 1:
        fail(f"bad n: {n}")
    N = 2 ** n
    if len(toks) != 2:
        fail("expected 'A <nnz>'")
    nnz = number(toks[1], int, "nnz")
    a = np.zeros((N, N), dtype=complex)
    seen = set()
    for _ in range(nnz):
        toks = next_line()
        if len(toks) != 4:
            fail("expected '<row> <col> <re> <im>'")
        i, j = number(toks[0], int, "row"), number(toks[1], int, "col")
        re, im = number(toks[2], float, "real part"), number(toks[3], float, "imaginary part")
        if not (0 <= i < N and 0 <= j < N):
            fail(f"index ({i}, {j}) out of range for N = {N}")
        if i > j:
            fail(f"entry ({i}, {j}) is below the diagonal; only the upper triangle is stored")
        if i == j and im != 0.0:
            fail(f"diagonal entry ({i}, {i}) has imaginary part {im!r}; A must be Hermitian")
        if (i, j) in seen:
            fail(f"duplicate entry ({i}, {j})")
        seen.add((i, j))
        a[i, j] = complex(re, im)
        if i != j:
            a[j, i] = complex(re, -im)
    toks = next_line()
    if toks[0] != "b" or len(toks) != 2 or number(toks[1], int, "b length") != N:
        fail(f"expected 'b {N}'")
    b = np.zeros(N, dtype=complex)
    for k in range(N):
        toks = next_line()
        if len(toks) != 2:
            fail("expected '<re> <im>'")
        b[k] = complex(number(toks[0], float, "real part"), number(toks[1], float, "imaginary part"))
    meta["seed"] = header.get("seed", 0)
    try:
        inst = QlspInstance(n, a, b, d, metadata=meta)
    except (InstanceError, ValueError) as exc:
        raise QlspFormatError(path, pos, f"invalid instance: {exc}") from exc
    if "kappa" in header and abs(inst.kappa - header["kappa"]) > 1e-9 * inst.kappa:
        raise QlspFormatError(
            path, pos, f"recorded kappa {header['kappa']!r} disagrees with computed {inst.kappa!r}")
    return inst


def load_instance(path) -> QlspInstance:
    return loads_instance(Path(path).read_text(), path=path)
