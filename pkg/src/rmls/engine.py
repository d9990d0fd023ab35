"""Randomized eigenpath traversal: repetitions, ensembles and error sweeps.

Repetitions are evolved together as the columns of one state block. The loop
runs over schedule steps, so each Hamiltonian slice is diagonalized once and
shared by every repetition. Columns are processed in fixed-size chunks that
do not depend on the number of worker threads, which keeps results
bit-identical for any ``threads`` value.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .hamiltonian import EmbeddingMode, Family, HamiltonianFamily, ancilla_count
from .instance import QlspInstance, exact_solution
from .linalg import eigh, partial_trace_leading_qubits, projector, trace_distance
from .schedule import Schedule, build_schedule, sample_times
from .seeds import mix_seed

CHUNK = 32
KAPPA_CEILING = 1e4


class EngineError(ValueError):
    pass


@dataclass
class RunRecord:
    rep_index: int
    derived_seed: int
    sampled_times: np.ndarray
    final_state: np.ndarray


@dataclass
class EnsembleResult:
    n_rep: int
    rho_tilde: np.ndarray
    error: float
    total_expected_time: float
    full_fidelity: float           # mean |<target|psi_i>|^2 on the full register
    kernel_leak: float = 0.0       # max |<1, b_bar|psi_i>| (amplified family only)
    records: Optional[List[RunRecord]] = None


def rep_seed(master_seed: int, rep_index: int) -> int:
    return mix_seed(master_seed, rep_index)


def _check_inputs(inst: QlspInstance, sched: Schedule, kappa_ceiling: float):
    if inst.kappa > kappa_ceiling:
        raise EngineError(f"kappa = {inst.kappa:.6g} exceeds the configured ceiling {kappa_ceiling:g}")
    if sched.kappa < inst.kappa * (1 - 1e-12):
        raise EngineError(
            f"schedule was built for kappa = {sched.kappa!r} < instance kappa {inst.kappa!r}")


def evolve_block(fam: HamiltonianFamily, sched: Schedule, states: np.ndarray,
                 times: np.ndarray, threads: int = 1) -> np.ndarray:
    """Apply ``exp(-i t[:, q] H(s^q)) ... exp(-i t[:, 1] H(s^1))`` column-wise.

    ``states`` has shape ``(dim, n_rep)`` and ``times`` ``(n_rep, q)``.
    """
    states = np.array(states, dtype=complex, copy=True)
    n_rep = states.shape[1]
    chunks = [slice(lo, min(lo + CHUNK, n_rep)) for lo in range(0, n_rep, CHUNK)]
    pool = ThreadPoolExecutor(threads) if threads > 1 and len(chunks) > 1 else None
    try:
        for j in range(sched.q):
            es = eigh(fam.slice(float(sched.s[j]), sched.family).H)
            v, vh, w = es.eigenvectors, es.eigenvectors.conj().T, es.eigenvalues

            def apply(cols, j=j, v=v, vh=vh, w=w):
                phases = np.exp(-1j * np.outer(w, times[cols, j]))
                states[:, cols] = v @ (phases * (vh @ states[:, cols]))

            if pool is None:
                for cols in chunks:
                    apply(cols)
            else:
                list(pool.map(apply, chunks))
    finally:
        if pool is not None:
            pool.shutdown()
    return states


def _sample_block(sched: Schedule, seeds: Sequence[int]) -> np.ndarray:
    return np.array([sample_times(sched, np.random.default_rng(sd)) for sd in seeds]).reshape(
        len(seeds), sched.q)


def run_single(inst: QlspInstance, sched: Schedule, derived_seed: int,
               mode: EmbeddingMode = EmbeddingMode.GENERAL, rep_index: int = 0,
               times: np.ndarray = None, kappa_ceiling: float = KAPPA_CEILING) -> RunRecord:
    """One repetition; ``times`` overrides the sampled evolution times (testing hook)."""
    _check_inputs(inst, sched, kappa_ceiling)
    fam = HamiltonianFamily(inst, mode)
    if times is None:
        times = _sample_block(sched, [derived_seed])[0]
    times = np.asarray(times, dtype=float)
    if times.shape != (sched.q,):
        raise EngineError(f"expected {sched.q} evolution times, got shape {times.shape}")
    psi0 = fam.initial_state(sched.family)[:, None]
    out = evolve_block(fam, sched, psi0, times[None, :])[:, 0]
    return RunRecord(rep_index, derived_seed, times, out)


def _summarize(inst, fam, sched, states, n_rep) -> EnsembleResult:
    k = ancilla_count(fam.mode, sched.family)
    rho_full = (states @ states.conj().T) / n_rep
    rho = partial_trace_leading_qubits(rho_full, k)
    x = exact_solution(inst)
    err = trace_distance(rho, projector(x))
    target = fam.target_state(sched.family)
    fid = float(np.mean(np.abs(target.conj() @ states) ** 2))
    leak = 0.0
    if sched.family is Family.AMPLIFIED:
        branch = np.kron(np.array([0, 1], dtype=complex), fam.b_bar)
        leak = float(np.max(np.abs(branch.conj() @ states)))
    return EnsembleResult(n_rep, rho, err, sched.expected_total_time, fid, leak)


def run_ensemble(inst: QlspInstance, sched: Schedule, n_rep: int, master_seed: int,
                 mode: EmbeddingMode = EmbeddingMode.GENERAL, threads: int = 1,
                 keep_records: bool = False, kappa_ceiling: float = KAPPA_CEILING,
                 times: np.ndarray = None) -> EnsembleResult:
    """Average ``n_rep`` output projectors, trace out ancillas, score against ``|x><x|``."""
    if n_rep < 1:
        raise EngineError("n_rep must be >= 1")
    _check_inputs(inst, sched, kappa_ceiling)
    fam = HamiltonianFamily(inst, mode)
    seeds = [rep_seed(master_seed, i) for i in range(n_rep)]
    if times is None:
        times = _sample_block(sched, seeds)
    psi0 = fam.initial_state(sched.family)
    states = evolve_block(fam, sched, np.repeat(psi0[:, None], n_rep, axis=1), times, threads)
    res = _summarize(inst, fam, sched, states, n_rep)
    if keep_records:
        res.records = [RunRecord(i, seeds[i], times[i], states[:, i].copy()) for i in range(n_rep)]
    return res


def ideal_measurement_trace(inst: QlspInstance, sched: Schedule,
                            mode: EmbeddingMode = EmbeddingMode.GENERAL):
    """Overlaps ``|<x(s^j)|x(s^{j+1})>|^2`` for j = 0..q-1 (``s^0 = 0``) and their product."""
    fam = HamiltonianFamily(inst, mode)
    s = np.concatenate([[0.0], sched.s])
    xs = [fam.eigenpath_state(float(si)) for si in s]
    fids = [float(abs(np.vdot(a, b)) ** 2) for a, b in zip(xs[:-1], xs[1:])]
    return fids, float(np.prod(fids))


@dataclass(frozen=True)
class SweepRow:
    q: int
    error: float
    inv_error: float
    expected_time_T: float
    variant: str
    kappa: float
    n: int
    d: int
    nrep: int
    master_seed: int


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def linear_fit(self, x: str = "q", y: str = "inv_error"):
        """Least-squares line ``y = slope*x + intercept``; returns (slope, intercept, R^2)."""
        return linear_fit(self.column(x), self.column(y))


def linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def row_seed(master_seed: int, q: int) -> int:
    return mix_seed(master_seed, 0x5157454550, q)


def error_vs_q_sweep(inst: QlspInstance, q_list: Sequence[int], family: Family, n_rep: int,
                     master_seed: int, mode: EmbeddingMode = EmbeddingMode.GENERAL,
                     threads: int = 1, kappa_ceiling: float = KAPPA_CEILING,
                     kappa: float = None) -> SweepResult:
    """One ensemble per ``q`` (explicit step count), each with its own derived seed.

    ``kappa`` defaults to the instance condition number and only sets the
    schedule; it must not be smaller than the true value.
    """
    q_list = list(q_list)
    if not q_list:
        raise EngineError("q_list must be non-empty")
    if any(b <= a for a, b in zip(q_list, q_list[1:])):
        raise EngineError("q_list must be strictly ascending")
    kappa = inst.kappa if kappa is None else kappa
    out = SweepResult()
    for q in q_list:
        sched = build_schedule(kappa, family=family, q=q)
        res = run_ensemble(inst, sched, n_rep, row_seed(master_seed, q), mode, threads,
                           kappa_ceiling=kappa_ceiling)
        inv = 1.0 / res.error if res.error > 0 else math.inf
        out.rows.append(SweepRow(q, res.error, inv, res.total_expected_time, family.value,
                                 inst.kappa, inst.n, inst.d, n_rep, master_seed))
    return out
