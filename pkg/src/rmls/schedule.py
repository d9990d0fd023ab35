"""Discretization of the eigenpath and evolution-time bookkeeping.

The path is discretized uniformly in the natural parameter ``v``, for which
``|| d/dv |x(s(v))> || <= 1``; ``s(v)`` solves
``ds/dv = sqrt(gap_lower_bound(s) / 2)`` with ``s(v_a) = 0`` and ``s(v_b) = 1``.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hamiltonian import Family, gap_lower_bound

_V_SLACK = 1e-12


def _rate(kappa: float) -> float:
    return math.sqrt(1 + kappa * kappa) / (math.sqrt(2) * kappa)


def v_bounds(kappa: float) -> tuple:
    """Endpoints ``(v_a, v_b)`` of the natural parameter."""
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    root = math.sqrt(1 + kappa * kappa)
    # kappa*root - kappa^2 rewritten to avoid cancellation at large kappa
    lower_arg = kappa / (root + kappa)
    return math.log(lower_arg) / _rate(kappa), math.log(root + 1) / _rate(kappa)


def s_of_v(v: float, kappa: float) -> float:
    va, vb = v_bounds(kappa)
    if not va - _V_SLACK <= v <= vb + _V_SLACK:
        raise ValueError(f"v = {v!r} outside [{va!r}, {vb!r}]")
    u = v * _rate(kappa)
    k2 = kappa * kappa
    s = (math.exp(u) + 2 * k2 - k2 * math.exp(-u)) / (2 * (1 + k2))
    return min(max(s, 0.0), 1.0)


def ds_dv(s: float, kappa: float) -> float:
    return math.sqrt(gap_lower_bound(s, kappa) / 2)


def path_length_bound(kappa: float) -> float:
    """sqrt(2) * ln(12 kappa), an upper bound on v_b - v_a."""
    bound = math.sqrt(2) * math.log(12 * kappa)
    va, vb = v_bounds(kappa)
    assert vb - va <= bound + 1e-12, (kappa, vb - va, bound)
    return bound


def num_steps(kappa: float, epsilon: float, c_q: float = 1.0) -> int:
    """q = ceil(c_q * L*^2 / epsilon), at least 1."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if c_q <= 0:
        raise ValueError("c_q must be positive")
    return max(1, math.ceil(c_q * path_length_bound(kappa) ** 2 / epsilon))


def epsilon_for_steps(kappa: float, q: int, c_q: float = 1.0) -> float:
    """Precision nominally reached with ``q`` steps (inverse of :func:`num_steps`)."""
    return c_q * path_length_bound(kappa) ** 2 / q


@dataclass(frozen=True)
class Schedule:
    """Discretization points ``v^j = v_a + j*delta`` for ``j = 1..q``.

    ``time_widths[j]`` is the upper end of the uniform evolution-time
    distribution at step ``j``: ``2*pi/gap_bound`` for the ground-state
    family and ``2*pi/sqrt(gap_bound)`` for the amplified one.
    """

    kappa: float
    q: int
    family: Family
    v_a: float
    v_b: float
    v: np.ndarray
    s: np.ndarray
    gap_bounds: np.ndarray
    time_widths: np.ndarray
    epsilon: float = float("nan")
    c_q: float = 1.0

    @property
    def delta(self) -> float:
        return (self.v_b - self.v_a) / self.q

    @property
    def expected_times(self) -> np.ndarray:
        return self.time_widths / 2

    @property
    def expected_total_time(self) -> float:
        return float(math.fsum(self.expected_times))

    def points(self):
        """Rows ``(v^j, s^j, gap_bound_j, time_width_j)``."""
        return list(zip(self.v.tolist(), self.s.tolist(), self.gap_bounds.tolist(),
                        self.time_widths.tolist()))


def build_schedule(kappa: float, epsilon: float = None, family: Family = Family.GROUND,
                   c_q: float = 1.0, q: int = None) -> Schedule:
    """Schedule for ``epsilon`` (q from :func:`num_steps`) or for an explicit ``q``."""
    if q is None:
        if epsilon is None:
            raise ValueError("give either epsilon or q")
        q = num_steps(kappa, epsilon, c_q)
    elif q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    elif epsilon is None:
        epsilon = epsilon_for_steps(kappa, q, c_q)
    va, vb = v_bounds(kappa)
    delta = (vb - va) / q
    v = va + delta * np.arange(1, q + 1)
    v[-1] = vb
    s = np.array([s_of_v(x, kappa) for x in v])
    s[-1] = 1.0
    gaps = (1 - s) ** 2 + (s / kappa) ** 2
    if family is Family.GROUND:
        widths = 2 * np.pi / gaps
    else:
        widths = 2 * np.pi / np.sqrt(gaps)
    return Schedule(kappa, q, family, va, vb, v, s, gaps, widths, epsilon, c_q)


def sample_times(sched: Schedule, rng: np.random.Generator) -> np.ndarray:
    """One uniform draw in ``[0, time_width_j]`` per step."""
    return rng.uniform(0.0, 1.0, sched.q) * sched.time_widths


def total_time_bound(kappa: float, delta: float, family: Family) -> float:
    """Closed-form upper bound on pi * sum_j 1/gap_j (or 1/sqrt(gap_j)) at spacing ``delta``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if family is Family.GROUND:
        return math.pi * (math.sqrt(2) * kappa * (1 + kappa) / delta + 2 * (kappa ** 2 + 1))
    return math.pi * (math.pi * kappa / (math.sqrt(2) * delta) + 2 * math.sqrt(kappa ** 2 + 1))


def integral_closed_form(kappa: float, family: Family) -> float:
    """Exact value of the integral of 1/gap (or 1/sqrt(gap)) over ``v`` in [v_a, v_b]."""
    if family is Family.GROUND:
        return math.sqrt(2) * kappa * (1 + kappa)
    return math.pi * kappa / math.sqrt(2)


@dataclass(frozen=True)
class GateCostModel:
    """Query-cost estimate for truncated-Taylor-series simulation of the amplified family.

    ``C_M`` (cost of the matrix-element rotation) stays symbolic and is
    reported by :meth:`gate_count_formula` only.
    """

    T: float
    d: int
    epsilon: float
    tau: float
    K: int
    r: int
    queries: int

    def gate_count_formula(self) -> str:
        return f"{self.queries} * (n + C_M)"


LCU_TERMS = 32


def taylor_order(epsilon_per_segment: float) -> int:
    """Smallest K with (ln 2)^(K+1) / (K+1)! <= epsilon_per_segment."""
    ln2 = math.log(2)
    k = 0
    term = ln2  # (ln 2)^(k+1) / (k+1)!
    while term > epsilon_per_segment:
        k += 1
        term *= ln2 / (k + 1)
    return k


def gate_cost_estimate(T: float, d: int, epsilon: float) -> GateCostModel:
    """tau = (sum of LCU weights) * T, r = ceil(tau/ln 2), K from the Taylor tail, queries = 2 r K."""
    if T < 1 or d < 1:
        raise ValueError("T and d must be >= 1")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    weight_sum = LCU_TERMS * (d + 1) / 16
    tau = weight_sum * T
    r = math.ceil(tau / math.log(2))
    K = taylor_order(epsilon / r)
    return GateCostModel(T, d, epsilon, tau, K, r, 2 * r * K)


def ratio_table(kappas: Sequence[float], epsilon: float, family: Family) -> list:
    """T(2 kappa)/T(kappa) with delta = epsilon / L*(kappa) (i.e. q = L*^2/epsilon)."""
    out = []
    for k in kappas:
        t1 = total_time_bound(k, epsilon / path_length_bound(k), family)
        t2 = total_time_bound(2 * k, epsilon / path_length_bound(2 * k), family)
        out.append(t2 / t1)
    return out
