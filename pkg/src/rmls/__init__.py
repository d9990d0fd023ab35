"""Randomization-method quantum linear-systems solvers, simulated on dense statevectors."""

from .engine import (EnsembleResult, RunRecord, SweepResult, SweepRow, error_vs_q_sweep,
                     ideal_measurement_trace, run_ensemble, run_single)
from .hamiltonian import (EmbeddingMode, Family, HamiltonianFamily, build_H, build_Hprime,
                          eigenpath_state, gap_lower_bound, spectral_report)
from .instance import (GeneratorConfig, QlspInstance, exact_solution, generate_with_kappa,
                       load_instance, save_instance)
from .schedule import (Schedule, build_schedule, gate_cost_estimate, num_steps,
                       path_length_bound, s_of_v, total_time_bound, v_bounds)

__version__ = "0.1.0"
