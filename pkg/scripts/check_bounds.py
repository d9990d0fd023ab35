"""Print schedule and cost quantities across kappa.

For each kappa: path-length bound, step count for a target precision, the
expected total evolution time of both variants against their closed-form
bounds, and the query estimate for the amplified variant.
"""

import argparse

from rmls.hamiltonian import Family
from rmls.schedule import build_schedule, gate_cost_estimate, path_length_bound, total_time_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--kappas", default="2,5,10,20,50,100,200,500,1000")
    args = ap.parse_args()

    print(f"{'kappa':>7} {'L*':>7} {'q':>7} {'T_ground':>11} {'bound':>11} "
          f"{'T_amp':>9} {'bound':>9} {'queries':>11}")
    for kappa in (float(k) for k in args.kappas.split(",")):
        g = build_schedule(kappa, args.epsilon, Family.GROUND)
        a = build_schedule(kappa, args.epsilon, Family.AMPLIFIED)
        cost = gate_cost_estimate(max(a.expected_total_time, 1.0), args.d, args.epsilon)
        print(f"{kappa:7g} {path_length_bound(kappa):7.3f} {g.q:7d} "
              f"{g.expected_total_time:11.4g} {total_time_bound(kappa, g.delta, Family.GROUND):11.4g} "
              f"{a.expected_total_time:9.4g} {total_time_bound(kappa, a.delta, Family.AMPLIFIED):9.4g} "
              f"{cost.queries:11d}")


if __name__ == "__main__":
    main()
