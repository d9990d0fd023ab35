"""Command-line front end: ``rmls {gen,run,sweep,check,solve,replay}``.

Exit codes: 0 success, 1 validation error, 2 property violation, 3 I/O error.
CSV files start with a ``# config:`` line holding the JSON needed to rerun
them (``rmls replay``); floats are printed with 17 significant digits.
"""

import argparse
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .engine import KAPPA_CEILING, EngineError, error_vs_q_sweep, linear_fit, run_ensemble
from .hamiltonian import (EmbeddingMode, Family, HamiltonianFamily, block_square_defect,
                          gap_lower_bound, no_transition_amplitude, spectral_report)
from .instance import (GeneratorConfig, InstanceError, exact_solution, generate_with_kappa,
                       load_instance, save_instance, solution_residual)
from .linalg import LinalgError
from .schedule import build_schedule, num_steps

EXIT_OK, EXIT_VALIDATION, EXIT_PROPERTY, EXIT_IO = 0, 1, 2, 3

SWEEP_COLUMNS = ["q", "error", "inv_error", "expected_time_T", "variant", "kappa", "n", "d",
                 "nrep", "master_seed"]
VARIANTS = {"ground": Family.GROUND, "amplified": Family.AMPLIFIED}
MODES = {"general": EmbeddingMode.GENERAL, "positive": EmbeddingMode.POSITIVE}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _master_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("RMLS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"RMLS_SEED must be an integer, got {env!r}")


def _threads(args) -> int:
    return args.threads if args.threads is not None else (os.cpu_count() or 1)


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise CliError(f"cannot read instance: {exc}", EXIT_IO)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_text(path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO)


def _csv_text(config: dict, rows) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(getattr(row, c)) for c in SWEEP_COLUMNS) + "\n")
    return buf.getvalue()


def gnuplot_script(csv_path: str) -> str:
    return "\n".join([
        "set datafile separator ','",
        "set key left top",
        "set xlabel 'q'",
        "set ylabel '1/error'",
        "f(x) = a*x + b",
        f"fit f(x) '{csv_path}' using 1:3 every ::1 via a, b",
        f"plot '{csv_path}' using 1:3 every ::1 with points title 'inverse error', f(x) title 'fit'",
        "",
    ])


# --- subcommands -----------------------------------------------------------

def cmd_gen(args) -> int:
    cfg = GeneratorConfig(n=args.n, d=args.d, kappa_target=args.kappa, kappa_tol=args.kappa_tol,
                          b_sparsity=args.b_sparsity, max_attempts=args.max_attempts,
                          seed=_master_seed(args))
    inst = generate_with_kappa(cfg, workers=_threads(args))
    try:
        save_instance(inst, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO)
    print(f"kappa {_fmt(inst.kappa)}")
    print(f"attempts {inst.metadata['attempts']}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _resolve_q(args, kappa):
    if args.q is not None:
        if args.q < 1:
            raise CliError(f"--q must be >= 1, got {args.q}")
        return args.q, None
    if args.epsilon is None:
        raise CliError("give --q or --epsilon")
    return num_steps(kappa, args.epsilon, args.c_q), args.epsilon


def cmd_run(args) -> int:
    inst = _load(args.instance)
    family, mode = VARIANTS[args.variant], MODES[args.mode]
    q, eps = _resolve_q(args, inst.kappa)
    if args.nrep < 1:
        raise CliError("--nrep must be >= 1")
    seed = _master_seed(args)
    sched = build_schedule(inst.kappa, epsilon=eps, family=family, c_q=args.c_q, q=q)
    t0 = time.perf_counter()
    res = run_ensemble(inst, sched, args.nrep, seed, mode, _threads(args),
                       kappa_ceiling=args.kappa_ceiling)
    wall = time.perf_counter() - t0
    inv = 1.0 / res.error if res.error > 0 else float("inf")
    print(f"# q = {q}" + (f" (from epsilon {_fmt(eps)}, C_q {_fmt(args.c_q)})" if eps else ""))
    print("error,inv_error,T_expected,wall_time_s")
    print(f"{_fmt(res.error)},{_fmt(inv)},{_fmt(res.total_expected_time)},{wall:.3f}")
    if args.out:
        from .engine import SweepRow
        row = SweepRow(q, res.error, inv, res.total_expected_time, family.value, inst.kappa,
                       inst.n, inst.d, args.nrep, seed)
        config = {"command": "run", "instance": str(args.instance),
                  "instance_sha256": _sha256(args.instance), "variant": args.variant,
                  "mode": args.mode, "q": q, "epsilon": eps, "c_q": args.c_q,
                  "nrep": args.nrep, "seed": seed, "kappa_ceiling": args.kappa_ceiling}
        _write_text(args.out, _csv_text(config, [row]))
    return EXIT_OK


def _parse_q_list(text: str):
    try:
        qs = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"--q-list must be comma-separated integers, got {text!r}")
    if not qs:
        raise CliError("--q-list is empty")
    if any(q < 1 for q in qs):
        raise CliError("--q-list entries must be >= 1")
    return sorted(set(qs))


def _sweep_csv(config: dict, threads: int) -> str:
    inst = _load(config["instance"])
    res = error_vs_q_sweep(inst, config["q_list"], VARIANTS[config["variant"]], config["nrep"],
                           config["seed"], MODES[config["mode"]], threads,
                           kappa_ceiling=config["kappa_ceiling"])
    return _csv_text(config, res.rows)


def cmd_sweep(args) -> int:
    config = {"command": "sweep", "instance": str(args.instance),
              "instance_sha256": _sha256(args.instance) if Path(args.instance).exists() else None,
              "variant": args.variant, "mode": args.mode, "q_list": _parse_q_list(args.q_list),
              "nrep": args.nrep, "seed": _master_seed(args), "kappa_ceiling": args.kappa_ceiling}
    if args.nrep < 1:
        raise CliError("--nrep must be >= 1")
    text = _sweep_csv(config, _threads(args))
    _write_text(args.out, text)
    if args.gnuplot:
        _write_text(args.gnuplot, gnuplot_script(args.out))
    rows = [line.split(",") for line in text.splitlines()[2:]]
    q = [float(r[0]) for r in rows]
    inv = [float(r[2]) for r in rows]
    if len(rows) >= 2 and all(np.isfinite(inv)):
        slope, intercept, r2 = linear_fit(q, inv)
        print(f"fit inv_error = {slope:.6g} * q + {intercept:.6g}  (R^2 = {r2:.4f})")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        first = Path(args.csv).read_text().splitlines()[0]
    except (OSError, IndexError) as exc:
        raise CliError(f"cannot read {args.csv}: {exc}", EXIT_IO)
    if not first.startswith("# config: "):
        raise CliError(f"{args.csv} has no '# config:' header")
    config = json.loads(first[len("# config: "):])
    if config.get("command") != "sweep":
        raise CliError("only sweep outputs can be replayed")
    sha = config.get("instance_sha256")
    if sha is not None and Path(config["instance"]).exists() and _sha256(config["instance"]) != sha:
        raise CliError("instance file changed since the CSV was written")
    _write_text(args.out, _sweep_csv(config, _threads(args)))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _load(args.instance)
    mode = MODES[args.mode]
    fam = HamiltonianFamily(inst, mode)
    if args.s_grid < 2:
        raise CliError("--s-grid must be >= 2")
    families = list(VARIANTS.values()) if args.variant == "both" else [VARIANTS[args.variant]]
    grid = np.linspace(0.0, 1.0, args.s_grid)
    failures = []
    print(f"instance {args.instance}: n={inst.n} d={inst.d} kappa={_fmt(inst.kappa)} mode={args.mode}")
    for family in families:
        print(f"\n[{family.value}] s, gap, bound, Delta*(s), kernel_dim, symmetry_defect, psd_defect, ok")
        want = 1 if family is Family.GROUND else 2
        for s in grid:
            rep = spectral_report(fam, float(s), family)
            ok = rep.ok and rep.symmetry_defect <= 1e-12 and rep.psd_defect <= 1e-10
            print(f"{s:.4f} {rep.gap:.10g} {rep.gap_bound:.10g} {gap_lower_bound(s, inst.kappa):.10g} "
                  f"{rep.kernel_dim} {rep.symmetry_defect:.2e} {rep.psd_defect:.2e} "
                  f"{'ok' if ok else 'FAIL'}")
            if not ok:
                failures.append((family.value, float(s), rep.gap, rep.gap_bound,
                                 f"kernel_dim={rep.kernel_dim} (want {want})"))
    if Family.AMPLIFIED in families:
        coarse = np.linspace(0.0, 1.0, 11)
        worst = max(no_transition_amplitude(fam, a, b) for a in coarse for b in coarse)
        print(f"\nno-transition max |<0,x(s)|H'(s')|1,b_bar>| on 11x11 grid: {worst:.3e} (bound 1e-10)")
        if worst > 1e-10:
            failures.append(("no-transition", float("nan"), worst, 1e-10, ""))
        sq = max(block_square_defect(fam, float(s)) for s in grid)
        print(f"block-square max |H'^2 - diag(H, P A^2 P)|: {sq:.3e} (bound 1e-10)")
        if sq > 1e-10:
            failures.append(("block-square", float("nan"), sq, 1e-10, ""))
    if failures:
        print("\nVIOLATIONS (check, s, observed, bound):")
        for f in failures:
            print("  " + ", ".join(str(x) for x in f))
        return EXIT_PROPERTY
    print("\nall checks passed")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    x = exact_solution(inst)
    res = solution_residual(inst)
    lines = ["index,re,im"] + [f"{i},{_fmt(z.real)},{_fmt(z.imag)}" for i, z in enumerate(x)]
    print("\n".join(lines))
    print(f"# residual {_fmt(res)}")
    if args.out:
        _write_text(args.out, "\n".join(lines) + "\n")
    if res > 1e-9:
        print("residual exceeds 1e-9", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmls", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None,
                            help="master seed (falls back to $RMLS_SEED, then 0)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker count; never changes results (default: CPU count)")

    g = sub.add_parser("gen", help="generate a random instance with post-selected kappa")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--kappa", type=float, required=True)
    g.add_argument("--kappa-tol", type=float, default=1e-3)
    g.add_argument("--b-sparsity", type=int, default=None)
    g.add_argument("--max-attempts", type=int, default=1_000_000)
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(func=cmd_gen)

    def sim_flags(sp):
        sp.add_argument("--instance", required=True)
        sp.add_argument("--variant", choices=sorted(VARIANTS), default="amplified")
        sp.add_argument("--mode", choices=sorted(MODES), default="general")
        sp.add_argument("--nrep", type=int, default=50)
        sp.add_argument("--kappa-ceiling", type=float, default=KAPPA_CEILING)
        common(sp)

    r = sub.add_parser("run", help="one ensemble at fixed q or epsilon")
    sim_flags(r)
    r.add_argument("--q", type=int, default=None)
    r.add_argument("--epsilon", type=float, default=None)
    r.add_argument("--c-q", type=float, default=1.0)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="error versus q, written as CSV")
    sim_flags(s)
    s.add_argument("--q-list", required=True, help="comma-separated step counts")
    s.add_argument("--out", required=True)
    s.add_argument("--gnuplot", default=None, help="also write a gnuplot fit script here")
    s.set_defaults(func=cmd_sweep)

    rp = sub.add_parser("replay", help="rerun a sweep from its CSV '# config:' header")
    rp.add_argument("csv")
    rp.add_argument("--out", required=True)
    common(rp, seed=False)
    rp.set_defaults(func=cmd_replay)

    c = sub.add_parser("check", help="verify spectral properties along the path")
    c.add_argument("--instance", required=True)
    c.add_argument("--s-grid", type=int, default=101)
    c.add_argument("--mode", choices=sorted(MODES), default="general")
    c.add_argument("--variant", choices=sorted(VARIANTS) + ["both"], default="both")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("solve", help="classical reference solution")
    v.add_argument("--instance", required=True)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InstanceError, EngineError, LinalgError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
