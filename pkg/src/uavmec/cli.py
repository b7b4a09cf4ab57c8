"""Command-line entry point: ``uavmec generate|solve|sweep|verify|oracle``.

Exit codes: 0 success, 1 usage or input error, 2 infeasible assignment,
3 oracle failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .baselines import SearchBudgetExceeded, SolverKind, solve
from .feasibility import Assignment, check_assignment, objective_energy
from .harness import ExperimentSpec, InfeasibleResult, oracle_check, run_experiment, write_outputs
from .rlaa import RlaaParams, train
from .scenario import (
    DATA_UNITS,
    PRESET_CENTERS,
    InstanceFormatError,
    generate,
    load_instance,
    load_spec,
    preset,
    save_instance,
    save_spec,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_ORACLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which we reserve for infeasibility
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _solver_list(text: str) -> tuple[str, ...]:
    try:
        return tuple(SolverKind(s.strip().lower()).value for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_rlaa_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--episodes", type=int, default=10000, help="training episodes (default 10000)")
    p.add_argument("--epsilon", type=float, default=0.9, help="exploration probability")
    p.add_argument("--beta", type=float, default=0.2, help="learning rate")
    p.add_argument("--gamma", type=float, default=0.9, help="reward decay")


def _add_scenario_flags(p: argparse.ArgumentParser, n_many: bool) -> None:
    p.add_argument("--preset", choices=sorted(PRESET_CENTERS), default="fig2")
    if n_many:
        p.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6, 7], help="UE counts to sweep")
    else:
        p.add_argument("--n", type=int, default=5, help="number of UEs")
    p.add_argument("--noise-mode", choices=("total", "psd"), default="total",
                   help="read -90 dBm as total in-band noise (default) or as dBm/Hz")
    p.add_argument("--data-unit", choices=sorted(DATA_UNITS), default="kbit",
                   help="unit of the [100, 1000] task-size range")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uavmec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random instance file")
    _add_scenario_flags(g, n_many=False)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--spec", type=Path, help="scenario JSON to use instead of a preset")
    g.add_argument("--save-spec", type=Path, help="also write the scenario JSON used")
    g.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("solve", help="solve an instance and print its total energy")
    s.add_argument("--instance", type=Path, required=True)
    s.add_argument("--solver", type=str.lower, choices=[k.value for k in SolverKind], required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--node-budget", type=int, default=10**8)
    _add_rlaa_flags(s)
    s.add_argument("--out", type=Path, help="write the assignment JSON here")
    s.add_argument("--trace", type=Path, help="RLAA only: per-episode energy CSV")
    s.add_argument("--qtable", type=Path, help="RLAA only: Q-table text export")

    w = sub.add_parser("sweep", help="run an experiment sweep and write CSVs")
    _add_scenario_flags(w, n_many=True)
    w.add_argument("--solvers", type=_solver_list, default=("es", "le", "ro", "go", "rlaa"),
                   help="comma-separated subset of es,le,ro,go,rlaa")
    w.add_argument("--reps", type=int, default=10)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--node-budget", type=int, default=10**8)
    w.add_argument("--jobs", type=int, default=1)
    _add_rlaa_flags(w)
    w.add_argument("--out", type=Path, required=True, help="output directory")

    v = sub.add_parser("verify", help="check an assignment against every constraint")
    v.add_argument("--instance", type=Path, required=True)
    v.add_argument("--assignment", type=Path, required=True)

    o = sub.add_parser("oracle", help="small-N exhaustive search vs RLAA comparison")
    _add_scenario_flags(o, n_many=True)
    o.set_defaults(n=[3, 4, 5])
    o.add_argument("--reps", type=int, default=10)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--tol", type=float, default=0.02, help="allowed relative gap (default 0.02)")
    _add_rlaa_flags(o)
    return parser


def _cmd_generate(args) -> int:
    if args.spec:
        spec = load_spec(args.spec)
    else:
        spec = preset(args.preset, args.n, seed=args.seed, noise_mode=args.noise_mode, data_unit=args.data_unit)
    if args.save_spec:
        save_spec(spec, args.save_spec)
    inst = generate(spec)
    save_instance(inst, args.out)
    print(f"wrote {inst.num_ues} UEs, {len(inst.uavs)} UAVs to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    params = RlaaParams(epsilon=args.epsilon, beta=args.beta, gamma=args.gamma,
                        max_episodes=args.episodes, rng_seed=args.seed)
    if args.solver == "rlaa" and (args.trace or args.qtable):
        res = train(inst, params)
        assignment = res.assignment
        if args.trace:
            args.trace.write_text(res.trace.to_csv())
        if args.qtable:
            args.qtable.write_text(res.q.export_text([str(a) for a in res.table.actions]))
        energy = objective_energy(inst, assignment)
    else:
        result = solve(args.solver, inst, args.seed, rlaa_params=params, node_budget=args.node_budget)
        assignment, energy = result.assignment, result.objective_j
    report = check_assignment(inst, assignment)
    if args.out:
        assignment.save(args.out)
    print(f"{args.solver}: {energy:.12g} J")
    if not report.ok:
        sys.stderr.write(report.to_text())
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = ExperimentSpec(preset=args.preset, n_values=tuple(args.n), solvers=args.solvers, reps=args.reps,
                          base_seed=args.seed, out_dir=str(args.out), episodes=args.episodes,
                          epsilon=args.epsilon, beta=args.beta, gamma=args.gamma, noise_mode=args.noise_mode,
                          data_unit=args.data_unit, node_budget=args.node_budget, jobs=args.jobs)
    result = run_experiment(spec)
    paths = write_outputs(result, args.out)
    print(f"{len(result.rows)} rows -> {paths['results']}, {paths['aggregate']}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    try:
        assignment = Assignment.load(args.assignment)
    except ValueError as exc:
        raise InstanceFormatError(f"{args.assignment}: {exc}") from None
    report = check_assignment(inst, assignment)
    if report.ok:
        print("feasible: no constraint violations")
        return EXIT_OK
    sys.stdout.write(report.to_text())
    return EXIT_INFEASIBLE


def _cmd_oracle(args) -> int:
    rows = oracle_check(args.preset, args.n, args.reps, args.seed, args.episodes, args.tol,
                        epsilon=args.epsilon, beta=args.beta, gamma=args.gamma,
                        noise_mode=args.noise_mode, data_unit=args.data_unit)
    ok = True
    for r in rows:
        verdict = "PASS" if r.passed else "FAIL"
        print(f"N={r.n} es={r.es_mean:.9g} J rlaa={r.rlaa_mean:.9g} J gap={r.rel_gap:+.3%} {verdict}")
        ok &= r.passed
    return EXIT_OK if ok else EXIT_ORACLE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"generate": _cmd_generate, "solve": _cmd_solve, "sweep": _cmd_sweep,
                "verify": _cmd_verify, "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except (InstanceFormatError, ValueError, OSError) as exc:
        print(f"uavmec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchBudgetExceeded as exc:
        print(f"uavmec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleResult as exc:
        print(f"uavmec: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
