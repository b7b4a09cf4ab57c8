"""Seeded experiment sweeps over scenario presets, solvers and UE counts."""

from __future__ import annotations

import csv
import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .baselines import SearchBudgetExceeded, SolverKind, solve
from .feasibility import ConstraintReport, check_assignment
from .rlaa import RlaaParams
from .scenario import generate, preset

log = logging.getLogger(__name__)

SOLVER_ORDER = [s.value for s in SolverKind]
ROW_FIELDS = ["preset", "n", "solver", "rep", "seed", "status", "total_energy_J", "feasible"]
AGG_FIELDS = ["preset", "n", "solver", "count", "mean_energy_J", "std_energy_J"]


class InfeasibleResult(RuntimeError):
    def __init__(self, where: str, report: ConstraintReport):
        super().__init__(f"{where}: solver produced an infeasible assignment\n{report.to_text()}")
        self.report = report


@dataclass(frozen=True)
class ExperimentSpec:
    preset: str = "fig2"
    n_values: tuple[int, ...] = (3, 4, 5, 6, 7)
    solvers: tuple[str, ...] = ("es", "le", "ro", "go", "rlaa")
    reps: int = 10
    base_seed: int = 0
    out_dir: str | None = None
    episodes: int = 10000
    epsilon: float = 0.9
    beta: float = 0.2
    gamma: float = 0.9
    noise_mode: str = "total"
    data_unit: str = "kbit"
    node_budget: int = 10**8
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(self.n_values))
        object.__setattr__(self, "solvers", tuple(SolverKind(s).value for s in self.solvers))
        if self.reps < 1:
            raise ValueError("reps: must be >= 1")
        if any(n < 1 for n in self.n_values):
            raise ValueError("n_values: every N must be positive")
        if "es" in self.solvers and self.node_budget < 1:
            raise ValueError("node_budget: exhaustive search needs a positive node budget")

    def rlaa_params(self) -> RlaaParams:
        return RlaaParams(epsilon=self.epsilon, beta=self.beta, gamma=self.gamma, max_episodes=self.episodes)


@dataclass(frozen=True)
class ResultRow:
    preset: str
    n: int
    solver: str
    rep: int
    seed: int
    total_energy_j: float
    wall_time_s: float
    feasible: bool | None
    status: str = "ok"

    def sort_key(self) -> tuple:
        return (self.preset, self.n, SOLVER_ORDER.index(self.solver), self.rep)


@dataclass
class ExperimentResult:
    rows: list[ResultRow] = field(default_factory=list)

    def energies(self, n: int, solver: str) -> list[float]:
        return [r.total_energy_j for r in self.rows
                if r.n == n and r.solver == solver and r.status == "ok"]

    def mean(self, n: int, solver: str) -> float:
        e = self.energies(n, solver)
        return math.fsum(e) / len(e) if e else math.nan


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from an arbitrary tuple of labels."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def _run_cell(spec: ExperimentSpec, n: int, rep: int) -> list[ResultRow]:
    inst_seed = derive_seed(spec.base_seed, spec.preset, n, "instance", rep)
    instance = generate(preset(spec.preset, n, seed=inst_seed, noise_mode=spec.noise_mode,
                               data_unit=spec.data_unit))
    rows = []
    for solver in spec.solvers:
        seed = derive_seed(spec.base_seed, spec.preset, n, solver, rep)
        try:
            res = solve(solver, instance, seed, rlaa_params=spec.rlaa_params(), node_budget=spec.node_budget)
        except SearchBudgetExceeded as exc:
            log.warning("N=%d rep=%d: %s; row skipped", n, rep, exc)
            rows.append(ResultRow(spec.preset, n, solver, rep, seed, math.nan, 0.0, None, "skipped"))
            continue
        report = check_assignment(instance, res.assignment)
        if not report.ok:
            raise InfeasibleResult(f"{spec.preset} N={n} solver={solver} rep={rep}", report)
        rows.append(ResultRow(spec.preset, n, solver, rep, seed, res.objective_j, res.wall_time_s, True))
    return rows


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Solve every (N, replication) instance with every requested solver and verify each answer.

    All solvers in a replication see the same instance. Rows come back sorted,
    so the output does not depend on ``spec.jobs``.
    """
    cells = [(n, rep) for n in spec.n_values for rep in range(spec.reps)]
    rows: list[ResultRow] = []
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            for part in pool.map(_run_cell, [spec] * len(cells), *zip(*cells)):
                rows.extend(part)
    else:
        for n, rep in cells:
            rows.extend(_run_cell(spec, n, rep))
            log.info("finished N=%d rep=%d", n, rep)
    rows.sort(key=ResultRow.sort_key)
    return ExperimentResult(rows)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_csv(rows: Sequence[ResultRow], path: str | Path, include_timing: bool = False) -> None:
    """Write one line per row. Wall time is left out unless asked for, to keep files reproducible."""
    if not rows:
        raise ValueError("no result rows to write")
    header = ROW_FIELDS + (["wall_time_s"] if include_timing else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            line = [r.preset, r.n, r.solver, r.rep, r.seed, r.status, _fmt(r.total_energy_j),
                    "" if r.feasible is None else str(r.feasible).lower()]
            if include_timing:
                line.append(_fmt(r.wall_time_s))
            w.writerow(line)


def aggregate(rows: Iterable[ResultRow]) -> list[dict]:
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        if r.status == "ok":
            groups.setdefault((r.preset, r.n, SOLVER_ORDER.index(r.solver)), []).append(r.total_energy_j)
    out = []
    for (p, n, s), vals in sorted(groups.items()):
        mean = math.fsum(vals) / len(vals)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)) if len(vals) > 1 else 0.0
        out.append({"preset": p, "n": n, "solver": SOLVER_ORDER[s], "count": len(vals),
                    "mean_energy_J": mean, "std_energy_J": std})
    return out


def emit_aggregate_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_FIELDS)
        for a in aggregate(rows):
            w.writerow([a["preset"], a["n"], a["solver"], a["count"],
                        _fmt(a["mean_energy_J"]), _fmt(a["std_energy_J"])])


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"results": out / "results.csv", "aggregate": out / "aggregate.csv",
             "timings": out / "timings.csv"}
    emit_csv(result.rows, paths["results"])
    emit_aggregate_csv(result.rows, paths["aggregate"])
    emit_csv(result.rows, paths["timings"], include_timing=True)
    return paths


@dataclass(frozen=True)
class OracleRow:
    n: int
    es_mean: float
    rlaa_mean: float
    rel_gap: float
    passed: bool


def oracle_check(preset_name: str = "fig2", n_values: Sequence[int] = (3, 4, 5), reps: int = 10,
                 base_seed: int = 0, episodes: int = 10000, tol: float = 0.02,
                 **spec_kwargs) -> list[OracleRow]:
    """Compare mean RLAA energy against the exhaustive-search optimum at each N."""
    spec = ExperimentSpec(preset=preset_name, n_values=tuple(n_values), solvers=("es", "rlaa"),
                          reps=reps, base_seed=base_seed, episodes=episodes, **spec_kwargs)
    result = run_experiment(spec)
    out = []
    for n in spec.n_values:
        es, rl = result.mean(n, "es"), result.mean(n, "rlaa")
        gap = (rl - es) / es
        out.append(OracleRow(n, es, rl, gap, bool(gap <= tol)))
    return out
