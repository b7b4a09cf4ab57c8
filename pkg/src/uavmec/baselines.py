"""Reference solvers: exhaustive search, all-local, random and nearest-UAV offloading.

All of them allocate the minimal deadline-meeting frequency for the chosen
action, so their outputs are directly comparable with the Q-learning solver.
"""

from __future__ import annotations

import enum
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from .feasibility import ActionTable, Assignment, assignment_from_ordinals, objective_energy
from .rlaa import RlaaParams, train
from .scenario import Instance


class SolverKind(enum.Enum):
    ES = "es"
    LE = "le"
    RO = "ro"
    GO = "go"
    RLAA = "rlaa"


class SearchBudgetExceeded(RuntimeError):
    """Exhaustive search would need more nodes than it was allowed."""


def solve_le(instance: Instance, table: ActionTable | None = None) -> Assignment:
    table = table or ActionTable(instance)
    return assignment_from_ordinals(table, [0] * instance.num_ues)


def solve_ro(instance: Instance, rng: np.random.Generator, table: ActionTable | None = None,
             include_local: bool = False) -> Assignment:
    """Each UE in turn draws uniformly among its feasible offload targets, falling back to local."""
    table = table or ActionTable(instance)
    cap = table.empty_capacity()
    picks = []
    for i in range(instance.num_ues):
        ords = table.feasible_ordinals(i, cap)
        if not include_local:
            ords = ords[ords > 0]
        a = int(ords[rng.integers(len(ords))]) if len(ords) else 0
        cap.add(a, float(table.freq[i, a]))
        picks.append(a)
    return assignment_from_ordinals(table, picks)


def solve_go(instance: Instance, table: ActionTable | None = None) -> Assignment:
    """Each UE in turn takes the closest (UAV, slot) that still has room, else runs locally."""
    table = table or ActionTable(instance)
    cap = table.empty_capacity()
    picks = []
    for i in range(instance.num_ues):
        ords = table.feasible_ordinals(i, cap)
        ords = ords[ords > 0]
        if len(ords):
            # stable sort keeps ascending-ordinal order among equal distances
            a = int(ords[np.argsort(table.dist3d[i, ords], kind="stable")[0]])
        else:
            a = 0
        cap.add(a, float(table.freq[i, a]))
        picks.append(a)
    return assignment_from_ordinals(table, picks)


def solve_es(instance: Instance, node_budget: int = 10**8, table: ActionTable | None = None) -> Assignment:
    """Depth-first branch and bound over UEs for the minimum-energy feasible assignment.

    The bound adds, for every undecided UE, its cheapest action ignoring
    capacity. Raises SearchBudgetExceeded rather than returning an
    approximate answer.
    """
    table = table or ActionTable(instance)
    n = instance.num_ues
    energy, freq = table.energy, table.freq
    masked = np.where(table.static_ok, energy, np.inf)
    suffix = np.zeros(n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + masked[i].min()
    order = [np.argsort(masked[i], kind="stable") for i in range(n)]

    cap = table.empty_capacity()
    choice = [0] * n
    best = [math.inf, None]
    nodes = 0

    def dfs(i: int, acc: float) -> None:
        nonlocal nodes
        if i == n:
            total = math.fsum(energy[k, choice[k]] for k in range(n))
            if total < best[0]:
                best[0], best[1] = total, list(choice)
            return
        mask = table.feasible_mask(i, cap)
        for a in order[i]:
            if not mask[a]:
                continue
            e = energy[i, a]
            # children are sorted by energy, so nothing after a pruned child can do better
            if acc + e + suffix[i + 1] >= best[0]:
                break
            nodes += 1
            if nodes > node_budget:
                raise SearchBudgetExceeded(f"exhaustive search exceeded {node_budget} nodes")
            choice[i] = int(a)
            if a:
                k = a - 1
                old_count, old_used = cap.counts[k], cap.used[k]
                cap.add(int(a), float(freq[i, a]))
                dfs(i + 1, acc + e)
                # restoring leaves cap.max_* as (still valid) upper bounds
                cap.counts[k], cap.used[k] = old_count, old_used
            else:
                dfs(i + 1, acc + e)
        choice[i] = 0

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, n + 100))
    try:
        dfs(0, 0.0)
    finally:
        sys.setrecursionlimit(limit)
    # local execution is always feasible, so an incumbent always exists
    return assignment_from_ordinals(table, best[1] if best[1] is not None else [0] * n)


@dataclass
class SolveResult:
    assignment: Assignment
    objective_j: float
    wall_time_s: float


def solve(kind: SolverKind | str, instance: Instance, seed: int = 0, *,
          rlaa_params: RlaaParams | None = None, node_budget: int = 10**8,
          ro_include_local: bool = False) -> SolveResult:
    """Run one solver and report its assignment, total energy and wall time."""
    kind = SolverKind(kind)
    start = time.perf_counter()
    table = ActionTable(instance)
    if kind is SolverKind.ES:
        assignment = solve_es(instance, node_budget, table)
    elif kind is SolverKind.LE:
        assignment = solve_le(instance, table)
    elif kind is SolverKind.RO:
        assignment = solve_ro(instance, np.random.default_rng(seed), table, ro_include_local)
    elif kind is SolverKind.GO:
        assignment = solve_go(instance, table)
    else:
        params = rlaa_params or RlaaParams()
        params = RlaaParams(**{**params.__dict__, "rng_seed": seed})
        assignment = train(instance, params, table).assignment
    elapsed = time.perf_counter() - start
    return SolveResult(assignment, objective_energy(instance, assignment), elapsed)
