"""Minimal resource allocation, per-UE feasible action sets and constraint checking.

Actions are identified by an *ordinal*: 0 is local execution, and offload
targets follow in (uav, slot) lexicographic order starting at 1. All argmax
tie-breaks in this package resolve to the lowest ordinal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .model import (
    ActionKind,
    Task,
    data_rate,
    horizontal_distance,
    local_energy,
    offload_energy,
    transmission_time,
    uav_position,
)
from .scenario import Instance

ASSIGNMENT_FORMAT = "uavmec.assignment/1"
# absolute slack on the deadline check, relative slack on the frequency budget
TIME_SLACK_S = 1e-9
FREQ_REL_SLACK = 1e-9


@dataclass(frozen=True)
class Action:
    """Local execution (``uav == slot == 0``) or offload to UAV ``uav`` in ``slot`` (both 1-based)."""

    kind: ActionKind
    uav: int = 0
    slot: int = 0

    def __post_init__(self) -> None:
        if self.kind is ActionKind.LOCAL and (self.uav or self.slot):
            raise ValueError("local action carries no (uav, slot)")
        if self.kind is ActionKind.OFFLOAD and (self.uav < 1 or self.slot < 1):
            raise ValueError("offload action needs uav >= 1 and slot >= 1")

    @classmethod
    def offload(cls, uav: int, slot: int) -> "Action":
        return cls(ActionKind.OFFLOAD, uav, slot)

    @property
    def is_local(self) -> bool:
        return self.kind is ActionKind.LOCAL

    def __str__(self) -> str:
        return "local" if self.is_local else f"uav{self.uav}/slot{self.slot}"


LOCAL = Action(ActionKind.LOCAL)


@dataclass(frozen=True)
class Allocation:
    action: Action
    freq_hz: float


@dataclass
class Assignment:
    """One allocation per UE, indexed by UE position in the instance.

    ``None`` marks a UE that was left without a decision.
    """

    entries: list[Allocation | None]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> Allocation | None:
        return self.entries[i]

    def actions(self) -> list[Action | None]:
        return [None if e is None else e.action for e in self.entries]

    def to_dict(self) -> dict[str, Any]:
        rows = []
        for i, e in enumerate(self.entries):
            if e is None:
                continue
            row: dict[str, Any] = {"ue": i, "kind": e.action.kind.value, "freq_hz": e.freq_hz}
            if not e.action.is_local:
                row["uav"] = e.action.uav
                row["slot"] = e.action.slot
            rows.append(row)
        return {"format": ASSIGNMENT_FORMAT, "num_ues": len(self.entries), "entries": rows}

    @classmethod
    def from_dict(cls, data: Any) -> "Assignment":
        if not isinstance(data, dict) or data.get("format") != ASSIGNMENT_FORMAT:
            raise ValueError(f"format: expected {ASSIGNMENT_FORMAT!r}")
        n = data.get("num_ues")
        if not isinstance(n, int) or n < 0:
            raise ValueError("num_ues: must be a non-negative integer")
        entries: list[Allocation | None] = [None] * n
        for k, row in enumerate(data.get("entries", [])):
            try:
                i = row["ue"]
                kind = ActionKind(row["kind"])
                action = LOCAL if kind is ActionKind.LOCAL else Action.offload(row["uav"], row["slot"])
                alloc = Allocation(action, float(row["freq_hz"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"entries[{k}]: {exc}") from None
            if not isinstance(i, int) or not 0 <= i < n:
                raise ValueError(f"entries[{k}].ue: out of range 0..{n - 1}")
            entries[i] = alloc
        return cls(entries)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Assignment":
        return cls.from_dict(json.loads(Path(path).read_text()))


def min_offload_freq(task: Task, rate_bps: float, t_max_s: float) -> float | None:
    """Smallest UAV frequency meeting the deadline after uploading, or ``None`` if the upload alone misses it."""
    if rate_bps <= 0:
        raise ValueError("rate_bps must be > 0")
    slack = t_max_s - transmission_time(task.data_bits, rate_bps)
    if slack <= 0:
        return None
    return task.cycles / slack


def min_local_freq(task: Task, t_max_s: float) -> float:
    if t_max_s <= 0:
        raise ValueError("t_max_s must be > 0")
    return task.cycles / t_max_s


class ActionTable:
    """Per-instance precomputation of every (UE, action) pair under minimal allocation.

    Arrays are shaped ``(num_ues, num_actions)``; column 0 is local execution.
    Infeasible offloads carry ``inf`` frequency and energy.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.actions: list[Action] = [LOCAL]
        self._ordinal: dict[Action, int] = {LOCAL: 0}
        slot_cap, slot_fmax, positions = [], [], []
        for j, traj in enumerate(instance.uavs, start=1):
            for t in range(1, traj.num_slots + 1):
                a = Action.offload(j, t)
                self._ordinal[a] = len(self.actions)
                self.actions.append(a)
                slot_cap.append(instance.compute.slot_ue_cap)
                slot_fmax.append(instance.f_max(j))
                positions.append(uav_position(traj, t))
        self.num_actions = len(self.actions)
        self.slot_cap = np.array(slot_cap, dtype=np.int64)
        self.slot_fmax = np.array(slot_fmax, dtype=float)

        n, a_count = instance.num_ues, self.num_actions
        t_max = instance.compute.t_max_s
        self.freq = np.full((n, a_count), np.inf)
        self.energy = np.full((n, a_count), np.inf)
        self.rate = np.zeros((n, a_count))
        self.dist3d = np.full((n, a_count), np.inf)
        for i, ue in enumerate(instance.ues):
            f_loc = min_local_freq(ue.task, t_max)
            self.freq[i, 0] = f_loc
            self.energy[i, 0] = local_energy(instance.k(i), instance.v(i), f_loc, ue.task.cycles)
            p = instance.tx_power(i)
            for o, (x, y, h) in enumerate(positions, start=1):
                horiz = horizontal_distance(ue.position, (x, y))
                r = data_rate(instance.radio, horiz, h, p)
                self.rate[i, o] = r
                self.dist3d[i, o] = math.sqrt(h * h + horiz * horiz)
                f_min = min_offload_freq(ue.task, r, t_max) if r > 0 else None
                if f_min is not None:
                    self.freq[i, o] = f_min
                    self.energy[i, o] = offload_energy(p, transmission_time(ue.task.data_bits, r))
        # feasible with empty capacity: deadline met and demand fits the UAV budget
        self.static_ok = np.isfinite(self.freq)
        self.static_ok[:, 1:] &= self.freq[:, 1:] <= self.slot_fmax
        self.static_ok[:, 0] = True
        self.static_ordinals = [np.flatnonzero(row) for row in self.static_ok]
        offload_freq = self.freq[:, 1:][self.static_ok[:, 1:]]
        self._max_demand = float(offload_freq.max()) if offload_freq.size else 0.0
        self._min_cap = int(self.slot_cap.min()) if self.slot_cap.size else 0
        self._min_fmax = float(self.slot_fmax.min()) if self.slot_fmax.size else 0.0

    def ordinal(self, action: Action) -> int:
        return self._ordinal[action]

    def empty_capacity(self) -> "CapacityState":
        return CapacityState(self)

    def feasible_mask(self, i: int, cap: "CapacityState") -> np.ndarray:
        mask = self.static_ok[i].copy()
        mask[1:] &= (cap.counts < self.slot_cap) & (cap.used + self.freq[i, 1:] <= self.slot_fmax)
        return mask

    def feasible_ordinals(self, i: int, cap: "CapacityState") -> np.ndarray:
        # no slot can be binding yet for anyone: the static set is exact
        if cap.max_count < self._min_cap and cap.max_used + self._max_demand <= self._min_fmax:
            return self.static_ordinals[i]
        return np.flatnonzero(self.feasible_mask(i, cap))

    def allocation(self, i: int, ordinal: int) -> Allocation:
        return Allocation(self.actions[ordinal], float(self.freq[i, ordinal]))


class CapacityState:
    """Running per-(UAV, slot) UE count and allocated frequency.

    ``max_count`` and ``max_used`` are upper bounds on the per-slot maxima,
    kept so callers can skip the per-slot check while nothing is close to
    binding.
    """

    def __init__(self, table: ActionTable):
        self._table = table
        n_slots = table.num_actions - 1
        self.counts = np.zeros(n_slots, dtype=np.int64)
        self.used = np.zeros(n_slots)
        self.max_count = 0
        self.max_used = 0.0

    def count(self, uav: int, slot: int) -> int:
        return int(self.counts[self._table.ordinal(Action.offload(uav, slot)) - 1])

    def freq_used(self, uav: int, slot: int) -> float:
        return float(self.used[self._table.ordinal(Action.offload(uav, slot)) - 1])

    def add(self, ordinal: int, freq_hz: float) -> None:
        if ordinal == 0:
            return
        k = ordinal - 1
        self.counts[k] += 1
        self.used[k] += freq_hz
        self.max_count = max(self.max_count, int(self.counts[k]))
        self.max_used = max(self.max_used, float(self.used[k]))

    def reset(self) -> None:
        self.counts[:] = 0
        self.used[:] = 0.0
        self.max_count = 0
        self.max_used = 0.0


def feasible_actions(instance: Instance, ue_index: int, cap: CapacityState,
                     table: ActionTable | None = None) -> list[tuple[Action, float]]:
    """Actions open to UE ``ue_index`` given current capacity, each with its minimal frequency.

    Local execution is always included.
    """
    table = table or cap._table
    if table.instance is not instance:
        table = ActionTable(instance)
    return [(table.actions[o], float(table.freq[ue_index, o]))
            for o in table.feasible_ordinals(ue_index, cap)]


@dataclass(frozen=True)
class Violation:
    tag: str
    ue: int | None = None
    uav: int | None = None
    slot: int | None = None
    value: float | None = None
    bound: float | None = None
    detail: str = ""

    def to_line(self) -> str:
        parts = [self.tag]
        for name in ("ue", "uav", "slot"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v}")
        if self.value is not None:
            parts.append(f"value={self.value!r}")
        if self.bound is not None:
            parts.append(f"bound={self.bound!r}")
        if self.detail:
            parts.append(self.detail)
        return " ".join(parts)


@dataclass
class ConstraintReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def tags(self) -> list[str]:
        return [v.tag for v in self.violations]

    def to_text(self) -> str:
        return "".join(v.to_line() + "\n" for v in self.violations)


def _entry_time(instance: Instance, i: int, alloc: Allocation) -> float:
    task = instance.ues[i].task
    t_c = task.cycles / alloc.freq_hz
    if alloc.action.is_local:
        return t_c
    traj = instance.uavs[alloc.action.uav - 1]
    x, y, h = uav_position(traj, alloc.action.slot)
    r = data_rate(instance.radio, horizontal_distance(instance.ues[i].position, (x, y)), h, instance.tx_power(i))
    return transmission_time(task.data_bits, r) + t_c


def check_assignment(instance: Instance, assignment: Assignment) -> ConstraintReport:
    """Check every constraint of the association/allocation problem and report all violations."""
    report = ConstraintReport()
    out = report.violations
    n, m = instance.num_ues, len(instance.uavs)
    t_max = instance.compute.t_max_s
    if len(assignment) > n:
        for i in range(n, len(assignment)):
            out.append(Violation("C2", ue=i, detail="entry for a UE that does not exist"))
    per_slot: dict[tuple[int, int], list[float]] = {}
    for i in range(n):
        alloc = assignment.entries[i] if i < len(assignment) else None
        if alloc is None:
            out.append(Violation("C2", ue=i, value=0, bound=1, detail="UE has no decision"))
            continue
        a = alloc.action
        if not a.is_local and not (1 <= a.uav <= m and 1 <= a.slot <= instance.uavs[a.uav - 1].num_slots):
            out.append(Violation("C1", ue=i, uav=a.uav, slot=a.slot, detail="no such (uav, slot)"))
            continue
        if not (math.isfinite(alloc.freq_hz) and alloc.freq_hz > 0):
            out.append(Violation("C1", ue=i, value=alloc.freq_hz, detail="allocated frequency must be > 0"))
            continue
        if not a.is_local:
            per_slot.setdefault((a.uav, a.slot), []).append(alloc.freq_hz)
        t = _entry_time(instance, i, alloc)
        if t > t_max + TIME_SLACK_S:
            out.append(Violation("C5", ue=i, uav=a.uav or None, slot=a.slot or None, value=t, bound=t_max))
    k = instance.compute.slot_ue_cap
    for (j, t), freqs in sorted(per_slot.items()):
        if len(freqs) > k:
            out.append(Violation("C3", uav=j, slot=t, value=len(freqs), bound=k))
        total = math.fsum(freqs)
        f_max = instance.f_max(j)
        if total > f_max * (1.0 + FREQ_REL_SLACK):
            out.append(Violation("C4", uav=j, slot=t, value=total, bound=f_max))
    return report


def ue_energy(instance: Instance, i: int, alloc: Allocation) -> float:
    task = instance.ues[i].task
    if alloc.action.is_local:
        return local_energy(instance.k(i), instance.v(i), alloc.freq_hz, task.cycles)
    traj = instance.uavs[alloc.action.uav - 1]
    x, y, h = uav_position(traj, alloc.action.slot)
    p = instance.tx_power(i)
    r = data_rate(instance.radio, horizontal_distance(instance.ues[i].position, (x, y)), h, p)
    return offload_energy(p, transmission_time(task.data_bits, r))


def objective_energy(instance: Instance, assignment: Assignment) -> float:
    """Total UE energy (local and offload terms), summed with ``math.fsum``."""
    return math.fsum(ue_energy(instance, i, a) for i, a in enumerate(assignment.entries) if a is not None)


def assignment_from_ordinals(table: ActionTable, ordinals: Sequence[int] | Iterable[int]) -> Assignment:
    return Assignment([table.allocation(i, int(o)) for i, o in enumerate(ordinals)])
