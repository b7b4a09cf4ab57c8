"""Tabular Q-learning for joint user association and resource allocation.

Each episode sweeps the UEs in index order. A UE picks an action from its
currently feasible set with an epsilon-greedy policy, is allocated the
minimal frequency for that action, is rewarded with the inverse of its
energy, and the Q-table is updated with a one-step lookahead onto the next
UE's feasible set. Capacity is reset at the start of every episode.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from .feasibility import ActionTable, Assignment
from .scenario import Instance

STATE_MODES = ("ue", "joint")


def reward(energy_j: float) -> float:
    if not energy_j > 0:
        raise ValueError(f"reward undefined for non-positive energy {energy_j!r}")
    return 1.0 / energy_j


class QTable:
    """Action values keyed by ``(state_key, action_ordinal)``; unseen entries read as 0."""

    def __init__(self, num_actions: int):
        self.num_actions = num_actions
        self._rows: dict[Hashable, np.ndarray] = {}

    def row(self, key: Hashable) -> np.ndarray:
        r = self._rows.get(key)
        if r is None:
            r = self._rows[key] = np.zeros(self.num_actions)
        return r

    def values(self, key: Hashable, actions: np.ndarray) -> np.ndarray:
        r = self._rows.get(key)
        return np.zeros(len(actions)) if r is None else r[actions]

    def get(self, key: Hashable, action: int) -> float:
        r = self._rows.get(key)
        return 0.0 if r is None else float(r[action])

    def set(self, key: Hashable, action: int, value: float) -> None:
        self.row(key)[action] = value

    def keys(self) -> list[Hashable]:
        return list(self._rows)

    def __len__(self) -> int:
        return len(self._rows)

    def export_text(self, labels: list[str] | None = None) -> str:
        """One ``state_key<TAB>action<TAB>value`` line per non-zero entry."""
        lines = []
        for key, r in self._rows.items():
            for a in np.flatnonzero(r):
                name = labels[a] if labels else str(a)
                lines.append(f"{key!r}\t{name}\t{float(r[a])!r}")
        return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class RlaaParams:
    epsilon: float = 0.9
    beta: float = 0.2
    gamma: float = 0.9
    max_episodes: int = 10000
    rng_seed: int = 0
    # linear decay from ``epsilon`` to ``epsilon_end`` over training when set
    epsilon_end: float | None = None
    state_mode: str = "ue"

    def __post_init__(self) -> None:
        for name in ("epsilon", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}: must lie in [0, 1], got {v!r}")
        if self.epsilon_end is not None and not 0.0 <= self.epsilon_end <= 1.0:
            raise ValueError("epsilon_end: must lie in [0, 1]")
        if not isinstance(self.max_episodes, int) or self.max_episodes < 0:
            raise ValueError("max_episodes: must be a non-negative integer")
        if self.state_mode not in STATE_MODES:
            raise ValueError(f"state_mode: expected one of {STATE_MODES}")

    def epsilon_at(self, episode: int) -> float:
        if self.epsilon_end is None or self.max_episodes <= 1:
            return self.epsilon
        frac = episode / (self.max_episodes - 1)
        return self.epsilon + (self.epsilon_end - self.epsilon) * frac


def select_action(q: QTable, state_key: Hashable, candidates: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy choice among ``candidates`` (ascending ordinals).

    One uniform draw decides exploration; exploring draws a second integer.
    Greedy ties go to the lowest ordinal.
    """
    if len(candidates) == 0:
        raise ValueError("empty candidate set")
    if rng.random() < epsilon:
        return int(candidates[rng.integers(len(candidates))])
    values = q.values(state_key, candidates)
    return int(candidates[int(np.argmax(values))])


def q_update(q: QTable, state_key: Hashable, action: int, reward_z: float, next_state_key: Hashable,
             next_candidates: np.ndarray, beta: float, gamma: float) -> float:
    """Apply Q <- Q + beta * (Z + gamma * max_c Q(s', c) - Q) to one cell and return the new value."""
    best_next = float(q.values(next_state_key, next_candidates).max()) if len(next_candidates) else 0.0
    row = q.row(state_key)
    old = row[action]
    row[action] = old + beta * (reward_z + gamma * best_next - old)
    return float(row[action])


@dataclass
class TrainingTrace:
    total_energy_j: list[float] = field(default_factory=list)
    epsilon_used: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["episode", "total_energy_J", "epsilon_used"])
        for e, (energy, eps) in enumerate(zip(self.total_energy_j, self.epsilon_used), start=1):
            w.writerow([e, format(energy, ".17g"), format(eps, ".17g")])
        return buf.getvalue()


def _key(mode: str, i: int, state: list[int]) -> Hashable:
    if mode == "ue":
        return i
    return (i, tuple(state))


@dataclass
class TrainResult:
    assignment: Assignment
    trace: TrainingTrace
    q: QTable
    table: ActionTable


def train(instance: Instance, params: RlaaParams, table: ActionTable | None = None) -> TrainResult:
    table = table or ActionTable(instance)
    n = instance.num_ues
    q = QTable(table.num_actions)
    trace = TrainingTrace()
    if n == 0:
        return TrainResult(Assignment([]), trace, q, table)

    rng = np.random.default_rng(params.rng_seed)
    mode = params.state_mode
    state = [0] * n
    cap = table.empty_capacity()
    energy = table.energy
    freq = table.freq

    for episode in range(params.max_episodes):
        eps = params.epsilon_at(episode)
        cap.reset()
        chosen = np.empty(n)
        cands = table.feasible_ordinals(0, cap)
        for i in range(n):
            key = _key(mode, i, state)
            a = select_action(q, key, cands, eps, rng)
            e = float(energy[i, a])
            cap.add(a, float(freq[i, a]))
            chosen[i] = e
            state[i] = a
            if i + 1 < n:
                nxt = i + 1
                next_cands = table.feasible_ordinals(nxt, cap)
            else:
                # wrap to the first UE of the next episode, which starts from empty capacity
                nxt = 0
                next_cands = table.feasible_ordinals(0, table.empty_capacity())
            q_update(q, key, a, reward(e), _key(mode, nxt, state), next_cands, params.beta, params.gamma)
            cands = next_cands
        trace.total_energy_j.append(math.fsum(chosen))
        trace.epsilon_used.append(eps)

    return TrainResult(extract_policy(q, instance, table, mode), trace, q, table)


def extract_policy(q: QTable, instance: Instance, table: ActionTable | None = None,
                   state_mode: str = "ue") -> Assignment:
    """Greedy sweep over UEs in index order, re-tracking capacity so the result stays feasible."""
    table = table or ActionTable(instance)
    cap = table.empty_capacity()
    state = [0] * instance.num_ues
    picks = []
    for i in range(instance.num_ues):
        cands = table.feasible_ordinals(i, cap)
        values = q.values(_key(state_mode, i, state), cands)
        a = int(cands[int(np.argmax(values))])
        cap.add(a, float(table.freq[i, a]))
        state[i] = a
        picks.append(table.allocation(i, a))
    return Assignment(picks)
