"""Multi-UAV edge computing: system model, constraint checking and association solvers."""

from .baselines import SolverKind, solve, solve_es, solve_go, solve_le, solve_ro
from .feasibility import (
    LOCAL,
    Action,
    ActionTable,
    Allocation,
    Assignment,
    CapacityState,
    ConstraintReport,
    check_assignment,
    feasible_actions,
    min_local_freq,
    min_offload_freq,
    objective_energy,
)
from .model import ActionKind, ComputeParams, RadioParams, Task, UavTrajectory, UePosition
from .rlaa import QTable, RlaaParams, extract_policy, train
from .scenario import Instance, ScenarioSpec, Ue, generate, load_instance, preset, save_instance

__version__ = "0.1.0"
