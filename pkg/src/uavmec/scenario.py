"""Problem instances: seeded generation, figure presets and JSON persistence."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .model import (
    BITS_PER_KBIT,
    BITS_PER_KBYTE,
    GHZ,
    ComputeParams,
    RadioParams,
    Task,
    UavTrajectory,
    UePosition,
    noise_power_w,
)

INSTANCE_FORMAT = "uavmec.instance/1"
SPEC_FORMAT = "uavmec.scenario/1"

DATA_UNITS = {"kbit": BITS_PER_KBIT, "kbyte": BITS_PER_KBYTE}

PRESET_CENTERS: dict[str, list[tuple[float, float, float]]] = {
    "fig2": [(1200.0, 1200.0, 350.0), (-1200.0, -1200.0, 350.0)],
    "fig3": [(1200.0, 1200.0, 350.0), (-1200.0, -1200.0, 350.0), (-1200.0, 1200.0, 350.0)],
    "fig4": [(1200.0, 1200.0, 350.0), (-1200.0, -1200.0, 350.0), (-1200.0, 1200.0, 350.0),
             (1200.0, -1200.0, 350.0), (0.0, 0.0, 350.0)],
}


class InstanceFormatError(ValueError):
    """Raised when an instance or scenario file cannot be parsed or validated."""


@dataclass(frozen=True)
class Ue:
    position: UePosition
    task: Task
    # optional per-UE overrides of the global radio/compute parameters
    tx_power_w: float | None = None
    k_i: float | None = None
    v_i: float | None = None

    def __post_init__(self) -> None:
        if self.tx_power_w is not None and not (math.isfinite(self.tx_power_w) and self.tx_power_w > 0):
            raise ValueError("tx_power_w: must be a finite positive number")
        if self.k_i is not None and not (math.isfinite(self.k_i) and self.k_i >= 0):
            raise ValueError("k_i: must be >= 0")
        if self.v_i is not None and not (math.isfinite(self.v_i) and self.v_i >= 1):
            raise ValueError("v_i: must be >= 1")


@dataclass(frozen=True)
class Instance:
    ues: tuple[Ue, ...]
    uavs: tuple[UavTrajectory, ...]
    radio: RadioParams = field(default_factory=RadioParams)
    compute: ComputeParams = field(default_factory=ComputeParams)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ues", tuple(self.ues))
        object.__setattr__(self, "uavs", tuple(self.uavs))

    @property
    def num_ues(self) -> int:
        return len(self.ues)

    def tx_power(self, i: int) -> float:
        p = self.ues[i].tx_power_w
        return self.radio.tx_power_w if p is None else p

    def k(self, i: int) -> float:
        k = self.ues[i].k_i
        return self.compute.k_i if k is None else k

    def v(self, i: int) -> float:
        v = self.ues[i].v_i
        return self.compute.v_i if v is None else v

    def f_max(self, j: int) -> float:
        """Frequency budget of UAV ``j`` (1-based)."""
        f = self.uavs[j - 1].f_max_hz
        return self.compute.f_max_hz if f is None else f


@dataclass(frozen=True)
class ScenarioSpec:
    num_ues: int
    uav_centers: tuple[tuple[float, float, float], ...]
    radius_m: float = 800.0
    num_slots: int = 12
    ue_region: tuple[float, float, float, float] = (-2000.0, 2000.0, -1000.0, 1000.0)
    data_range_bits: tuple[float, float] = (100 * BITS_PER_KBIT, 1000 * BITS_PER_KBIT)
    cycles_range: tuple[float, float] = (1e8, 1e9)
    radio: RadioParams = field(default_factory=RadioParams)
    compute: ComputeParams = field(default_factory=ComputeParams)
    seed: int = 0
    phase_rad: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "uav_centers", tuple(tuple(float(c) for c in ctr) for ctr in self.uav_centers))
        object.__setattr__(self, "ue_region", tuple(float(v) for v in self.ue_region))
        object.__setattr__(self, "data_range_bits", tuple(float(v) for v in self.data_range_bits))
        object.__setattr__(self, "cycles_range", tuple(float(v) for v in self.cycles_range))
        if not isinstance(self.num_ues, int) or self.num_ues < 0:
            raise ValueError("num_ues: must be a non-negative integer")
        for name, ctr in (("uav_centers", c) for c in self.uav_centers):
            if len(ctr) != 3 or ctr[2] <= 0:
                raise ValueError(f"{name}: each center needs (x, y, altitude>0)")
        xmin, xmax, ymin, ymax = self.ue_region
        if not (xmin < xmax and ymin < ymax):
            raise ValueError("ue_region: must be a non-degenerate rectangle (xmin<xmax, ymin<ymax)")
        for name in ("data_range_bits", "cycles_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise ValueError(f"{name}: need 0 < min <= max")
        if self.radius_m < 0:
            raise ValueError("radius_m: must be >= 0")
        if not isinstance(self.num_slots, int) or self.num_slots < 1:
            raise ValueError("num_slots: must be an integer >= 1")


def generate(spec: ScenarioSpec) -> Instance:
    """Draw a random instance; the result depends only on ``spec`` (seed included)."""
    rng = np.random.default_rng(spec.seed)
    n = spec.num_ues
    xmin, xmax, ymin, ymax = spec.ue_region
    xs = rng.uniform(xmin, xmax, n)
    ys = rng.uniform(ymin, ymax, n)
    ds = rng.uniform(*spec.data_range_bits, n)
    fs = rng.uniform(*spec.cycles_range, n)
    ues = tuple(Ue(UePosition(float(x), float(y)), Task(float(d), float(f)))
                for x, y, d, f in zip(xs, ys, ds, fs))
    uavs = tuple(UavTrajectory(cx, cy, spec.radius_m, h, spec.num_slots, spec.phase_rad)
                 for cx, cy, h in spec.uav_centers)
    return Instance(ues, uavs, spec.radio, spec.compute)


def preset(name: str, n_ues: int, *, seed: int = 0, noise_mode: str = "total",
           data_unit: str = "kbit", noise_dbm: float = -90.0) -> ScenarioSpec:
    """Scenario for one of the published geometries (``fig2``, ``fig3``, ``fig4``).

    ``data_unit`` selects how the [100, 1000] task-size range is read:
    ``"kbit"`` (default) or ``"kbyte"``.
    """
    if name not in PRESET_CENTERS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESET_CENTERS)}")
    if data_unit not in DATA_UNITS:
        raise ValueError(f"unknown data unit {data_unit!r}; choose from {sorted(DATA_UNITS)}")
    bandwidth = 1e6
    radio = RadioParams(bandwidth_hz=bandwidth, tx_power_w=1.0, g0=1.42e-4, big_g0=2.2846,
                        noise_power_w=noise_power_w(noise_dbm, bandwidth, noise_mode))
    compute = ComputeParams(k_i=1e-27, v_i=3.0, f_max_hz=150 * GHZ, slot_ue_cap=150, t_max_s=1.0)
    unit = DATA_UNITS[data_unit]
    return ScenarioSpec(
        num_ues=n_ues,
        uav_centers=tuple(PRESET_CENTERS[name]),
        radius_m=800.0,
        num_slots=12,
        ue_region=(-2000.0, 2000.0, -1000.0, 1000.0),
        data_range_bits=(100 * unit, 1000 * unit),
        cycles_range=(1e8, 1e9),
        radio=radio,
        compute=compute,
        seed=seed,
    )


# -- persistence -------------------------------------------------------------

def _ue_to_dict(ue: Ue) -> dict[str, Any]:
    d: dict[str, Any] = {"x_m": ue.position.x_m, "y_m": ue.position.y_m,
                         "data_bits": ue.task.data_bits, "cycles": ue.task.cycles}
    for name in ("tx_power_w", "k_i", "v_i"):
        value = getattr(ue, name)
        if value is not None:
            d[name] = value
    return d


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    return {
        "format": INSTANCE_FORMAT,
        "radio": asdict(inst.radio),
        "compute": asdict(inst.compute),
        "uavs": [asdict(u) for u in inst.uavs],
        "ues": [_ue_to_dict(u) for u in inst.ues],
    }


def _build(cls, data: Any, where: str, required: tuple[str, ...] = ()):
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise InstanceFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = [r for r in required if r not in data]
    if missing:
        raise InstanceFormatError(f"{where}.{missing[0]}: missing required field")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{where}.{exc}") from None


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance: expected a JSON object")
    if data.get("format") != INSTANCE_FORMAT:
        raise InstanceFormatError(f"format: expected {INSTANCE_FORMAT!r}, got {data.get('format')!r}")
    for key in ("radio", "compute", "uavs", "ues"):
        if key not in data:
            raise InstanceFormatError(f"{key}: missing required field")
    radio = _build(RadioParams, data["radio"], "radio", tuple(f.name for f in fields(RadioParams)))
    compute = _build(ComputeParams, data["compute"], "compute", tuple(f.name for f in fields(ComputeParams)))
    if not isinstance(data["uavs"], list) or not isinstance(data["ues"], list):
        raise InstanceFormatError("uavs/ues: expected arrays")
    uavs = [_build(UavTrajectory, u, f"uavs[{j}]", ("center_x_m", "center_y_m"))
            for j, u in enumerate(data["uavs"])]
    ues = []
    for i, u in enumerate(data["ues"]):
        where = f"ues[{i}]"
        if not isinstance(u, dict):
            raise InstanceFormatError(f"{where}: expected an object")
        for key in ("x_m", "y_m", "data_bits", "cycles"):
            if key not in u:
                raise InstanceFormatError(f"{where}.{key}: missing required field")
        extra = set(u) - {"x_m", "y_m", "data_bits", "cycles", "tx_power_w", "k_i", "v_i"}
        if extra:
            raise InstanceFormatError(f"{where}: unknown field(s) {sorted(extra)}")
        try:
            ues.append(Ue(UePosition(u["x_m"], u["y_m"]), Task(u["data_bits"], u["cycles"]),
                          u.get("tx_power_w"), u.get("k_i"), u.get("v_i")))
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"{where}.{exc}") from None
    return Instance(tuple(ues), tuple(uavs), radio, compute)


def _read_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(_read_json(path))


def spec_to_dict(spec: ScenarioSpec) -> dict[str, Any]:
    d = asdict(spec)
    d["format"] = SPEC_FORMAT
    return d


def spec_from_dict(data: Any) -> ScenarioSpec:
    if not isinstance(data, dict):
        raise InstanceFormatError("scenario: expected a JSON object")
    data = dict(data)
    if data.pop("format", SPEC_FORMAT) != SPEC_FORMAT:
        raise InstanceFormatError(f"format: expected {SPEC_FORMAT!r}")
    if "radio" in data:
        data["radio"] = _build(RadioParams, data["radio"], "radio")
    if "compute" in data:
        data["compute"] = _build(ComputeParams, data["compute"], "compute")
    return _build(ScenarioSpec, data, "scenario", ("num_ues", "uav_centers"))


def save_spec(spec: ScenarioSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")


def load_spec(path: str | Path) -> ScenarioSpec:
    return spec_from_dict(_read_json(path))
