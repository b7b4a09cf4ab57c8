"""Geometry, channel, timing and energy equations for UAV-assisted edge computing.

Every function here is pure. Units are SI throughout (m, s, W, J, Hz) with
task sizes in bits and workloads in CPU cycles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

# 1 KB = 1024 bytes, 1 Kb = 1024 bits
BITS_PER_KBYTE = 8192
BITS_PER_KBIT = 1024
GHZ = 1e9


class ActionKind(enum.Enum):
    LOCAL = "local"
    OFFLOAD = "offload"


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_power_w(noise_dbm: float, bandwidth_hz: float, mode: str = "total") -> float:
    """Convert a noise figure in dBm into the total noise power sigma^2 in watts.

    ``mode="total"`` treats the figure as the in-band noise power;
    ``mode="psd"`` treats it as dBm/Hz and integrates over the bandwidth.
    """
    if mode == "total":
        return dbm_to_watts(noise_dbm)
    if mode == "psd":
        return dbm_to_watts(noise_dbm) * bandwidth_hz
    raise ValueError(f"unknown noise mode {mode!r} (expected 'total' or 'psd')")


def _require(cond: bool, field: str, msg: str) -> None:
    if not cond:
        raise ValueError(f"{field}: {msg}")


def _finite_positive(value: float, field: str) -> None:
    _require(isinstance(value, (int, float)) and math.isfinite(value) and value > 0,
             field, f"must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class RadioParams:
    bandwidth_hz: float = 1e6
    tx_power_w: float = 1.0
    g0: float = 1.42e-4
    big_g0: float = 2.2846
    noise_power_w: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("bandwidth_hz", "tx_power_w", "g0", "big_g0", "noise_power_w"):
            _finite_positive(getattr(self, name), name)
        _require(math.isfinite(self.alpha()), "noise_power_w", "alpha overflows")

    def alpha(self) -> float:
        """Reference SNR factor g0 * G0 / sigma^2."""
        return self.g0 * self.big_g0 / self.noise_power_w


@dataclass(frozen=True)
class Task:
    data_bits: float
    cycles: float

    def __post_init__(self) -> None:
        _finite_positive(self.data_bits, "data_bits")
        _finite_positive(self.cycles, "cycles")


@dataclass(frozen=True)
class UePosition:
    x_m: float
    y_m: float

    def __post_init__(self) -> None:
        _require(math.isfinite(self.x_m), "x_m", "must be finite")
        _require(math.isfinite(self.y_m), "y_m", "must be finite")


@dataclass(frozen=True)
class UavTrajectory:
    center_x_m: float
    center_y_m: float
    radius_m: float = 800.0
    altitude_m: float = 350.0
    num_slots: int = 12
    phase_rad: float = 0.0
    # per-UAV override of ComputeParams.f_max_hz
    f_max_hz: float | None = None

    def __post_init__(self) -> None:
        _require(math.isfinite(self.center_x_m), "center_x_m", "must be finite")
        _require(math.isfinite(self.center_y_m), "center_y_m", "must be finite")
        _require(math.isfinite(self.radius_m) and self.radius_m >= 0, "radius_m", "must be >= 0")
        _finite_positive(self.altitude_m, "altitude_m")
        _require(isinstance(self.num_slots, int) and self.num_slots >= 1, "num_slots", "must be an integer >= 1")
        _require(math.isfinite(self.phase_rad), "phase_rad", "must be finite")
        if self.f_max_hz is not None:
            _finite_positive(self.f_max_hz, "f_max_hz")


@dataclass(frozen=True)
class ComputeParams:
    k_i: float = 1e-27
    v_i: float = 3.0
    f_max_hz: float = 150 * GHZ
    slot_ue_cap: int = 150
    t_max_s: float = 1.0

    def __post_init__(self) -> None:
        _require(math.isfinite(self.k_i) and self.k_i >= 0, "k_i", "must be >= 0")
        _require(math.isfinite(self.v_i) and self.v_i >= 1, "v_i", "must be >= 1")
        _finite_positive(self.f_max_hz, "f_max_hz")
        _require(isinstance(self.slot_ue_cap, int) and self.slot_ue_cap >= 1, "slot_ue_cap", "must be an integer >= 1")
        _finite_positive(self.t_max_s, "t_max_s")


def uav_position(traj: UavTrajectory, slot: int) -> tuple[float, float, float]:
    """Position of a UAV during ``slot`` (1-based), uniformly spaced around its circle."""
    if not 1 <= slot <= traj.num_slots:
        raise ValueError(f"slot {slot} out of range 1..{traj.num_slots}")
    theta = traj.phase_rad + 2.0 * math.pi * (slot - 1) / traj.num_slots
    return (traj.center_x_m + traj.radius_m * math.cos(theta),
            traj.center_y_m + traj.radius_m * math.sin(theta),
            traj.altitude_m)


def horizontal_distance(ue: UePosition, uav_xy: tuple[float, float]) -> float:
    return math.hypot(uav_xy[0] - ue.x_m, uav_xy[1] - ue.y_m)


def data_rate(rp: RadioParams, horiz_dist_m: float, altitude_m: float,
              tx_power_w: float | None = None) -> float:
    """Uplink rate B*log2(1 + alpha*P/(H^2 + R^2)) in bits/s."""
    if altitude_m <= 0:
        raise ValueError("altitude_m must be > 0")
    p = rp.tx_power_w if tx_power_w is None else tx_power_w
    snr = rp.alpha() * p / (altitude_m * altitude_m + horiz_dist_m * horiz_dist_m)
    return rp.bandwidth_hz * math.log2(1.0 + snr)


def transmission_time(data_bits: float, rate_bps: float) -> float:
    if rate_bps <= 0:
        raise ValueError("rate_bps must be > 0")
    return data_bits / rate_bps


def compute_time(cycles: float, freq_hz: float) -> float:
    if freq_hz <= 0:
        raise ValueError("freq_hz must be > 0")
    return cycles / freq_hz


def offload_energy(tx_power_w: float, t_tr_s: float) -> float:
    return tx_power_w * t_tr_s


def local_energy(k: float, v: float, freq_hz: float, cycles: float) -> float:
    """Energy k * f^v * (F/f) = k * f^(v-1) * F of running ``cycles`` at ``freq_hz``."""
    if freq_hz <= 0:
        raise ValueError("freq_hz must be > 0")
    return k * freq_hz ** (v - 1.0) * cycles


def total_time(kind: ActionKind, t_tr_s: float, t_c_s: float) -> float:
    if kind is ActionKind.LOCAL:
        return t_c_s
    return t_tr_s + t_c_s
