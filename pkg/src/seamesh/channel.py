"""Radio propagation, link capacity, CQI mapping, and CQI trace synthesis.

Distances are meters, powers are watts, rates are bits/s. The log-distance
pathloss model is only valid beyond the 1 m reference distance; shorter
node separations are clamped to 1 m when building gain matrices and
rejected when queried directly.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

BOLTZMANN = 1.380649e-23
NOISE_TEMP_K = 290.0

CQI_STEP_DB = 2.0
CQI_OFFSET_DB = 6.0
CQI_MAX = 15


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class RadioParams:
    """Static radio configuration shared by all nodes in a deployment."""

    carrier_hz: float
    bandwidth_hz: float
    pathloss_exp: float
    ref_loss_db: float  # pathloss at the 1 m reference distance
    noise_figure_db: float
    tx_power_levels_w: tuple
    circuit_power_w: float
    sinr_min_db: float
    max_range_m: float

    def noise_power_w(self):
        thermal = BOLTZMANN * NOISE_TEMP_K * self.bandwidth_hz
        return thermal * 10.0 ** (self.noise_figure_db / 10.0)

    def nonzero_power_levels(self):
        return tuple(p for p in self.tx_power_levels_w if p > 0.0)


# Sub-6 mesh backhaul between sea-surface nodes.
MESH_3P5GHZ = RadioParams(
    carrier_hz=3.5e9,
    bandwidth_hz=10e6,
    pathloss_exp=2.7,
    ref_loss_db=43.3,
    noise_figure_db=7.0,
    tx_power_levels_w=(0.0, 0.5, 2.0),
    circuit_power_w=0.5,
    sinr_min_db=-3.0,
    max_range_m=1200.0,
)

# Single mmWave access cell used by the slot-level scheduler.
MMWAVE_CELL = RadioParams(
    carrier_hz=28e9,
    bandwidth_hz=100e6,
    pathloss_exp=2.0,
    ref_loss_db=61.4,
    noise_figure_db=7.0,
    tx_power_levels_w=(0.0, 1.0),
    circuit_power_w=0.2,
    sinr_min_db=-6.0,
    max_range_m=300.0,
)


def pathloss_db(distance_m, params):
    """Log-distance pathloss. Raises for distances inside the reference."""
    d = float(distance_m)
    if d < 1.0:
        raise ValueError(f"pathloss model needs distance >= 1 m, got {d}")
    return params.ref_loss_db + 10.0 * params.pathloss_exp * math.log10(d)


def gain_matrix(positions, params):
    """Linear power gain between every node pair, d clamped to >= 1 m.

    positions is (n, 2). Diagonal entries are the 1 m gain; they are never
    meaningful (a node does not transmit to itself) but keeping them finite
    avoids special cases in interference sums.
    """
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), 1.0)
    loss_db = params.ref_loss_db + 10.0 * params.pathloss_exp * np.log10(d)
    return 10.0 ** (-loss_db / 10.0)


def capacity_bps(sinr_linear, bandwidth_hz):
    return bandwidth_hz * np.log2(1.0 + np.asarray(sinr_linear, dtype=float))


def sinr_to_cqi(sinr_db):
    """Quantize SINR to a 0..15 CQI index in 2 dB steps."""
    idx = np.floor((np.asarray(sinr_db, dtype=float) + CQI_OFFSET_DB) / CQI_STEP_DB)
    return np.clip(idx, 0, CQI_MAX).astype(np.int64)


def cqi_lower_edge_db(cqi):
    """Lowest SINR consistent with a reported CQI value."""
    return CQI_STEP_DB * np.asarray(cqi, dtype=float) - CQI_OFFSET_DB


@dataclass(frozen=True)
class TraceParams:
    """Geometry and channel dynamics for a synthetic access-link trace.

    The UE shuttles back and forth along a straight lane at fixed speed,
    passing abeam of the serving node at ``standoff_m``. On top of the
    distance term sit AR(1) log-normal shadowing and a two-state blockage
    process (ships, superstructure) that knocks the link down by a fixed
    depth while active. Obstructions do not occlude the path instantly;
    the attenuation relaxes toward the current state with a first-order
    lag (``block_tau_slots``), giving onset and recovery ramps of a few
    tens of milliseconds instead of single-slot cliffs.
    """

    slot_s: float = 0.01
    speed_mps: float = 10.0
    snr_ref_db: float = 49.0  # mean SNR at the 1 m reference distance
    pathloss_exp: float = 2.0
    standoff_m: float = 25.0
    x_start_m: float = -120.0
    x_span_m: float = 120.0
    shadow_rho: float = 0.98
    shadow_sigma_db: float = 1.0
    block_depth_db: float = 20.0
    block_p_enter: float = 0.00625
    block_p_exit: float = 0.025
    block_tau_slots: float = 5.0

    def __post_init__(self):
        if self.block_tau_slots <= 0.0:
            raise ValueError("block_tau_slots must be positive")


@dataclass
class CqiTrace:
    sinr_db: np.ndarray
    cqi: np.ndarray
    slot_s: float

    def __len__(self):
        return len(self.cqi)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "sinr_db", "cqi"])
            for t in range(len(self.cqi)):
                w.writerow([t, repr(float(self.sinr_db[t])), int(self.cqi[t])])

    @classmethod
    def from_csv(cls, path, slot_s=0.01):
        sinr = []
        cqi = []
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header != ["slot", "sinr_db", "cqi"]:
                raise ValueError(f"unexpected trace header: {header}")
            for row in r:
                sinr.append(float(row[1]))
                cqi.append(int(row[2]))
        return cls(np.asarray(sinr), np.asarray(cqi, dtype=np.int64), slot_s)


def _lane_positions(n_slots, params):
    # Triangle-wave shuttle between -x_span and +x_span.
    seg = 2.0 * params.x_span_m
    t = np.arange(n_slots, dtype=float)
    u = np.mod(params.x_start_m + params.x_span_m + params.speed_mps * params.slot_s * t,
               2.0 * seg)
    x = np.where(u <= seg, u, 2.0 * seg - u) - params.x_span_m
    return x


def generate_cqi_trace(n_slots, params=TraceParams(), seed=0):
    """Synthesize a slot-indexed SINR/CQI trace for one mobile UE."""
    rng = np.random.default_rng(seed)
    x = _lane_positions(n_slots, params)
    d = np.maximum(np.hypot(x, params.standoff_m), 1.0)
    mean_db = params.snr_ref_db - 10.0 * params.pathloss_exp * np.log10(d)

    # AR(1) with stationary std shadow_sigma_db.
    rho = params.shadow_rho
    innov = rng.standard_normal(n_slots) * params.shadow_sigma_db * math.sqrt(1.0 - rho * rho)
    shadow = np.empty(n_slots)
    s = rng.standard_normal() * params.shadow_sigma_db
    for t in range(n_slots):
        s = rho * s + innov[t]
        shadow[t] = s

    # Two-state blockage chain started from its stationary distribution.
    p_stat = params.block_p_enter / (params.block_p_enter + params.block_p_exit)
    blocked = np.empty(n_slots, dtype=bool)
    u = rng.random(n_slots)
    state = rng.random() < p_stat
    for t in range(n_slots):
        if state:
            if u[t] < params.block_p_exit:
                state = False
        else:
            if u[t] < params.block_p_enter:
                state = True
        blocked[t] = state

    # Attenuation ramps toward the chain state with a first-order lag.
    beta = math.exp(-1.0 / params.block_tau_slots)
    att = np.empty(n_slots)
    a = params.block_depth_db if blocked[0] else 0.0
    for t in range(n_slots):
        a = beta * a + (1.0 - beta) * (params.block_depth_db if blocked[t] else 0.0)
        att[t] = a

    sinr_db = mean_db + shadow - att
    return CqiTrace(sinr_db, sinr_to_cqi(sinr_db), params.slot_s)
