"""Experiment configuration: one flat JSON document drives everything.

Unknown keys are rejected rather than ignored, so a typo in a preset file
fails loudly instead of silently running defaults.
"""

import dataclasses
import json
from dataclasses import dataclass, field


@dataclass
class ExperimentConfig:
    preset: str = "custom"
    loads: list = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    out_dir: str = "results"

    # mesh instance generation
    area_km2: float = 4.0
    density_per_km2: float = 3.0
    gateway_count: int = 2
    k_flows: int = 3
    pattern_compounds: int = 64
    airtime_target: float = 0.5

    # link-criticality pruner
    tau: float = 0.3
    pruner_weights: str = None
    pruner_instances: int = 200
    pruner_epochs: int = 150
    pruner_lr: float = 0.1
    pruner_batch: int = 32
    pruner_seed: int = 0
    eval_instances: int = 20

    # CQI predictor
    cqi_weights: str = None
    cqi_hidden: int = 16
    cqi_epochs: int = 40
    cqi_lr: float = 0.3
    cqi_batch: int = 32
    cqi_seed: int = 0
    cqi_train_traces: int = 6
    cqi_trace_slots: int = 3000

    # slot scheduler
    n_ues: int = 4
    horizon_slots: int = 4000
    slot_s: float = 0.01
    report_delay_slots: int = 8
    window: int = 16
    packet_size_bits: int = 12000
    bandwidth_hz: float = 100e6
    tx_power_w: float = 1.0
    circuit_power_w: float = 0.2
    predictor_mode: str = "direct"
    speed_mps: float = 10.0

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        for ld in self.loads:
            if not 0.0 < ld <= 1.0:
                raise ValueError(f"load fraction {ld} outside (0, 1]")

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


def load_config(path):
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))
