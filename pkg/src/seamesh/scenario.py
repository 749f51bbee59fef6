"""Deployment and traffic generators for the maritime mesh.

Everything here is a pure function of its arguments including the seed, so
scenarios can be regenerated bit-for-bit from (area, density, gateways,
seed) alone. The JSON form is canonical: fixed field order, floats with 17
significant digits, so serialize(parse(x)) == x.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import MESH_3P5GHZ

GATEWAY = "Gateway"
VESSEL = "Vessel"

EMBB = "eMBB"
URLLC = "URLLC"
MMTC = "mMTC"
SERVICE_CLASSES = (EMBB, URLLC, MMTC)
CLASS_RATE_MULT = {EMBB: 1.0, URLLC: 0.1, MMTC: 0.01}


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    role: str


@dataclass(frozen=True)
class CandidateLink:
    id: int
    tx: int
    rx: int
    distance_m: float


@dataclass(frozen=True)
class FlowDemand:
    id: int
    src: int
    dst: int
    rate_bps: float
    service_class: str


@dataclass
class Scenario:
    area_side_m: float
    seed: int
    nodes: list
    flows: list = field(default_factory=list)
    radio: object = MESH_3P5GHZ  # not serialized; radio presets are code

    def positions(self):
        return np.array([[n.x, n.y] for n in self.nodes], dtype=float)

    def gateway_ids(self):
        return [n.id for n in self.nodes if n.role == GATEWAY]

    def validate(self):
        side = self.area_side_m
        for i, n in enumerate(self.nodes):
            if n.id != i:
                raise ValueError("node ids must be dense 0..N-1 in order")
            if not (0.0 <= n.x <= side and 0.0 <= n.y <= side):
                raise ValueError(f"node {n.id} outside deployment square")
            if n.role not in (GATEWAY, VESSEL):
                raise ValueError(f"unknown role {n.role!r}")
        if not any(n.role == GATEWAY for n in self.nodes):
            raise ValueError("scenario needs at least one gateway")
        for f in self.flows:
            if f.src == f.dst:
                raise ValueError(f"flow {f.id} has src == dst")
            if f.rate_bps <= 0:
                raise ValueError(f"flow {f.id} has non-positive rate")
        return self


def generate_topology(area_km2, density_per_km2, gateway_count, seed,
                      radio=MESH_3P5GHZ):
    """Uniform i.i.d. placement; the nodes nearest the bottom edge become
    gateways (the shore side of the square)."""
    if area_km2 <= 0 or density_per_km2 <= 0:
        raise ValueError("area and density must be positive")
    n = int(round(area_km2 * density_per_km2))
    if gateway_count < 1:
        raise ValueError("need at least one gateway")
    if gateway_count >= n:
        raise ValueError(f"gateway_count {gateway_count} >= node count {n}")
    side = math.sqrt(area_km2) * 1000.0
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, side, size=(n, 2))
    shore = np.argsort(xy[:, 1], kind="stable")[:gateway_count]
    roles = [GATEWAY if i in set(shore.tolist()) else VESSEL for i in range(n)]
    nodes = [Node(i, float(xy[i, 0]), float(xy[i, 1]), roles[i]) for i in range(n)]
    return Scenario(side, int(seed), nodes).validate()


def candidate_links(s, max_range_m):
    """Both directed links for every node pair within range, ids assigned
    in lexicographic (tx, rx) order."""
    if max_range_m <= 0:
        raise ValueError("max_range_m must be positive")
    pos = s.positions()
    out = []
    n = len(s.nodes)
    for tx in range(n):
        for rx in range(n):
            if tx == rx:
                continue
            d = float(np.hypot(pos[tx, 0] - pos[rx, 0], pos[tx, 1] - pos[rx, 1]))
            if d <= max_range_m:
                out.append(CandidateLink(len(out), tx, rx, d))
    return out


def sample_flows(s, k, class_mix, rate_scale_bps, seed):
    """k random demands; dst is drawn from the gateways with probability
    0.5, otherwise from all nodes, and redrawn until distinct from src."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(s.nodes) < 2:
        raise ValueError("need at least 2 nodes to sample flows")
    total = sum(class_mix.get(c, 0.0) for c in SERVICE_CLASSES)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"class mix must sum to 1, got {total}")
    probs = [class_mix.get(c, 0.0) for c in SERVICE_CLASSES]
    gateways = s.gateway_ids()
    n = len(s.nodes)
    rng = np.random.default_rng(seed)
    flows = []
    for i in range(k):
        src = int(rng.integers(n))
        while True:
            if gateways and rng.random() < 0.5:
                dst = int(gateways[rng.integers(len(gateways))])
            else:
                dst = int(rng.integers(n))
            if dst != src:
                break
        cls = SERVICE_CLASSES[int(rng.choice(len(SERVICE_CLASSES), p=probs))]
        flows.append(FlowDemand(i, src, dst, rate_scale_bps * CLASS_RATE_MULT[cls], cls))
    return flows


def _f(x):
    # 17 significant digits round-trips any float64 exactly.
    return format(float(x), ".17g")


def scenario_to_json(s):
    nodes = ", ".join(
        f'{{"id": {n.id}, "x": {_f(n.x)}, "y": {_f(n.y)}, "role": "{n.role}"}}'
        for n in s.nodes
    )
    flows = ", ".join(
        f'{{"id": {fl.id}, "src": {fl.src}, "dst": {fl.dst}, '
        f'"rate_bps": {_f(fl.rate_bps)}, "service_class": "{fl.service_class}"}}'
        for fl in s.flows
    )
    return (
        f'{{"area_side_m": {_f(s.area_side_m)}, "seed": {s.seed}, '
        f'"nodes": [{nodes}], "flows": [{flows}]}}'
    )


def scenario_from_json(text, radio=MESH_3P5GHZ):
    doc = json.loads(text)
    nodes = [Node(d["id"], float(d["x"]), float(d["y"]), d["role"])
             for d in doc["nodes"]]
    flows = [FlowDemand(d["id"], d["src"], d["dst"], float(d["rate_bps"]),
                        d["service_class"])
             for d in doc.get("flows", [])]
    return Scenario(float(doc["area_side_m"]), int(doc["seed"]), nodes, flows,
                    radio).validate()


def save_scenario(s, path):
    with open(path, "w") as fh:
        fh.write(scenario_to_json(s))
        fh.write("\n")


def load_scenario(path, radio=MESH_3P5GHZ):
    with open(path) as fh:
        return scenario_from_json(fh.read(), radio)
