"""Energy-minimizing routing, scheduling, and power allocation.

The core decision problem: choose time-shares t_p over transmission
patterns and per-flow per-link rates f so that every demand is routed,
no link carries more than its scheduled capacity, the frame budget
sum(t) <= 1 holds, and frame-averaged power sum(t_p * power_p) is
minimal. Rates enter the LP in RATE_UNIT (1 Mbit/s) so tableau entries
stay near unity; the public API speaks bits/s throughout.

Also here: the min-hop TDMA baseline, link feature extraction, training
data generation for the link-criticality model, and the prune-then-solve
pipeline that restricts the LP to links the model scores as critical.
"""

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lp as lin
from .channel import capacity_bps, gain_matrix
from .patterns import TransmissionPattern, sample_patterns
from .scenario import FlowDemand, candidate_links, generate_topology, sample_flows

RATE_UNIT = 1e6
CRITICAL_EPS_BPS = 1.0  # a link is critical when it carries more than this
N_FEATURES = 8


class DisconnectedFlow(Exception):
    def __init__(self, flow_id):
        self.flow_id = flow_id
        super().__init__(f"flow {flow_id} has no path between its endpoints")


class PruningInfeasible(Exception):
    """Raised when even the fully restored link set cannot connect a flow."""


def _subseed(seed, tag):
    return int(np.random.SeedSequence((int(seed), int(tag))).generate_state(
        1, np.uint64)[0])


def _adjacency(links, keep=None):
    adj = {}
    for ln in links:
        if keep is not None and ln.id not in keep:
            continue
        adj.setdefault(ln.tx, []).append((ln.rx, ln.id))
    for v in adj:
        adj[v].sort()
    return adj


def shortest_path_links(links, src, dst, keep=None):
    """Min-hop directed path as a list of link ids, or None. BFS with
    neighbors in (node, link) order, so the result is deterministic."""
    if src == dst:
        return []
    adj = _adjacency(links, keep)
    parent = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v, lid in adj.get(u, []):
                if v in parent:
                    continue
                parent[v] = (u, lid)
                if v == dst:
                    path = []
                    while parent[v] is not None:
                        u2, l2 = parent[v]
                        path.append(l2)
                        v = u2
                    path.reverse()
                    return path
                nxt.append(v)
        frontier = nxt
    return None


def flows_connected(links, flows, keep=None):
    for f in flows:
        if shortest_path_links(links, f.src, f.dst, keep) is None:
            return False
    return True


@dataclass
class AllocationSolution:
    time_shares: dict  # pattern id -> fraction of the frame
    flow_rates: dict  # (flow id, link id) -> bits/s
    total_energy_rate_w: float
    feasible: bool
    patterns: list = None  # pattern objects the shares refer to, if owned


def build_energy_lp(s, flows, patterns, links):
    """LP + variable map. Variables: one t per pattern, one f per
    flow-link pair. Conservation rows skip each flow's dst (implied)."""
    if not patterns:
        raise ValueError("pattern set is empty")
    for f in flows:
        if shortest_path_links(links, f.src, f.dst) is None:
            raise DisconnectedFlow(f.id)

    P, L, K = len(patterns), len(links), len(flows)
    lpos = {ln.id: i for i, ln in enumerate(links)}
    nvar = P + K * L

    def fvar(k_idx, l_idx):
        return P + k_idx * L + l_idx

    c = np.zeros(nvar)
    for j, p in enumerate(patterns):
        c[j] = p.power_w

    rows = []
    senses = []
    rhs = []

    row = np.zeros(nvar)
    row[:P] = 1.0
    rows.append(row)
    senses.append(lin.LEQ)
    rhs.append(1.0)

    for l_idx, ln in enumerate(links):
        row = np.zeros(nvar)
        for k_idx in range(K):
            row[fvar(k_idx, l_idx)] = 1.0
        for j, p in enumerate(patterns):
            cap = p.cap_bps.get(ln.id)
            if cap:
                row[j] = -cap / RATE_UNIT
        rows.append(row)
        senses.append(lin.LEQ)
        rhs.append(0.0)

    nodes = [n.id for n in s.nodes]
    for k_idx, f in enumerate(flows):
        for v in nodes:
            if v == f.dst:
                continue  # implied by the other rows of this flow
            row = np.zeros(nvar)
            for ln in links:
                if ln.tx == v:
                    row[fvar(k_idx, lpos[ln.id])] += 1.0
                if ln.rx == v:
                    row[fvar(k_idx, lpos[ln.id])] -= 1.0
            rows.append(row)
            senses.append(lin.EQ)
            rhs.append(f.rate_bps / RATE_UNIT if v == f.src else 0.0)

    lp = lin.LinearProgram(c, np.array(rows), senses, np.array(rhs))
    vmap = {
        "patterns": [p.id for p in patterns],
        "flows": [f.id for f in flows],
        "links": [ln.id for ln in links],
        "fvar": fvar,
        "P": P,
    }
    return lp, vmap


def _extract(sol, patterns, flows, links, P):
    shares = {}
    for j, p in enumerate(patterns):
        v = float(sol.x[j])
        if v > 0.0:
            shares[p.id] = v
    rates = {}
    L = len(links)
    for k_idx, f in enumerate(flows):
        for l_idx, ln in enumerate(links):
            v = float(sol.x[P + k_idx * L + l_idx])
            if v > 0.0:
                rates[(f.id, ln.id)] = v * RATE_UNIT
    return shares, rates


def solve_topology(s, flows, patterns, links=None):
    """Solve the energy LP and extract the allocation; infeasibility is
    carried in the result, solver defects raise."""
    if links is None:
        links = candidate_links(s, s.radio.max_range_m)
    lp, vmap = build_energy_lp(s, flows, patterns, links)
    sol = lin.solve_lp(lp)
    if sol.status == lin.INFEASIBLE:
        return AllocationSolution({}, {}, math.nan, False)
    if sol.status == lin.UNBOUNDED:
        raise AssertionError("energy objective is bounded below by 0")
    shares, rates = _extract(sol, patterns, flows, links, len(patterns))
    return AllocationSolution(shares, rates, float(sol.objective_value), True)


def check_allocation(s, flows, patterns, links, alloc, tol=1e-6):
    """Independent feasibility audit from raw dictionaries.

    Re-evaluates the frame budget, per-link capacity coupling, per-flow
    conservation, and the energy identity without touching the LP builder.
    Returns a list of violation strings; empty means the solution checks
    out. Infeasible solutions have nothing to verify.
    """
    if not alloc.feasible:
        return []
    problems = []
    by_pid = {p.id: p for p in patterns}

    total_share = sum(alloc.time_shares.values())
    if total_share > 1.0 + 1e-6:
        problems.append(f"frame budget exceeded: sum t = {total_share}")
    for pid, v in alloc.time_shares.items():
        if v < -1e-9 or pid not in by_pid:
            problems.append(f"bad time share {pid}: {v}")

    for ln in links:
        carried = 0.0
        for f in flows:
            carried += alloc.flow_rates.get((f.id, ln.id), 0.0)
        sched = 0.0
        for pid, share in alloc.time_shares.items():
            sched += share * by_pid[pid].cap_bps.get(ln.id, 0.0)
        if carried > sched + tol * max(sched, 1.0):
            problems.append(
                f"link {ln.id} overloaded: {carried} bps > {sched} bps")

    for f in flows:
        for node in s.nodes:
            v = node.id
            net = 0.0
            for ln in links:
                r = alloc.flow_rates.get((f.id, ln.id), 0.0)
                if ln.tx == v:
                    net += r
                if ln.rx == v:
                    net -= r
            want = f.rate_bps if v == f.src else (-f.rate_bps if v == f.dst else 0.0)
            if abs(net - want) > tol * max(abs(f.rate_bps), 1.0):
                problems.append(
                    f"flow {f.id} conservation off at node {v}: {net} vs {want}")

    energy = 0.0
    for pid, share in alloc.time_shares.items():
        energy += share * by_pid[pid].power_w
    if abs(energy - alloc.total_energy_rate_w) > tol * max(abs(energy), 1.0):
        problems.append(
            f"energy identity broken: {alloc.total_energy_rate_w} vs {energy}")
    return problems


def baseline_tdma(s, flows, links=None):
    """Non-optimized reference: min-hop routing, one link at a time at max
    power, time-shares proportional to load over solo capacity."""
    if links is None:
        links = candidate_links(s, s.radio.max_range_m)
    radio = s.radio
    gain = gain_matrix(s.positions(), radio)
    noise = radio.noise_power_w()
    p_max = max(radio.nonzero_power_levels())

    load = {}
    rates = {}
    for f in flows:
        path = shortest_path_links(links, f.src, f.dst)
        if path is None:
            raise DisconnectedFlow(f.id)
        for lid in path:
            load[lid] = load.get(lid, 0.0) + f.rate_bps
            rates[(f.id, lid)] = rates.get((f.id, lid), 0.0) + f.rate_bps

    by_id = {ln.id: ln for ln in links}
    pats = []
    shares = {}
    energy = 0.0
    for j, lid in enumerate(sorted(load)):
        ln = by_id[lid]
        sinr = p_max * gain[ln.tx, ln.rx] / noise
        cap = float(capacity_bps(sinr, radio.bandwidth_hz))
        pat = TransmissionPattern(
            j, ((lid, p_max),), {lid: cap}, p_max + radio.circuit_power_w)
        pats.append(pat)
        share = load[lid] / cap
        if share > 0.0:
            shares[j] = share
            energy += share * pat.power_w
    airtime = sum(shares.values())
    return AllocationSolution(shares, rates, energy, airtime <= 1.0 + 1e-9,
                              patterns=pats)


def link_features(s, links, flows):
    """Per-link descriptors in [0, 1], independent of link ids.

    Columns: normalized length; tx out-degree; rx in-degree; solo-capacity
    share; nearest-endpoint distance to any flow src; same for dst;
    fraction of flows whose min-hop path uses the link; squashed aggregate
    demand (constant per instance).
    """
    radio = s.radio
    pos = s.positions()
    n = len(s.nodes)
    gain = gain_matrix(pos, radio)
    noise = radio.noise_power_w()
    p_max = max(radio.nonzero_power_levels())
    diag = s.area_side_m * math.sqrt(2.0)

    out_deg = np.zeros(n)
    in_deg = np.zeros(n)
    for ln in links:
        out_deg[ln.tx] += 1
        in_deg[ln.rx] += 1

    solo = np.array([
        float(capacity_bps(p_max * gain[ln.tx, ln.rx] / noise, radio.bandwidth_hz))
        for ln in links])
    solo_max = solo.max() if len(links) else 1.0

    paths = []
    for f in flows:
        p = shortest_path_links(links, f.src, f.dst)
        paths.append(set(p) if p else set())

    total_d = sum(f.rate_bps for f in flows)
    mean_solo = float(solo.mean()) if len(links) else 1.0
    demand_squash = total_d / (total_d + mean_solo) if total_d > 0 else 0.0

    src_pos = np.array([[s.nodes[f.src].x, s.nodes[f.src].y] for f in flows])
    dst_pos = np.array([[s.nodes[f.dst].x, s.nodes[f.dst].y] for f in flows])

    X = np.zeros((len(links), N_FEATURES))
    for i, ln in enumerate(links):
        ends = pos[[ln.tx, ln.rx]]
        d_src = np.hypot(ends[:, None, 0] - src_pos[None, :, 0],
                         ends[:, None, 1] - src_pos[None, :, 1]).min()
        d_dst = np.hypot(ends[:, None, 0] - dst_pos[None, :, 0],
                         ends[:, None, 1] - dst_pos[None, :, 1]).min()
        on_path = sum(1 for pset in paths if ln.id in pset)
        X[i] = (
            ln.distance_m / radio.max_range_m,
            out_deg[ln.tx] / (n - 1),
            in_deg[ln.rx] / (n - 1),
            solo[i] / solo_max,
            d_src / diag,
            d_dst / diag,
            on_path / max(len(flows), 1),
            demand_squash,
        )
    return X


@dataclass
class Instance:
    """One calibrated optimization instance: topology, demands scaled so
    the TDMA baseline occupies a target fraction of the frame."""
    scenario: object
    links: list
    flows: list
    patterns: list
    baseline: AllocationSolution
    seed: int


def sample_instance(seed, area_km2=4.0, density_per_km2=3.0, gateway_count=2,
                    k_flows=3, airtime_target=None, pattern_compounds=64,
                    radio=None, class_mix=None):
    """Draw one instance; returns None when the topology cannot route the
    sampled flows (callers count skips)."""
    from .channel import MESH_3P5GHZ
    radio = radio or MESH_3P5GHZ
    mix = class_mix or {"eMBB": 0.5, "URLLC": 0.3, "mMTC": 0.2}

    s = generate_topology(area_km2, density_per_km2, gateway_count,
                          _subseed(seed, 0), radio)
    links = candidate_links(s, radio.max_range_m)
    flows0 = sample_flows(s, k_flows, mix, RATE_UNIT, _subseed(seed, 1))
    if not flows_connected(links, flows0):
        return None
    base0 = baseline_tdma(s, flows0, links)
    airtime0 = sum(base0.time_shares.values())
    if airtime_target is None:
        u = np.random.default_rng(_subseed(seed, 2)).uniform(0.3, 0.8)
    else:
        u = airtime_target
    factor = u / airtime0
    flows = [FlowDemand(f.id, f.src, f.dst, f.rate_bps * factor, f.service_class)
             for f in flows0]
    patterns = sample_patterns(s, links, len(links) + pattern_compounds,
                               _subseed(seed, 3))
    baseline = baseline_tdma(s, flows, links)
    s.flows = flows
    return Instance(s, links, flows, patterns, baseline, seed)


@dataclass
class CriticalityDataset:
    X: np.ndarray
    y: np.ndarray
    skipped: int = 0


def gen_training_set(n_scenarios, nodes_per_scenario=12, flows_per_scenario=3,
                     seed=0, area_km2=4.0, pattern_compounds=64):
    """Label every candidate link of each solved instance: 1 when the
    exact optimum routes more than CRITICAL_EPS_BPS over it."""
    density = nodes_per_scenario / area_km2
    xs, ys = [], []
    skipped = 0
    for i in range(n_scenarios):
        inst = sample_instance(_subseed(seed, 100 + i), area_km2=area_km2,
                               density_per_km2=density,
                               k_flows=flows_per_scenario,
                               pattern_compounds=pattern_compounds)
        if inst is None:
            skipped += 1
            continue
        alloc = solve_topology(inst.scenario, inst.flows, inst.patterns,
                               inst.links)
        if not alloc.feasible:
            skipped += 1
            continue
        X = link_features(inst.scenario, inst.links, inst.flows)
        for idx, ln in enumerate(inst.links):
            carried = sum(alloc.flow_rates.get((f.id, ln.id), 0.0)
                          for f in inst.flows)
            xs.append(X[idx])
            ys.append(1.0 if carried > CRITICAL_EPS_BPS else 0.0)
    return CriticalityDataset(np.array(xs), np.array(ys), skipped)


@dataclass
class PruneReport:
    instance: str
    kept_links: int
    total_links: int
    exact_w: float = None
    pruned_w: float = None
    gap_rel: float = None
    exact_ms: float = None
    pruned_ms: float = None


def prune_and_solve(s, flows, model, tau, links=None, patterns=None,
                    exact=None, exact_ms=None, instance_label=""):
    """Score links, keep those at or above tau, restore connectivity by
    descending score, solve over the reduced link set.

    When ``patterns`` is passed (the unpruned run's columns) the reduced
    LP uses exactly the subset of those patterns that fit the kept links,
    which makes the pruned optimum provably >= the exact one. Infeasible
    reductions are retried with progressively more links kept.
    """
    from .neural.mlp import mlp_forward
    if links is None:
        links = candidate_links(s, s.radio.max_range_m)
    if not (0.0 <= tau <= 1.0):
        raise ValueError("tau must be in [0, 1]")

    t0 = time.perf_counter()
    X = link_features(s, links, flows)
    scores = np.asarray(mlp_forward(model, X)).reshape(-1)
    order = sorted(range(len(links)), key=lambda i: (-scores[i], links[i].id))
    kept = {links[i].id for i in range(len(links)) if scores[i] >= tau}

    queue = [links[i].id for i in order if links[i].id not in kept]
    while not flows_connected(links, flows, kept):
        if not queue:
            raise PruningInfeasible(
                "flows not connectable even with every link kept")
        kept.add(queue.pop(0))

    def reduced_solve(kept_ids):
        sub_links = [ln for ln in links if ln.id in kept_ids]
        if patterns is not None:
            sub_pats = [p for p in patterns
                        if all(l in kept_ids for l in p.link_ids())]
        else:
            sub_pats = sample_patterns(s, sub_links,
                                       len(sub_links) + 64,
                                       _subseed(s.seed, 7))
        return solve_topology(s, flows, sub_pats, sub_links)

    alloc = reduced_solve(kept)
    step = max(1, len(links) // 10)
    while not alloc.feasible and queue:
        for _ in range(min(step, len(queue))):
            kept.add(queue.pop(0))
        alloc = reduced_solve(kept)
    pruned_ms = (time.perf_counter() - t0) * 1e3

    gap = None
    exact_w = None
    if exact is not None and exact.feasible:
        exact_w = exact.total_energy_rate_w
        if alloc.feasible and exact_w > 0:
            gap = (alloc.total_energy_rate_w - exact_w) / exact_w
            if -1e-12 < gap < 0.0:
                # subset columns cannot beat the full LP; below the
                # solver's objective resolution the sign is roundoff
                gap = 0.0
    report = PruneReport(instance_label, len(kept), len(links), exact_w,
                         alloc.total_energy_rate_w if alloc.feasible else None,
                         gap, exact_ms, pruned_ms)
    return alloc, report


def prune_reports_to_csv(reports, path):
    def cell(v):
        return "" if v is None else repr(float(v))

    with open(path, "w", newline="") as fh:
        fh.write("instance,kept_links,total_links,exact_w,pruned_w,"
                 "gap_rel,exact_ms,pruned_ms\n")
        for r in reports:
            fh.write(f"{r.instance},{r.kept_links},{r.total_links},"
                     f"{cell(r.exact_w)},{cell(r.pruned_w)},{cell(r.gap_rel)},"
                     f"{cell(r.exact_ms)},{cell(r.pruned_ms)}\n")


def max_service_fraction(s, flows, patterns, links):
    """Largest uniform fraction of the demand profile the network can
    carry: same columns as the energy LP plus one served-fraction
    variable, maximized."""
    if not patterns:
        raise ValueError("pattern set is empty")
    for f in flows:
        if shortest_path_links(links, f.src, f.dst) is None:
            raise DisconnectedFlow(f.id)
    P, L, K = len(patterns), len(links), len(flows)
    nvar = P + K * L + 1
    sig = nvar - 1

    c = np.zeros(nvar)
    c[sig] = -1.0

    rows, senses, rhs = [], [], []
    row = np.zeros(nvar)
    row[:P] = 1.0
    rows.append(row)
    senses.append(lin.LEQ)
    rhs.append(1.0)
    for l_idx, ln in enumerate(links):
        row = np.zeros(nvar)
        for k_idx in range(K):
            row[P + k_idx * L + l_idx] = 1.0
        for j, p in enumerate(patterns):
            cap = p.cap_bps.get(ln.id)
            if cap:
                row[j] = -cap / RATE_UNIT
        rows.append(row)
        senses.append(lin.LEQ)
        rhs.append(0.0)
    for k_idx, f in enumerate(flows):
        for node in s.nodes:
            v = node.id
            if v == f.dst:
                continue
            row = np.zeros(nvar)
            for l_idx, ln in enumerate(links):
                if ln.tx == v:
                    row[P + k_idx * L + l_idx] += 1.0
                if ln.rx == v:
                    row[P + k_idx * L + l_idx] -= 1.0
            if v == f.src:
                row[sig] = -f.rate_bps / RATE_UNIT
            rows.append(row)
            senses.append(lin.EQ)
            rhs.append(0.0)

    sol = lin.solve_lp(lin.LinearProgram(c, np.array(rows), senses, np.array(rhs)))
    if sol.status != lin.OPTIMAL:
        raise AssertionError(f"max-service LP should be solvable: {sol.status}")
    return float(sol.x[sig])


def allocation_to_json(alloc):
    doc = {
        "feasible": bool(alloc.feasible),
        "total_energy_rate_w": (None if math.isnan(alloc.total_energy_rate_w)
                                else alloc.total_energy_rate_w),
        "time_shares": {str(k): v for k, v in sorted(alloc.time_shares.items())},
        "flow_rates": {f"{k}:{l}": v
                       for (k, l), v in sorted(alloc.flow_rates.items())},
    }
    return json.dumps(doc, indent=None, separators=(", ", ": "))
