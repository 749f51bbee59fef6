"""Experiment sweeps: energy efficiency of the mesh optimizer across load
fractions, and scheduler policies across offered loads.

Sweep CSVs carry no timestamps or timings, rows are emitted in a canonical
sort order, and every random draw descends from config seeds, so a rerun
with the same config is byte-identical.
"""

import os

import numpy as np

from .channel import TraceParams, generate_cqi_trace
from .neural.common import MSE, TrainConfig
from .neural.lstm import cqi_from_tensors, cqi_tensors, train_cqi
from .neural.mlp import pruner_from_tensors, pruner_tensors, train_pruner
from .neural.weights_io import load_weights, save_weights
from .scenario import FlowDemand, candidate_links, generate_topology, sample_flows
from .scheduler import (DIRECT, ORACLE, POLICIES, PREDICTED, STALE,
                        SchedConfig, run_schedule)
from .topology import (DisconnectedFlow, _subseed, baseline_tdma,
                       flows_connected, gen_training_set, max_service_fraction,
                       prune_and_solve, sample_patterns, solve_topology)

FIG3_METHODS = ("baseline", "exact", "pruned")


def _fmt(v):
    return "" if v is None else repr(float(v))


def ensure_pruner(cfg, save_to=None):
    """Load the configured pruner weights or train them deterministically."""
    if cfg.pruner_weights and os.path.exists(cfg.pruner_weights):
        return pruner_from_tensors(load_weights(cfg.pruner_weights))
    ds = gen_training_set(cfg.pruner_instances, seed=cfg.pruner_seed,
                          area_km2=cfg.area_km2,
                          nodes_per_scenario=int(round(
                              cfg.area_km2 * cfg.density_per_km2)),
                          flows_per_scenario=cfg.k_flows,
                          pattern_compounds=cfg.pattern_compounds)
    tc = TrainConfig(lr=cfg.pruner_lr, epochs=cfg.pruner_epochs,
                     batch_size=cfg.pruner_batch, seed=cfg.pruner_seed)
    model = train_pruner(ds, tc)
    if save_to:
        save_weights(save_to, pruner_tensors(model))
    return model


def ensure_predictor(cfg, save_to=None):
    """Load the configured CQI model or train it on synthetic traces.

    In direct mode the model is trained to predict across the full report
    delay; the other modes chain one-step predictions instead.
    """
    horizon = cfg.report_delay_slots if cfg.predictor_mode == DIRECT else 1
    if cfg.cqi_weights and os.path.exists(cfg.cqi_weights):
        return cqi_from_tensors(load_weights(cfg.cqi_weights), cfg.window,
                                horizon)
    tp = TraceParams(slot_s=cfg.slot_s, speed_mps=cfg.speed_mps)
    traces = [generate_cqi_trace(cfg.cqi_trace_slots, tp,
                                 _subseed(cfg.cqi_seed, 500 + i))
              for i in range(cfg.cqi_train_traces)]
    tc = TrainConfig(lr=cfg.cqi_lr, epochs=cfg.cqi_epochs,
                     batch_size=cfg.cqi_batch, seed=cfg.cqi_seed, loss=MSE,
                     momentum=0.9, clip_norm=1.0)
    model = train_cqi(traces, cfg.window, tc, hidden=cfg.cqi_hidden,
                      horizon=horizon)
    if save_to:
        save_weights(save_to, cqi_tensors(model))
    return model


def run_fig3_sweep(cfg, model=None):
    """Energy efficiency (delivered bits per Joule) of baseline, exact,
    and pruned solves as demand scales toward the instance's capacity.

    Demands at load f are f times the largest uniformly-served demand
    profile, so the exact leg stays feasible across the whole axis while
    the baseline saturates. Returns rows
    (method, load, seed, feasible, energy_w, ee_bits_per_j).
    """
    if model is None:
        model = ensure_pruner(cfg, os.path.join(cfg.out_dir, "pruner.bin"))
    rows = []
    for seed in cfg.seeds:
        prep = None
        try:
            s = generate_topology(cfg.area_km2, cfg.density_per_km2,
                                  cfg.gateway_count, _subseed(seed, 0))
            links = candidate_links(s, s.radio.max_range_m)
            flows0 = sample_flows(s, cfg.k_flows,
                                  {"eMBB": 0.5, "URLLC": 0.3, "mMTC": 0.2},
                                  1e6, _subseed(seed, 1))
            if not flows_connected(links, flows0):
                raise DisconnectedFlow(-1)
            patterns = sample_patterns(s, links,
                                       len(links) + cfg.pattern_compounds,
                                       _subseed(seed, 3))
            smax = max_service_fraction(s, flows0, patterns, links)
            prep = (s, links, flows0, patterns, smax)
        except DisconnectedFlow:
            prep = None
        for load in cfg.loads:
            if prep is None:
                for method in FIG3_METHODS:
                    rows.append((method, load, seed, 0, None, None))
                continue
            s, links, flows0, patterns, smax = prep
            flows = [FlowDemand(f.id, f.src, f.dst,
                                f.rate_bps * load * smax, f.service_class)
                     for f in flows0]
            demand = sum(f.rate_bps for f in flows)

            exact = solve_topology(s, flows, patterns, links)
            pruned, _ = prune_and_solve(s, flows, model, cfg.tau,
                                        links=links, patterns=patterns,
                                        exact=exact)
            try:
                base = baseline_tdma(s, flows, links)
            except DisconnectedFlow:
                base = None
            for method, alloc in (("baseline", base), ("exact", exact),
                                  ("pruned", pruned)):
                if alloc is None or not alloc.feasible:
                    rows.append((method, load, seed, 0, None, None))
                else:
                    w = alloc.total_energy_rate_w
                    ee = demand / w if w > 0 else None
                    rows.append((method, load, seed, 1, w, ee))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def write_fig3_csv(rows, path):
    with open(path, "w", newline="") as fh:
        fh.write("method,load,seed,feasible,energy_w,ee_bits_per_j\n")
        for method, load, seed, feas, w, ee in rows:
            fh.write(f"{method},{repr(float(load))},{seed},{feas},"
                     f"{_fmt(w)},{_fmt(ee)}\n")


def _sched_traces(cfg, seed):
    tp = TraceParams(slot_s=cfg.slot_s, speed_mps=cfg.speed_mps)
    need = cfg.horizon_slots + cfg.report_delay_slots + cfg.window
    return [generate_cqi_trace(need, tp, _subseed(seed, 100 + u))
            for u in range(cfg.n_ues)]


def run_fig4_sweep(cfg, predictor=None):
    """Paired-seed comparison of the three CQI policies across offered
    loads. Returns (rows, summary); rows follow the scheduler CSV schema."""
    if predictor is None:
        predictor = ensure_predictor(cfg, os.path.join(cfg.out_dir, "cqi.bin"))
    rows = []
    for load in cfg.loads:
        for seed in cfg.seeds:
            sc = SchedConfig(
                n_ues=cfg.n_ues, horizon_slots=cfg.horizon_slots,
                slot_s=cfg.slot_s,
                report_delay_slots=cfg.report_delay_slots,
                window=cfg.window, load=load,
                packet_size_bits=cfg.packet_size_bits,
                bandwidth_hz=cfg.bandwidth_hz, tx_power_w=cfg.tx_power_w,
                circuit_power_w=cfg.circuit_power_w,
                predictor_mode=cfg.predictor_mode, seed=seed)
            traces = _sched_traces(cfg, seed)
            for policy in (STALE, PREDICTED, ORACLE):
                m = run_schedule(sc, traces, policy,
                                 predictor if policy == PREDICTED else None)
                rows.append((policy, seed, cfg.speed_mps, load, m))
    rows.sort(key=lambda r: (r[0], r[3], r[1]))

    summary = []
    for load in sorted(cfg.loads):
        means = {}
        for policy in POLICIES:
            sel = [m for p, _, _, ld, m in rows if p == policy and ld == load]
            means[policy] = (
                float(np.mean([m.ee_bits_per_j for m in sel])),
                float(np.mean([m.mean_delay_s for m in sel])),
            )
        for policy in sorted(POLICIES):
            ee, dl = means[policy]
            summary.append((load, policy, ee, dl,
                            ee - means[STALE][0], dl - means[STALE][1]))
    return rows, summary


def write_fig4_csv(rows, path):
    with open(path, "w", newline="") as fh:
        fh.write("policy,seed,speed_mps,load,goodput_bps,energy_j,"
                 "ee_bits_per_j,mean_delay_s,p95_delay_s,bler\n")
        for policy, seed, speed, load, m in rows:
            fh.write(f"{policy},{seed},{_fmt(speed)},{_fmt(load)},"
                     f"{_fmt(m.goodput_bps)},{_fmt(m.energy_j)},"
                     f"{_fmt(m.ee_bits_per_j)},{_fmt(m.mean_delay_s)},"
                     f"{_fmt(m.p95_delay_s)},{_fmt(m.bler)}\n")


def write_fig4_summary(summary, path):
    with open(path, "w", newline="") as fh:
        fh.write("load,policy,mean_ee_bits_per_j,mean_delay_s,"
                 "ee_minus_stale,delay_minus_stale\n")
        for load, policy, ee, dl, dee, ddl in summary:
            fh.write(f"{_fmt(load)},{policy},{_fmt(ee)},{_fmt(dl)},"
                     f"{_fmt(dee)},{_fmt(ddl)}\n")
