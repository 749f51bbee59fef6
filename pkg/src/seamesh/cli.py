"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 infeasible or degenerate input
(over-demand, disconnected flows, TDMA overload).
"""

import argparse
import os
import sys

import numpy as np

from .channel import TraceParams, generate_cqi_trace
from .config import ExperimentConfig, load_config
from .patterns import enumerate_patterns, patterns_to_json, sample_patterns
from .scenario import load_scenario, save_scenario
from .scheduler import PREDICTED, SchedConfig, run_schedule
from .sweeps import (ensure_predictor, ensure_pruner, run_fig3_sweep,
                     run_fig4_sweep, write_fig3_csv, write_fig4_csv,
                     write_fig4_summary, _sched_traces)
from .topology import (DisconnectedFlow, PruningInfeasible, _subseed,
                       allocation_to_json, baseline_tdma, candidate_links,
                       prune_and_solve, prune_reports_to_csv, sample_instance,
                       solve_topology)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

MAX_EXHAUSTIVE_LINKS = 14


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_cfg(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg


def _seed(args, cfg_seed=0):
    return args.seed if args.seed is not None else cfg_seed


def _mesh_patterns(scenario, links, cfg, seed):
    if len(links) <= MAX_EXHAUSTIVE_LINKS:
        return enumerate_patterns(scenario, links)
    return sample_patterns(scenario, links,
                           len(links) + cfg.pattern_compounds,
                           _subseed(seed, 3))


def cmd_gen(args):
    cfg = _load_cfg(args)
    inst = sample_instance(_seed(args), area_km2=cfg.area_km2,
                           density_per_km2=cfg.density_per_km2,
                           gateway_count=cfg.gateway_count,
                           k_flows=cfg.k_flows,
                           airtime_target=cfg.airtime_target,
                           pattern_compounds=cfg.pattern_compounds)
    if inst is None:
        print("sampled topology cannot route the sampled flows",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    path = os.path.join(cfg.out_dir, "scenario.json")
    save_scenario(inst.scenario, path)
    print(f"wrote {path}: {len(inst.scenario.nodes)} nodes, "
          f"{len(inst.flows)} flows")
    return EXIT_OK


def cmd_patterns(args):
    cfg = _load_cfg(args)
    s = load_scenario(args.scenario)
    links = candidate_links(s, s.radio.max_range_m)
    pats = _mesh_patterns(s, links, cfg, _seed(args, s.seed))
    path = os.path.join(cfg.out_dir, "patterns.json")
    with open(path, "w") as fh:
        fh.write(patterns_to_json(pats))
        fh.write("\n")
    print(f"wrote {path}: {len(pats)} patterns over {len(links)} links")
    return EXIT_OK


def cmd_solve(args):
    cfg = _load_cfg(args)
    s = load_scenario(args.scenario)
    if not s.flows:
        print("scenario has no flows; nothing to route", file=sys.stderr)
        return EXIT_INFEASIBLE
    links = candidate_links(s, s.radio.max_range_m)
    try:
        pats = _mesh_patterns(s, links, cfg, _seed(args, s.seed))
        alloc = solve_topology(s, s.flows, pats, links)
    except DisconnectedFlow as e:
        print(f"flow {e.flow_id} is disconnected", file=sys.stderr)
        return EXIT_INFEASIBLE
    path = os.path.join(cfg.out_dir, "allocation.json")
    with open(path, "w") as fh:
        fh.write(allocation_to_json(alloc))
        fh.write("\n")
    if not alloc.feasible:
        print("demand exceeds network capacity; wrote flagged allocation",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"wrote {path}: energy rate {alloc.total_energy_rate_w:.6f} W")
    return EXIT_OK


def cmd_baseline(args):
    cfg = _load_cfg(args)
    s = load_scenario(args.scenario)
    if not s.flows:
        print("scenario has no flows; nothing to route", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        alloc = baseline_tdma(s, s.flows)
    except DisconnectedFlow as e:
        print(f"flow {e.flow_id} is disconnected", file=sys.stderr)
        return EXIT_INFEASIBLE
    path = os.path.join(cfg.out_dir, "baseline.json")
    with open(path, "w") as fh:
        fh.write(allocation_to_json(alloc))
        fh.write("\n")
    if not alloc.feasible:
        print("TDMA airtime exceeds one frame; wrote flagged allocation",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"wrote {path}: energy rate {alloc.total_energy_rate_w:.6f} W")
    return EXIT_OK


def cmd_train_pruner(args):
    cfg = _load_cfg(args)
    if args.seed is not None:
        cfg.pruner_seed = args.seed
    cfg.pruner_weights = None  # always retrain on explicit request
    path = os.path.join(cfg.out_dir, "pruner.bin")
    model = ensure_pruner(cfg, save_to=path)
    print(f"wrote {path}: final training loss {model.train_losses[-1]:.6f}")
    return EXIT_OK


def cmd_eval_pruner(args):
    cfg = _load_cfg(args)
    import time

    from .neural.mlp import pruner_from_tensors
    from .neural.weights_io import load_weights
    if args.weights:
        model = pruner_from_tensors(load_weights(args.weights))
    else:
        model = ensure_pruner(cfg, os.path.join(cfg.out_dir, "pruner.bin"))
    reports = []
    base_seed = _seed(args, 9000)
    done = 0
    tries = 0
    while done < cfg.eval_instances and tries < 10 * cfg.eval_instances:
        inst_seed = _subseed(base_seed, 300 + tries)
        tries += 1
        inst = sample_instance(inst_seed, area_km2=cfg.area_km2,
                               density_per_km2=cfg.density_per_km2,
                               gateway_count=cfg.gateway_count,
                               k_flows=cfg.k_flows,
                               pattern_compounds=cfg.pattern_compounds)
        if inst is None:
            continue
        t0 = time.perf_counter()
        exact = solve_topology(inst.scenario, inst.flows, inst.patterns,
                               inst.links)
        exact_ms = (time.perf_counter() - t0) * 1e3
        if not exact.feasible:
            continue
        _, rep = prune_and_solve(inst.scenario, inst.flows, model, cfg.tau,
                                 links=inst.links, patterns=inst.patterns,
                                 exact=exact, exact_ms=exact_ms,
                                 instance_label=str(done))
        reports.append(rep)
        done += 1
    path = os.path.join(cfg.out_dir, "prune_report.csv")
    prune_reports_to_csv(reports, path)
    kept = np.mean([r.kept_links / r.total_links for r in reports])
    gaps = [r.gap_rel for r in reports if r.gap_rel is not None]
    print(f"wrote {path}: {len(reports)} instances, mean kept fraction "
          f"{kept:.3f}, median gap {np.median(gaps):.4f}")
    return EXIT_OK


def cmd_gen_cqi(args):
    cfg = _load_cfg(args)
    tp = TraceParams(slot_s=cfg.slot_s, speed_mps=args.speed)
    trace = generate_cqi_trace(args.slots, tp, _seed(args))
    path = os.path.join(cfg.out_dir, "cqi_trace.csv")
    trace.to_csv(path)
    print(f"wrote {path}: {len(trace)} slots")
    return EXIT_OK


def cmd_train_cqi(args):
    cfg = _load_cfg(args)
    if args.seed is not None:
        cfg.cqi_seed = args.seed
    cfg.cqi_weights = None
    path = os.path.join(cfg.out_dir, "cqi.bin")
    model = ensure_predictor(cfg, save_to=path)
    val = model.val_mse[-1] if model.val_mse else model.train_mse[-1]
    print(f"wrote {path}: final validation MSE {val:.6f}")
    return EXIT_OK


def cmd_sim_sched(args):
    cfg = _load_cfg(args)
    seed = _seed(args)
    sc = SchedConfig(n_ues=cfg.n_ues, horizon_slots=cfg.horizon_slots,
                     slot_s=cfg.slot_s,
                     report_delay_slots=cfg.report_delay_slots,
                     window=cfg.window, load=args.load,
                     packet_size_bits=cfg.packet_size_bits,
                     bandwidth_hz=cfg.bandwidth_hz,
                     tx_power_w=cfg.tx_power_w,
                     circuit_power_w=cfg.circuit_power_w,
                     predictor_mode=cfg.predictor_mode, seed=seed)
    predictor = None
    if args.policy == PREDICTED:
        predictor = ensure_predictor(cfg, os.path.join(cfg.out_dir, "cqi.bin"))
    traces = _sched_traces(cfg, seed)
    m = run_schedule(sc, traces, args.policy, predictor)
    print(f"policy={args.policy} load={args.load} seed={seed} "
          f"goodput={m.goodput_bps:.1f} bps ee={m.ee_bits_per_j:.1f} bits/J "
          f"mean_delay={m.mean_delay_s * 1e3:.2f} ms bler={m.bler:.4f}")
    if m.degenerate:
        print("degenerate run: no packet arrivals", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load_cfg(args)
    if args.figure == "fig3":
        rows = run_fig3_sweep(cfg)
        path = os.path.join(cfg.out_dir, "fig3_ee.csv")
        write_fig3_csv(rows, path)
        print(f"wrote {path}: {len(rows)} rows")
    else:
        rows, summary = run_fig4_sweep(cfg)
        path = os.path.join(cfg.out_dir, "fig4_sched.csv")
        spath = os.path.join(cfg.out_dir, "fig4_summary.csv")
        write_fig4_csv(rows, path)
        write_fig4_summary(summary, spath)
        print(f"wrote {path} and {spath}: {len(rows)} runs")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="seamesh",
                description="Maritime mesh energy optimizer and scheduler")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=False):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", help="output directory")
        if scenario:
            sp.add_argument("--scenario", required=True,
                            help="scenario JSON path")

    common(sub.add_parser("gen", help="generate a scenario with flows"))
    common(sub.add_parser("patterns", help="emit transmission patterns"),
           scenario=True)
    common(sub.add_parser("solve", help="energy-optimal allocation"),
           scenario=True)
    common(sub.add_parser("baseline", help="min-hop TDMA reference"),
           scenario=True)
    common(sub.add_parser("train-pruner", help="fit the link-criticality model"))
    sp = sub.add_parser("eval-pruner", help="exact-vs-pruned comparison")
    common(sp)
    sp.add_argument("--weights", help="pruner weight file")
    sp = sub.add_parser("gen-cqi", help="synthesize a CQI trace")
    common(sp)
    sp.add_argument("--slots", type=int, default=4000)
    sp.add_argument("--speed", type=float, default=10.0)
    common(sub.add_parser("train-cqi", help="fit the CQI predictor"))
    sp = sub.add_parser("sim-sched", help="run one scheduler policy")
    common(sp)
    sp.add_argument("--policy", choices=["oracle", "stale", "predicted"],
                    default="stale")
    sp.add_argument("--load", type=float, default=0.5)
    sp = sub.add_parser("sweep", help="fig3/fig4 experiment sweeps")
    sp.add_argument("figure", choices=["fig3", "fig4"])
    common(sp)

    return p


COMMANDS = {
    "gen": cmd_gen,
    "patterns": cmd_patterns,
    "solve": cmd_solve,
    "baseline": cmd_baseline,
    "train-pruner": cmd_train_pruner,
    "eval-pruner": cmd_eval_pruner,
    "gen-cqi": cmd_gen_cqi,
    "train-cqi": cmd_train_cqi,
    "sim-sched": cmd_sim_sched,
    "sweep": cmd_sweep,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, DisconnectedFlow, PruningInfeasible) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE if isinstance(e, (ValueError, OSError)) else EXIT_INFEASIBLE


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
