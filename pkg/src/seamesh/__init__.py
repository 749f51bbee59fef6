"""seamesh: energy-aware simulator and optimizer for maritime multi-hop
wireless backhaul, plus a slot-level scheduler driven by predicted channel
quality.

The numerical hot paths (simplex pivoting, pattern SINR) run on a compiled
extension when available and fall back to pure NumPy otherwise; see
seamesh._kernels.set_backend.
"""

from ._kernels import available_backends, backend_name, set_backend
from .channel import (MESH_3P5GHZ, MMWAVE_CELL, CqiTrace, RadioParams,
                      TraceParams, capacity_bps, generate_cqi_trace,
                      pathloss_db, sinr_to_cqi)
from .config import ExperimentConfig, load_config
from .lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution,
                 MaxIterations, check_solution, solve_lp)
from .patterns import (TransmissionPattern, enumerate_patterns,
                       patterns_from_json, patterns_to_json, sample_patterns,
                       validate_pattern)
from .scenario import (CandidateLink, FlowDemand, Node, Scenario,
                       candidate_links, generate_topology, load_scenario,
                       sample_flows, save_scenario, scenario_from_json,
                       scenario_to_json)
from .scheduler import (DIRECT, ONE_STEP, ORACLE, PREDICTED, ROLLOUT, STALE,
                        SchedConfig, SchedMetrics, mcs_rate,
                        predicted_cqi_view, run_schedule)
from .topology import (AllocationSolution, CriticalityDataset,
                       DisconnectedFlow, Instance, PruneReport,
                       PruningInfeasible, baseline_tdma, build_energy_lp,
                       check_allocation, gen_training_set, link_features,
                       max_service_fraction, prune_and_solve,
                       sample_instance, solve_topology)

__version__ = "0.1.0"
