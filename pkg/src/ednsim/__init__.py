"""Monte Carlo energy simulator for stateful FaaS apps on edge data networks.

Estimates the energy an edge data network spends running DAG-shaped,
stateful FaaS applications under four deployment policies: two stateless
flavours (fewest nodes, load balancing) where task state traverses the
network on every invocation, and two stateful flavours (best-fit placement
with periodic defragmentation, random placement) where state lives next to
the tasks and moves only when a re-pack migrates them.
"""

from .domain import (
    App,
    Edge,
    EnergyParams,
    Event,
    EventKind,
    Task,
    Workload,
    build_event_timeline,
    read_workload_jsonl,
    total_demand,
    validate_app,
    write_workload_jsonl,
)
from .engine import (
    SimResult,
    StepRecord,
    beta_stateful,
    beta_stateless,
    integrate_energy,
    run_simulation,
    write_steps_csv,
)
from .harness import (
    RawRow,
    SummaryRow,
    SweepSpec,
    emit_plot_data,
    experiment_presets,
    run_sweep,
    summarize,
    write_raw_csv,
    write_summary_csv,
)
from .oracle import PackingInstance, Scenario, ScenarioApp, analytic_energy, optimal_packing
from .policy import (
    POLICIES,
    POLICY_STATEFUL_BEST_FIT,
    POLICY_STATEFUL_RANDOM,
    POLICY_STATELESS_MAX_BALANCING,
    POLICY_STATELESS_MIN_NODES,
    Allocation,
    Migration,
    MigrationRecord,
    alpha_stateful,
    alpha_stateless_max_balancing,
    alpha_stateless_min_nodes,
    defragment,
    place_app_best_fit,
    place_app_random,
    repack,
)
from .workload import WorkloadConfig, generate_workload, sample_app

__version__ = "0.1.0"

__all__ = [
    "App",
    "Allocation",
    "Edge",
    "EnergyParams",
    "Event",
    "EventKind",
    "Migration",
    "MigrationRecord",
    "PackingInstance",
    "POLICIES",
    "POLICY_STATEFUL_BEST_FIT",
    "POLICY_STATEFUL_RANDOM",
    "POLICY_STATELESS_MAX_BALANCING",
    "POLICY_STATELESS_MIN_NODES",
    "RawRow",
    "Scenario",
    "ScenarioApp",
    "SimResult",
    "StepRecord",
    "SummaryRow",
    "SweepSpec",
    "Task",
    "Workload",
    "WorkloadConfig",
    "alpha_stateful",
    "alpha_stateless_max_balancing",
    "alpha_stateless_min_nodes",
    "analytic_energy",
    "beta_stateful",
    "beta_stateless",
    "build_event_timeline",
    "defragment",
    "emit_plot_data",
    "experiment_presets",
    "generate_workload",
    "integrate_energy",
    "optimal_packing",
    "place_app_best_fit",
    "place_app_random",
    "read_workload_jsonl",
    "repack",
    "run_simulation",
    "run_sweep",
    "sample_app",
    "summarize",
    "total_demand",
    "validate_app",
    "write_raw_csv",
    "write_steps_csv",
    "write_summary_csv",
    "write_workload_jsonl",
]
