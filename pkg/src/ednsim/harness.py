"""Sweep orchestration: run repetitions across parameter values and policies,
aggregate them, and emit CSV and plot-ready files.

Output rows are canonically ordered by (policy, value, repetition), so the
written CSV bytes are identical across runs and across worker counts.
Execution order instead groups jobs by repetition, which lets a small cache
reuse the generated workload whenever the swept parameter does not affect
generation (per-bit energy, defragmentation period, node capacity).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .domain import EnergyParams, Workload
from .engine import SimResult, run_simulation
from .policy import POLICIES, POLICY_STATEFUL_BEST_FIT
from .workload import WorkloadConfig, generate_workload

WORKERS_ENV_VAR = "EDNSIM_WORKERS"

_WORKLOAD_FIELDS = {f.name for f in fields(WorkloadConfig)}
_ENERGY_FIELDS = {f.name for f in fields(EnergyParams)}
_INT_WORKLOAD_FIELDS = {"tasks_min", "tasks_max", "seed"}

SUMMARY_METRICS = (
    "energy_total",
    "energy_processing",
    "energy_network",
    "mean_alpha",
    "mean_beta",
)


@dataclass(frozen=True, slots=True)
class SweepSpec:
    """One experiment: a swept parameter, its values, policies and repetitions."""

    experiment: str
    parameter: str  # any WorkloadConfig or EnergyParams field name
    values: tuple[float, ...]
    policies: tuple[str, ...]
    repetitions: int
    base_seed: int
    workload: WorkloadConfig
    energy: EnergyParams

    def validate(self) -> None:
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.policies:
            raise ValueError("sweep needs at least one policy")
        for policy in self.policies:
            if policy not in POLICIES:
                raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
        if self.parameter not in _WORKLOAD_FIELDS | _ENERGY_FIELDS:
            raise ValueError(f"unknown swept parameter {self.parameter!r}")


@dataclass(frozen=True, slots=True)
class RawRow:
    """Metrics of one (policy, value, repetition) simulation run."""

    experiment: str
    policy: str
    parameter: str
    value: float
    repetition: int
    seed: int
    energy_total: float
    energy_processing: float
    energy_network: float
    total_migrated_bits: float
    node_time_integral: float
    mean_alpha: float
    mean_beta: float


@dataclass(frozen=True, slots=True)
class SummaryRow:
    """Mean and nearest-rank 2.5%/97.5% quantiles over repetitions."""

    experiment: str
    policy: str
    value: float
    metric: str
    mean: float
    q_low: float
    q_high: float
    repetitions: int


def _apply_value(spec: SweepSpec, value: float) -> tuple[WorkloadConfig, EnergyParams]:
    if spec.parameter in _WORKLOAD_FIELDS:
        if spec.parameter in _INT_WORKLOAD_FIELDS:
            value = int(value)
        return replace(spec.workload, **{spec.parameter: value}), spec.energy
    return spec.workload, replace(spec.energy, **{spec.parameter: value})


@lru_cache(maxsize=4)
def _cached_workload(config: WorkloadConfig) -> Workload:
    return generate_workload(config)


def _run_job(args: tuple[SweepSpec, int, int, int, str | None]) -> RawRow:
    spec, policy_index, value_index, repetition, steps_dir = args
    policy = spec.policies[policy_index]
    value = spec.values[value_index]
    workload_config, energy = _apply_value(spec, value)
    seed = spec.base_seed + repetition
    workload = _cached_workload(replace(workload_config, seed=seed))
    result = run_simulation(
        workload, policy, energy, seed=seed, collect_steps=steps_dir is not None
    )
    if steps_dir is not None:
        from .engine import write_steps_csv

        name = f"steps_{spec.experiment}_{policy}_v{value_index}_rep{repetition}.csv"
        write_steps_csv(result.steps, Path(steps_dir) / name)
    return RawRow(
        experiment=spec.experiment,
        policy=policy,
        parameter=spec.parameter,
        value=value,
        repetition=repetition,
        seed=seed,
        energy_total=result.energy_total,
        energy_processing=result.energy_processing,
        energy_network=result.energy_network,
        total_migrated_bits=result.total_migrated_bits,
        node_time_integral=result.node_time_integral,
        mean_alpha=result.mean_alpha,
        mean_beta=result.mean_beta,
    )


def resolve_workers(workers: int | None) -> int:
    """Explicit argument wins, then the environment override, then one worker."""
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return 1


def run_sweep(
    spec: SweepSpec, workers: int | None = None, steps_dir: str | Path | None = None
) -> tuple[list[RawRow], list[SummaryRow]]:
    """Run every (policy, value, repetition) combination of the sweep.

    Returns raw per-repetition rows and aggregated summary rows, both in
    canonical order regardless of execution interleaving.  With ``steps_dir``
    set, every run also dumps its step series as CSV into that directory.
    """
    spec.validate()
    worker_count = resolve_workers(workers)
    if steps_dir is not None:
        Path(steps_dir).mkdir(parents=True, exist_ok=True)
        steps_dir = str(steps_dir)
    # Group by repetition so consecutive jobs share a workload when possible.
    jobs = [
        (spec, policy_index, value_index, repetition, steps_dir)
        for repetition in range(spec.repetitions)
        for value_index in range(len(spec.values))
        for policy_index in range(len(spec.policies))
    ]
    if worker_count == 1 or len(jobs) == 1:
        rows = [_run_job(job) for job in jobs]
    else:
        chunk = max(1, len(jobs) // (worker_count * 8))
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            rows = list(pool.map(_run_job, jobs, chunksize=chunk))
    policy_rank = {policy: i for i, policy in enumerate(spec.policies)}
    value_rank = {value: i for i, value in enumerate(spec.values)}
    rows.sort(key=lambda r: (policy_rank[r.policy], value_rank[r.value], r.repetition))
    return rows, summarize(rows)


def _nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def summarize(raw_rows: Iterable[RawRow]) -> list[SummaryRow]:
    """Aggregate raw rows into mean and 2.5%/97.5% nearest-rank quantiles.

    One summary row is produced per (policy, value, metric), in the order the
    groups first appear in the input.
    """
    groups: dict[tuple[str, str, float], list[RawRow]] = {}
    for row in raw_rows:
        groups.setdefault((row.experiment, row.policy, row.value), []).append(row)
    summary: list[SummaryRow] = []
    for (experiment, policy, value), rows in groups.items():
        for metric in SUMMARY_METRICS:
            values = sorted(getattr(row, metric) for row in rows)
            summary.append(
                SummaryRow(
                    experiment=experiment,
                    policy=policy,
                    value=value,
                    metric=metric,
                    mean=sum(values) / len(values),
                    q_low=_nearest_rank(values, 0.025),
                    q_high=_nearest_rank(values, 0.975),
                    repetitions=len(values),
                )
            )
    return summary


def _format(value: object) -> str:
    return repr(value) if isinstance(value, float) else str(value)


_RAW_COLUMNS = [f.name for f in fields(RawRow)]
_SUMMARY_COLUMNS = [f.name for f in fields(SummaryRow)]


def write_raw_csv(rows: Iterable[RawRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(_RAW_COLUMNS)
        for row in rows:
            writer.writerow([_format(getattr(row, c)) for c in _RAW_COLUMNS])


def write_summary_csv(rows: Iterable[SummaryRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(_SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([_format(getattr(row, c)) for c in _SUMMARY_COLUMNS])


# Which metrics each experiment plots; everything else plots total energy.
_PLOT_METRICS = {
    "defrag": ("mean_alpha", "mean_beta"),
    "capacity": ("energy_processing",),
}


def emit_plot_data(
    summary_rows: Sequence[SummaryRow], experiment: str, out_dir: str | Path
) -> tuple[Path, Path]:
    """Write plot_<experiment>.dat and a gnuplot stub plot_<experiment>.gp.

    The .dat file carries columns (x, series, mean, q_low, q_high), with one
    blank-line-separated block per series so gnuplot can address blocks by
    index.  The defragmentation experiment gets a two-panel stub (node count
    on top, traffic below on a log scale).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = _PLOT_METRICS.get(experiment, ("energy_total",))
    selected = [row for row in summary_rows if row.metric in metrics]
    series_names: list[str] = []
    by_series: dict[str, list[SummaryRow]] = {}
    for row in selected:
        name = f"{row.policy}:{row.metric}" if len(metrics) > 1 else row.policy
        if name not in by_series:
            by_series[name] = []
            series_names.append(name)
        by_series[name].append(row)

    dat_path = out_dir / f"plot_{experiment}.dat"
    with open(dat_path, "w", encoding="utf-8") as fp:
        fp.write(f"# experiment: {experiment}\n")
        fp.write("# columns: x series mean q_low q_high\n")
        for index, name in enumerate(series_names):
            fp.write(f"# series {index}: {name}\n")
            for row in by_series[name]:
                fp.write(
                    f"{_format(row.value)} {name} {_format(row.mean)} "
                    f"{_format(row.q_low)} {_format(row.q_high)}\n"
                )
            fp.write("\n\n")

    gp_path = out_dir / f"plot_{experiment}.gp"
    with open(gp_path, "w", encoding="utf-8") as fp:
        fp.write(f"# gnuplot stub for experiment {experiment!r}\n")
        fp.write(f"datafile = 'plot_{experiment}.dat'\n")
        fp.write("set key outside\n")
        fp.write("set style data linespoints\n")
        if experiment == "defrag":
            alpha_series = [
                (i, n) for i, n in enumerate(series_names) if n.endswith("mean_alpha")
            ]
            beta_series = [
                (i, n) for i, n in enumerate(series_names) if n.endswith("mean_beta")
            ]
            fp.write("set multiplot layout 2,1\n")
            fp.write("set ylabel 'mean powered nodes'\n")
            fp.write(_plot_line(alpha_series))
            fp.write("set logscale y\n")
            fp.write("set ylabel 'mean traffic [b/s]'\n")
            fp.write(_plot_line(beta_series))
            fp.write("unset multiplot\n")
        else:
            fp.write(_plot_line(list(enumerate(series_names))))
    return dat_path, gp_path


def _plot_line(series: list[tuple[int, str]]) -> str:
    if not series:
        return "# no series\n"
    parts = [
        f"datafile index {index} using 1:3:4:5 with yerrorlines title '{name}'"
        for index, name in series
    ]
    return "plot " + ", \\\n     ".join(parts) + "\n"


DESK_HORIZON = 7200.0
DESK_REPETITIONS = 100
PAPER_HORIZON = 86400.0
PAPER_REPETITIONS = 1000

MICROWATT_PER_BIT = 1e-6  # J/b per (microwatt per bit-per-second)


def experiment_presets(
    paper_scale: bool = False,
    workload_base: WorkloadConfig | None = None,
    energy_base: EnergyParams | None = None,
) -> dict[str, tuple[SweepSpec, ...]]:
    """The five canned experiments, at desk scale unless ``paper_scale``.

    ``workload_base``/``energy_base`` replace the default fixed parameters
    (including the horizon); preset-specific fixed values still apply on top.
    """
    horizon = PAPER_HORIZON if paper_scale else DESK_HORIZON
    repetitions = PAPER_REPETITIONS if paper_scale else DESK_REPETITIONS
    workload = workload_base or WorkloadConfig(horizon=horizon)
    energy = energy_base or EnergyParams()  # 0.05 uW/(b/s), re-pack every 120 s
    eb_low = 0.05 * MICROWATT_PER_BIT
    eb_high = 5.0 * MICROWATT_PER_BIT

    def spec(experiment, parameter, values, policies, **overrides):
        return SweepSpec(
            experiment=experiment,
            parameter=parameter,
            values=tuple(values),
            policies=tuple(policies),
            repetitions=repetitions,
            base_seed=1,
            workload=replace(workload, **{
                k: v for k, v in overrides.items() if k in _WORKLOAD_FIELDS
            }),
            energy=replace(energy, **{
                k: v for k, v in overrides.items() if k in _ENERGY_FIELDS
            }),
        )

    return {
        "defrag": (
            spec(
                "defrag",
                "defrag_interval",
                (30.0, 60.0, 120.0, 300.0, 600.0, 1200.0, math.inf),
                (POLICY_STATEFUL_BEST_FIT,),
            ),
        ),
        "energy": (
            spec(
                "energy",
                "per_bit_energy",
                (eb_low, 0.5e-6, 1e-6, 2.5e-6, eb_high),
                POLICIES,
            ),
        ),
        "state": (
            spec(
                "state",
                "state_data_ratio",
                (1.0, 10.0, 100.0),
                POLICIES,
                per_bit_energy=eb_low,
            ),
        ),
        "lifetime": (
            spec(
                "lifetime-eb-low",
                "mean_lifetime",
                (15.0, 30.0, 60.0, 120.0),
                POLICIES,
                per_bit_energy=eb_low,
            ),
            spec(
                "lifetime-eb-high",
                "mean_lifetime",
                (15.0, 30.0, 60.0, 120.0),
                POLICIES,
                per_bit_energy=eb_high,
            ),
        ),
        "capacity": (
            spec(
                "capacity",
                "node_capacity",
                (800.0, 1600.0, 2400.0, 3200.0, 4000.0),
                POLICIES,
            ),
        ),
    }
