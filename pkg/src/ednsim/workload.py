"""Random workload generation: Poisson app arrivals, DAG-shaped apps, sized state.

Per-task and per-edge data sizes are derived from one base-memory draw scaled
by two factors: ``data_factor`` sizes the per-invocation transfer along an
edge, and ``data_factor * state_data_ratio`` sizes the state a task carries.

Generation is a pure function of the seed.  The draw order is fixed
(lifetime, task count, edge coins, CPU demands, task memories, edge
memories) so that configs differing only in a scale parameter — mean
lifetime or the state/data ratio — produce workloads that are coupled
draw-for-draw, which keeps parameter sweeps paired across values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .domain import App, Edge, Task, Workload


@dataclass(frozen=True, slots=True)
class WorkloadConfig:
    """Knobs of the workload model; defaults match the reference scenario."""

    mean_interarrival: float = 1.0  # s between app arrivals
    mean_lifetime: float = 60.0  # s an app stays active
    invocation_rate: float = 5.0  # invocations per second per app
    tasks_min: int = 1  # uniform integer task count, inclusive bounds
    tasks_max: int = 8
    edge_density: float = 0.5  # probability of each forward edge (u, v), u < v
    cpu_demand_min: float = 50.0  # log-uniform CPU demand bounds; max is also the cap
    cpu_demand_max: float = 800.0
    base_memory_min: float = 160.0  # bits (20 B)
    base_memory_max: float = 24240.0  # bits (3030 B)
    data_factor: float = 100.0  # edge bits per invocation = factor * base memory
    state_data_ratio: float = 100.0  # state bits = ratio * data_factor * base memory
    horizon: float = 86400.0  # s
    seed: int = 0

    @property
    def state_factor(self) -> float:
        return self.state_data_ratio * self.data_factor

    def validate(self) -> None:
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.mean_interarrival > 0:
            raise ValueError("mean_interarrival must be positive")
        if not self.mean_lifetime > 0:
            raise ValueError("mean_lifetime must be positive")
        if not self.invocation_rate > 0:
            raise ValueError("invocation_rate must be positive")
        if not 1 <= self.tasks_min <= self.tasks_max:
            raise ValueError("task count bounds must satisfy 1 <= min <= max")
        if not 0 <= self.edge_density <= 1:
            raise ValueError("edge_density must be in [0, 1]")
        if not 0 < self.cpu_demand_min <= self.cpu_demand_max:
            raise ValueError("cpu demand bounds must satisfy 0 < min <= max")
        if not 0 < self.base_memory_min <= self.base_memory_max:
            raise ValueError("base memory bounds must satisfy 0 < min <= max")
        if self.data_factor < 0 or self.state_data_ratio < 0:
            raise ValueError("size factors must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "WorkloadConfig":
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown workload config keys: {sorted(unknown)}")
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def from_json(cls, path: str | Path) -> "WorkloadConfig":
        with open(path, "r", encoding="utf-8") as fp:
            return cls.from_dict(json.load(fp))


# Candidate forward-edge lists per task count, built once.
_PAIRS: dict[int, list[tuple[int, int]]] = {}


def _pairs(n: int) -> list[tuple[int, int]]:
    cached = _PAIRS.get(n)
    if cached is None:
        cached = [(u, v) for u in range(n) for v in range(u + 1, n)]
        _PAIRS[n] = cached
    return cached


def sample_app(
    rng: np.random.Generator,
    config: WorkloadConfig,
    arrival: float,
    app_id: int = 0,
) -> App:
    """Draw one app: lifetime, task count, DAG wiring, demands and data sizes.

    Every candidate forward edge (u, v) with u < v is kept with probability
    ``edge_density``; afterwards any task v > 0 left without a predecessor is
    linked from task v - 1, so the task graph of a multi-task app is weakly
    connected.  CPU demands are log-uniform, clamped to ``cpu_demand_max``;
    per-task state and per-edge transfer sizes scale one log-uniform
    base-memory draw by ``state_factor`` and ``data_factor`` respectively.
    """
    lifetime = rng.exponential(config.mean_lifetime)
    n = int(rng.integers(config.tasks_min, config.tasks_max + 1))

    pairs = _pairs(n)
    chosen: set[tuple[int, int]] = set()
    if pairs:
        coins = rng.random(len(pairs))
        density = config.edge_density
        chosen = {pair for pair, coin in zip(pairs, coins) if coin < density}
    has_pred = [False] * n
    for _, v in chosen:
        has_pred[v] = True
    for v in range(1, n):
        if not has_pred[v]:
            chosen.add((v - 1, v))
    edge_pairs = sorted(chosen)

    # Log-uniform draws, one block for CPU demands (first n) and base memory.
    log_cpu_lo = math.log(config.cpu_demand_min)
    cpu_span = math.log(config.cpu_demand_max) - log_cpu_lo
    log_mem_lo = math.log(config.base_memory_min)
    mem_span = math.log(config.base_memory_max) - log_mem_lo
    draws = rng.random(2 * n)
    demands = np.minimum(
        np.exp(log_cpu_lo + cpu_span * draws[:n]), config.cpu_demand_max
    ).tolist()
    states = (config.state_factor * np.exp(log_mem_lo + mem_span * draws[n:])).tolist()
    tasks = tuple(Task(i, demands[i], states[i]) for i in range(n))

    edges: tuple[Edge, ...] = ()
    if edge_pairs:
        sizes = (
            config.data_factor
            * np.exp(log_mem_lo + mem_span * rng.random(len(edge_pairs)))
        ).tolist()
        edges = tuple(Edge(u, v, sizes[k]) for k, (u, v) in enumerate(edge_pairs))

    return App(
        id=app_id,
        tasks=tasks,
        edges=edges,
        invocation_rate=config.invocation_rate,
        arrival=arrival,
        departure=arrival + lifetime,
    )


def generate_workload(config: WorkloadConfig) -> Workload:
    """Generate the full arrival process over the horizon; pure in ``config.seed``."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    apps: list[App] = []
    t = 0.0
    while True:
        t += rng.exponential(config.mean_interarrival)
        if t >= config.horizon:
            break
        apps.append(sample_app(rng, config, arrival=t, app_id=len(apps)))
    return Workload(apps=tuple(apps), horizon=config.horizon)


def with_seed(config: WorkloadConfig, seed: int) -> WorkloadConfig:
    return replace(config, seed=seed)
