"""Core data model: apps as DAGs of stateful tasks, node parameters, timeline events.

All data sizes are carried in bits and all times in seconds.  CPU demand is
expressed on the same (unitless) scale as the node capacity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable


@dataclass(frozen=True, slots=True)
class Task:
    """One function of an app: the CPU share it occupies and the state it carries."""

    id: int  # ordinal position within the owning app
    cpu_demand: float  # CPU units, same scale as node capacity
    state_size: float  # bits of state kept next to the task


@dataclass(frozen=True, slots=True)
class Edge:
    """Directed data dependency between two tasks of the same app."""

    src: int
    dst: int
    data_size: float  # bits exchanged per invocation


@dataclass(frozen=True, slots=True)
class App:
    """A FaaS application: a DAG of tasks invoked at a fixed rate while alive."""

    id: int
    tasks: tuple[Task, ...]
    edges: tuple[Edge, ...]
    invocation_rate: float  # invocations per second
    arrival: float  # seconds
    departure: float  # seconds


@dataclass(frozen=True, slots=True)
class Workload:
    """A set of apps (sorted by arrival) observed over a finite horizon."""

    apps: tuple[App, ...]
    horizon: float  # seconds


@dataclass(frozen=True, slots=True)
class EnergyParams:
    """Node and network energy model plus the defragmentation period.

    ``balancing_cap`` is the target utilisation of the load-balancing
    stateless flavour: that policy keeps every node filled to at most
    ``balancing_cap * node_capacity``.
    """

    node_power: float = 100.0  # W drawn by one powered node
    per_bit_energy: float = 5e-8  # J per bit moved through the network
    node_capacity: float = 1000.0  # CPU units per node
    defrag_interval: float = 120.0  # s between re-packs; math.inf disables
    balancing_cap: float = 0.5  # utilisation target of the balancing policy

    def __post_init__(self) -> None:
        if not self.node_power > 0:
            raise ValueError("node_power must be positive")
        if self.per_bit_energy < 0:
            raise ValueError("per_bit_energy must be non-negative")
        if not self.node_capacity > 0:
            raise ValueError("node_capacity must be positive")
        if not self.defrag_interval > 0:  # math.inf is allowed
            raise ValueError("defrag_interval must be positive or infinite")
        if not 0 < self.balancing_cap <= 1:
            raise ValueError("balancing_cap must be in (0, 1]")


class EventKind(IntEnum):
    """Timeline event kinds; numeric value fixes the order at equal timestamps."""

    DEPARTURE = 0
    DEFRAG = 1
    ARRIVAL = 2
    HORIZON_END = 3


@dataclass(frozen=True, order=True, slots=True)
class Event:
    """A timeline breakpoint.  Ordering is (time, kind, app_id)."""

    time: float
    kind: EventKind
    app_id: int = -1


def total_demand(app: App) -> float:
    """Sum of CPU demands over the app's tasks (0.0 for an empty task list)."""
    return sum(task.cpu_demand for task in app.tasks)


def validate_app(app: App) -> list[str]:
    """Return a list of invariant violations; an empty list means the app is valid.

    Violations are returned as data rather than raised so generators and tests
    can assert on the full set at once.
    """
    problems: list[str] = []
    n = len(app.tasks)
    for index, task in enumerate(app.tasks):
        if task.id != index:
            problems.append(f"task id {task.id} at position {index} is not the ordinal")
        if not task.cpu_demand > 0:
            problems.append(f"task {task.id} has non-positive cpu demand {task.cpu_demand}")
        if task.state_size < 0:
            problems.append(f"task {task.id} has negative state size {task.state_size}")
    seen_pairs: set[tuple[int, int]] = set()
    for edge in app.edges:
        if not (0 <= edge.src < n) or not (0 <= edge.dst < n):
            problems.append(f"edge ({edge.src}, {edge.dst}) has a dangling endpoint")
            continue
        if edge.src == edge.dst:
            problems.append(f"edge ({edge.src}, {edge.dst}) is a self-loop")
        if (edge.src, edge.dst) in seen_pairs:
            problems.append(f"edge ({edge.src}, {edge.dst}) is duplicated")
        seen_pairs.add((edge.src, edge.dst))
        if edge.data_size < 0:
            problems.append(f"edge ({edge.src}, {edge.dst}) has negative data size")
    if _has_cycle(n, seen_pairs):
        problems.append("task graph has a cycle")
    if not app.invocation_rate > 0:
        problems.append(f"non-positive invocation rate {app.invocation_rate}")
    if app.departure <= app.arrival:
        problems.append(
            f"departure {app.departure} does not follow arrival {app.arrival}"
        )
    return problems


def _has_cycle(n: int, pairs: set[tuple[int, int]]) -> bool:
    """Kahn-style check on the in-range edge pairs."""
    indegree = [0] * n
    successors: dict[int, list[int]] = {}
    for src, dst in pairs:
        indegree[dst] += 1
        successors.setdefault(src, []).append(dst)
    ready = [v for v in range(n) if indegree[v] == 0]
    removed = 0
    while ready:
        v = ready.pop()
        removed += 1
        for w in successors.get(v, ()):
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(w)
    return removed != n


def build_event_timeline(workload: Workload, defrag_interval: float) -> list[Event]:
    """Merge arrivals, departures, defrag ticks and the end-of-horizon marker.

    Departures at or beyond the horizon are dropped (the run truncates there),
    defrag ticks are placed at every positive multiple of ``defrag_interval``
    strictly before the horizon, and events at equal timestamps order as
    departures, then defrag, then arrivals, then the final marker.
    """
    if math.isnan(defrag_interval) or defrag_interval <= 0:
        raise ValueError("defrag_interval must be positive or infinite")
    horizon = workload.horizon
    events: list[Event] = []
    for app in workload.apps:
        events.append(Event(app.arrival, EventKind.ARRIVAL, app.id))
        if app.departure < horizon:
            events.append(Event(app.departure, EventKind.DEPARTURE, app.id))
    if math.isfinite(defrag_interval):
        k = 1
        while k * defrag_interval < horizon:
            events.append(Event(k * defrag_interval, EventKind.DEFRAG))
            k += 1
    events.sort()
    events.append(Event(horizon, EventKind.HORIZON_END))
    return events


# --- line-oriented JSON persistence -----------------------------------------
#
# One header line carrying the horizon, then one line per app:
#   {"id": ..., "arrival": ..., "departure": ..., "rate": ...,
#    "tasks": [{"cpu": ..., "state": ...}, ...], "edges": [[u, v, bits], ...]}
# Task ids are positional.  Floats round-trip exactly through repr.


def _app_to_obj(app: App) -> dict:
    return {
        "id": app.id,
        "arrival": app.arrival,
        "departure": app.departure,
        "rate": app.invocation_rate,
        "tasks": [{"cpu": t.cpu_demand, "state": t.state_size} for t in app.tasks],
        "edges": [[e.src, e.dst, e.data_size] for e in app.edges],
    }


def _app_from_obj(obj: dict) -> App:
    tasks = tuple(
        Task(id=i, cpu_demand=float(t["cpu"]), state_size=float(t["state"]))
        for i, t in enumerate(obj["tasks"])
    )
    edges = tuple(
        Edge(src=int(u), dst=int(v), data_size=float(d)) for u, v, d in obj["edges"]
    )
    return App(
        id=int(obj["id"]),
        tasks=tasks,
        edges=edges,
        invocation_rate=float(obj["rate"]),
        arrival=float(obj["arrival"]),
        departure=float(obj["departure"]),
    )


def write_workload_jsonl(workload: Workload, path: str | Path) -> None:
    """Archive a workload as line-oriented JSON (header line, then one app per line)."""
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(json.dumps({"horizon": workload.horizon}) + "\n")
        for app in workload.apps:
            fp.write(json.dumps(_app_to_obj(app)) + "\n")


def read_workload_jsonl(path: str | Path) -> Workload:
    """Load a workload previously written by :func:`write_workload_jsonl`."""
    with open(path, "r", encoding="utf-8") as fp:
        header = json.loads(fp.readline())
        apps = tuple(_app_from_obj(json.loads(line)) for line in fp if line.strip())
    return Workload(apps=apps, horizon=float(header["horizon"]))
