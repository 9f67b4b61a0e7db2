"""Deployment policies: node counting for stateless modes, task placement and
periodic defragmentation for stateful modes.

Node indices identify physical nodes.  Within one allocation epoch fresh
nodes take strictly increasing indices (never recycled), so an index always
means the same node.  A defragmentation re-pack restarts indexing from zero
over the same physical pool: a task re-packed onto its old index has not
moved, and only index changes count as migrations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .domain import App, total_demand

POLICY_STATELESS_MIN_NODES = "stateless-min-nodes"
POLICY_STATELESS_MAX_BALANCING = "stateless-max-balancing"
POLICY_STATEFUL_BEST_FIT = "stateful-best-fit"
POLICY_STATEFUL_RANDOM = "stateful-random"
POLICIES = (
    POLICY_STATELESS_MIN_NODES,
    POLICY_STATELESS_MAX_BALANCING,
    POLICY_STATEFUL_BEST_FIT,
    POLICY_STATEFUL_RANDOM,
)

REPACK_ORDERS = ("ascending", "descending", "by-total-demand")


@dataclass(frozen=True, slots=True)
class Migration:
    """One task moved by a defragmentation re-pack."""

    app_id: int
    task_id: int
    from_node: int
    to_node: int
    state_bits: float


# A defragmentation emits one record per task whose node changed.
MigrationRecord = list[Migration]


@dataclass(slots=True)
class Allocation:
    """Mutable task-to-node assignment for one simulation run.

    ``node_load`` holds only powered (non-empty) nodes; its keys are created
    in ascending order and never re-inserted, so plain iteration visits nodes
    by ascending index.  ``node_tasks`` counts tasks per node so emptiness is
    detected exactly rather than by comparing accumulated float loads to zero.
    """

    assignment: dict[tuple[int, int], int] = field(default_factory=dict)
    node_load: dict[int, float] = field(default_factory=dict)
    node_tasks: dict[int, int] = field(default_factory=dict)
    next_node: int = 0

    def node_count(self) -> int:
        return len(self.node_load)

    def assign(self, app_id: int, task_id: int, node: int, demand: float) -> None:
        self.assignment[(app_id, task_id)] = node
        if node in self.node_load:
            self.node_load[node] += demand
            self.node_tasks[node] += 1
        else:
            self.node_load[node] = demand
            self.node_tasks[node] = 1

    def open_node(self) -> int:
        node = self.next_node
        self.next_node += 1
        return node

    def remove_app(self, app: App) -> None:
        for task in app.tasks:
            node = self.assignment.pop((app.id, task.id))
            remaining = self.node_tasks[node] - 1
            if remaining == 0:
                del self.node_load[node]
                del self.node_tasks[node]
            else:
                self.node_tasks[node] = remaining
                self.node_load[node] -= task.cpu_demand


def alpha_stateless_min_nodes(active_apps: Iterable[App], capacity: float) -> int:
    """Fewest nodes able to hold the total active demand: ceil(demand / capacity)."""
    if not capacity > 0:
        raise ValueError("capacity must be positive")
    demand = sum(total_demand(app) for app in active_apps)
    return math.ceil(demand / capacity)


def alpha_stateless_max_balancing(
    active_apps: Iterable[App], capacity: float, utilization_cap: float
) -> int:
    """Node count when every node is filled to at most ``utilization_cap * capacity``."""
    if not capacity > 0:
        raise ValueError("capacity must be positive")
    if not 0 < utilization_cap <= 1:
        raise ValueError("utilization_cap must be in (0, 1]")
    demand = sum(total_demand(app) for app in active_apps)
    return math.ceil(demand / (utilization_cap * capacity))


def alpha_stateful(alloc: Allocation) -> int:
    """Number of powered nodes: distinct node indices in the assignment."""
    return len(alloc.node_load)


def _topological_order(app: App) -> list[int]:
    """Task ids sources-first, lowest id breaking ties; raises on a cyclic graph."""
    n = len(app.tasks)
    indegree = [0] * n
    for edge in app.edges:
        indegree[edge.dst] += 1
    order: list[int] = []
    placed = [False] * n
    for _ in range(n):
        pick = -1
        for v in range(n):
            if not placed[v] and indegree[v] == 0:
                pick = v
                break
        if pick < 0:
            raise ValueError(f"app {app.id} task graph has a cycle")
        placed[pick] = True
        order.append(pick)
        for edge in app.edges:
            if edge.src == pick:
                indegree[edge.dst] -= 1
    return order


def _best_node(
    candidates: Iterable[int], loads: dict[int, float], demand: float, capacity: float
) -> int | None:
    """Feasible candidate with the least residual after placing ``demand``.

    Least residual after placement = highest current load; ties go to the
    lowest node index, which is the first seen when iterating ascending.
    """
    best = -1
    best_load = -1.0
    for node in candidates:
        load = loads[node]
        if load + demand <= capacity and load > best_load:
            best = node
            best_load = load
    return best if best >= 0 else None


def place_app_best_fit(alloc: Allocation, app: App, capacity: float) -> None:
    """Place each task (topological order) by best fit with predecessor affinity.

    Preference per task: (1) best fit among nodes already hosting one of its
    predecessors, (2) best fit among all powered nodes, (3) a fresh node.
    """
    predecessors: dict[int, list[int]] = {}
    for edge in app.edges:
        predecessors.setdefault(edge.dst, []).append(edge.src)
    for task_id in _topological_order(app):
        task = app.tasks[task_id]
        if task.cpu_demand > capacity:
            raise ValueError(
                f"task {task.id} of app {app.id} exceeds node capacity {capacity}"
            )
        node = None
        preds = predecessors.get(task_id)
        if preds:
            pred_nodes = sorted({alloc.assignment[(app.id, u)] for u in preds})
            node = _best_node(pred_nodes, alloc.node_load, task.cpu_demand, capacity)
        if node is None:
            node = _best_node(alloc.node_load, alloc.node_load, task.cpu_demand, capacity)
        if node is None:
            node = alloc.open_node()
        alloc.assign(app.id, task_id, node, task.cpu_demand)


def place_app_random(
    alloc: Allocation, app: App, capacity: float, rng: np.random.Generator
) -> None:
    """Place each task uniformly at random among nodes with room, else a fresh node."""
    for task in app.tasks:
        if task.cpu_demand > capacity:
            raise ValueError(
                f"task {task.id} of app {app.id} exceeds node capacity {capacity}"
            )
        candidates = [
            node
            for node, load in alloc.node_load.items()
            if load + task.cpu_demand <= capacity
        ]
        if candidates:
            node = candidates[int(rng.integers(len(candidates)))]
        else:
            node = alloc.open_node()
        alloc.assign(app.id, task.id, node, task.cpu_demand)


def _repack_order(active_apps: Iterable[App], order: str) -> list[App]:
    if order == "ascending":
        return sorted(active_apps, key=lambda app: app.id)
    if order == "descending":
        return sorted(active_apps, key=lambda app: -app.id)
    if order == "by-total-demand":
        return sorted(active_apps, key=lambda app: (-total_demand(app), app.id))
    raise ValueError(f"unknown repack order {order!r}; expected one of {REPACK_ORDERS}")


def repack(active_apps: Iterable[App], capacity: float, order: str = "ascending") -> Allocation:
    """Best-fit re-pack of the active apps onto an empty pool; pure in its inputs."""
    fresh = Allocation()
    for app in _repack_order(active_apps, order):
        place_app_best_fit(fresh, app, capacity)
    return fresh


def defragment(
    alloc: Allocation,
    active_apps: Sequence[App],
    capacity: float,
    order: str = "ascending",
) -> tuple[Allocation, MigrationRecord]:
    """Re-pack all active apps; report every task whose node index changed.

    The re-pack is kept only when it does not increase the node count;
    a fragmented-enough pool can otherwise beat a fresh best-fit pass, and an
    orchestrator consolidating nodes would not apply such a re-pack.
    """
    fresh = repack(active_apps, capacity, order)
    if fresh.node_count() > alloc.node_count():
        return alloc, []
    migrations: MigrationRecord = []
    for app in sorted(active_apps, key=lambda a: a.id):
        for task in app.tasks:
            old = alloc.assignment[(app.id, task.id)]
            new = fresh.assignment[(app.id, task.id)]
            if old != new:
                migrations.append(
                    Migration(
                        app_id=app.id,
                        task_id=task.id,
                        from_node=old,
                        to_node=new,
                        state_bits=task.state_size,
                    )
                )
    return fresh, migrations
