"""Independent reference results for tests: exact bin packing and closed-form
energy for tiny scenarios.

Nothing here is used by the simulation itself, and nothing is shared with the
policy or engine modules: results are computed from first principles so they
can act as an impartial check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

_MAX_ITEMS = 14  # exhaustive search is asserted tractable up to this size


@dataclass(frozen=True, slots=True)
class PackingInstance:
    """A bin-packing question: item sizes and a common bin capacity."""

    items: tuple[float, ...]
    capacity: float


def optimal_packing(instance: PackingInstance) -> int:
    """Exact minimum number of bins, by branch-and-bound over partitions.

    Raises ``ValueError`` if any item exceeds the capacity or if the instance
    has more than 14 items (the exhaustive search is only asserted tractable
    up to that size).
    """
    if not instance.capacity > 0:
        raise ValueError("capacity must be positive")
    if len(instance.items) > _MAX_ITEMS:
        raise ValueError(f"at most {_MAX_ITEMS} items supported, got {len(instance.items)}")
    for size in instance.items:
        if not 0 < size <= instance.capacity:
            raise ValueError(f"item size {size} outside (0, capacity]")
    items = sorted(instance.items, reverse=True)
    if not items:
        return 0
    capacity = instance.capacity
    total = sum(items)

    # Greedy first-fit-decreasing gives the initial upper bound.
    ffd_bins: list[float] = []
    for size in items:
        for i, load in enumerate(ffd_bins):
            if load + size <= capacity:
                ffd_bins[i] = load + size
                break
        else:
            ffd_bins.append(size)
    best = len(ffd_bins)

    suffix_sums = [0.0] * (len(items) + 1)
    for i in range(len(items) - 1, -1, -1):
        suffix_sums[i] = suffix_sums[i + 1] + items[i]

    bins: list[float] = []

    def search(i: int) -> None:
        nonlocal best
        if len(bins) >= best:
            return
        if i == len(items):
            best = len(bins)
            return
        # Remaining volume cannot fit in fewer bins than this, even reusing
        # all free space currently open.
        free = len(bins) * capacity - (total - suffix_sums[i])
        needed = math.ceil((suffix_sums[i] - free) / capacity)
        if len(bins) + max(0, needed) >= best:
            return
        size = items[i]
        tried: set[float] = set()
        for b in range(len(bins)):
            load = bins[b]
            if load + size <= capacity and load not in tried:
                tried.add(load)
                bins[b] = load + size
                search(i + 1)
                bins[b] = load
        bins.append(size)
        search(i + 1)
        bins.pop()

    search(0)
    return best


@dataclass(frozen=True, slots=True)
class ScenarioApp:
    """An app for the closed-form calculator, with optional explicit placement.

    ``placement`` gives the node index per task before any re-pack;
    ``placement_after`` the indices afterwards (defaults to no change).
    """

    arrival: float
    departure: float
    rate: float
    demands: tuple[float, ...]
    states: tuple[float, ...] = ()
    edges: tuple[tuple[int, int, float], ...] = ()
    placement: tuple[int, ...] | None = None
    placement_after: tuple[int, ...] | None = None


@dataclass(frozen=True, slots=True)
class Scenario:
    """A hand-sized scenario (at most three apps) solvable in closed form.

    ``mode`` is one of ``"stateless-min"``, ``"stateless-max"``,
    ``"stateful"``.  In stateful mode each app carries its explicit node
    placement, and at most one re-pack at ``repack_time`` may swap every app
    to its ``placement_after``; state bits of every task whose node changes
    are charged to the interval starting at the re-pack.
    """

    horizon: float
    node_power: float
    per_bit_energy: float
    capacity: float
    mode: str
    apps: tuple[ScenarioApp, ...]
    utilization_cap: float = 0.5
    repack_time: float | None = None


def analytic_energy(scenario: Scenario) -> float:
    """Total energy of the scenario in joules, evaluated symbolically.

    The timeline is cut at every arrival, departure and the optional re-pack;
    on each piece the node count and traffic rate are constants, so the energy
    is a finite sum of rate x duration terms.
    """
    if scenario.mode not in ("stateless-min", "stateless-max", "stateful"):
        raise ValueError(f"unknown scenario mode {scenario.mode!r}")
    if len(scenario.apps) > 3:
        raise ValueError("scenarios support at most 3 apps")
    if scenario.repack_time is not None and scenario.mode != "stateful":
        raise ValueError("a re-pack only makes sense in stateful mode")
    if scenario.mode == "stateful":
        for app in scenario.apps:
            if app.placement is None or len(app.placement) != len(app.demands):
                raise ValueError("stateful scenarios need a placement per task")

    horizon = scenario.horizon
    cuts = {0.0, horizon}
    for app in scenario.apps:
        if app.arrival < horizon:
            cuts.add(app.arrival)
        if app.departure < horizon:
            cuts.add(app.departure)
    if scenario.repack_time is not None and 0 < scenario.repack_time < horizon:
        cuts.add(scenario.repack_time)
    times = sorted(cuts)

    repack_bits = 0.0
    if scenario.repack_time is not None:
        for app in scenario.apps:
            after = app.placement_after or app.placement
            active = app.arrival <= scenario.repack_time < app.departure
            if not active:
                continue
            for task in range(len(app.demands)):
                if app.placement[task] != after[task]:
                    repack_bits += app.states[task]

    energy = 0.0
    for start, end in zip(times, times[1:]):
        duration = end - start
        active = [
            app
            for app in scenario.apps
            if app.arrival <= start and app.departure > start
        ]
        if scenario.mode == "stateless-min":
            nodes = math.ceil(sum(sum(a.demands) for a in active) / scenario.capacity)
            rate = sum(
                a.rate * (sum(a.states) + sum(d for _, _, d in a.edges)) for a in active
            )
        elif scenario.mode == "stateless-max":
            nodes = math.ceil(
                sum(sum(a.demands) for a in active)
                / (scenario.utilization_cap * scenario.capacity)
            )
            rate = sum(
                a.rate * (sum(a.states) + sum(d for _, _, d in a.edges)) for a in active
            )
        else:
            after_repack = (
                scenario.repack_time is not None and start >= scenario.repack_time
            )
            used_nodes: set[int] = set()
            rate = 0.0
            for app in active:
                nodes_of = (
                    (app.placement_after or app.placement)
                    if after_repack
                    else app.placement
                )
                used_nodes.update(nodes_of)
                rate += app.rate * sum(
                    d for u, v, d in app.edges if nodes_of[u] != nodes_of[v]
                )
            nodes = len(used_nodes)
            if scenario.repack_time is not None and start == scenario.repack_time:
                rate += repack_bits / duration
        energy += (scenario.node_power * nodes + scenario.per_bit_energy * rate) * duration
    return energy
