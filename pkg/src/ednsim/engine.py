"""Discrete-event energy simulation over piecewise-constant intervals.

The timeline is walked in timestamp groups: all events sharing a timestamp
are applied first, then the interval up to the next distinct timestamp is
charged using the post-event state.  Coincident events therefore contribute
no zero-length intervals, and state moved by a re-pack is charged to the
interval that starts at the re-pack.

Migration traffic is accounted in bits and multiplied by the per-bit energy
once, rather than being turned into a rate and re-multiplied by the interval,
so the total network energy attributable to migrations equals
``per_bit_energy * total_migrated_bits`` exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .domain import (
    App,
    EnergyParams,
    Event,
    EventKind,
    Workload,
    build_event_timeline,
    total_demand,
)
from .policy import (
    POLICIES,
    POLICY_STATEFUL_BEST_FIT,
    POLICY_STATEFUL_RANDOM,
    POLICY_STATELESS_MAX_BALANCING,
    POLICY_STATELESS_MIN_NODES,
    Allocation,
    MigrationRecord,
    defragment,
    place_app_best_fit,
    place_app_random,
)


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One piecewise-constant interval of the simulated trajectory."""

    t: float  # interval start, seconds
    interval: float  # interval length, seconds
    alpha: int  # powered nodes
    beta_total: float  # network traffic rate, bits per second
    migrated_bits: float  # state bits moved at the start of this interval


@dataclass(slots=True)
class SimResult:
    """Aggregate energies and the optional step-by-step trajectory of one run."""

    energy_processing: float  # J
    energy_network: float  # J
    energy_total: float  # J
    total_migrated_bits: float
    node_time_integral: float  # node-seconds
    network_bits_total: float  # bits of network traffic over the run
    energy_network_invocation: float  # J, invocation-driven traffic
    energy_network_migration: float  # J, re-pack state moves
    horizon: float  # s
    policy: str
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def mean_alpha(self) -> float:
        return self.node_time_integral / self.horizon if self.horizon > 0 else 0.0

    @property
    def mean_beta(self) -> float:
        return self.network_bits_total / self.horizon if self.horizon > 0 else 0.0

    def to_json_dict(self) -> dict:
        return {
            "policy": self.policy,
            "horizon": self.horizon,
            "energy_processing": self.energy_processing,
            "energy_network": self.energy_network,
            "energy_total": self.energy_total,
            "total_migrated_bits": self.total_migrated_bits,
            "node_time_integral": self.node_time_integral,
            "network_bits_total": self.network_bits_total,
            "energy_network_invocation": self.energy_network_invocation,
            "energy_network_migration": self.energy_network_migration,
            "mean_alpha": self.mean_alpha,
            "mean_beta": self.mean_beta,
        }


def write_steps_csv(steps: Iterable[StepRecord], path: str | Path) -> None:
    """Dump a step series as CSV (t, interval, alpha, beta_total, migrated_bits)."""
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(["t", "interval", "alpha", "beta_total", "migrated_bits"])
        for step in steps:
            writer.writerow(
                [
                    repr(step.t),
                    repr(step.interval),
                    step.alpha,
                    repr(step.beta_total),
                    repr(step.migrated_bits),
                ]
            )


def beta_stateless(app: App) -> float:
    """Traffic rate of one app when state lives off-node: every invocation
    fetches all task state and moves all edge data."""
    bits = sum(t.state_size for t in app.tasks) + sum(e.data_size for e in app.edges)
    return app.invocation_rate * bits


def _cross_rate(app: App, alloc: Allocation) -> float:
    """Invocation traffic of one placed app: edge data crossing node boundaries."""
    bits = 0.0
    for edge in app.edges:
        if alloc.assignment[(app.id, edge.src)] != alloc.assignment[(app.id, edge.dst)]:
            bits += edge.data_size
    return app.invocation_rate * bits


def beta_stateful(
    app: App, alloc: Allocation, migrations: MigrationRecord, interval: float
) -> float:
    """Traffic rate of one placed app over an interval: state bits it migrated
    at the interval start spread over the interval, plus cross-node edge data
    per invocation."""
    if not interval > 0:
        raise ValueError("interval must be positive")
    moved = sum(m.state_bits for m in migrations if m.app_id == app.id)
    return moved / interval + _cross_rate(app, alloc)


def run_simulation(
    workload: Workload,
    policy: str,
    params: EnergyParams,
    seed: int = 0,
    collect_steps: bool = True,
    repack_order: str = "ascending",
) -> SimResult:
    """Simulate one workload under one policy; pure in its arguments.

    The seed only drives the random placement policy.  With
    ``collect_steps=False`` the per-interval records are not retained, which
    keeps long sweeps light; all aggregates are unaffected.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    stateful = policy in (POLICY_STATEFUL_BEST_FIT, POLICY_STATEFUL_RANDOM)
    if stateful and not workload.horizon > 0:
        raise ValueError("stateful policies need a positive horizon")

    defrag_interval = (
        params.defrag_interval if policy == POLICY_STATEFUL_BEST_FIT else math.inf
    )
    events = build_event_timeline(workload, defrag_interval)
    apps_by_id = {app.id: app for app in workload.apps}
    capacity = params.node_capacity

    active: dict[int, App] = {}
    # Stateless accumulators.
    demand_sum = 0.0
    stateless_rate = 0.0
    # Stateful state.
    alloc = Allocation()
    cross_rates: dict[int, float] = {}
    cross_sum = 0.0
    # Jump the placement stream away from the workload-generation stream so
    # sharing one seed between them cannot correlate the two.
    rng = (
        np.random.Generator(np.random.PCG64(seed).jumped())
        if policy == POLICY_STATEFUL_RANDOM
        else None
    )

    pending_migrated = 0.0
    node_time = 0.0
    invocation_bits = 0.0
    migrated_total = 0.0
    steps: list[StepRecord] = []

    def current_alpha() -> int:
        if policy == POLICY_STATELESS_MIN_NODES:
            return math.ceil(demand_sum / capacity) if active else 0
        if policy == POLICY_STATELESS_MAX_BALANCING:
            if not active:
                return 0
            return math.ceil(demand_sum / (params.balancing_cap * capacity))
        return len(alloc.node_load)

    index = 0
    prev_time = 0.0
    while index < len(events):
        now = events[index].time
        if now > prev_time:
            dt = now - prev_time
            alpha = current_alpha()
            rate = stateless_rate if not stateful else cross_sum
            node_time += alpha * dt
            invocation_bits += rate * dt
            migrated_total += pending_migrated
            if collect_steps:
                beta = rate + (pending_migrated / dt if pending_migrated else 0.0)
                steps.append(StepRecord(prev_time, dt, alpha, beta, pending_migrated))
            pending_migrated = 0.0
        while index < len(events) and events[index].time == now:
            event = events[index]
            index += 1
            if event.kind == EventKind.ARRIVAL:
                app = apps_by_id[event.app_id]
                active[app.id] = app
                if stateful:
                    if policy == POLICY_STATEFUL_BEST_FIT:
                        place_app_best_fit(alloc, app, capacity)
                    else:
                        place_app_random(alloc, app, capacity, rng)
                    rate = _cross_rate(app, alloc)
                    cross_rates[app.id] = rate
                    cross_sum += rate
                else:
                    demand_sum += total_demand(app)
                    stateless_rate += beta_stateless(app)
            elif event.kind == EventKind.DEPARTURE:
                app = active.pop(event.app_id)
                if stateful:
                    alloc.remove_app(app)
                    cross_sum -= cross_rates.pop(app.id)
                    if not active:
                        cross_sum = 0.0
                else:
                    demand_sum -= total_demand(app)
                    stateless_rate -= beta_stateless(app)
                    if not active:
                        # Reset accumulated float dust at exact-empty points.
                        demand_sum = 0.0
                        stateless_rate = 0.0
            elif event.kind == EventKind.DEFRAG:
                if active:
                    alloc, migrations = defragment(
                        alloc, list(active.values()), capacity, repack_order
                    )
                    moved = sum(m.state_bits for m in migrations)
                    pending_migrated += moved
                    cross_sum = 0.0
                    for app in active.values():
                        rate = _cross_rate(app, alloc)
                        cross_rates[app.id] = rate
                        cross_sum += rate
            # HORIZON_END carries no state change.
        prev_time = now

    energy_processing = params.node_power * node_time
    energy_invocation = params.per_bit_energy * invocation_bits
    energy_migration = params.per_bit_energy * migrated_total
    energy_network = energy_invocation + energy_migration
    return SimResult(
        energy_processing=energy_processing,
        energy_network=energy_network,
        energy_total=energy_processing + energy_network,
        total_migrated_bits=migrated_total,
        node_time_integral=node_time,
        network_bits_total=invocation_bits + migrated_total,
        energy_network_invocation=energy_invocation,
        energy_network_migration=energy_migration,
        horizon=workload.horizon,
        policy=policy,
        steps=steps,
    )


def integrate_energy(
    steps: Sequence[StepRecord], params: EnergyParams
) -> tuple[float, float]:
    """Re-integrate a step series into (processing, network) energy in joules."""
    node_time = 0.0
    bits = 0.0
    for step in steps:
        node_time += step.alpha * step.interval
        bits += step.beta_total * step.interval
    return params.node_power * node_time, params.per_bit_energy * bits
