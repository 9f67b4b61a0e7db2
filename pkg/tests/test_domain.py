"""Core data model: validation, demand arithmetic, event timelines, persistence."""

import math

import pytest

from ednsim.domain import (
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


def _app(app_id, demands, edges=(), rate=5.0, arrival=0.0, departure=60.0, states=None):
    states = states or [0.0] * len(demands)
    return App(
        id=app_id,
        tasks=tuple(Task(i, float(r), float(s)) for i, (r, s) in enumerate(zip(demands, states))),
        edges=tuple(Edge(u, v, float(d)) for u, v, d in edges),
        invocation_rate=rate,
        arrival=arrival,
        departure=departure,
    )


# --- total_demand -------------------------------------------------------------


def test_total_demand_sums_tasks():
    assert total_demand(_app(0, [400, 300])) == 700.0


def test_total_demand_empty_task_list_is_zero():
    app = App(0, (), (), 5.0, 0.0, 60.0)
    assert total_demand(app) == 0.0


def test_total_demand_three_max_tasks():
    assert total_demand(_app(0, [800, 800, 800])) == 2400.0


def test_total_demand_is_permutation_invariant():
    forward = _app(0, [125.5, 90.25, 640.0])
    backward = _app(0, [640.0, 90.25, 125.5])
    assert total_demand(forward) == total_demand(backward)


# --- validate_app -------------------------------------------------------------


def test_validate_minimal_single_task_app_is_clean():
    assert validate_app(_app(0, [100.0])) == []


def test_validate_two_task_chain_is_clean():
    assert validate_app(_app(0, [100.0, 200.0], edges=[(0, 1, 5000.0)])) == []


def test_validate_reports_two_cycle():
    app = _app(0, [100.0, 100.0], edges=[(0, 1, 10.0), (1, 0, 10.0)])
    problems = validate_app(app)
    assert len(problems) == 1 and "cycle" in problems[0]


def test_validate_reports_longer_cycle():
    app = _app(0, [10.0, 10.0, 10.0], edges=[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    assert any("cycle" in p for p in validate_app(app))


def test_validate_reports_dangling_edge_endpoint():
    app = _app(0, [100.0, 100.0], edges=[(0, 5, 10.0)])
    problems = validate_app(app)
    assert len(problems) == 1 and "dangling" in problems[0]


def test_validate_reports_self_loop():
    app = _app(0, [100.0], edges=[(0, 0, 10.0)])
    assert any("self-loop" in p for p in validate_app(app))


def test_validate_reports_duplicate_edge():
    app = _app(0, [100.0, 100.0], edges=[(0, 1, 10.0), (0, 1, 20.0)])
    assert any("duplicated" in p for p in validate_app(app))


def test_validate_reports_non_positive_demand():
    assert any("cpu demand" in p for p in validate_app(_app(0, [0.0])))
    assert any("cpu demand" in p for p in validate_app(_app(0, [-5.0])))


def test_validate_reports_negative_state_size():
    app = _app(0, [100.0], states=[-1.0])
    assert any("state size" in p for p in validate_app(app))


def test_validate_reports_negative_edge_data():
    app = _app(0, [100.0, 100.0], edges=[(0, 1, -4.0)])
    assert any("data size" in p for p in validate_app(app))


def test_validate_reports_non_positive_rate():
    assert any("invocation rate" in p for p in validate_app(_app(0, [100.0], rate=0.0)))


def test_validate_reports_departure_not_after_arrival():
    app = _app(0, [100.0], arrival=60.0, departure=60.0)
    assert any("departure" in p for p in validate_app(app))


def test_validate_reports_non_ordinal_task_ids():
    app = App(0, (Task(1, 100.0, 0.0),), (), 5.0, 0.0, 60.0)
    assert any("ordinal" in p for p in validate_app(app))


def test_validate_collects_multiple_violations():
    app = _app(0, [100.0, -1.0], edges=[(0, 1, 1.0), (1, 0, 1.0)], rate=-2.0)
    problems = validate_app(app)
    assert any("cpu demand" in p for p in problems)
    assert any("cycle" in p for p in problems)
    assert any("invocation rate" in p for p in problems)


# --- EnergyParams validation ----------------------------------------------------


def test_energy_params_defaults_are_valid():
    params = EnergyParams()
    assert params.node_power == 100.0
    assert params.node_capacity == 1000.0


def test_energy_params_accepts_infinite_defrag_interval():
    assert math.isinf(EnergyParams(defrag_interval=math.inf).defrag_interval)


def test_energy_params_accepts_zero_per_bit_energy():
    assert EnergyParams(per_bit_energy=0.0).per_bit_energy == 0.0


@pytest.mark.parametrize(
    "bad",
    [
        {"node_power": 0.0},
        {"node_power": -1.0},
        {"per_bit_energy": -1e-9},
        {"node_capacity": 0.0},
        {"defrag_interval": 0.0},
        {"defrag_interval": -5.0},
        {"balancing_cap": 0.0},
        {"balancing_cap": 1.5},
        {"balancing_cap": -0.5},
    ],
)
def test_energy_params_rejects_non_positive_fields(bad):
    with pytest.raises(ValueError):
        EnergyParams(**bad)


# --- Event ordering -------------------------------------------------------------


def test_events_at_equal_time_order_departure_defrag_arrival_end():
    t = 10.0
    events = [
        Event(t, EventKind.HORIZON_END),
        Event(t, EventKind.ARRIVAL, 3),
        Event(t, EventKind.DEFRAG),
        Event(t, EventKind.DEPARTURE, 7),
    ]
    kinds = [e.kind for e in sorted(events)]
    assert kinds == [
        EventKind.DEPARTURE,
        EventKind.DEFRAG,
        EventKind.ARRIVAL,
        EventKind.HORIZON_END,
    ]


def test_event_time_dominates_kind_in_ordering():
    assert Event(5.0, EventKind.HORIZON_END) < Event(6.0, EventKind.DEPARTURE, 0)


# --- build_event_timeline ---------------------------------------------------------


def test_timeline_single_app_no_defrag():
    workload = Workload(apps=(_app(0, [100.0], arrival=5.0, departure=20.0),), horizon=30.0)
    events = build_event_timeline(workload, math.inf)
    assert events == [
        Event(5.0, EventKind.ARRIVAL, 0),
        Event(20.0, EventKind.DEPARTURE, 0),
        Event(30.0, EventKind.HORIZON_END),
    ]


def test_timeline_defrag_ticks_without_apps():
    events = build_event_timeline(Workload(apps=(), horizon=25.0), 10.0)
    assert events == [
        Event(10.0, EventKind.DEFRAG),
        Event(20.0, EventKind.DEFRAG),
        Event(25.0, EventKind.HORIZON_END),
    ]


def test_timeline_departure_precedes_coincident_defrag():
    workload = Workload(apps=(_app(0, [100.0], arrival=1.0, departure=10.0),), horizon=30.0)
    events = build_event_timeline(workload, 10.0)
    at_ten = [e.kind for e in events if e.time == 10.0]
    assert at_ten == [EventKind.DEPARTURE, EventKind.DEFRAG]


def test_timeline_drops_departures_at_or_past_horizon():
    workload = Workload(
        apps=(
            _app(0, [100.0], arrival=1.0, departure=30.0),
            _app(1, [100.0], arrival=2.0, departure=31.5),
        ),
        horizon=30.0,
    )
    events = build_event_timeline(workload, math.inf)
    assert [e.kind for e in events] == [
        EventKind.ARRIVAL,
        EventKind.ARRIVAL,
        EventKind.HORIZON_END,
    ]


def test_timeline_defrag_ticks_are_exact_multiples():
    events = build_event_timeline(Workload(apps=(), horizon=30.0), 7.5)
    ticks = [e.time for e in events if e.kind == EventKind.DEFRAG]
    assert ticks == [7.5, 15.0, 22.5]


def test_timeline_excludes_defrag_tick_at_horizon():
    events = build_event_timeline(Workload(apps=(), horizon=20.0), 10.0)
    ticks = [e.time for e in events if e.kind == EventKind.DEFRAG]
    assert ticks == [10.0]


def test_timeline_is_sorted_and_ends_with_horizon_marker():
    apps = tuple(
        _app(i, [100.0], arrival=0.7 * i, departure=0.7 * i + 7.3) for i in range(20)
    )
    events = build_event_timeline(Workload(apps=apps, horizon=15.0), 4.0)
    assert events == sorted(events)
    assert events[-1].kind == EventKind.HORIZON_END
    assert sum(1 for e in events if e.kind == EventKind.HORIZON_END) == 1
    for app in apps:
        indices = {
            (e.kind, e.app_id): i
            for i, e in enumerate(events)
            if e.app_id == app.id
        }
        arrival_at = indices[(EventKind.ARRIVAL, app.id)]
        departure_at = indices.get((EventKind.DEPARTURE, app.id))
        if departure_at is not None:
            assert arrival_at < departure_at


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_timeline_rejects_bad_defrag_interval(bad):
    with pytest.raises(ValueError):
        build_event_timeline(Workload(apps=(), horizon=10.0), bad)


# --- persistence ------------------------------------------------------------------


def test_workload_jsonl_round_trip_is_exact(tmp_path):
    apps = (
        _app(
            0,
            [0.1 + 0.2, 123.456789012345],
            edges=[(0, 1, 98765.4321)],
            states=[1e6 / 3.0, 7.0],
            arrival=0.30000000000000004,
            departure=59.99999999999999,
        ),
        _app(3, [50.0], rate=2.5, arrival=10.0, departure=70.0),
    )
    workload = Workload(apps=apps, horizon=86400.0)
    path = tmp_path / "workload.jsonl"
    write_workload_jsonl(workload, path)
    assert read_workload_jsonl(path) == workload


def test_workload_jsonl_empty_workload(tmp_path):
    path = tmp_path / "empty.jsonl"
    write_workload_jsonl(Workload(apps=(), horizon=12.5), path)
    loaded = read_workload_jsonl(path)
    assert loaded.apps == ()
    assert loaded.horizon == 12.5
