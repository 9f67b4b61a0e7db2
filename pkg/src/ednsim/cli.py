"""Command line front end: run a canned experiment or a custom sweep.

Example::

    simulate --experiment defrag --out-dir results/
    simulate --config my.json --experiment custom --reps 50 --out-dir results/

The JSON config may carry three sections: ``workload`` (generator fields),
``energy`` (node/network fields) and ``sweep`` (parameter, values, policies,
repetitions, base_seed; required for ``--experiment custom``).  Values may use
the string ``"inf"`` for an unbounded defragmentation period.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .domain import EnergyParams
from .harness import (
    DESK_HORIZON,
    PAPER_HORIZON,
    PAPER_REPETITIONS,
    SweepSpec,
    emit_plot_data,
    experiment_presets,
    run_sweep,
    write_raw_csv,
    write_summary_csv,
)
from .workload import WorkloadConfig

EXPERIMENTS = ("defrag", "energy", "state", "lifetime", "capacity", "custom")


def _parse_value(value: object) -> float:
    if isinstance(value, str):
        return float(value)  # accepts "inf"
    if isinstance(value, (int, float)):
        return float(value)
    raise ValueError(f"cannot interpret sweep value {value!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Energy simulation sweeps for stateful FaaS on edge nodes.",
    )
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument(
        "--experiment",
        required=True,
        choices=EXPERIMENTS,
        help="canned experiment name, or 'custom' (sweep section required in config)",
    )
    parser.add_argument(
        "--policies",
        default=None,
        help="comma-separated policy names overriding the experiment's default",
    )
    parser.add_argument("--reps", type=int, default=None, help="repetitions per point")
    parser.add_argument("--seed", type=int, default=None, help="base seed")
    parser.add_argument("--out-dir", type=Path, required=True, help="output directory")
    parser.add_argument(
        "--paper-scale",
        action="store_true",
        help="run the full-scale study (86400 s horizon, 1000 repetitions)",
    )
    parser.add_argument("--workers", type=int, default=None, help="parallel workers")
    parser.add_argument(
        "--dump-steps",
        action="store_true",
        help="also dump each run's step series as CSV (verbose, large)",
    )
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fp:
        config = json.load(fp)
    if not isinstance(config, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = set(config) - {"workload", "energy", "sweep"}
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    return config


def _build_specs(args: argparse.Namespace, config: dict) -> list[SweepSpec]:
    workload_overrides = dict(config.get("workload", {}))
    energy_overrides = dict(config.get("energy", {}))
    if "defrag_interval" in energy_overrides:
        energy_overrides["defrag_interval"] = _parse_value(
            energy_overrides["defrag_interval"]
        )
    horizon = PAPER_HORIZON if args.paper_scale else DESK_HORIZON
    workload_overrides.setdefault("horizon", horizon)
    workload_base = WorkloadConfig.from_dict(workload_overrides)
    energy_base = EnergyParams(**energy_overrides)

    if args.experiment == "custom":
        sweep = config.get("sweep")
        if not sweep:
            raise ValueError("--experiment custom needs a 'sweep' section in the config")
        unknown = set(sweep) - {
            "parameter",
            "values",
            "policies",
            "repetitions",
            "base_seed",
        }
        if unknown:
            raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
        specs = [
            SweepSpec(
                experiment="custom",
                parameter=sweep["parameter"],
                values=tuple(_parse_value(v) for v in sweep["values"]),
                policies=tuple(sweep.get("policies", ())) or ("stateful-best-fit",),
                repetitions=int(
                    sweep.get("repetitions", PAPER_REPETITIONS if args.paper_scale else 100)
                ),
                base_seed=int(sweep.get("base_seed", 1)),
                workload=workload_base,
                energy=energy_base,
            )
        ]
    else:
        presets = experiment_presets(
            paper_scale=args.paper_scale,
            workload_base=workload_base,
            energy_base=energy_base,
        )
        specs = list(presets[args.experiment])

    # A parameter cannot be both fixed by the user and swept by the experiment.
    user_fixed = set(workload_overrides) | set(energy_overrides)
    user_fixed.discard("horizon")
    for spec in specs:
        if spec.parameter in user_fixed:
            raise ValueError(
                f"parameter {spec.parameter!r} is swept by experiment "
                f"{spec.experiment!r} but fixed in the config"
            )

    if args.policies is not None:
        policies = tuple(p.strip() for p in args.policies.split(",") if p.strip())
        specs = [replace(spec, policies=policies) for spec in specs]
    if args.reps is not None:
        specs = [replace(spec, repetitions=args.reps) for spec in specs]
    if args.seed is not None:
        specs = [replace(spec, base_seed=args.seed) for spec in specs]
    for spec in specs:
        spec.validate()
    return specs


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        specs = _build_specs(args, config)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as error:
        print(f"config error: {error}", file=sys.stderr)
        return 2

    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    steps_dir = out_dir / "steps" if args.dump_steps else None

    all_raw = []
    all_summary = []
    for spec in specs:
        raw, summary = run_sweep(spec, workers=args.workers, steps_dir=steps_dir)
        all_raw.extend(raw)
        all_summary.extend(summary)
        emit_plot_data(summary, spec.experiment, out_dir)
    write_raw_csv(all_raw, out_dir / "raw.csv")
    write_summary_csv(all_summary, out_dir / "summary.csv")
    print(f"wrote {len(all_raw)} runs to {out_dir / 'raw.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
