"""Command-line interface.

Subcommands:
  generate   synthesize a dataset and export it as CSV
  run        execute an experiment config and render the results table
  evaluate   score a saved model against a CSV dataset

Shared flags: --config, --seed, --output, --format. CLI flags override
config-file values.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import (
    ExperimentConfig,
    HarnessError,
    ResultsTable,
    CellStats,
    load_csv,
    load_experiment_config,
    render_table,
    run_experiment,
    write_csv,
)
from .metrics import METRIC_KEYS
from .model import LossSpec, TrainConfig, load_params, predict_proba, save_params, train
from .synth import PRESET_COUNTS, biased_preset, generate, preset_config


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.preset == "biased":
        dataset = biased_preset(args.bias_gap, args.seed or 0)
    else:
        cfg = preset_config(args.preset, segments_per_subject=args.segments)
        cfg = replace(cfg, seed=args.seed or 0, mode=args.mode)
        dataset = generate(cfg)
    if not args.output:
        print("generate requires --output PATH", file=sys.stderr)
        return 2
    write_csv(dataset, args.output)
    groups = dataset.group_names
    n0 = int((dataset.groups == 0).sum())
    print(
        f"wrote {len(dataset)} examples to {args.output} "
        f"(minority {groups[0]}: {n0}, majority {groups[1]}: {len(dataset) - n0})"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        "seeds": tuple(args.seed) if args.seed else None,
        "output": args.output,
        "format": args.format,
        "stack": True if args.stack else None,
    }
    if args.config:
        cfg = load_experiment_config(args.config, **overrides)
    else:
        print("run requires --config PATH", file=sys.stderr)
        return 2
    results = run_experiment(cfg)
    _emit(render_table(results, cfg.format), cfg.output)
    if args.save_baseline:
        from .harness import _load_dataset, _train_config

        dataset = _load_dataset(cfg)
        params, _ = train(
            dataset,
            cfg.architecture(),
            _train_config(cfg, cfg.seeds[0], LossSpec.plain()),
        )
        save_params(params, args.save_baseline)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    params = load_params(args.model)
    dataset = load_csv(args.data)
    from .harness import evaluate_predictions
    from .metrics import hard_predictions

    probs = predict_proba(params, dataset.features)
    record = evaluate_predictions(dataset, hard_predictions(probs))
    from .metrics import FAIRNESS_KEYS, ExtendedRatio, band_check

    cells = {}
    for key in METRIC_KEYS:
        value = record[key]
        if key in FAIRNESS_KEYS:
            if isinstance(value, str):
                ratio = ExtendedRatio.infinity() if value == "inf" else ExtendedRatio.equal()
                mean = value
            else:
                ratio = ExtendedRatio.finite(value)
                mean = value
            cells[key] = (CellStats(mean=mean, std=None, fair=band_check(ratio), n=1),)
        else:
            cells[key] = (CellStats(mean=value, std=None, fair=None, n=1),)
    table = ResultsTable(columns=("model",), cells=cells)
    _emit(render_table(table, args.format or "markdown"), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairdep",
        description="Group-fairness evaluation and bias mitigation for binary classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a dataset and write it as CSV")
    gen.add_argument("--preset", default="biased",
                     choices=sorted(PRESET_COUNTS) + ["biased"])
    gen.add_argument("--bias-gap", type=float, default=1.5, dest="bias_gap")
    gen.add_argument("--segments", type=int, default=10)
    gen.add_argument("--mode", choices=["features", "signal"], default="features")
    gen.add_argument("--config", default=None, help=argparse.SUPPRESS)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--output", default=None)
    gen.add_argument("--format", default="csv", choices=["csv"])
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="run an experiment and render the results table")
    run.add_argument("--config", default=None)
    run.add_argument("--seed", type=int, action="append", default=None,
                     help="experiment seed; repeat for multiple (overrides config)")
    run.add_argument("--output", default=None)
    run.add_argument("--format", default=None, choices=["markdown", "csv", "json"])
    run.add_argument("--stack", action="store_true",
                     help="apply the configured mitigations jointly in one column")
    run.add_argument("--save-baseline", default=None, dest="save_baseline",
                     help="also train a plain model on the full dataset and save it here")
    run.set_defaults(func=_cmd_run)

    ev = sub.add_parser("evaluate", help="score a saved model against a CSV dataset")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--config", default=None, help=argparse.SUPPRESS)
    ev.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    ev.add_argument("--output", default=None)
    ev.add_argument("--format", default=None, choices=["markdown", "csv", "json"])
    ev.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HarnessError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
