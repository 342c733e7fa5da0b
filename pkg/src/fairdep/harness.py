"""Experiment orchestration: CSV ingestion, mitigation grid, result tables.

The CSV dataset schema is ``subject_id,group,label,f0,...,f{d-1}`` with
arbitrary group tokens (mapped to minority/majority by counting), hard 0/1
labels and decimal-point floats.

An experiment runs, for every seed and fold: a plain baseline, then each
configured mitigation independently against the same fold data.
Pre-processing transforms the training split only; in-processing changes
the loss or pipeline; post-processing adjusts the baseline's test
predictions without retraining. Cells aggregate to mean and population
standard deviation across folds x seeds.
"""

from __future__ import annotations

import csv
import io
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .data import Dataset, SplitSpec, encode_groups, split, validate
from .inprocess import apply_reweighing
from .metrics import (
    FAIRNESS_KEYS,
    METRIC_KEYS,
    ExtendedRatio,
    band_check,
    fairness,
    grouped_confusion,
    hard_predictions,
    performance,
    report_record,
)
from .model import (
    Architecture,
    LossSpec,
    ModelParams,
    TrainConfig,
    fine_tune,
    predict_proba,
    train,
)
from .postprocess import RocConfig, roc_adjust
from .preprocess import MixupConfig, apply_massaging, massaging_plan, mixup_balance
from .seeding import derive_seed
from .synth import biased_preset, generate, preset_config


class HarnessError(Exception):
    """Error tagged with its (seed, fold, mitigation) coordinate."""


# ---------------------------------------------------------------------------
# CSV ingestion / export


def load_csv(path: str) -> Dataset:
    """Read and validate a dataset; errors name the offending row/column."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if header[:3] != ["subject_id", "group", "label"]:
            raise ValueError(
                f"{path}: header must start with subject_id,group,label, got {header[:3]}"
            )
        dim = len(header) - 3
        expected = [f"f{i}" for i in range(dim)]
        if header[3:] != expected:
            raise ValueError(f"{path}: feature columns must be f0..f{dim - 1}")
        if dim < 1:
            raise ValueError(f"{path}: no feature columns")
        sids, tokens, labels, rows = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {lineno}: expected {len(header)} fields")
            sids.append(row[0])
            tokens.append(row[1])
            try:
                label = float(row[2])
            except ValueError:
                label = None
            if label not in (0.0, 1.0):
                raise ValueError(f"{path}: row {lineno}, column label: {row[2]!r} is not 0 or 1")
            labels.append(label)
            feats = np.empty(dim)
            for j, cell in enumerate(row[3:]):
                try:
                    feats[j] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {lineno}, column f{j}: {cell!r} is not numeric"
                    ) from None
            rows.append(feats)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    try:
        codes, group_names = encode_groups(tokens)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    dataset = Dataset(
        features=np.stack(rows),
        labels=np.array(labels),
        groups=codes,
        subject_ids=tuple(sids),
        weights=np.ones(len(rows)),
        group_names=group_names,
    )
    violations = validate(dataset)
    if violations:
        raise ValueError(f"{path}: invalid dataset: " + "; ".join(violations))
    return dataset


def write_csv(dataset: Dataset, path: str) -> None:
    """Export in the load_csv schema; floats use repr so round-trips are exact."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        dim = dataset.feature_dim
        writer.writerow(["subject_id", "group", "label"] + [f"f{i}" for i in range(dim)])
        for i in range(len(dataset)):
            label = dataset.labels[i]
            label_text = str(int(label)) if label in (0.0, 1.0) else repr(float(label))
            writer.writerow(
                [dataset.subject_ids[i], dataset.group_names[dataset.groups[i]], label_text]
                + [repr(float(v)) for v in dataset.features[i]]
            )


# ---------------------------------------------------------------------------
# Experiment configuration


@dataclass(frozen=True)
class MitigationSpec:
    name: str
    params: tuple[float, ...] = ()

    _DEFAULTS = {
        "none": (),
        "mixup": (0.4,),
        "massaging": (),
        "reweighing": (),
        "regularisation": (2.0, 2.0),
        "reg_plus": (2.0, 2.0, 20.0),
        "roc": (0.6,),
    }

    @classmethod
    def parse(cls, text: str) -> "MitigationSpec":
        text = text.strip()
        if "(" in text:
            if not text.endswith(")"):
                raise ValueError(f"malformed mitigation spec {text!r}")
            name, arg_text = text[:-1].split("(", 1)
            args = tuple(float(a) for a in arg_text.split(",") if a.strip())
        else:
            name, args = text, ()
        name = name.strip()
        if name not in cls._DEFAULTS:
            raise ValueError(f"unknown mitigation {name!r}")
        defaults = cls._DEFAULTS[name]
        if len(args) > len(defaults):
            raise ValueError(f"too many parameters for mitigation {name!r}")
        args = args + defaults[len(args):]
        spec = cls(name=name, params=args)
        spec._validate()
        return spec

    def _validate(self) -> None:
        if self.name == "mixup" and self.params[0] <= 0:
            raise ValueError("mixup alpha must be > 0")
        if self.name in ("regularisation", "reg_plus") and (
            self.params[0] < 0 or self.params[1] < 0
        ):
            raise ValueError("penalty strengths must be non-negative")
        if self.name == "reg_plus" and self.params[2] < 1.0:
            raise ValueError("gamma must be >= 1")
        if self.name == "roc" and not 0.5 < self.params[0] < 1.0:
            raise ValueError("tau must satisfy 0.5 < tau < 1")

    def label(self) -> str:
        if self.name == "none":
            return "base"
        if not self.params:
            return self.name
        args = ",".join(f"{p:g}" for p in self.params)
        return f"{self.name}({args})"


@dataclass(frozen=True)
class ExperimentConfig:
    data_csv: Optional[str] = None
    preset: Optional[str] = None  # "mumtaz-like" | "modma-like" | "rest-like" | "biased"
    bias_gap: float = 1.5
    segments_per_subject: int = 10
    data_seed: int = 0
    model: str = "logistic"
    hidden_width: int = 16
    learning_rate: float = 0.05
    batch_size: int = 32
    epochs: int = 40
    l2_strength: float = 0.0
    evaluation: str = "kfold(5)"
    mitigations: tuple[str, ...] = ("none",)
    seeds: tuple[int, ...] = (1,)
    stack: bool = False
    output: Optional[str] = None
    format: str = "markdown"

    def __post_init__(self):
        if (self.data_csv is None) == (self.preset is None):
            raise ValueError("configure exactly one of data_csv or preset")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.model not in ("logistic", "mlp"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.format not in ("markdown", "csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")
        self.parsed_mitigations()
        self.split_spec(0)

    def parsed_mitigations(self) -> list[MitigationSpec]:
        return [MitigationSpec.parse(m) for m in self.mitigations]

    def split_spec(self, seed: int) -> SplitSpec:
        text = self.evaluation.strip()
        if text.startswith("kfold(") and text.endswith(")"):
            return SplitSpec(kind="kfold", k=int(text[6:-1]), seed=seed)
        if text.startswith("holdout(") and text.endswith(")"):
            return SplitSpec(kind="holdout", train_fraction=float(text[8:-1]), seed=seed)
        raise ValueError(f"evaluation must be kfold(k) or holdout(fraction), got {text!r}")

    def architecture(self) -> Architecture:
        return Architecture(kind=self.model, hidden_width=self.hidden_width)


_CONFIG_KEYS = {
    "data_csv", "preset", "bias_gap", "segments_per_subject", "data_seed",
    "model", "hidden_width", "learning_rate", "batch_size", "epochs",
    "l2_strength", "evaluation", "mitigations", "seeds", "stack",
    "output", "format",
}


def load_experiment_config(path: str, **overrides) -> ExperimentConfig:
    """Read a flat TOML config; keyword overrides (CLI flags) win."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    merged = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    for key in ("mitigations", "seeds"):
        if key in merged:
            merged[key] = tuple(merged[key])
    return ExperimentConfig(**merged)


# ---------------------------------------------------------------------------
# Running experiments


@dataclass(frozen=True)
class CellStats:
    """Aggregated cell: mean is a float, "inf", "equal" or None (undefined)."""

    mean: object
    std: Optional[float]
    fair: Optional[bool]  # None on performance rows
    n: int

    def text(self) -> str:
        if self.mean is None:
            return "undef"
        if isinstance(self.mean, str):
            body = self.mean
        else:
            body = f"{self.mean:.4f}"
            if self.std is not None:
                body += f"±{self.std:.4f}"
        if self.fair is False:
            body += "!"
        return body


@dataclass(frozen=True)
class ResultsTable:
    columns: tuple[str, ...]
    cells: dict[str, tuple[CellStats, ...]]  # metric key -> one cell per column
    metric_keys: tuple[str, ...] = METRIC_KEYS


def evaluate_predictions(test: Dataset, predictions: np.ndarray) -> dict:
    """Nine-key record: performance on the combined confusion, fairness per group."""
    labels = hard_predictions(test.labels)  # hard labels expected on folds
    gc = grouped_confusion(labels, predictions, test.groups)
    return report_record(performance(gc.combined), fairness(gc, test.group_names))


def _load_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.data_csv is not None:
        return load_csv(cfg.data_csv)
    if cfg.preset == "biased":
        return biased_preset(cfg.bias_gap, cfg.data_seed)
    return generate(
        replace(
            preset_config(cfg.preset, segments_per_subject=cfg.segments_per_subject),
            seed=cfg.data_seed,
        )
    )


def _train_config(cfg: ExperimentConfig, seed: int, loss: LossSpec, epochs: Optional[int] = None) -> TrainConfig:
    return TrainConfig(
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        epochs=cfg.epochs if epochs is None else epochs,
        l2_strength=cfg.l2_strength,
        seed=seed,
        loss=loss,
    )


def _stage2_epochs(cfg: ExperimentConfig) -> int:
    # stage two defaults to half the stage-one epochs, same learning rate
    return max(1, cfg.epochs // 2)


def _run_mitigation(
    cfg: ExperimentConfig,
    mit: MitigationSpec,
    train_ds: Dataset,
    test_ds: Dataset,
    baseline: ModelParams,
    base_test_probs: np.ndarray,
    seed: int,
    fold_idx: int,
) -> dict:
    arch = cfg.architecture()
    train_seed = derive_seed(seed, "fold", fold_idx, "train", mit.label())
    if mit.name == "none":
        preds = hard_predictions(base_test_probs)
        return evaluate_predictions(test_ds, preds)
    if mit.name == "roc":
        preds = roc_adjust(base_test_probs, test_ds.groups, RocConfig(tau=mit.params[0]))
        return evaluate_predictions(test_ds, preds)
    if mit.name == "mixup":
        aug = mixup_balance(
            train_ds,
            MixupConfig(alpha=mit.params[0]),
            seed=derive_seed(seed, "fold", fold_idx, "mixup", mit.label()),
        )
        params, _ = train(aug, arch, _train_config(cfg, train_seed, LossSpec.plain()))
    elif mit.name == "massaging":
        probs = predict_proba(baseline, train_ds.features)
        plan = massaging_plan(train_ds, probs)
        params, _ = train(
            apply_massaging(train_ds, plan), arch, _train_config(cfg, train_seed, LossSpec.plain())
        )
    elif mit.name == "reweighing":
        weighted, _ = apply_reweighing(train_ds)
        params, _ = train(weighted, arch, _train_config(cfg, train_seed, LossSpec.weighted()))
    elif mit.name in ("regularisation", "reg_plus"):
        gamma = mit.params[2] if mit.name == "reg_plus" else 1.0
        loss = LossSpec.regularised(mit.params[0], mit.params[1], gamma)
        params = fine_tune(
            baseline, train_ds, _train_config(cfg, train_seed, loss, epochs=_stage2_epochs(cfg))
        )
    else:  # pragma: no cover - parse() already rejects unknown names
        raise ValueError(f"unhandled mitigation {mit.name!r}")
    preds = hard_predictions(predict_proba(params, test_ds.features))
    return evaluate_predictions(test_ds, preds)


def _run_stacked(
    cfg: ExperimentConfig,
    mits: list[MitigationSpec],
    train_ds: Dataset,
    test_ds: Dataset,
    baseline: ModelParams,
    seed: int,
    fold_idx: int,
) -> dict:
    """Apply the configured mitigations jointly: pre-processing in order,
    at most one loss-level method, post-processing on the final predictions."""
    arch = cfg.architecture()
    label = "+".join(m.label() for m in mits if m.name != "none")
    train_seed = derive_seed(seed, "fold", fold_idx, "train", f"stack:{label}")
    ds = train_ds
    loss_specs = [m for m in mits if m.name in ("reweighing", "regularisation", "reg_plus")]
    if len(loss_specs) > 1:
        raise ValueError("stacking supports at most one loss-level mitigation")
    roc_specs = [m for m in mits if m.name == "roc"]
    for mit in mits:
        if mit.name == "mixup":
            ds = mixup_balance(
                ds, MixupConfig(alpha=mit.params[0]),
                seed=derive_seed(seed, "fold", fold_idx, "mixup", f"stack:{label}"),
            )
        elif mit.name == "massaging":
            probs = predict_proba(baseline, ds.features)
            ds = apply_massaging(ds, massaging_plan(ds, probs))
    if loss_specs and loss_specs[0].name == "reweighing":
        ds, _ = apply_reweighing(ds)
        params, _ = train(ds, arch, _train_config(cfg, train_seed, LossSpec.weighted()))
    elif loss_specs:
        mit = loss_specs[0]
        gamma = mit.params[2] if mit.name == "reg_plus" else 1.0
        stage1, _ = train(ds, arch, _train_config(cfg, train_seed, LossSpec.plain()))
        params = fine_tune(
            stage1, ds,
            _train_config(
                cfg, derive_seed(train_seed, "stage2"),
                LossSpec.regularised(mit.params[0], mit.params[1], gamma),
                epochs=_stage2_epochs(cfg),
            ),
        )
    else:
        params, _ = train(ds, arch, _train_config(cfg, train_seed, LossSpec.plain()))
    probs = predict_proba(params, test_ds.features)
    if roc_specs:
        preds = roc_adjust(probs, test_ds.groups, RocConfig(tau=roc_specs[0].params[0]))
    else:
        preds = hard_predictions(probs)
    return evaluate_predictions(test_ds, preds)


def run_experiment(cfg: ExperimentConfig) -> ResultsTable:
    """Execute the full seed x fold x mitigation grid and aggregate."""
    dataset = _load_dataset(cfg)
    violations = validate(dataset)
    if violations:
        raise HarnessError("invalid dataset: " + "; ".join(violations))
    mits = cfg.parsed_mitigations()
    if cfg.stack:
        columns = ["stack(" + "+".join(m.label() for m in mits if m.name != "none") + ")"]
    else:
        columns = [m.label() for m in mits]
    records: list[list[dict]] = [[] for _ in columns]
    arch = cfg.architecture()
    for seed in cfg.seeds:
        try:
            pairs = split(dataset, cfg.split_spec(seed))
        except ValueError as exc:
            raise HarnessError(f"[seed={seed} split] {exc}") from exc
        for fold_idx, (train_ds, test_ds) in enumerate(pairs):
            base_seed = derive_seed(seed, "fold", fold_idx, "train", "base")
            baseline, _ = train(train_ds, arch, _train_config(cfg, base_seed, LossSpec.plain()))
            base_test_probs = predict_proba(baseline, test_ds.features)
            if cfg.stack:
                try:
                    records[0].append(
                        _run_stacked(cfg, mits, train_ds, test_ds, baseline, seed, fold_idx)
                    )
                except ValueError as exc:
                    raise HarnessError(
                        f"[seed={seed} fold={fold_idx} mitigation=stack] {exc}"
                    ) from exc
            else:
                for col, mit in enumerate(mits):
                    try:
                        records[col].append(
                            _run_mitigation(
                                cfg, mit, train_ds, test_ds, baseline,
                                base_test_probs, seed, fold_idx,
                            )
                        )
                    except ValueError as exc:
                        raise HarnessError(
                            f"[seed={seed} fold={fold_idx} mitigation={mit.label()}] {exc}"
                        ) from exc
    cells = {key: tuple(_aggregate(key, recs) for recs in records) for key in METRIC_KEYS}
    return ResultsTable(columns=tuple(columns), cells=cells)


def _aggregate(metric: str, records: list[dict]) -> CellStats:
    values = [rec[metric] for rec in records]
    n = len(values)
    is_fairness = metric in FAIRNESS_KEYS
    if is_fairness:
        if any(v == "inf" for v in values):
            return CellStats(mean="inf", std=None, fair=False, n=n)
        nums = [1.0 if v == "equal" else float(v) for v in values]
    else:
        nums = [float(v) for v in values if v is not None]
        if not nums:
            return CellStats(mean=None, std=None, fair=None, n=n)
    mean = float(np.mean(nums))
    std = float(np.std(nums)) if len(nums) >= 2 else None
    fair = band_check(ExtendedRatio.finite(mean)) if is_fairness else None
    return CellStats(mean=mean, std=std, fair=fair, n=n)


# ---------------------------------------------------------------------------
# Rendering


def render_table(results: ResultsTable, format: str = "markdown") -> str:
    """Stable text rendering; numbers share one formatter across formats."""
    if format == "markdown":
        lines = ["| metric | " + " | ".join(results.columns) + " |"]
        lines.append("|" + "---|" * (len(results.columns) + 1))
        for key in results.metric_keys:
            row = [cell.text() for cell in results.cells[key]]
            lines.append("| " + " | ".join([key] + row) + " |")
        return "\n".join(lines) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric"] + list(results.columns))
        for key in results.metric_keys:
            writer.writerow([key] + [cell.text() for cell in results.cells[key]])
        return buf.getvalue()
    if format == "json":
        payload = {
            "columns": list(results.columns),
            "metrics": {
                key: [
                    {"mean": cell.mean, "std": cell.std, "fair": cell.fair, "n": cell.n}
                    for cell in results.cells[key]
                ]
                for key in results.metric_keys
            },
        }
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown format {format!r}")
