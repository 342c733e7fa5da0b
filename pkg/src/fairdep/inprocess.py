"""In-processing bias mitigation.

Reweighing assigns each (class, group) cell the weight
P(Y=y) / P(Y=y | S=s), which makes class and group statistically independent
under the weighted measure. The regularised loss adds
lam_eopp * |TPR gap| + lam_eodd * |FPR gap| penalties computed from
probability-weighted per-group rate estimates; gamma > 1 sharpens the
probabilities first so the soft estimates track the hard-prediction rates.
The two-stage pipeline fine-tunes a plainly trained model with that loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .data import Dataset, Example, MAJORITY, MINORITY
from .model import (
    Architecture,
    LossSpec,
    ModelParams,
    TrainConfig,
    fine_tune,
    sharpen_probabilities,
    soft_group_rates,
    train,
)


@dataclass(frozen=True)
class ReweighTable:
    """Weight per (class, group) cell, keyed (label, group_code)."""

    weights: dict[tuple[int, int], float]

    def weight_for(self, label: float, group: int) -> float:
        return self.weights[(int(label), int(group))]

    def serialize(self, group_names: tuple[str, str] = ("s0", "s1")) -> dict:
        return {
            f"class={y},group={group_names[g]}": w for (y, g), w in sorted(self.weights.items())
        }


@dataclass(frozen=True)
class RegPenaltyConfig:
    lam_eopp: float = 2.0
    lam_eodd: float = 2.0
    gamma: float = 1.0
    two_stage: bool = True

    def __post_init__(self):
        if self.lam_eopp < 0 or self.lam_eodd < 0:
            raise ValueError("penalty strengths must be non-negative")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")


def reweigh_table(dataset: Dataset) -> ReweighTable:
    """Weights beta(y, s) = P(Y=y) / P(Y=y | S=s), computed exactly.

    Requires hard labels and all four (class, group) cells non-empty.
    Assigning these weights makes the weighted joint of class and group
    factor into the product of the marginals, and their sum over the
    dataset equals its size.
    """
    labels = dataset.labels
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ValueError("reweighing requires hard 0/1 labels")
    n = len(dataset)
    weights = {}
    for y in (0, 1):
        n_y = int(np.sum(labels == float(y)))
        for g in (MINORITY, MAJORITY):
            mask = (labels == float(y)) & (dataset.groups == g)
            n_yg = int(np.sum(mask))
            n_g = int(np.sum(dataset.groups == g))
            if n_yg == 0:
                raise ValueError(
                    f"empty cell: class={y}, group={dataset.group_names[g]}"
                )
            weights[(y, g)] = float(Fraction(n_y, n) / Fraction(n_yg, n_g))
    return ReweighTable(weights=weights)


def apply_reweighing(dataset: Dataset) -> tuple[Dataset, ReweighTable]:
    """Dataset with per-example weights from the reweigh table."""
    table = reweigh_table(dataset)
    new_weights = np.array(
        [table.weight_for(dataset.labels[i], dataset.groups[i]) for i in range(len(dataset))]
    )
    return dataset.with_weights(new_weights), table


def _labels_groups(batch: Union[Dataset, Sequence[Example]]):
    if isinstance(batch, Dataset):
        return batch.labels, batch.groups
    y = np.array([e.label for e in batch], dtype=np.float64)
    g = np.array([e.group for e in batch], dtype=np.int8)
    return y, g


def soft_rates(
    batch: Union[Dataset, Sequence[Example]],
    probabilities: Sequence[float],
    group: int,
) -> tuple[Optional[float], Optional[float]]:
    """Probability-weighted (TPR, FPR) estimate for one group.

    Either value is None when the group has no positives (TPR) or no
    negatives (FPR) in the batch.
    """
    y, g = _labels_groups(batch)
    rates = soft_group_rates(y, g, np.asarray(probabilities, dtype=np.float64))
    return rates[group]


def reg_penalty(
    batch: Union[Dataset, Sequence[Example]],
    probabilities: Sequence[float],
    cfg: RegPenaltyConfig,
) -> tuple[float, float]:
    """(TPR gap, FPR gap): absolute inter-group differences of soft rates.

    A gap is 0 when either group's rate is unavailable in the batch. With
    gamma > 1 the probabilities are sharpened before rate estimation.
    """
    y, g = _labels_groups(batch)
    probs = sharpen_probabilities(np.asarray(probabilities, dtype=np.float64), cfg.gamma)
    rates = soft_group_rates(y, g, probs)
    (tpr0, fpr0), (tpr1, fpr1) = rates[MINORITY], rates[MAJORITY]
    tpr_gap = abs(tpr0 - tpr1) if tpr0 is not None and tpr1 is not None else 0.0
    fpr_gap = abs(fpr0 - fpr1) if fpr0 is not None and fpr1 is not None else 0.0
    return tpr_gap, fpr_gap


def regularised_loss(
    batch: Union[Dataset, Sequence[Example]],
    params: ModelParams,
    cfg: RegPenaltyConfig,
) -> tuple[float, dict[str, np.ndarray]]:
    """Plain CE mean plus the weighted rate-gap penalties, with gradients."""
    from .model import batch_loss

    spec = LossSpec.regularised(cfg.lam_eopp, cfg.lam_eodd, cfg.gamma)
    return batch_loss(params, batch, spec)


def reg_plus_pipeline(
    dataset: Dataset,
    arch: Architecture,
    stage1: TrainConfig,
    stage2: TrainConfig,
) -> ModelParams:
    """Two-stage training: plain stage one, regularised fine-tune stage two.

    gamma = 1 in the stage-two loss reproduces the original regularisation
    method; larger gamma is the sharpened variant.
    """
    if stage2.loss.kind != "regularised":
        raise ValueError("stage2 must use a regularised loss")
    params, _ = train(dataset, arch, stage1)
    return fine_tune(params, dataset, stage2)
