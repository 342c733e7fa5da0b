"""Pre-processing bias mitigation: mixup balancing and massaging.

Mixup appends convex combinations of minority-group example pairs until the
two groups have equal counts. Massaging relabels the m favoured-community
positives and m deprived-community negatives that sit closest to the
decision boundary, zeroing out the dataset's discrimination while keeping
the class totals unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .data import Dataset, MAJORITY, MINORITY
from .seeding import make_rng


@dataclass(frozen=True)
class MixupConfig:
    """Beta(alpha, alpha) interpolation; augments the minority group until
    group counts are equal."""

    alpha: float = 0.4

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")


@dataclass(frozen=True)
class MassagingPlan:
    """m demote/promote index pairs; demote are favoured positives to
    relabel 0, promote are deprived negatives to relabel 1."""

    m: int
    demote: tuple[int, ...]
    promote: tuple[int, ...]
    favoured: int  # group code


def mixup_balance(dataset: Dataset, cfg: MixupConfig, seed: int) -> Dataset:
    """Append synthetic minority examples until group counts are equal.

    Each synthetic example interpolates two distinct minority parents with
    lambda ~ Beta(alpha, alpha); its label is the matching interpolation of
    the parent labels and it carries a fresh synthetic subject id. The
    original examples are returned unchanged, as a prefix of the output.
    """
    groups = dataset.groups
    n_minority = int(np.sum(groups == MINORITY))
    n_majority = int(np.sum(groups == MAJORITY))
    deficit = n_majority - n_minority
    if deficit <= 0:
        return dataset
    pool = np.nonzero(groups == MINORITY)[0]
    if pool.shape[0] < 2:
        raise ValueError("mixup needs at least 2 minority examples")
    rng = make_rng(seed, "mixup")
    new_feats, new_labels, new_sids = [], [], []
    for k in range(deficit):
        i, j = rng.choice(pool, size=2, replace=False)
        lam = float(rng.beta(cfg.alpha, cfg.alpha))
        new_feats.append(lam * dataset.features[i] + (1.0 - lam) * dataset.features[j])
        new_labels.append(lam * dataset.labels[i] + (1.0 - lam) * dataset.labels[j])
        new_sids.append(f"synthetic:mixup:{k}")
    return Dataset(
        features=np.concatenate([dataset.features, np.stack(new_feats)]),
        labels=np.concatenate([dataset.labels, np.array(new_labels)]),
        groups=np.concatenate([groups, np.full(deficit, MINORITY, dtype=np.int8)]),
        subject_ids=dataset.subject_ids + tuple(new_sids),
        weights=np.concatenate([dataset.weights, np.ones(deficit)]),
        group_names=dataset.group_names,
        is_partition=dataset.is_partition,
    )


def _require_hard_labels(dataset: Dataset) -> np.ndarray:
    labels = dataset.labels
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ValueError("operation requires hard 0/1 labels")
    return labels


def _cell_counts(dataset: Dataset) -> dict[int, tuple[int, int]]:
    """(positives, total) per group code."""
    labels = _require_hard_labels(dataset)
    out = {}
    for grp in (MINORITY, MAJORITY):
        m = dataset.groups == grp
        total = int(np.sum(m))
        if total == 0:
            raise ValueError(f"group {dataset.group_names[grp]} has no examples")
        out[grp] = (int(np.sum(labels[m] == 1.0)), total)
    return out


def discrimination(dataset: Dataset) -> tuple[float, int]:
    """Dataset bias: difference in positive-class rates between communities.

    Returns (disc, favoured_group_code) where disc >= 0 and the favoured
    community is the group with the higher positive rate; an exact tie
    favours the majority group (disc is 0 then, so the choice is inert).
    """
    cells = _cell_counts(dataset)
    rate0 = Fraction(cells[MINORITY][0], cells[MINORITY][1])
    rate1 = Fraction(cells[MAJORITY][0], cells[MAJORITY][1])
    if rate0 > rate1:
        return float(rate0 - rate1), MINORITY
    return float(rate1 - rate0), MAJORITY


def relabel_pair_count(dataset: Dataset) -> int:
    """m = ceil(disc * P(fav) * P(dep) * |D|), computed exactly."""
    cells = _cell_counts(dataset)
    n0, n1 = cells[MINORITY][1], cells[MAJORITY][1]
    total = n0 + n1
    rate0 = Fraction(cells[MINORITY][0], n0)
    rate1 = Fraction(cells[MAJORITY][0], n1)
    disc = abs(rate0 - rate1)
    return int(math.ceil(disc * Fraction(n0, total) * Fraction(n1, total) * total))


def massaging_plan(dataset: Dataset, probabilities: Sequence[float]) -> MassagingPlan:
    """Select the m boundary-closest examples per community to relabel.

    ``probabilities`` are the per-example predicted probabilities of class 1
    (from a model trained on the unmodified data). Demotions are the
    favoured positives with the lowest p(1|x); promotions the deprived
    negatives with the lowest p(0|x), i.e. the highest p(1|x). Ties break
    by example index.
    """
    labels = _require_hard_labels(dataset)
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.shape[0] != len(dataset):
        raise ValueError("probabilities must align with the dataset")
    disc, favoured = discrimination(dataset)
    deprived = MAJORITY if favoured == MINORITY else MINORITY
    m = relabel_pair_count(dataset)
    if m == 0:
        return MassagingPlan(m=0, demote=(), promote=(), favoured=favoured)
    demote_pool = np.nonzero((dataset.groups == favoured) & (labels == 1.0))[0]
    promote_pool = np.nonzero((dataset.groups == deprived) & (labels == 0.0))[0]
    if demote_pool.shape[0] < m:
        raise ValueError(
            f"need {m} favoured positives to demote, only {demote_pool.shape[0]} available"
        )
    if promote_pool.shape[0] < m:
        raise ValueError(
            f"need {m} deprived negatives to promote, only {promote_pool.shape[0]} available"
        )
    # sort on (probability, index) gives deterministic tie-breaks
    demote = tuple(int(i) for i in sorted(demote_pool, key=lambda i: (probs[i], i))[:m])
    promote = tuple(int(i) for i in sorted(promote_pool, key=lambda i: (-probs[i], i))[:m])
    return MassagingPlan(m=m, demote=demote, promote=promote, favoured=favoured)


def apply_massaging(dataset: Dataset, plan: MassagingPlan) -> Dataset:
    """Flip labels at the planned indices; the class totals are preserved."""
    labels = _require_hard_labels(dataset).copy()
    for i in plan.demote:
        if labels[i] != 1.0 or dataset.groups[i] != plan.favoured:
            raise ValueError(f"stale plan: example {i} is no longer a favoured positive")
    deprived = MAJORITY if plan.favoured == MINORITY else MINORITY
    for i in plan.promote:
        if labels[i] != 0.0 or dataset.groups[i] != deprived:
            raise ValueError(f"stale plan: example {i} is no longer a deprived negative")
    labels[list(plan.demote)] = 0.0
    labels[list(plan.promote)] = 1.0
    return dataset.with_labels(labels)


def plan_record(plan: MassagingPlan) -> dict:
    """Small serializable record for audit logs."""
    return {"m": plan.m, "demote": list(plan.demote), "promote": list(plan.promote)}
