"""Shared domain types: examples, datasets, deterministic splitting.

Group encoding is normalized once at construction time: group 0 is the
minority (the underrepresented group, always the numerator of fairness
ratios downstream) and group 1 the majority. Ties in size are broken by
declaring the lexicographically first group name the minority.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .seeding import make_rng

MINORITY = 0
MAJORITY = 1


@dataclass(frozen=True)
class Example:
    """One classification example.

    ``label`` is usually a hard 0/1 value; soft labels in [0, 1] are
    permitted (mixup products). ``group`` is 0 for the minority group and
    1 for the majority.
    """

    features: np.ndarray
    label: float
    group: int
    subject_id: str
    weight: float = 1.0


def encode_groups(tokens: Sequence[str]) -> tuple[np.ndarray, tuple[str, str]]:
    """Map raw group tokens to minority/majority codes.

    Returns the per-example codes (0 = minority, 1 = majority) and the
    ``(minority_name, majority_name)`` pair. The smaller group is the
    minority; on a tie the lexicographically first name is the minority.
    """
    names = sorted(set(tokens))
    if len(names) != 2:
        raise ValueError(f"expected exactly 2 group tokens, found {names}")
    counts = {name: 0 for name in names}
    for tok in tokens:
        counts[tok] += 1
    if counts[names[0]] <= counts[names[1]]:
        minority, majority = names[0], names[1]
    else:
        minority, majority = names[1], names[0]
    codes = np.fromiter(
        (MINORITY if tok == minority else MAJORITY for tok in tokens),
        dtype=np.int8,
        count=len(tokens),
    )
    return codes, (minority, majority)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Immutable columnar dataset.

    ``group_names`` maps group code to human-readable label, index 0 being
    the minority. ``is_partition`` marks folds/subsets of a parent dataset,
    which are allowed to miss a group or a class.
    """

    features: np.ndarray  # (n, feature_dim) float64
    labels: np.ndarray  # (n,) float64 in [0, 1]
    groups: np.ndarray  # (n,) int8, 0 minority / 1 majority
    subject_ids: tuple[str, ...]
    weights: np.ndarray  # (n,) float64, > 0
    group_names: tuple[str, str] = ("s0", "s1")
    is_partition: bool = False

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(np.asarray(self.features, dtype=np.float64)))
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.float64)))
        object.__setattr__(self, "groups", _frozen(np.asarray(self.groups, dtype=np.int8)))
        object.__setattr__(self, "weights", _frozen(np.asarray(self.weights, dtype=np.float64)))
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def __iter__(self) -> Iterator[Example]:
        return (self.example(i) for i in range(len(self)))

    def example(self, i: int) -> Example:
        return Example(
            features=self.features[i],
            label=float(self.labels[i]),
            group=int(self.groups[i]),
            subject_id=self.subject_ids[i],
            weight=float(self.weights[i]),
        )

    @classmethod
    def from_examples(
        cls,
        examples: Sequence[Example],
        group_names: tuple[str, str] = ("s0", "s1"),
        is_partition: bool = False,
    ) -> "Dataset":
        if not examples:
            raise ValueError("cannot build a dataset from zero examples")
        return cls(
            features=np.stack([np.asarray(e.features, dtype=np.float64) for e in examples]),
            labels=np.array([e.label for e in examples], dtype=np.float64),
            groups=np.array([e.group for e in examples], dtype=np.int8),
            subject_ids=tuple(e.subject_id for e in examples),
            weights=np.array([e.weight for e in examples], dtype=np.float64),
            group_names=group_names,
            is_partition=is_partition,
        )

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Row subset, flagged as a partition of this dataset."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            groups=self.groups[idx],
            subject_ids=tuple(self.subject_ids[i] for i in idx),
            weights=self.weights[idx],
            group_names=self.group_names,
            is_partition=True,
        )

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return replace(self, labels=np.asarray(labels, dtype=np.float64))

    def with_weights(self, weights: np.ndarray) -> "Dataset":
        return replace(self, weights=np.asarray(weights, dtype=np.float64))


def validate(dataset: Dataset) -> list[str]:
    """Check dataset invariants; returns violation descriptions (never raises).

    An empty list means the dataset is well-formed for every downstream
    operation's shape preconditions.
    """
    violations: list[str] = []
    n = len(dataset)
    if n == 0:
        return ["dataset is empty"]
    if dataset.features.ndim != 2:
        return [f"features must be a 2-D matrix, got ndim={dataset.features.ndim}"]
    dim = dataset.feature_dim
    if dim < 1:
        violations.append("feature dimension must be >= 1")
    for i in range(n):
        if not np.all(np.isfinite(dataset.features[i])):
            violations.append(f"example {i}: non-finite feature value")
    labels = dataset.labels
    for i in np.nonzero((labels < 0.0) | (labels > 1.0) | ~np.isfinite(labels))[0]:
        violations.append(f"example {int(i)}: label {labels[int(i)]} outside [0, 1]")
    for i in np.nonzero(~(dataset.weights > 0.0))[0]:
        violations.append(f"example {int(i)}: weight {dataset.weights[int(i)]} is not > 0")
    for i in np.nonzero((dataset.groups != MINORITY) & (dataset.groups != MAJORITY))[0]:
        violations.append(f"example {int(i)}: group code {dataset.groups[int(i)]} is not 0 or 1")
    if len(dataset.subject_ids) != n:
        violations.append("subject_ids length does not match example count")
    if not dataset.is_partition:
        for g in (MINORITY, MAJORITY):
            if not np.any(dataset.groups == g):
                violations.append(f"group {dataset.group_names[g]} has no examples")
        for cls in (0.0, 1.0):
            if not np.any(labels == cls):
                violations.append(f"no examples with hard label {int(cls)}")
    return violations


@dataclass(frozen=True)
class SplitSpec:
    """Holdout or k-fold splitting, stratified and seeded.

    ``stratify_on`` is ``"label"`` or ``"label_group"``; the default keeps
    every group-by-class cell represented in every fold, which keeps the
    fairness ratios non-degenerate. ``by_subject`` switches to
    subject-independent assignment (all segments of one subject land in the
    same fold); the default follows segment-level splitting.
    """

    kind: str = "kfold"  # "kfold" | "holdout"
    k: int = 5
    train_fraction: float = 0.8
    seed: int = 0
    stratify_on: str = "label_group"
    by_subject: bool = False

    def __post_init__(self):
        if self.kind not in ("kfold", "holdout"):
            raise ValueError(f"unknown split kind {self.kind!r}")
        if self.kind == "kfold" and self.k < 2:
            raise ValueError("kfold requires k >= 2")
        if self.kind == "holdout" and not (0.0 < self.train_fraction < 1.0):
            raise ValueError("holdout requires train_fraction in (0, 1)")
        if self.stratify_on not in ("label", "label_group"):
            raise ValueError(f"unknown stratify_on {self.stratify_on!r}")


def _stratum_key(dataset: Dataset, i: int, stratify_on: str) -> tuple:
    label = 1 if dataset.labels[i] >= 0.5 else 0
    if stratify_on == "label":
        return (label,)
    return (label, int(dataset.groups[i]))


def _stratum_name(key: tuple, group_names: tuple[str, str]) -> str:
    if len(key) == 1:
        return f"label={key[0]}"
    return f"label={key[0]},group={group_names[key[1]]}"


def _strata(
    dataset: Dataset, spec: SplitSpec
) -> tuple[list[tuple[tuple, list[int]]], list[list[int]]]:
    """Group unit indices (examples or subjects) into sorted strata.

    Returns (strata, units) where each stratum lists unit indices and each
    unit lists the dataset rows it owns (a single row unless by_subject).
    """
    if spec.by_subject:
        subject_rows: dict[str, list[int]] = {}
        for i, sid in enumerate(dataset.subject_ids):
            subject_rows.setdefault(sid, []).append(i)
        units = [rows for _, rows in sorted(subject_rows.items())]
    else:
        units = [[i] for i in range(len(dataset))]
    strata: dict[tuple, list[int]] = {}
    for u, rows in enumerate(units):
        strata.setdefault(_stratum_key(dataset, rows[0], spec.stratify_on), []).append(u)
    return [(key, strata[key]) for key in sorted(strata)], units


def split(dataset: Dataset, spec: SplitSpec) -> list[tuple[Dataset, Dataset]]:
    """Deterministic stratified split into (train, test) dataset pairs.

    kfold yields k disjoint pairs whose test folds partition the dataset;
    holdout yields a single pair. Within each stratum the fold sizes differ
    by at most one unit.
    """
    (strata, units) = _strata(dataset, spec)
    rng = make_rng(spec.seed, "split")
    if spec.kind == "kfold":
        fold_units: list[list[int]] = [[] for _ in range(spec.k)]
        for key, members in strata:
            if len(members) < spec.k:
                raise ValueError(
                    f"stratum {_stratum_name(key, dataset.group_names)} has "
                    f"{len(members)} members, fewer than k={spec.k}"
                )
            perm = rng.permutation(len(members))
            for pos, j in enumerate(perm):
                fold_units[pos % spec.k].append(members[j])
        pairs = []
        for f in range(spec.k):
            test_rows = sorted(r for u in fold_units[f] for r in units[u])
            train_rows = sorted(
                r for g in range(spec.k) if g != f for u in fold_units[g] for r in units[u]
            )
            pairs.append((dataset.subset(train_rows), dataset.subset(test_rows)))
        return pairs
    # holdout
    train_units: list[int] = []
    test_units: list[int] = []
    for key, members in strata:
        n_train = int(round(spec.train_fraction * len(members)))
        n_train = min(max(n_train, 1), len(members) - 1) if len(members) >= 2 else n_train
        perm = rng.permutation(len(members))
        for pos, j in enumerate(perm):
            (train_units if pos < n_train else test_units).append(members[j])
    train_rows = sorted(r for u in train_units for r in units[u])
    test_rows = sorted(r for u in test_units for r in units[u])
    if not train_rows or not test_rows:
        raise ValueError("holdout split produced an empty train or test side")
    return [(dataset.subset(train_rows), dataset.subset(test_rows))]


def canonical_order(dataset: Dataset) -> list[int]:
    """Indices sorted by example content, independent of storage order.

    Training shuffles positions of this order, which makes trained
    parameters invariant to how the input rows happen to be stored.
    """
    def key(i: int):
        return (
            dataset.subject_ids[i],
            float(dataset.labels[i]),
            int(dataset.groups[i]),
            float(dataset.weights[i]),
            dataset.features[i].tobytes(),
        )

    return sorted(range(len(dataset)), key=key)
