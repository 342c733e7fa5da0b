"""Confusion counts per group, performance metrics, fairness ratio metrics.

All fairness ratios put the minority group (code 0) in the numerator. A
ratio is an extended value: finite, positive infinity (positive numerator
over a zero denominator) or equal-by-convention (0/0, treated as fair since
both groups have identical zero rates). A metric is acceptably fair when it
falls inside the band [0.8, 1.2], bounds inclusive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import MAJORITY, MINORITY

FAIR_LOWER = 0.8
FAIR_UPPER = 1.2

FINITE = "finite"
POSITIVE_INFINITY = "inf"
EQUAL_BY_CONVENTION = "equal"

#: Fixed serialization keys for the flat report record.
PERFORMANCE_KEYS = ("accuracy", "sensitivity", "specificity", "precision", "f1")
FAIRNESS_KEYS = ("m_sp", "m_eopp", "m_eodd", "m_eacc")
METRIC_KEYS = PERFORMANCE_KEYS + FAIRNESS_KEYS


@dataclass(frozen=True)
class ExtendedRatio:
    kind: str  # FINITE | POSITIVE_INFINITY | EQUAL_BY_CONVENTION
    value: Optional[float] = None  # set only for FINITE

    @classmethod
    def finite(cls, value: float) -> "ExtendedRatio":
        return cls(FINITE, float(value))

    @classmethod
    def infinity(cls) -> "ExtendedRatio":
        return cls(POSITIVE_INFINITY)

    @classmethod
    def equal(cls) -> "ExtendedRatio":
        return cls(EQUAL_BY_CONVENTION)

    def serialize(self):
        """A number for finite values, else the string "inf" or "equal"."""
        return self.value if self.kind == FINITE else self.kind


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


@dataclass(frozen=True)
class GroupedConfusion:
    minority: ConfusionCounts
    majority: ConfusionCounts

    @property
    def combined(self) -> ConfusionCounts:
        return self.minority + self.majority

    def per_group(self, group: int) -> ConfusionCounts:
        return self.minority if group == MINORITY else self.majority


@dataclass(frozen=True)
class PerformanceReport:
    """Rates in [0, 1]; None marks an undefined rate (zero denominator)."""

    accuracy: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]
    precision: Optional[float]
    f1: Optional[float]

    def serialize(self) -> dict:
        return {k: getattr(self, k) for k in PERFORMANCE_KEYS}


@dataclass(frozen=True)
class FairnessReport:
    m_sp: ExtendedRatio
    m_eopp: ExtendedRatio
    m_eodd: ExtendedRatio
    m_eacc: ExtendedRatio

    def fair_flags(self) -> dict[str, bool]:
        return {k: band_check(getattr(self, k)) for k in FAIRNESS_KEYS}

    @property
    def eodds_fair(self) -> bool:
        """Equalised odds needs both the TPR and the FPR ratio in band."""
        return band_check(self.m_eodd) and band_check(self.m_eopp)

    def serialize(self) -> dict:
        return {k: getattr(self, k).serialize() for k in FAIRNESS_KEYS}


def hard_predictions(probabilities: np.ndarray) -> np.ndarray:
    """Threshold probabilities at 0.5 (p >= 0.5 predicts the positive class)."""
    return (np.asarray(probabilities, dtype=np.float64) >= 0.5).astype(np.int64)


def grouped_confusion(
    labels: Sequence[int], predictions: Sequence[int], groups: Sequence[int]
) -> GroupedConfusion:
    """Count (label, prediction) cells per group.

    Labels and predictions must be hard 0/1 values; groups use the 0/1
    minority/majority codes.
    """
    y = np.asarray(labels)
    yhat = np.asarray(predictions)
    g = np.asarray(groups)
    if len(y) == 0:
        raise ValueError("empty input")
    if not (len(y) == len(yhat) == len(g)):
        raise ValueError(
            f"length mismatch: labels={len(y)}, predictions={len(yhat)}, groups={len(g)}"
        )
    for name, arr in (("labels", y), ("predictions", yhat)):
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError(f"{name} must be hard 0/1 values")
    counts = {}
    for grp in (MINORITY, MAJORITY):
        m = g == grp
        counts[grp] = ConfusionCounts(
            tp=int(np.sum(m & (y == 1) & (yhat == 1))),
            fp=int(np.sum(m & (y == 0) & (yhat == 1))),
            tn=int(np.sum(m & (y == 0) & (yhat == 0))),
            fn=int(np.sum(m & (y == 1) & (yhat == 0))),
        )
    return GroupedConfusion(minority=counts[MINORITY], majority=counts[MAJORITY])


def _rate(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


def performance(cc: ConfusionCounts) -> PerformanceReport:
    """Accuracy, sensitivity, specificity, precision and F1 from counts.

    Zero denominators yield None rather than raising; F1 is defined when
    both precision and sensitivity are, and is 0 when both are 0.
    """
    if cc.total < 1:
        raise ValueError("performance requires at least one counted example")
    sens = _rate(cc.tp, cc.tp + cc.fn)
    prec = _rate(cc.tp, cc.tp + cc.fp)
    if sens is None or prec is None:
        f1 = None
    elif sens + prec == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * prec * sens / (prec + sens)
    return PerformanceReport(
        accuracy=_rate(cc.tp + cc.tn, cc.total),
        sensitivity=sens,
        specificity=_rate(cc.tn, cc.tn + cc.fp),
        precision=prec,
        f1=f1,
    )


def extended_ratio(numerator: float, denominator: float) -> ExtendedRatio:
    """numerator/denominator with the 0-denominator conventions.

    Positive over zero is positive infinity; zero over zero means both rates
    are (equally) zero and is flagged equal-by-convention.
    """
    if numerator < 0 or denominator < 0:
        raise ValueError("extended_ratio arguments must be non-negative")
    if denominator > 0:
        return ExtendedRatio.finite(numerator / denominator)
    if numerator > 0:
        return ExtendedRatio.infinity()
    return ExtendedRatio.equal()


def _group_rates(cc: ConfusionCounts, group_name: str) -> dict[str, float]:
    if cc.total == 0:
        raise ValueError(f"group {group_name} has zero examples")
    rates = {"positive_rate": (cc.tp + cc.fp) / cc.total, "accuracy": (cc.tp + cc.tn) / cc.total}
    if cc.tp + cc.fn == 0:
        raise ValueError(f"group {group_name} has no positive-class examples (TPR undefined)")
    if cc.tn + cc.fp == 0:
        raise ValueError(f"group {group_name} has no negative-class examples (FPR undefined)")
    rates["tpr"] = cc.tp / (cc.tp + cc.fn)
    rates["fpr"] = cc.fp / (cc.fp + cc.tn)
    return rates


def fairness(gc: GroupedConfusion, group_names: tuple[str, str] = ("s0", "s1")) -> FairnessReport:
    """The four ratio metrics, minority rate over majority rate.

    statistical parity compares positive-prediction rates, equal opportunity
    TPRs, equalised odds (the FPR side) FPRs, equal accuracy accuracies.
    """
    r0 = _group_rates(gc.minority, group_names[0])
    r1 = _group_rates(gc.majority, group_names[1])
    return FairnessReport(
        m_sp=extended_ratio(r0["positive_rate"], r1["positive_rate"]),
        m_eopp=extended_ratio(r0["tpr"], r1["tpr"]),
        m_eodd=extended_ratio(r0["fpr"], r1["fpr"]),
        m_eacc=extended_ratio(r0["accuracy"], r1["accuracy"]),
    )


def band_check(r: ExtendedRatio) -> bool:
    """True iff the ratio counts as acceptably fair.

    Finite values are fair inside [0.8, 1.2] inclusive; equal-by-convention
    is fair (both rates are identical); positive infinity is not.
    """
    if r.kind == EQUAL_BY_CONVENTION:
        return True
    if r.kind == POSITIVE_INFINITY:
        return False
    return FAIR_LOWER <= r.value <= FAIR_UPPER


def report_record(perf: PerformanceReport, fair: FairnessReport) -> dict:
    """Flat key-value record with the nine fixed metric keys."""
    record = perf.serialize()
    record.update(fair.serialize())
    return record
