"""Post-processing bias mitigation: reject option based classification.

Minority-group instances whose predicted probability falls inside the
critical region [1 - tau, tau] are assigned the desirable class; everything
else follows the standard 0.5-threshold rule. The method is a pure function
of (probabilities, groups, config) and never retrains the model, but it
does require group membership at inference time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import MINORITY
from .metrics import hard_predictions


@dataclass(frozen=True)
class RocConfig:
    tau: float = 0.6
    desirable_class: int = 1

    def __post_init__(self):
        if not 0.5 < self.tau < 1.0:
            raise ValueError("tau must satisfy 0.5 < tau < 1")
        if self.desirable_class not in (0, 1):
            raise ValueError("desirable_class must be 0 or 1")


def roc_adjust(
    probabilities: Sequence[float], groups: Sequence[int], cfg: RocConfig
) -> np.ndarray:
    """Hard predictions with the minority critical-region override.

    Both critical-region bounds are inclusive. Majority-group predictions
    are identical to plain thresholding.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    g = np.asarray(groups)
    if p.shape != g.shape:
        raise ValueError("probabilities and groups must have equal length")
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    preds = hard_predictions(p)
    critical = (g == MINORITY) & (p >= 1.0 - cfg.tau) & (p <= cfg.tau)
    preds[critical] = cfg.desirable_class
    return preds
