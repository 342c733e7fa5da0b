"""Deterministic synthetic dataset generation with controllable group bias.

Feature mode draws each example from a spherical Gaussian at its
(group, class) mean: classes sit at +-separation/2 along the first feature
axis (separation is per group) and the two groups are displaced by
+-group_offset along the second axis so that group membership is inferable
from the features. A smaller class separation for one group injects bias:
that group gets worse rates from any reasonable classifier.

Signal mode emits sinusoid-plus-noise multichannel windows whose alpha-band
power differs by class, with the same group-dependent overlap, and extracts
per-channel alpha relative power as the feature vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import Dataset, encode_groups
from .features import ALPHA_BAND, Band, MultiChannelSignal, band_power_features, segment
from .seeding import make_rng

PRESET_COUNTS = {
    # (group_token, label) -> subject count; counts follow the study's
    # gender-by-diagnosis distribution for each source dataset.
    "mumtaz-like": {("male", 1): 17, ("female", 1): 13, ("male", 0): 20, ("female", 0): 8},
    "modma-like": {("male", 1): 13, ("female", 1): 11, ("male", 0): 20, ("female", 0): 9},
    "rest-like": {("male", 1): 12, ("female", 1): 34, ("male", 0): 35, ("female", 0): 40},
}


@dataclass(frozen=True)
class SynthConfig:
    counts: Mapping[tuple[str, int], int]
    class_separation: Mapping[str, float]
    feature_dim: int = 8
    group_offset: float = 1.25
    noise_std: float = 1.0
    segments_per_subject: int = 10
    seed: int = 0
    mode: str = "features"  # "features" | "signal"
    sample_rate: float = 128.0
    duration_s: float = 20.0
    channels: int = 4

    def __post_init__(self):
        tokens = sorted({tok for tok, _ in self.counts})
        if len(tokens) != 2:
            raise ValueError(f"need exactly 2 group tokens, got {tokens}")
        for tok in tokens:
            if sum(self.counts.get((tok, y), 0) for y in (0, 1)) == 0:
                raise ValueError(f"group {tok!r} has no subjects")
            if tok not in self.class_separation:
                raise ValueError(f"missing class_separation for group {tok!r}")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("cell counts must be non-negative")
        if self.noise_std <= 0:
            raise ValueError("noise_std must be > 0")
        if self.segments_per_subject < 1:
            raise ValueError("segments_per_subject must be >= 1")
        if self.mode not in ("features", "signal"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "features" and self.feature_dim < 2:
            raise ValueError("feature mode needs feature_dim >= 2")
        if self.mode == "signal" and self.channels < 2:
            raise ValueError("signal mode needs at least 2 channels")

    @property
    def group_tokens(self) -> tuple[str, str]:
        return tuple(sorted({tok for tok, _ in self.counts}))  # type: ignore[return-value]


def _subject_iter(cfg: SynthConfig):
    """Deterministic (token, label, subject_id) enumeration."""
    for token in cfg.group_tokens:
        for label in (0, 1):
            for s in range(cfg.counts.get((token, label), 0)):
                yield token, label, f"{token}:c{label}:s{s:03d}"


def _feature_mean(cfg: SynthConfig, token: str, label: int, offset_sign: float) -> np.ndarray:
    mean = np.zeros(cfg.feature_dim)
    mean[0] = (label - 0.5) * cfg.class_separation[token]
    mean[1] = offset_sign * cfg.group_offset
    return mean


def _subject_signal(
    cfg: SynthConfig, rng: np.random.Generator, token: str, label: int
) -> MultiChannelSignal:
    n = int(round(cfg.sample_rate * cfg.duration_s))
    t = np.arange(n) / cfg.sample_rate
    # alpha-band amplitude separates the classes, scaled per group
    amp = max(0.1, 1.0 + (label - 0.5) * cfg.class_separation[token] / 2.0)
    rows = []
    for _ in range(cfg.channels):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        rows.append(amp * np.sin(2.0 * np.pi * 10.0 * t + phase)
                    + cfg.noise_std * rng.standard_normal(n))
    return MultiChannelSignal(np.stack(rows), cfg.sample_rate)


def generate(cfg: SynthConfig) -> Dataset:
    """Build the dataset; byte-identical for a fixed config and seed.

    Every subject emits ``segments_per_subject`` examples sharing its
    subject id, group and label.
    """
    rng = make_rng(cfg.seed, "synth")
    tokens = cfg.group_tokens
    # the sign of the group displacement only needs to differ between groups
    offset_sign = {tokens[0]: 1.0, tokens[1]: -1.0}
    feats, labels, sids, raw_tokens = [], [], [], []
    for token, label, sid in _subject_iter(cfg):
        if cfg.mode == "features":
            mean = _feature_mean(cfg, token, label, offset_sign[token])
            for _ in range(cfg.segments_per_subject):
                feats.append(mean + cfg.noise_std * rng.standard_normal(cfg.feature_dim))
                labels.append(float(label))
                sids.append(sid)
                raw_tokens.append(token)
        else:
            signal = _subject_signal(cfg, rng, token, label)
            windows = segment(signal, cfg.duration_s / cfg.segments_per_subject)
            if len(windows) < cfg.segments_per_subject:
                raise ValueError("duration too short for the requested segment count")
            for win in windows[: cfg.segments_per_subject]:
                feats.append(band_power_features(win, Band(*ALPHA_BAND)))
                labels.append(float(label))
                sids.append(sid)
                raw_tokens.append(token)
    codes, group_names = encode_groups(raw_tokens)
    return Dataset(
        features=np.stack(feats),
        labels=np.array(labels),
        groups=codes,
        subject_ids=tuple(sids),
        weights=np.ones(len(labels)),
        group_names=group_names,
    )


def preset_config(name: str, segments_per_subject: int = 10, seed: int = 0) -> SynthConfig:
    """Named preset mirroring one of the study's subject-count tables."""
    if name not in PRESET_COUNTS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESET_COUNTS)}")
    return SynthConfig(
        counts=dict(PRESET_COUNTS[name]),
        class_separation={"male": 2.0, "female": 2.0},
        segments_per_subject=segments_per_subject,
        seed=seed,
    )


def biased_preset(bias_gap: float, seed: int) -> Dataset:
    """Fixed-shape biased dataset for end-to-end mitigation checks.

    Majority class separation 2.0, minority 2.0 - bias_gap, unit noise,
    8 feature dims, 40/24 majority/minority subjects (balanced classes
    within each group), 10 segments per subject. With bias_gap >= 1.0 a
    plainly trained classifier lands outside the fairness band on the FPR
    ratio.
    """
    cfg = SynthConfig(
        counts={("male", 1): 20, ("male", 0): 20, ("female", 1): 12, ("female", 0): 12},
        class_separation={"male": 2.0, "female": 2.0 - bias_gap},
        feature_dim=8,
        noise_std=1.0,
        segments_per_subject=10,
        seed=seed,
    )
    return generate(cfg)
