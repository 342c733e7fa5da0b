"""Small differentiable binary classifiers with manual gradients.

Two architectures: logistic regression and a one-hidden-layer perceptron
(tanh hidden layer). Training is mini-batch Adam, fully deterministic for a
fixed seed, with three loss families: plain mean cross entropy, per-example
weighted cross entropy, and cross entropy regularised by soft TPR/FPR gap
penalties between the demographic groups (optionally sharpened, see
``sharpen_probabilities``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .data import Dataset, Example, MAJORITY, MINORITY, canonical_order
from .seeding import make_rng

PROB_EPS = 1e-7  # probability clamp for cross-entropy stability
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_PARAM_KEYS = {"logistic": ("w", "b"), "mlp": ("W1", "b1", "w2", "b2")}


@dataclass(frozen=True)
class Architecture:
    kind: str = "logistic"  # "logistic" | "mlp"
    hidden_width: int = 16

    def __post_init__(self):
        if self.kind not in _PARAM_KEYS:
            raise ValueError(f"unknown architecture {self.kind!r}")
        if self.kind == "mlp" and self.hidden_width < 1:
            raise ValueError("hidden_width must be >= 1")


@dataclass(frozen=True)
class LossSpec:
    """Loss selection: plain, weighted, or fairness-regularised.

    For the regularised kind the penalty is
    ``lam_eopp * |TPR_gap| + lam_eodd * |FPR_gap|`` where the per-group
    rates are estimated from predicted probabilities; ``gamma`` >= 1
    sharpens the probabilities before rate estimation (1 leaves them
    untouched).
    """

    kind: str = "plain"  # "plain" | "weighted" | "regularised"
    lam_eopp: float = 0.0
    lam_eodd: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("plain", "weighted", "regularised"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.lam_eopp < 0 or self.lam_eodd < 0:
            raise ValueError("penalty strengths must be non-negative")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")

    @classmethod
    def plain(cls) -> "LossSpec":
        return cls("plain")

    @classmethod
    def weighted(cls) -> "LossSpec":
        return cls("weighted")

    @classmethod
    def regularised(cls, lam_eopp: float, lam_eodd: float, gamma: float = 1.0) -> "LossSpec":
        return cls("regularised", lam_eopp=lam_eopp, lam_eodd=lam_eodd, gamma=gamma)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    batch_size: int = 32
    epochs: int = 50
    l2_strength: float = 0.0
    seed: int = 0
    loss: LossSpec = field(default_factory=LossSpec.plain)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.l2_strength < 0:
            raise ValueError("l2_strength must be >= 0")


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter snapshot for one architecture."""

    architecture: Architecture
    dim: int
    arrays: dict[str, np.ndarray]

    def __post_init__(self):
        frozen = {}
        for name in _PARAM_KEYS[self.architecture.kind]:
            arr = np.ascontiguousarray(np.asarray(self.arrays[name], dtype=np.float64))
            arr.setflags(write=False)
            frozen[name] = arr
        object.__setattr__(self, "arrays", frozen)

    def copy_arrays(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.arrays.items()}


def init_params(arch: Architecture, dim: int, seed: int) -> ModelParams:
    """Seeded initialization: zero biases, uniform(-r, r) weights, r = 1/sqrt(fan_in)."""
    rng = make_rng(seed, "init")
    if arch.kind == "logistic":
        r = 1.0 / np.sqrt(dim)
        arrays = {"w": rng.uniform(-r, r, size=dim), "b": np.zeros(1)}
    else:
        h = arch.hidden_width
        r1 = 1.0 / np.sqrt(dim)
        r2 = 1.0 / np.sqrt(h)
        arrays = {
            "W1": rng.uniform(-r1, r1, size=(dim, h)),
            "b1": np.zeros(h),
            "w2": rng.uniform(-r2, r2, size=h),
            "b2": np.zeros(1),
        }
    return ModelParams(architecture=arch, dim=dim, arrays=arrays)


def _forward_batch(arrays: dict, arch: Architecture, X: np.ndarray):
    """Raw (unclipped) probabilities plus hidden activations for the mlp."""
    if arch.kind == "logistic":
        return kernels.logistic_forward(X, arrays["w"], float(arrays["b"][0])), None
    return kernels.mlp_forward(X, arrays["W1"], arrays["b1"], arrays["w2"], float(arrays["b2"][0]))


def predict_proba(params: ModelParams, X: np.ndarray) -> np.ndarray:
    """Predicted positive-class probabilities, clamped inside (0, 1)."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != params.dim:
        raise ValueError(f"expected feature matrix of width {params.dim}, got shape {X.shape}")
    p_raw, _ = _forward_batch(params.arrays, params.architecture, X)
    return np.clip(p_raw, PROB_EPS, 1.0 - PROB_EPS)


def forward(params: ModelParams, features: np.ndarray) -> float:
    """Probability of the positive class for one feature vector."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.dim:
        raise ValueError(f"expected feature vector of length {params.dim}, got shape {x.shape}")
    return float(predict_proba(params, x[None, :])[0])


def cross_entropy(label: float, probability: float) -> float:
    """-y log p - (1-y) log(1-p) with p clamped into [1e-7, 1 - 1e-7]."""
    if not 0.0 <= label <= 1.0:
        raise ValueError("label must lie in [0, 1]")
    p = min(max(probability, PROB_EPS), 1.0 - PROB_EPS)
    return float(-label * np.log(p) - (1.0 - label) * np.log1p(-p))


def sharpen_probabilities(p: np.ndarray, gamma: float) -> np.ndarray:
    """Push probabilities toward 0/1: sigmoid(gamma * logit(p)).

    Identity at gamma = 1 (returned bit-for-bit unchanged); fixes p = 0.5
    for every gamma; strictly increasing in p. Large gamma makes soft rate
    estimates approach the hard-prediction rates.
    """
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    p = np.asarray(p, dtype=np.float64)
    if gamma == 1.0:
        return p
    pc = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    return kernels.sigmoid(gamma * (np.log(pc) - np.log1p(-pc)))


def soft_group_rates(
    labels: np.ndarray, groups: np.ndarray, probabilities: np.ndarray
) -> dict[int, tuple[Optional[float], Optional[float]]]:
    """Per-group probability-weighted (TPR, FPR) estimates.

    TPR_k = sum(y * p) / sum(y) over group k; FPR_k analogous with (1 - y).
    A rate is None when its denominator is zero (no positives/negatives of
    that group present).
    """
    y = np.asarray(labels, dtype=np.float64)
    g = np.asarray(groups)
    p = np.asarray(probabilities, dtype=np.float64)
    rates = {}
    for grp in (MINORITY, MAJORITY):
        m = g == grp
        t_den = float(np.sum(y[m]))
        f_den = float(np.sum(1.0 - y[m]))
        tpr = float(np.sum(y[m] * p[m]) / t_den) if t_den > 0 else None
        fpr = float(np.sum((1.0 - y[m]) * p[m]) / f_den) if f_den > 0 else None
        rates[grp] = (tpr, fpr)
    return rates


def _batch_arrays(batch: Union[Dataset, Sequence[Example]]):
    if isinstance(batch, Dataset):
        return batch.features, batch.labels, batch.weights, batch.groups
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    X = np.stack([np.asarray(e.features, dtype=np.float64) for e in batch])
    y = np.array([e.label for e in batch], dtype=np.float64)
    w = np.array([e.weight for e in batch], dtype=np.float64)
    g = np.array([e.group for e in batch], dtype=np.int8)
    return X, y, w, g


def _loss_and_grads(
    arrays: dict,
    arch: Architecture,
    X: np.ndarray,
    y: np.ndarray,
    wts: np.ndarray,
    groups: np.ndarray,
    spec: LossSpec,
    l2_strength: float,
):
    n = X.shape[0]
    if n == 0:
        raise ValueError("batch must be non-empty")
    p_raw, H = _forward_batch(arrays, arch, X)
    pc = np.clip(p_raw, PROB_EPS, 1.0 - PROB_EPS)
    # Gradient flows only where the clamp is inactive.
    active = ((p_raw > PROB_EPS) & (p_raw < 1.0 - PROB_EPS)).astype(np.float64)

    ce = -(y * np.log(pc) + (1.0 - y) * np.log1p(-pc))
    if spec.kind == "weighted":
        loss = float(np.sum(wts * ce) / n)
        dz = wts * (pc - y) / n * active
    else:
        loss = float(np.mean(ce))
        dz = (pc - y) / n * active

    if spec.kind == "regularised":
        if spec.gamma == 1.0:
            q = pc
            dq_dz = pc * (1.0 - pc) * active
        else:
            q = kernels.sigmoid(spec.gamma * (np.log(pc) - np.log1p(-pc)))
            dq_dz = spec.gamma * q * (1.0 - q) * active
        dq_coeff = np.zeros(n)
        for lam, weight_vec in ((spec.lam_eopp, y), (spec.lam_eodd, 1.0 - y)):
            num, den = {}, {}
            for grp in (MINORITY, MAJORITY):
                m = groups == grp
                den[grp] = float(np.sum(weight_vec[m]))
                num[grp] = float(np.sum(weight_vec[m] * q[m]))
            if den[MINORITY] <= 0 or den[MAJORITY] <= 0:
                continue  # cell missing from the batch: term skipped
            gap = num[MINORITY] / den[MINORITY] - num[MAJORITY] / den[MAJORITY]
            loss += lam * abs(gap)
            if lam > 0.0 and gap != 0.0:
                sign = 1.0 if gap > 0 else -1.0
                m0 = groups == MINORITY
                dq_coeff[m0] += lam * sign * weight_vec[m0] / den[MINORITY]
                m1 = groups == MAJORITY
                dq_coeff[m1] -= lam * sign * weight_vec[m1] / den[MAJORITY]
        dz = dz + dq_coeff * dq_dz

    dz = np.ascontiguousarray(dz)
    if arch.kind == "logistic":
        gw, gb = kernels.logistic_backward(X, dz)
        grads = {"w": gw, "b": np.array([gb])}
    else:
        gW1, gb1, gw2, gb2 = kernels.mlp_backward(X, H, arrays["w2"], dz)
        grads = {"W1": gW1, "b1": gb1, "w2": gw2, "b2": np.array([gb2])}

    if l2_strength > 0.0:
        for name in ("w", "W1", "w2"):
            if name in arrays:
                loss += l2_strength * float(np.sum(arrays[name] ** 2))
                grads[name] = grads[name] + 2.0 * l2_strength * arrays[name]
    return loss, grads


def batch_loss(
    params: ModelParams,
    batch: Union[Dataset, Sequence[Example]],
    spec: LossSpec,
    l2_strength: float = 0.0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact parameter gradients for one batch under ``spec``."""
    X, y, w, g = _batch_arrays(batch)
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    return _loss_and_grads(params.arrays, params.architecture, X, y, w, g, spec, l2_strength)


def _run_training(
    start_arrays: dict, arch: Architecture, dataset: Dataset, config: TrainConfig
) -> tuple[dict, list[float]]:
    arrays = {name: np.array(arr, dtype=np.float64) for name, arr in start_arrays.items()}
    if config.epochs == 0:
        return arrays, []
    canon = np.array(canonical_order(dataset), dtype=np.intp)
    rng = make_rng(config.seed, "shuffle")
    n = len(dataset)
    m_state = {name: np.zeros_like(arr) for name, arr in arrays.items()}
    v_state = {name: np.zeros_like(arr) for name, arr in arrays.items()}
    t = 0
    history = []
    for _ in range(config.epochs):
        order = canon[rng.permutation(n)]
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            Xb = np.ascontiguousarray(dataset.features[idx])
            loss, grads = _loss_and_grads(
                arrays,
                arch,
                Xb,
                dataset.labels[idx],
                dataset.weights[idx],
                dataset.groups[idx],
                config.loss,
                config.l2_strength,
            )
            t += 1
            for name in arrays:
                kernels.adam_step(
                    arrays[name].ravel(),
                    np.ascontiguousarray(grads[name], dtype=np.float64).ravel(),
                    m_state[name].ravel(),
                    v_state[name].ravel(),
                    t,
                    config.learning_rate,
                    ADAM_BETA1,
                    ADAM_BETA2,
                    ADAM_EPS,
                )
            batch_losses.append(loss)
        history.append(float(np.mean(batch_losses)))
    return arrays, history


def train(
    dataset: Dataset, arch: Architecture, config: TrainConfig
) -> tuple[ModelParams, list[float]]:
    """Train from a fresh seeded initialization.

    Mini-batches are drawn by a seeded shuffle each epoch (the last partial
    batch is kept); the loss history holds one mean batch loss per epoch.
    Deterministic for a fixed seed and invariant to the storage order of
    the dataset rows.
    """
    params = init_params(arch, dataset.feature_dim, config.seed)
    arrays, history = _run_training(params.copy_arrays(), arch, dataset, config)
    return ModelParams(architecture=arch, dim=dataset.feature_dim, arrays=arrays), history


def fine_tune(params: ModelParams, dataset: Dataset, config: TrainConfig) -> ModelParams:
    """Same mechanics as train but starting from the given parameters.

    The optimizer state is fresh (stage-two training restarts Adam).
    """
    if dataset.feature_dim != params.dim:
        raise ValueError(
            f"dataset feature_dim {dataset.feature_dim} does not match model dim {params.dim}"
        )
    arrays, _ = _run_training(params.copy_arrays(), params.architecture, dataset, config)
    return ModelParams(architecture=params.architecture, dim=params.dim, arrays=arrays)


FORMAT_TAG = "fairdep-model"
FORMAT_VERSION = 1


def dumps_params(params: ModelParams) -> str:
    """Serialize to a versioned JSON record; lossless for finite float64."""
    record = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "architecture": params.architecture.kind,
        "hidden_width": params.architecture.hidden_width,
        "dim": params.dim,
        "arrays": {
            name: {"shape": list(arr.shape), "values": arr.ravel().tolist()}
            for name, arr in params.arrays.items()
        },
    }
    return json.dumps(record, indent=None)


def loads_params(text: str) -> ModelParams:
    record = json.loads(text)
    if record.get("format") != FORMAT_TAG:
        raise ValueError("not a fairdep model record")
    if record.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model record version {record.get('version')}")
    arch = Architecture(kind=record["architecture"], hidden_width=record["hidden_width"])
    arrays = {}
    for name in _PARAM_KEYS[arch.kind]:
        entry = record["arrays"][name]
        arrays[name] = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
    return ModelParams(architecture=arch, dim=int(record["dim"]), arrays=arrays)


def save_params(params: ModelParams, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_params(params))


def load_params(path: str) -> ModelParams:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_params(fh.read())
