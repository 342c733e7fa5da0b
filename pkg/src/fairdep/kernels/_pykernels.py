"""Pure-numpy kernel backend.

Same contract as the compiled backend: raw sigmoid outputs (no clipping),
float64 C-contiguous arrays, in-place Adam updates. Kept dependency-free so
the package works without a compiler.
"""

from __future__ import annotations

import numpy as np


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_forward(X: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    return sigmoid(X @ w + b)


def logistic_backward(X: np.ndarray, dz: np.ndarray) -> tuple[np.ndarray, float]:
    return X.T @ dz, float(np.sum(dz))


def mlp_forward(
    X: np.ndarray, W1: np.ndarray, b1: np.ndarray, w2: np.ndarray, b2: float
) -> tuple[np.ndarray, np.ndarray]:
    H = np.tanh(X @ W1 + b1)
    return sigmoid(H @ w2 + b2), H


def mlp_backward(
    X: np.ndarray, H: np.ndarray, w2: np.ndarray, dz: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    gw2 = H.T @ dz
    gb2 = float(np.sum(dz))
    dH = np.outer(dz, w2) * (1.0 - H * H)
    gW1 = X.T @ dH
    gb1 = dH.sum(axis=0)
    return gW1, gb1, gw2, gb2


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
) -> None:
    """One Adam update, in place on param/m/v (all 1-D views)."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)
