"""Deterministic seed derivation.

A single experiment seed fans out into independent sub-seeds for each
purpose (splitting, per-fold training, each mitigation, ...) so that, e.g.,
changing the number of training epochs never perturbs the fold assignment.
The derivation is a splitmix-style avalanche over the base seed and the
UTF-8 bytes of the purpose labels; it is stable across platforms and runs.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix(state: int) -> int:
    # splitmix64 finalizer
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(base_seed: int, *labels: object) -> int:
    """Derive a 64-bit sub-seed from ``base_seed`` and purpose labels.

    Labels may be strings or integers; the same (seed, labels) pair always
    yields the same sub-seed.
    """
    state = base_seed & _MASK64
    state = _mix(state)
    for label in labels:
        if isinstance(label, int):
            state = _mix(state ^ (label & _MASK64))
        else:
            for byte in str(label).encode("utf-8"):
                state = _mix(state ^ byte)
    return state


def make_rng(seed: int, *labels: object) -> np.random.Generator:
    """Seeded generator for the given purpose; PCG64 for cross-platform stability."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *labels)))
