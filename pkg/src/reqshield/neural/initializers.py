"""Weight initialization."""

from __future__ import annotations

import numpy as np


def glorot_uniform(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Uniform draws in +-sqrt(6 / (fan_in + fan_out)).

    For 2-D weights shaped (n_out, n_in): fan_in = n_in, fan_out = n_out.
    """
    if len(shape) == 2:
        fan_out, fan_in = shape
    elif len(shape) == 1:
        fan_in = fan_out = shape[0]
    else:
        raise ValueError(f"unsupported shape {shape}")
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float64)
