"""Reconstruction loss."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyScores, ShapeMismatch


def mae_loss(x_hat: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean absolute error over every element, with its subgradient.

    The gradient w.r.t. x_hat is sign(x_hat - x) / n, with sign(0) = 0 at
    the kink.
    """
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x_hat.shape != x.shape:
        raise ShapeMismatch(f"shape mismatch: {x_hat.shape} vs {x.shape}")
    if x_hat.size == 0:
        raise EmptyScores("cannot take MAE of empty vectors")
    diff = x_hat - x
    loss = float(np.mean(np.abs(diff)))
    grad = np.sign(diff) / diff.size
    return loss, grad
