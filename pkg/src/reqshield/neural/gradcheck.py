"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import NonFiniteValue


def gradient_check(
    loss_fn: Callable[[], float],
    analytic: dict[str, np.ndarray],
    params: dict[str, np.ndarray],
    eps: float,
) -> float:
    """Compare analytic gradients against (f(p+eps) - f(p-eps)) / (2 eps).

    loss_fn must recompute the loss from the current contents of params; each
    scalar parameter is perturbed in place and restored. Returns the maximum
    over parameters of |a - n| / max(1e-6, |a| + |n|).

    The denominator floor absorbs float64 rounding in the central difference,
    which sits near 1e-12 for unit-scale losses at eps 1e-3. Gradients below
    the floor still flag formula bugs: a wrong 1e-9 gradient differs from the
    numeric one by about 1e-9, giving 1e-3 against the floor, while rounding
    noise gives 1e-6.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must be in [1e-7, 1e-3], got {eps}")
    max_rel = 0.0
    for name, p in params.items():
        grad = analytic[name]
        if grad.shape != p.shape:
            raise ValueError(f"gradient/parameter shape mismatch for {name}")
        flat_g = grad.reshape(-1)
        for i in range(p.size):
            orig = p.flat[i]
            p.flat[i] = orig + eps
            f_plus = loss_fn()
            p.flat[i] = orig - eps
            f_minus = loss_fn()
            p.flat[i] = orig
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise NonFiniteValue(f"non-finite loss while perturbing {name}[{i}]")
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = float(flat_g[i])
            rel = abs(a - numeric) / max(1e-6, abs(a) + abs(numeric))
            if rel > max_rel:
                max_rel = rel
    return max_rel
