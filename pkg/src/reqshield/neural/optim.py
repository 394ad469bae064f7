"""Nesterov-accelerated adaptive moment estimation.

The momentum schedule mu_t = beta1 * (1 - 0.5 * 0.96^(t * schedule_decay))
warms the Nesterov blend up over early steps; the running product of mu
values bias-corrects the first moment the same way (1 - beta2^t) corrects
the second.
"""

from __future__ import annotations

import numpy as np


class Nadam:
    """Updates a named set of parameters in place."""

    def __init__(
        self,
        params: dict[str, np.ndarray],
        learning_rate: float = 0.002,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
        schedule_decay: float = 0.004,
    ):
        self.params = params
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.schedule_decay = schedule_decay
        self.t = 0
        self.m_schedule = 1.0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def _mu(self, t: int) -> float:
        return self.beta1 * (1.0 - 0.5 * 0.96 ** (t * self.schedule_decay))

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        mu_t = self._mu(self.t)
        mu_next = self._mu(self.t + 1)
        m_schedule_new = self.m_schedule * mu_t
        m_schedule_next = m_schedule_new * mu_next
        v_correction = 1.0 - self.beta2**self.t
        for name, p in self.params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            g_prime = g / (1.0 - m_schedule_new)
            m_prime = m / (1.0 - m_schedule_next)
            v_prime = v / v_correction
            m_bar = (1.0 - mu_t) * g_prime + mu_next * m_prime
            p -= self.lr * m_bar / (np.sqrt(v_prime) + self.epsilon)
        self.m_schedule = m_schedule_new
