"""Adam optimizer with bias correction."""

import numpy as np


class Adam:
    """Standard Adam: first/second moment estimates with bias correction,
    update w -= lr * m_hat / (sqrt(v_hat) + eps). State is kept per named
    tensor, so identical gradient histories produce identical updates."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
            raise ValueError("beta coefficients must lie in (0, 1)")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, model, grads):
        """Apply one update in place; grads is {name: array}."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, w in model.parameters().items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(w)
                self.v[name] = np.zeros_like(w)
            self.m[name] = b1 * self.m[name] + (1.0 - b1) * g
            self.v[name] = b2 * self.v[name] + (1.0 - b2) * g * g
            m_hat = self.m[name] / (1.0 - b1**self.t)
            v_hat = self.v[name] / (1.0 - b2**self.t)
            model.set_parameter(name, w - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
