"""Periodic cosine loss with L2 regularization.

Per sample the loss is 1 - cos(psi - psi_tilde): invariant to 2*pi shifts,
bounded in [0, 2], and within delta^4/24 of the squared-error surrogate
delta^2/2 for small errors. The batch objective adds lambda * ||W||^2 over
all trainable tensors (weights, biases, batch-norm scale/shift); running
statistics are not penalized.
"""

import numpy as np

DEFAULT_L2 = 1e-6


def cos_loss(psi, psi_tilde):
    """Elementwise 1 - cos(psi - psi_tilde); scalars in, scalar out."""
    psi = np.asarray(psi, dtype=np.float64)
    psi_tilde = np.asarray(psi_tilde, dtype=np.float64)
    out = 1.0 - np.cos(psi - psi_tilde)
    return float(out) if out.ndim == 0 else out


def cos_loss_grad(psi, psi_tilde):
    """d/d(psi_tilde) of cos_loss: sin(psi_tilde - psi)."""
    return np.sin(np.asarray(psi_tilde) - np.asarray(psi))


def l2_penalty(model, lam=DEFAULT_L2):
    """lambda * sum of squares over every trainable tensor."""
    if lam == 0.0:
        return 0.0
    return lam * sum(float((a * a).sum()) for a in model.parameters().values())


def total_loss(model, x, y, lam=DEFAULT_L2, train=True):
    """Mean cosine loss over the batch plus the L2 penalty."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty batch")
    psi_tilde = model.forward(x, train=train)
    return float(np.mean(cos_loss(y, psi_tilde))) + l2_penalty(model, lam)


def loss_and_gradients(model, x, y, lam=DEFAULT_L2):
    """Train-mode forward + full backward; returns (loss, grads dict).

    Gradients cover the data term and 2*lambda*W from the penalty.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty batch")
    psi_tilde = model.forward(x, train=True)
    data_loss = float(np.mean(cos_loss(y, psi_tilde)))
    dout = cos_loss_grad(y, psi_tilde) / y.size
    grads = model.backward(dout)
    if lam != 0.0:
        for name, w in model.parameters().items():
            grads[name] = grads[name] + 2.0 * lam * w
    return data_loss + l2_penalty(model, lam), grads
