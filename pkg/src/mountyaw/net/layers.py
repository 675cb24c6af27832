"""Network layers with hand-derived reverse-mode gradients.

Each layer caches what its backward pass needs during a training-mode
forward. Parameters and gradients live in per-layer dicts keyed by short
names; the model namespaces them.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Conv1d:
    """Valid (unpadded) strided 1D convolution over (N, C_in, L) inputs.

    Implemented as an im2col matmul so both directions run on BLAS.
    Output length is floor((L - kernel) / stride) + 1.
    """

    def __init__(self, in_channels, out_channels, kernel, stride=1):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.params = {
            "w": np.zeros((out_channels, in_channels, kernel)),
            "b": np.zeros(out_channels),
        }
        self.grads = {}
        self._cache = None

    def out_len(self, length):
        return (length - self.kernel) // self.stride + 1

    def forward(self, x, train=False):
        n, c, length = x.shape
        lo = self.out_len(length)
        cols = sliding_window_view(x, self.kernel, axis=2)[:, :, :: self.stride]
        # (N, C, Lo, K) -> (N*Lo, C*K)
        cols2 = np.ascontiguousarray(cols.transpose(0, 2, 1, 3)).reshape(
            n * lo, c * self.kernel
        )
        w2 = self.params["w"].reshape(self.out_channels, -1)
        y = cols2 @ w2.T + self.params["b"]
        y = y.reshape(n, lo, self.out_channels).transpose(0, 2, 1)
        if train:
            self._cache = (cols2, (n, c, length, lo))
        return y

    def backward(self, dy):
        cols2, (n, c, length, lo) = self._cache
        dy2 = np.ascontiguousarray(dy.transpose(0, 2, 1)).reshape(n * lo, -1)
        self.grads["b"] = dy2.sum(axis=0)
        self.grads["w"] = (dy2.T @ cols2).reshape(
            self.out_channels, c, self.kernel
        )
        dcols2 = dy2 @ self.params["w"].reshape(self.out_channels, -1)
        dcols = dcols2.reshape(n, lo, c, self.kernel)
        dx = np.zeros((n, c, length))
        offsets = self.stride * np.arange(lo)
        for k in range(self.kernel):
            dx[:, :, offsets + k] += dcols[:, :, :, k].transpose(0, 2, 1)
        return dx


class BatchNorm1d:
    """Per-channel batch normalization over (N, C, L) activations.

    Training mode normalizes with batch statistics taken over the batch and
    time axes (biased variance) and updates the running statistics with
    momentum 0.1; eval mode uses the running statistics only.
    """

    def __init__(self, channels, eps=1e-5, momentum=0.1):
        self.channels = channels
        self.eps = eps
        self.momentum = momentum
        self.params = {"gamma": np.ones(channels), "beta": np.zeros(channels)}
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self.grads = {}
        self._cache = None

    def forward(self, x, train=False):
        if train:
            mean = x.mean(axis=(0, 2))
            var = x.var(axis=(0, 2))
            inv = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean[:, None]) * inv[:, None]
            self.running_mean = (
                (1.0 - self.momentum) * self.running_mean + self.momentum * mean
            )
            self.running_var = (
                (1.0 - self.momentum) * self.running_var + self.momentum * var
            )
            self._cache = (xhat, inv, x.shape[0] * x.shape[2])
        else:
            inv = 1.0 / np.sqrt(self.running_var + self.eps)
            xhat = (x - self.running_mean[:, None]) * inv[:, None]
        return self.params["gamma"][:, None] * xhat + self.params["beta"][:, None]

    def backward(self, dy):
        xhat, inv, m = self._cache
        self.grads["gamma"] = (dy * xhat).sum(axis=(0, 2))
        self.grads["beta"] = dy.sum(axis=(0, 2))
        dxhat = dy * self.params["gamma"][:, None]
        # full batch-statistics backward, including the variance term
        term = (
            m * dxhat
            - dxhat.sum(axis=(0, 2))[:, None]
            - xhat * (dxhat * xhat).sum(axis=(0, 2))[:, None]
        )
        return inv[:, None] / m * term


class ReLU:
    def __init__(self):
        self.params = {}
        self.grads = {}
        self._mask = None

    def forward(self, x, train=False):
        if train:
            self._mask = x > 0  # subgradient 0 at exactly 0
        return np.maximum(x, 0.0)

    def backward(self, dy):
        return dy * self._mask


class MeanPool:
    """Global mean over the time axis: (N, C, L) -> (N, C)."""

    def __init__(self):
        self.params = {}
        self.grads = {}
        self._length = None

    def forward(self, x, train=False):
        if train:
            self._length = x.shape[2]
        return x.mean(axis=2)

    def backward(self, dy):
        return np.repeat(dy[:, :, None], self._length, axis=2) / self._length


class Dense:
    def __init__(self, in_features, out_features):
        self.in_features = in_features
        self.out_features = out_features
        self.params = {
            "w": np.zeros((in_features, out_features)),
            "b": np.zeros(out_features),
        }
        self.grads = {}
        self._cache = None

    def forward(self, x, train=False):
        if train:
            self._cache = x
        return x @ self.params["w"] + self.params["b"]

    def backward(self, dy):
        x = self._cache
        self.grads["w"] = x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["w"].T
