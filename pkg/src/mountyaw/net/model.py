"""The yaw-regression network.

Three strided valid Conv1D blocks (each followed by batch norm and ReLU),
global mean pooling over time, then a two-layer head with a ReLU between
and an unconstrained scalar angle output. For 100-sample windows the
temporal lengths through the convolution stack are 17, 15 and 13.
"""

from collections import OrderedDict

import numpy as np

from ..errors import NumericFaultError
from ..validation import check_windows
from .layers import BatchNorm1d, Conv1d, Dense, MeanPool, ReLU

DEFAULT_HIDDEN = 36


class YawConvNet:
    """Scalar yaw regressor over (n, 100, 6) windows.

    Weights are float64. Construction leaves parameters zeroed; use
    kaiming_init() for a trainable starting point.
    """

    def __init__(self, hidden=DEFAULT_HIDDEN):
        self.hidden = hidden
        self.conv1 = Conv1d(6, 32, kernel=20, stride=5)
        self.bn1 = BatchNorm1d(32)
        self.conv2 = Conv1d(32, 64, kernel=3, stride=1)
        self.bn2 = BatchNorm1d(64)
        self.conv3 = Conv1d(64, 128, kernel=3, stride=1)
        self.bn3 = BatchNorm1d(128)
        self.pool = MeanPool()
        self.dense1 = Dense(128, hidden)
        self.dense2 = Dense(hidden, 1)
        self._layers = OrderedDict([
            ("conv1", self.conv1), ("bn1", self.bn1), ("relu1", ReLU()),
            ("conv2", self.conv2), ("bn2", self.bn2), ("relu2", ReLU()),
            ("conv3", self.conv3), ("bn3", self.bn3), ("relu3", ReLU()),
            ("pool", self.pool),
            ("dense1", self.dense1), ("relu4", ReLU()),
            ("dense2", self.dense2),
        ])

    # ---- parameter plumbing -------------------------------------------

    def parameters(self):
        """Ordered {qualified name: array} of trainable tensors."""
        out = OrderedDict()
        for lname, layer in self._layers.items():
            for pname, arr in layer.params.items():
                out[f"{lname}.{pname}"] = arr
        return out

    def gradients(self):
        out = OrderedDict()
        for lname, layer in self._layers.items():
            for pname in layer.params:
                out[f"{lname}.{pname}"] = layer.grads[pname]
        return out

    def set_parameter(self, name, value):
        lname, pname = name.split(".")
        layer = self._layers[lname]
        if layer.params[pname].shape != value.shape:
            raise ValueError(f"shape mismatch for {name}")
        layer.params[pname] = np.asarray(value, dtype=np.float64)

    def state_tensors(self):
        """Trainable tensors plus batch-norm running statistics."""
        out = self.parameters()
        for lname in ("bn1", "bn2", "bn3"):
            bn = self._layers[lname]
            out[f"{lname}.running_mean"] = bn.running_mean
            out[f"{lname}.running_var"] = bn.running_var
        return out

    def load_state(self, tensors):
        for name, value in tensors.items():
            if name.endswith(".running_mean") or name.endswith(".running_var"):
                lname, attr = name.split(".")
                setattr(self._layers[lname], attr, np.asarray(value, dtype=np.float64))
            else:
                self.set_parameter(name, value)

    @property
    def param_count(self):
        return sum(int(np.prod(a.shape)) for a in self.parameters().values())

    def temporal_lengths(self, input_len=100):
        """Sequence lengths after each convolution layer."""
        lengths = []
        length = input_len
        for conv in (self.conv1, self.conv2, self.conv3):
            length = conv.out_len(length)
            lengths.append(length)
        return lengths

    def copy_state(self):
        return {k: v.copy() for k, v in self.state_tensors().items()}

    # ---- forward / backward -------------------------------------------

    def forward(self, x, train=False):
        """x: (n, 100, 6) windows (or one window). Returns (n,) yaw estimates.

        Train mode uses batch statistics and caches activations for
        backward(); eval mode is a pure function of weights, running
        statistics and the input.
        """
        x = check_windows(x)
        h = x.transpose(0, 2, 1)  # -> (n, channels, time)
        for name, layer in self._layers.items():
            h = layer.forward(h, train=train)
        out = h[:, 0]
        if not np.isfinite(out).all():
            self._raise_numeric_fault(x, train)
        return out

    def hidden_states(self, x, train=False):
        """Each layer's input for a batch, in the internal (n, C, L) layout.

        Returns (states, output) where states[k] feeds layer k. Useful for
        inspection and for finite-difference checks that only need to
        recompute downstream of a perturbed layer.
        """
        x = check_windows(x)
        h = x.transpose(0, 2, 1)
        states = []
        for layer in self._layers.values():
            states.append(h)
            h = layer.forward(h, train=train)
        return states, h[:, 0]

    def forward_from(self, start, h, train=False):
        """Run layers start.. on a cached hidden state; returns (n,) outputs."""
        for layer in list(self._layers.values())[start:]:
            h = layer.forward(h, train=train)
        return h[:, 0]

    def layer_index(self, name):
        return list(self._layers).index(name)

    def _raise_numeric_fault(self, x, train):
        h = x.transpose(0, 2, 1)
        for name, layer in self._layers.items():
            h = layer.forward(h, train=train)
            if not np.isfinite(h).all():
                raise NumericFaultError(name)
        raise NumericFaultError("output")

    def backward(self, dout):
        """dout: (n,) gradient of the loss in the scalar outputs.

        Requires a preceding train-mode forward on the same batch. Returns
        the gradient dict {name: array} (also kept on the layers).
        """
        if self.dense2._cache is None:
            raise RuntimeError("backward() without a train-mode forward")
        g = np.asarray(dout, dtype=np.float64)[:, None]
        for layer in reversed(self._layers.values()):
            g = layer.backward(g)
        return self.gradients()

    def predict(self, x, batch_size=1024):
        """Eval-mode forward in batches; returns (n,) yaw estimates [rad]."""
        x = check_windows(x)
        outs = [
            self.forward(x[i : i + batch_size], train=False)
            for i in range(0, x.shape[0], batch_size)
        ]
        return np.concatenate(outs) if outs else np.empty(0)


def kaiming_init(seed=0, hidden=DEFAULT_HIDDEN):
    """Fresh model with He-normal weights (std sqrt(2/fan_in)), zero biases,
    unit batch-norm scale, zero shift, and reset running statistics."""
    rng = np.random.default_rng(seed)
    model = YawConvNet(hidden=hidden)
    for conv in (model.conv1, model.conv2, model.conv3):
        fan_in = conv.in_channels * conv.kernel
        conv.params["w"] = rng.normal(
            0.0, np.sqrt(2.0 / fan_in), size=conv.params["w"].shape
        )
    for dense in (model.dense1, model.dense2):
        fan_in = dense.in_features
        dense.params["w"] = rng.normal(
            0.0, np.sqrt(2.0 / fan_in), size=dense.params["w"].shape
        )
    return model
