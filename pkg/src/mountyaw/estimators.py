"""Scikit-learn style wrappers around the pipeline.

WindowPreprocessor turns raw streams into network-ready windows
(TransformerMixin); YawRegressor trains and applies the convolutional
yaw model (RegressorMixin). Both expose get_params/set_params, so they
clone and compose with sklearn pipelines and searches.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .angles import angle_diff
from .dataset import STRIDE_SAMPLES
from .net import TrainConfig, YawConvNet, load_checkpoint
from .net import train as train_loop
from .net.model import DEFAULT_HIDDEN
from .signal import preprocess_drive
from .validation import check_windows


class WindowPreprocessor(BaseEstimator, TransformerMixin):
    """Stateless transformer: raw 100 Hz stream -> leveled (n, 100, 6) windows.

    X may be an (n, 7) array with a leading time column, a (t, imu) tuple,
    or an object with .t and .imu attributes (a DriveRecording).
    """

    def __init__(self, stride=STRIDE_SAMPLES):
        self.stride = stride

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        t, imu = self._unpack(X)
        windows, starts = preprocess_drive(t, imu, stride=self.stride)
        self.start_times_ = starts
        return windows

    @staticmethod
    def _unpack(X):
        if hasattr(X, "t") and hasattr(X, "imu"):
            return X.t, X.imu
        if isinstance(X, tuple) and len(X) == 2:
            return X
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != 7:
            raise ValueError("expected (n, 7) array of t plus six channels")
        return X[:, 0], X[:, 1:]


class YawRegressor(BaseEstimator, RegressorMixin):
    """Convolutional yaw regressor over (n, 100, 6) windows.

    fit(X, y) trains from scratch with the periodic cosine loss; predict
    returns angles in radians. score is the negative mean absolute wrapped
    error in radians (higher is better), since R^2 is meaningless for
    periodic targets.
    """

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8,
                 batch_size=128, epochs=150, l2=1e-6, hidden=DEFAULT_HIDDEN,
                 random_state=0):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.batch_size = batch_size
        self.epochs = epochs
        self.l2 = l2
        self.hidden = hidden
        self.random_state = random_state

    def _config(self):
        return TrainConfig(
            lr=self.lr, beta1=self.beta1, beta2=self.beta2,
            epsilon=self.epsilon, batch_size=self.batch_size,
            epochs=self.epochs, l2=self.l2, seed=self.random_state,
            hidden=self.hidden,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        X = check_windows(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y disagree on sample count")

        class _Set:
            def __init__(self, x, psi):
                self.x, self.psi = x, psi

            def __len__(self):
                return self.x.shape[0]

        val = None
        if X_val is not None:
            val = _Set(check_windows(X_val),
                       np.asarray(y_val, dtype=np.float64).ravel())
        self.model_, self.log_ = train_loop(_Set(X, y), val, self._config())
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise NotFittedError("fit or load_checkpoint first")
        return self.model_.predict(check_windows(X))

    def score(self, X, y):
        pred = self.predict(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        return -float(np.abs(angle_diff(pred, y)).mean())

    @classmethod
    def from_checkpoint(cls, path):
        """Wrap a trained checkpoint without retraining."""
        model = load_checkpoint(path)
        est = cls(hidden=model.hidden)
        est.model_ = model
        est.log_ = []
        return est
