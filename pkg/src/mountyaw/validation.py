"""Input validation helpers shared by the estimator API and the pipeline."""

import numpy as np

from .constants import FS_RAW, LEVEL_TOLERANCE, WINDOW_LEN
from .errors import MalformedStreamError


def check_stream(t, imu, fs=FS_RAW):
    """Validate a raw sample stream: t (n,), imu (n, 6).

    Timestamps must be finite and strictly increasing at the nominal rate
    (spacing within 10% of 1/fs); all channels finite. Returns float64 views.
    """
    t = np.asarray(t, dtype=np.float64)
    imu = np.asarray(imu, dtype=np.float64)
    if t.ndim != 1 or imu.ndim != 2 or imu.shape != (t.shape[0], 6):
        raise MalformedStreamError(
            f"expected t (n,) and imu (n, 6), got {t.shape} and {imu.shape}"
        )
    if not np.isfinite(t).all() or not np.isfinite(imu).all():
        raise MalformedStreamError("non-finite values in stream")
    if t.size > 1:
        dt = np.diff(t)
        if (dt <= 0).any():
            raise MalformedStreamError("timestamps not strictly increasing")
        nominal = 1.0 / fs
        if (np.abs(dt - nominal) > 0.1 * nominal).any():
            raise MalformedStreamError(
                f"sample spacing deviates from nominal {nominal:.4f} s"
            )
    return t, imu


def check_window(x):
    """Validate one processed window: (WINDOW_LEN, 6), finite."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (WINDOW_LEN, 6):
        raise ValueError(f"expected window ({WINDOW_LEN}, 6), got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("non-finite values in window")
    return x


def check_windows(X):
    """Validate a window batch; accepts (100, 6) or (n, 100, 6).

    Returns a float64 array of shape (n, 100, 6).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1:] != (WINDOW_LEN, 6):
        raise ValueError(
            f"expected windows (n, {WINDOW_LEN}, 6), got {X.shape}"
        )
    if not np.isfinite(X).all():
        raise ValueError("non-finite values in windows")
    return X


def window_is_level(x, tol=LEVEL_TOLERANCE):
    """True when the time-mean of the vertical accel channel is within tol."""
    x = np.asarray(x, dtype=np.float64)
    return bool(abs(x[..., :, 2].mean(axis=-1)).max() <= tol)
