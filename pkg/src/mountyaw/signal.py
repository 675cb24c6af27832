"""Deterministic IMU preprocessing.

Raw 100 Hz streams are low-pass filtered (4th-order Butterworth, 10 Hz
cutoff, causal biquad cascade), decimated to 20 Hz, cut into 5 s windows,
leveled using each window's own mean specific force, and degravitated. The
same causal path runs in batch for training and streaming for real-time
use, so the two produce bit-identical windows.
"""

import numpy as np
from scipy import signal as _sp

from . import dataset
from .constants import (
    DECIM_FACTOR,
    FS_RAW,
    GRAVITY,
    LOWPASS_CUTOFF_HZ,
    LOWPASS_ORDER,
    STEP_PERIOD_S,
    WINDOW_LEN,
)
from .errors import MalformedStreamError, TiltUnobservableError
from .validation import check_stream

Z_UP = np.array([0.0, 0.0, 1.0])


def butter_sos(order=LOWPASS_ORDER, cutoff_hz=LOWPASS_CUTOFF_HZ, fs=FS_RAW):
    """Low-pass Butterworth design as second-order sections."""
    return _sp.butter(order, cutoff_hz, btype="low", fs=fs, output="sos")


class FilterState:
    """Per-channel biquad-cascade delay registers for streaming filtering.

    Wraps scipy's transposed direct-form II state so that feeding samples
    (or chunks) one at a time reproduces whole-array filtering exactly.
    """

    def __init__(self, n_channels=6, sos=None):
        self.sos = butter_sos() if sos is None else sos
        self.n_channels = n_channels
        self.zi = np.zeros((self.sos.shape[0], 2, n_channels))

    def reset(self):
        self.zi[:] = 0.0

    def process(self, x):
        """Filter a chunk (m, n_channels) causally, carrying state."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        y, self.zi = _sp.sosfilt(self.sos, x, axis=0, zi=self.zi)
        return y


def lowpass(t, imu, state=None):
    """Causal low-pass of all six channels; validates the stream contract.

    Returns (t, filtered). Passing a FilterState lets callers keep filtering
    a continuing stream; by default filtering starts from rest.
    """
    t, imu = check_stream(t, imu)
    if state is None:
        state = FilterState(n_channels=imu.shape[1])
    return t, state.process(imu)


def decimate(t, x, factor=DECIM_FACTOR):
    """Keep every factor-th sample starting at index 0.

    Anti-aliasing is the caller's contract (run lowpass first).
    """
    if factor < 1:
        raise ValueError("decimation factor must be >= 1")
    return np.asarray(t)[::factor], np.asarray(x)[::factor]


def estimate_tilt(samples):
    """Shortest-arc rotation taking the mean specific force onto +z gravity.

    samples is (m, 6) or (m, 3); only the accel triad is used. The result
    fixes roll and pitch and leaves yaw free. Raises TiltUnobservableError
    when the mean norm is outside [0.5 g, 1.5 g] or the mean points away
    from up (an upside-down sensor is outside the operating envelope).
    """
    samples = np.asarray(samples, dtype=np.float64)
    accel = samples[:, :3] if samples.ndim == 2 else samples[None, :3]
    m = accel.mean(axis=0)
    norm = np.linalg.norm(m)
    if not (0.5 * GRAVITY <= norm <= 1.5 * GRAVITY):
        raise TiltUnobservableError(
            f"mean specific force {norm:.2f} m/s^2 outside [0.5 g, 1.5 g]"
        )
    a_hat = m / norm
    c = float(a_hat @ Z_UP)
    if c <= 0.0:
        raise TiltUnobservableError(
            "mean specific force points away from up (tilt > 90 deg)"
        )
    v = np.cross(a_hat, Z_UP)
    s2 = float(v @ v)
    if s2 < 1e-30:
        return np.eye(3)
    vx = np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])
    # Rodrigues form of the rotation taking a_hat onto z
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / s2)


def level_and_degravitate(window, tilt):
    """Rotate accel and gyro rows into the level frame; remove gravity.

    window is (m, 6); tilt comes from estimate_tilt over the same span.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[1] != 6:
        raise ValueError(f"expected (m, 6) window, got {window.shape}")
    out = np.empty_like(window)
    out[:, :3] = window[:, :3] @ tilt.T
    out[:, 3:] = window[:, 3:] @ tilt.T
    out[:, 2] -= GRAVITY
    return out


def preprocess_drive(t, imu, *, stride=dataset.STRIDE_SAMPLES):
    """Full batch path: lowpass -> decimate -> window -> level per window.

    Returns (windows, start_times): windows (m, 100, 6) and the timestamp of
    each window's first sample. Drives shorter than one window return empty
    arrays. Tilt is estimated per window from that window's own mean accel,
    so each window is self-contained.
    """
    t, filtered = lowpass(t, imu)
    t20, x20 = decimate(t, filtered)
    raw_windows, starts = dataset.window_drive(x20, t20, stride=stride)
    windows = np.empty_like(raw_windows)
    for i, w in enumerate(raw_windows):
        tilt = estimate_tilt(w)
        windows[i] = level_and_degravitate(w, tilt)
    return windows, starts


class StreamingPreprocessor:
    """Streaming twin of preprocess_drive for the real-time path.

    push() consumes raw 100 Hz samples one at a time and returns a leveled
    (100, 6) window every `step_period_s` once 5 s of data has arrived,
    stamped with the step time. Window starts land on the same 20 Hz sample
    grid the batch path uses, so outputs match batch preprocessing
    bit-for-bit.
    """

    def __init__(self, step_period_s=STEP_PERIOD_S):
        self.filter = FilterState()
        self.step_samples = int(round(step_period_s * FS_RAW / DECIM_FACTOR))
        self._n_raw = 0
        self._n_proc = 0
        self._buf = np.zeros((WINDOW_LEN, 6))
        self._buf_t = np.zeros(WINDOW_LEN)
        self._fill = 0
        self._since_emit = None
        self._last_t = None

    def reset(self):
        self.__init__(step_period_s=self.step_samples * DECIM_FACTOR / FS_RAW)

    def push(self, t, sample):
        """Feed one raw sample; returns (t_step, window) or None.

        t_step is the nominal step time (multiple of the step period).
        """
        t = float(t)
        if self._last_t is not None and t <= self._last_t:
            raise MalformedStreamError("timestamps not strictly increasing")
        self._last_t = t
        y = self.filter.process(np.asarray(sample, dtype=np.float64))[0]
        keep = self._n_raw % DECIM_FACTOR == 0
        self._n_raw += 1
        if not keep:
            return None
        # ring-free shift buffer: WINDOW_LEN is small, a roll is plenty fast
        if self._fill < WINDOW_LEN:
            self._buf[self._fill] = y
            self._buf_t[self._fill] = t
            self._fill += 1
        else:
            self._buf[:-1] = self._buf[1:]
            self._buf_t[:-1] = self._buf_t[1:]
            self._buf[-1] = y
            self._buf_t[-1] = t
        self._n_proc += 1
        if self._fill < WINDOW_LEN:
            return None
        if self._since_emit is None:
            self._since_emit = 0
        else:
            self._since_emit += 1
            if self._since_emit < self.step_samples:
                return None
            self._since_emit = 0
        win = self._buf.copy()  # canonical layout, same as the batch path
        window = level_and_degravitate(win, estimate_tilt(win))
        t_step = self._n_proc / (FS_RAW / DECIM_FACTOR)
        return t_step, window
