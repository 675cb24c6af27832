"""Rotation-synthesis dataset construction.

Processed drives are cut into overlapping 5 s windows; each window is paired
with a yaw label drawn uniformly from a configured range and rotated by that
label about the vertical axis. The rotation acts on the horizontal components
of both the accelerometer and gyroscope triads; the two vertical channels are
untouched.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .constants import STRIDE_S, TRAIN_YAW_RANGE, WINDOW_LEN

STRIDE_SAMPLES = 5  # canonical stride at 20 Hz (0.25 s)


@dataclass
class YawRotation:
    """In-plane rotation by psi about the vertical axis.

    r3 is the 3x3 rotation applied to a single sensor triad, r6 the
    block-diagonal 6x6 version acting on a concatenated accel+gyro row.
    """

    psi: float
    r3: np.ndarray
    r6: np.ndarray


def make_rotation(psi):
    """Build the 3x3 and block 6x6 yaw rotation matrices for angle psi [rad]."""
    psi = float(psi)
    if not np.isfinite(psi):
        raise ValueError("psi must be finite")
    c, s = np.cos(psi), np.sin(psi)
    r3 = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    r6 = np.zeros((6, 6))
    r6[:3, :3] = r3
    r6[3:, 3:] = r3
    return YawRotation(psi=psi, r3=r3, r6=r6)


def rotate_window(x, psi):
    """Rotate window rows by psi about the vertical: each row v -> R6 @ v.

    Accepts a single (100, 6) window or a batch (n, 100, 6); the z-axis
    accel and gyro columns (2 and 5) are unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    r6 = make_rotation(psi).r6
    return x @ r6.T


def window_drive(x20, t20=None, *, window_len=WINDOW_LEN, stride=STRIDE_SAMPLES):
    """Cut a processed 20 Hz stream (n, 6) into overlapping windows.

    Returns (windows, start_times) with windows shaped (m, window_len, 6);
    start_times are taken from t20 when given, else sample indices. Streams
    shorter than one window yield an empty result.
    """
    x20 = np.asarray(x20, dtype=np.float64)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = x20.shape[0]
    if n < window_len:
        return np.empty((0, window_len, x20.shape[1])), np.empty((0,))
    starts = np.arange(0, n - window_len + 1, stride)
    # force one canonical memory layout: reductions on equal values can
    # round differently across layouts, breaking streaming/batch equality
    windows = np.ascontiguousarray(np.stack([x20[s : s + window_len] for s in starts]))
    if t20 is None:
        start_times = starts.astype(np.float64)
    else:
        t20 = np.asarray(t20, dtype=np.float64)
        start_times = t20[starts]
    return windows, start_times


@dataclass
class WindowSet:
    """Labeled training pairs plus the provenance needed to regenerate them."""

    x: np.ndarray            # (n, 100, 6) rotated windows
    psi: np.ndarray          # (n,) yaw labels [rad]
    drive_ids: list = field(default_factory=list)   # (n,) provenance
    start_times: np.ndarray = None                  # (n,) window starts [s]

    def __len__(self):
        return self.x.shape[0]


def synthesize_pairs(windows, yaw_range=TRAIN_YAW_RANGE, seed=0, *,
                     drive_id=None, start_times=None):
    """Draw one uniform yaw per window and rotate the window by it.

    The generator is seeded, so a (windows, range, seed) triple regenerates
    the identical pairs. Degenerate range [c, c] labels every window c.
    """
    windows = np.asarray(windows, dtype=np.float64)
    lo, hi = float(yaw_range[0]), float(yaw_range[1])
    if lo > hi:
        raise ValueError("yaw range must satisfy lo <= hi")
    rng = np.random.default_rng(seed)
    n = windows.shape[0]
    psis = rng.uniform(lo, hi, size=n) if hi > lo else np.full(n, lo)
    rotated = np.empty_like(windows)
    for i in range(n):
        rotated[i] = rotate_window(windows[i], psis[i])
    ids = [drive_id] * n if drive_id is not None else [None] * n
    if start_times is None:
        start_times = np.arange(n, dtype=np.float64)
    return WindowSet(x=rotated, psi=psis, drive_ids=ids,
                     start_times=np.asarray(start_times, dtype=np.float64))


def derive_seed(root_seed, label):
    """Stable per-component seed: sha256 of the root seed and a label.

    Python's builtin hash() is salted per process, so it is not used.
    """
    digest = hashlib.sha256(f"{root_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def split_train_val(drive_ids, ratio=0.85, seed=0):
    """Split drives (not windows) into train/validation id lists.

    The validation count is floor((1 - ratio) * n); the shuffle is seeded.
    Splitting at drive granularity keeps validation windows from sharing a
    drive with training windows.
    """
    drive_ids = list(drive_ids)
    if len(drive_ids) < 2:
        raise ValueError("need at least 2 drives to split")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    n_val = int(np.floor((1.0 - ratio) * len(drive_ids)))
    n_val = max(1, n_val)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(drive_ids))
    val_ids = [drive_ids[i] for i in order[:n_val]]
    train_ids = [drive_ids[i] for i in order[n_val:]]
    return train_ids, val_ids


def concat_window_sets(sets):
    """Stack several WindowSets into one."""
    sets = [s for s in sets if len(s) > 0]
    if not sets:
        return WindowSet(x=np.empty((0, WINDOW_LEN, 6)), psi=np.empty((0,)),
                         drive_ids=[], start_times=np.empty((0,)))
    return WindowSet(
        x=np.concatenate([s.x for s in sets]),
        psi=np.concatenate([s.psi for s in sets]),
        drive_ids=sum([s.drive_ids for s in sets], []),
        start_times=np.concatenate([s.start_times for s in sets]),
    )


def build_manifest(drive_ids, train_ids, val_ids, *, seed, yaw_range,
                   stride_s=STRIDE_S, ratio=0.85):
    """Manifest dict sufficient to regenerate every pair bit-identically."""
    return {
        "drives": list(drive_ids),
        "train_drives": list(train_ids),
        "val_drives": list(val_ids),
        "seed": int(seed),
        "yaw_range_rad": [float(yaw_range[0]), float(yaw_range[1])],
        "stride_s": float(stride_s),
        "split_ratio": float(ratio),
    }


def save_manifest(manifest, path):
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)


def load_manifest(path):
    with open(path) as f:
        return json.load(f)
