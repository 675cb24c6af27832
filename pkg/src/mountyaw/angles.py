"""Wrap-safe angle arithmetic and circular statistics.

All estimator and metric code goes through these helpers so that angles near
the +/-pi seam behave exactly like angles near zero.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(a):
    """Wrap angle(s) [rad] to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + np.pi, TWO_PI) - np.pi
    # np.mod maps the seam to -pi; the contract keeps +pi instead
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


def angle_diff(a, b):
    """Wrapped difference a - b in (-pi, pi]."""
    return wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def circular_mean(angles, weights=None):
    """Mean direction of angles [rad], wrap-safe.

    Computed as atan2 of the summed sine/cosine components, optionally
    weighted. Raises ValueError on an empty input or a zero resultant.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.size == 0:
        raise ValueError("circular_mean of empty set")
    if weights is None:
        s = np.sin(angles).sum()
        c = np.cos(angles).sum()
    else:
        weights = np.asarray(weights, dtype=float)
        s = (weights * np.sin(angles)).sum()
        c = (weights * np.cos(angles)).sum()
    if s == 0.0 and c == 0.0:
        raise ValueError("circular mean undefined: zero resultant vector")
    return float(np.arctan2(s, c))


def wrap_deg(a):
    """Wrap angle(s) [deg] to (-180, 180]."""
    return np.degrees(wrap_angle(np.radians(a)))


def angular_errors_deg(truth_rad, estimate_rad):
    """Wrapped errors estimate - truth, in degrees."""
    return np.degrees(angle_diff(estimate_rad, truth_rad))
