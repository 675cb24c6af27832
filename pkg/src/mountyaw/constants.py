"""Library-wide physical and pipeline constants."""

GRAVITY = 9.80665
"""Standard gravity [m/s^2]. At rest the accelerometer reads +GRAVITY on the
axis pointing up (specific-force convention)."""

FS_RAW = 100.0
"""Raw IMU sample rate [Hz]."""

FS_PROC = 20.0
"""Sample rate after decimation [Hz]."""

DECIM_FACTOR = 5
"""Raw-to-processed decimation factor (100 Hz -> 20 Hz)."""

LOWPASS_CUTOFF_HZ = 10.0
"""Anti-alias low-pass cutoff [Hz]."""

LOWPASS_ORDER = 4
"""Butterworth order of the low-pass, realized as cascaded biquads."""

WINDOW_LEN = 100
"""Samples per network input window (5 s at 20 Hz)."""

WINDOW_S = 5.0
"""Window span [s]."""

STRIDE_S = 0.25
"""Canonical training-window stride [s] (5 samples at 20 Hz)."""

STEP_PERIOD_S = 0.5
"""Real-time estimator step period [s]."""

LEVEL_TOLERANCE = 0.5
"""Max |time-mean| of the leveled, gravity-removed vertical accel channel
[m/s^2] for a window to count as successfully leveled."""

TRAIN_YAW_RANGE = (-2.356194490192345, 2.356194490192345)
"""Default synthetic-label range [rad]: (-3/4)pi .. (3/4)pi."""

VAL_YAW_RANGE = (-1.5707963267948966, 1.5707963267948966)
"""Default held-out rotation range [rad]: -pi/2 .. pi/2."""
