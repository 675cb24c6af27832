"""IMU yaw mounting-angle estimation.

End-to-end pipeline: synthetic drive generation, deterministic IMU
preprocessing, rotation-synthesis training data, a small Conv1D regressor
trained with a periodic cosine loss, and a real-time smoothing /
change-detection estimator.
"""

from .angles import circular_mean, wrap_angle
from .estimators import WindowPreprocessor, YawRegressor
from .net import YawConvNet, kaiming_init, load_checkpoint, save_checkpoint
from .realtime import EstimatorParams, EstimatorState
from .simulate import DriveProfile, DriveRecording, MountPose

__version__ = "0.1.0"

__all__ = [
    "DriveProfile",
    "DriveRecording",
    "EstimatorParams",
    "EstimatorState",
    "MountPose",
    "WindowPreprocessor",
    "YawConvNet",
    "YawRegressor",
    "circular_mean",
    "kaiming_init",
    "load_checkpoint",
    "save_checkpoint",
    "wrap_angle",
]
