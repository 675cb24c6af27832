"""Exception types raised across the package."""


class MountYawError(Exception):
    """Base class for all package errors."""


class MalformedStreamError(MountYawError):
    """Sample stream violates the input contract (non-monotonic time,
    non-finite values, wrong shape)."""


class TiltUnobservableError(MountYawError):
    """Gravity direction cannot be recovered from the window (mean specific
    force has the wrong magnitude or points away from up)."""


class NumericFaultError(MountYawError):
    """Non-finite values appeared inside the network; carries the layer name."""

    def __init__(self, layer: str, message: str = ""):
        self.layer = layer
        super().__init__(message or f"non-finite activations in layer '{layer}'")


class CheckpointError(MountYawError):
    """Base for checkpoint load failures; the model is never partially loaded."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointCorruptError(CheckpointError):
    """Checkpoint file is truncated or not parseable."""


class CheckpointShapeError(CheckpointError):
    """Tensor names or shapes do not match the declared architecture."""


class ConfigError(MountYawError):
    """Bad configuration file or flag combination (CLI exit code 2)."""


class DataError(MountYawError):
    """Bad or missing input data (CLI exit code 3)."""
