"""Exception types raised across the package."""


class MoeOffloadError(Exception):
    """Base class for all package errors."""


class ConfigError(MoeOffloadError, ValueError):
    """A configuration file is missing, malformed, or violates an invariant."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ShapeError(MoeOffloadError, ValueError):
    pass


class InfeasibleChannel(MoeOffloadError, ValueError):
    """Transmission rate is zero, so no payload can be delivered."""


class InvalidAction(MoeOffloadError, ValueError):
    pass


class EpisodeOver(MoeOffloadError, RuntimeError):
    pass


class NotEnoughData(MoeOffloadError, RuntimeError):
    pass


class CheckpointMismatch(MoeOffloadError, ValueError):
    pass


class CheckpointFormatError(MoeOffloadError, ValueError):
    pass


class NumericalFailure(MoeOffloadError, FloatingPointError):
    """A NaN or Inf showed up in a value that is about to be persisted."""


class PlotDataError(MoeOffloadError, ValueError):
    pass
