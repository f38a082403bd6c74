"""Exception types raised across the simulator."""


class ChipRadarError(Exception):
    """Base class for simulator errors."""


class SamplingError(ChipRadarError, ValueError):
    """A sample rate is too low for the content it must carry."""


class OutOfRangeError(ChipRadarError, ValueError):
    """An argument lies outside the valid domain of an operation."""


class InfeasibleError(ChipRadarError, ValueError):
    """No device parameters satisfy the requested figures of merit."""


class PeakNotFoundError(ChipRadarError, RuntimeError):
    """No spectral peak stands far enough above the floor."""


class ConfigError(ChipRadarError, ValueError):
    """Invalid simulation configuration."""
