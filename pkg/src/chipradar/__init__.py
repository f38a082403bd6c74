"""Simulation of a chip-based photonic Ku-band radar: frequency-doubled
chirp generation, photonic de-chirp reception and turntable ISAR imaging."""

from .config import SimConfig, load_config
from .errors import (
    ChipRadarError,
    ConfigError,
    InfeasibleError,
    OutOfRangeError,
    PeakNotFoundError,
    SamplingError,
)
from .radar import PhotonicRadar

__version__ = "0.1.0"

__all__ = [
    "ChipRadarError",
    "ConfigError",
    "InfeasibleError",
    "OutOfRangeError",
    "PeakNotFoundError",
    "PhotonicRadar",
    "SamplingError",
    "SimConfig",
    "load_config",
]
