"""Physical constants and unit helpers."""

import numpy as np

C_LIGHT = 299_792_458.0  # m/s, exact


def wavelength_to_frequency(wavelength_m: float) -> float:
    """Optical frequency [Hz] of a vacuum wavelength [m]."""
    return C_LIGHT / wavelength_m


def fsr_wavelength_to_hz(fsr_m: float, wavelength_m: float) -> float:
    """Convert a free spectral range in wavelength to frequency, c·Δλ/λ²."""
    return C_LIGHT * fsr_m / wavelength_m**2


def db10(x):
    return 10.0 * np.log10(np.maximum(x, 1e-300))


def db20(x):
    return 20.0 * np.log10(np.maximum(np.abs(x), 1e-300))
