"""Turntable ISAR: pulse-by-pulse range spectra and range-Doppler imaging."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .constants import C_LIGHT, db20
from .radar import PhotonicRadar
from .receiver import parabolic_peak, range_spectrum, window_samples
from .scene import TurntableScene, scene_delays, scene_gains

ASPECT_WARN_DEG = 15.0
THREADS_ENV = "CHIPRADAR_THREADS"


@dataclass(frozen=True)
class ProfileMatrix:
    rows: np.ndarray  # (n_pulses, n_bins) complex range spectra
    freq_axis: np.ndarray  # Hz, beat frequency of each kept bin
    pri: float
    range_scale: float  # m/Hz
    range_origin: float = 0.0  # m subtracted so the turntable centre sits at 0

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[0] < 2:
            raise ValueError("a profile matrix needs at least two pulses")
        if self.rows.shape[1] != len(self.freq_axis):
            raise ValueError("row length must match the frequency axis")

    @property
    def n_pulses(self) -> int:
        return self.rows.shape[0]

    @property
    def range_axis(self) -> np.ndarray:
        return self.freq_axis * self.range_scale - self.range_origin


@dataclass(frozen=True)
class IsarImage:
    magnitude_db: np.ndarray  # (range, cross-range), 0 dB at the peak
    range_axis: np.ndarray
    crossrange_axis: np.ndarray
    center_wavelength: float
    rotation_rate: float

    def __post_init__(self):
        if self.magnitude_db.shape != (len(self.range_axis), len(self.crossrange_axis)):
            raise ValueError("image shape does not match its axes")

    @property
    def linear(self) -> np.ndarray:
        return 10.0 ** (self.magnitude_db / 20.0)


@dataclass(frozen=True)
class Target:
    range: float
    crossrange: float
    amplitude_db: float


def thread_count() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def dwell_angle(n_pulses: int, pri: float, rotation_rate: float) -> float:
    return n_pulses * pri * rotation_rate


def centred_initial_angle(n_pulses: int, pri: float, rotation_rate: float) -> float:
    """Start angle that puts the middle of the dwell at zero rotation, so the
    image frame matches the scatterer coordinates."""
    return -0.5 * dwell_angle(n_pulses, pri, rotation_rate)


def collect_profiles(
    scene: TurntableScene,
    radar: PhotonicRadar,
    n_pulses: int = 256,
    pri: float = 100e-6,
    backend: str = "behavioral",
    out_rate: float = 50e6,
    window: str = "taylor",
    zero_pad: int = 4,
    range_limits: tuple[float, float] = (-0.3, 0.3),
    instrument_offset: float = 0.0,
    reference_offset: float = 0.0,
    path_loss: bool = False,
    exact: bool = False,
    noise_rms: float = 0.0,
    seed: int = 0,
) -> ProfileMatrix:
    """Range spectra of ``n_pulses`` pulses, the turntable at θ(p·pri) for pulse p.

    ``instrument_offset`` is the true extra one-way path of the hardware;
    ``reference_offset`` is the calibration value removed from the range
    axis. Only bins within ``range_limits`` of the turntable centre are kept.
    Receiver noise for pulse p is drawn from a generator seeded by (seed, p),
    so results do not depend on the thread schedule.
    """
    if n_pulses < 2:
        raise ValueError("at least two pulses are needed")
    aspect = np.degrees(abs(dwell_angle(n_pulses, pri, scene.rotation_rate)))
    if aspect > ASPECT_WARN_DEG:
        warnings.warn(
            f"dwell spans {aspect:.1f}° of rotation; small-angle imaging degrades above "
            f"{ASPECT_WARN_DEG}°",
            stacklevel=2,
        )
    extra = 2.0 * instrument_offset / C_LIGHT
    scale = C_LIGHT / (2.0 * radar.rf_chirp_rate)
    origin = reference_offset + scene.standoff
    lo_f = (range_limits[0] + origin) / scale
    hi_f = (range_limits[1] + origin) / scale

    def one(p: int):
        t = p * pri
        d = radar.dechirp(
            scene_delays(scene, t, exact) + extra,
            scene_gains(scene, t, path_loss),
            backend=backend,
            out_rate=out_rate,
            noise_rms=noise_rms,
            rng=np.random.default_rng([seed, p]),
        )
        freq, spec = range_spectrum(d, window, zero_pad)
        keep = (freq >= lo_f) & (freq <= hi_f)
        return freq[keep], spec[keep]

    if backend == "physical":
        radar.chain  # build the shared front end before fanning out
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(one, range(n_pulses)))
    freq = results[0][0]
    rows = np.vstack([r[1] for r in results])
    return ProfileMatrix(rows, freq, pri, scale, origin)


def form_image(
    m: ProfileMatrix,
    center_wavelength: float,
    rotation_rate: float,
    azimuth_window: str = "taylor",
    zero_pad: int = 4,
) -> IsarImage:
    """Azimuth FFT of every range bin; Doppler mapped to cross-range by
    x_cr = λ·f_d / (2ω)."""
    if rotation_rate <= 0:
        raise ValueError("rotation rate must be > 0 for cross-range imaging")
    n = m.n_pulses
    w = window_samples(azimuth_window, n)
    # the de-chirped tone carries +2π·f·τ; conjugating maps approaching
    # scatterers (shrinking τ) to positive Doppler
    data = np.conj(m.rows) * w[:, None]
    nfft = n * zero_pad
    doppler = np.fft.fftshift(np.fft.fft(data, nfft, axis=0), axes=0)
    f_d = np.fft.fftshift(np.fft.fftfreq(nfft, m.pri))
    crossrange = center_wavelength * f_d / (2.0 * rotation_rate)
    mag = np.abs(doppler).T
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    return IsarImage(db20(mag), m.range_axis, crossrange, center_wavelength, rotation_rate)


def extract_targets(img: IsarImage, threshold_db: float = 15.0) -> list[Target]:
    """Local maxima within ``threshold_db`` of the global peak, refined by
    separable parabolic interpolation and sorted strongest first."""
    if threshold_db <= 0:
        raise ValueError("threshold must lie below the peak (> 0 dB)")
    mag = img.magnitude_db
    if not np.any(img.linear > 0) or np.ptp(mag) == 0:
        return []
    peaks = (mag == maximum_filter(mag, size=3, mode="nearest")) & (mag >= mag.max() - threshold_db)
    dr = img.range_axis[1] - img.range_axis[0]
    dc = img.crossrange_axis[1] - img.crossrange_axis[0]
    out = []
    for i, j in zip(*np.nonzero(peaks)):
        if 0 < i < mag.shape[0] - 1:
            pi, vi = parabolic_peak(mag[:, j], i)
        else:
            pi, vi = float(i), mag[i, j]
        if 0 < j < mag.shape[1] - 1:
            pj, vj = parabolic_peak(mag[i, :], j)
        else:
            pj, vj = float(j), mag[i, j]
        out.append(
            Target(
                range=float(img.range_axis[0] + pi * dr),
                crossrange=float(img.crossrange_axis[0] + pj * dc),
                amplitude_db=float(max(vi, vj)),
            )
        )
    out.sort(key=lambda t: -t.amplitude_db)
    return out


def resolution_cell(radar: PhotonicRadar, n_pulses: int, pri: float, rotation_rate: float) -> tuple[float, float]:
    """Nominal (range, cross-range) resolution: c/(2B) and λ/(2·Δθ)."""
    rng = C_LIGHT / (2.0 * radar.rf_bandwidth)
    cross = radar.center_wavelength / (2.0 * abs(dwell_angle(n_pulses, pri, rotation_rate)))
    return rng, cross


def silhouette_extent(img: IsarImage, psf: IsarImage, threshold_db: float = 15.0) -> tuple[float, float]:
    """(range, cross-range) extent of the pixels within ``threshold_db`` of
    the peak, less the extent of a single-point image ``psf`` at the same
    level, so the blur of the point-spread function is not counted."""

    def box(im: IsarImage) -> tuple[float, float]:
        rows, cols = np.nonzero(im.magnitude_db >= -threshold_db)
        if rows.size == 0:
            return 0.0, 0.0
        return float(np.ptp(im.range_axis[rows])), float(np.ptp(im.crossrange_axis[cols]))

    (r, c), (pr, pc) = box(img), box(psf)
    return max(r - pr, 0.0), max(c - pc, 0.0)
