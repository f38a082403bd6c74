"""Real-valued RF signals: LFM synthesis, spectra, spectrograms and
spectral quality metrics.

Power spectra are one-sided and expressed as mean-square power per bin, so
that the bins sum to the mean square of the samples (Parseval). A tone of
unit RMS reads 0 dB; a tone of unit peak amplitude reads -3.01 dB.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import get_window

from .constants import db10
from .errors import OutOfRangeError, SamplingError

DEFAULT_SAMPLE_RATE = 80e9
FLATNESS_SMOOTHING_BINS = 100


@dataclass(frozen=True)
class ChirpSpec:
    """IF linear-FM pulse, f(t) = f0 + k·t on [0, duration]."""

    f0: float
    bandwidth: float
    duration: float

    def __post_init__(self):
        if self.bandwidth < 0:
            raise ValueError(f"bandwidth must be >= 0, got {self.bandwidth}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if self.f0 < 0:
            raise ValueError(f"f0 must be >= 0, got {self.f0}")

    @property
    def chirp_rate(self) -> float:
        return self.bandwidth / self.duration

    @property
    def f_stop(self) -> float:
        return self.f0 + self.bandwidth


@dataclass(frozen=True)
class RealSignal:
    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if np.ndim(self.samples) != 1 or len(self.samples) < 1:
            raise ValueError("samples must be a non-empty 1-D array")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def time_axis(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.sample_rate

    def energy(self) -> float:
        return float(np.sum(self.samples**2))


class Spectrum(NamedTuple):
    freq: np.ndarray
    power_db: np.ndarray


@dataclass(frozen=True)
class Spectrogram:
    magnitude: np.ndarray  # (time, frequency)
    time_axis: np.ndarray
    freq_axis: np.ndarray
    window_length: int
    hop: int

    def ridge(self) -> np.ndarray:
        """Per-column argmax frequency [Hz]."""
        return self.freq_axis[np.argmax(self.magnitude, axis=1)]


def synth_lfm(spec: ChirpSpec, sample_rate: float, amplitude: float = 1.0) -> RealSignal:
    """Sample A·cos(2π(f0·t + k·t²/2)) on [0, T)."""
    if sample_rate <= 2.0 * spec.f_stop:
        raise SamplingError(
            f"sample rate {sample_rate:.6g} Hz does not exceed twice the chirp "
            f"stop frequency {spec.f_stop:.6g} Hz"
        )
    n = int(round(spec.duration * sample_rate))
    t = np.arange(n) / sample_rate
    # wrap the phase in cycles before scaling; keeps ~1e-10 cycle precision
    cycles = np.mod(spec.f0 * t + 0.5 * spec.chirp_rate * t * t, 1.0)
    return RealSignal(amplitude * np.cos(2.0 * np.pi * cycles), sample_rate)


def instantaneous_frequency(spec: ChirpSpec, t: float) -> float:
    if not 0.0 <= t <= spec.duration:
        raise OutOfRangeError(f"t={t} s lies outside the pulse [0, {spec.duration}] s")
    return spec.f0 + spec.bandwidth * (t / spec.duration)


def power_spectrum_linear(sig: RealSignal) -> tuple[np.ndarray, np.ndarray]:
    """One-sided per-bin mean-square power (linear)."""
    x = np.asarray(sig.samples, dtype=float)
    n = len(x)
    spec = np.fft.rfft(x)
    power = (spec.real**2 + spec.imag**2) / float(n) ** 2
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    return np.fft.rfftfreq(n, 1.0 / sig.sample_rate), power


def power_spectrum(sig: RealSignal) -> Spectrum:
    freq, power = power_spectrum_linear(sig)
    return Spectrum(freq, db10(power))


def smooth_db(power_db: np.ndarray, bins: int = FLATNESS_SMOOTHING_BINS) -> np.ndarray:
    """Moving average of linear power over ``bins`` bins, returned in dB."""
    lin = 10.0 ** (np.asarray(power_db) / 10.0)
    return db10(uniform_filter1d(lin, size=bins, mode="nearest"))


def _band_mask(freq: np.ndarray, band: tuple[float, float]) -> np.ndarray:
    lo, hi = band
    if lo > hi:
        raise OutOfRangeError(f"band lower edge {lo} exceeds upper edge {hi}")
    if lo < freq[0] or hi > freq[-1]:
        raise OutOfRangeError(f"band {band} lies outside the axis [{freq[0]}, {freq[-1]}]")
    mask = (freq >= lo) & (freq <= hi)
    if not mask.any():
        raise OutOfRangeError(f"band {band} contains no bins")
    return mask


def measure_flatness(
    spectrum: Spectrum, band: tuple[float, float], smoothing_bins: int = FLATNESS_SMOOTHING_BINS
) -> float:
    """Half the peak-to-peak excursion [dB] of the smoothed in-band power."""
    mask = _band_mask(spectrum.freq, band)
    smoothed = smooth_db(spectrum.power_db, smoothing_bins)[mask]
    return float((smoothed.max() - smoothed.min()) / 2.0)


def measure_spur_rejection(
    spectrum: Spectrum, band: tuple[float, float], guard: float = 0.0
) -> float:
    """In-band mean power minus the strongest bin outside ``band`` widened by ``guard``."""
    mask = _band_mask(spectrum.freq, band)
    lin = 10.0 ** (spectrum.power_db[mask] / 10.0)
    in_band = float(db10(np.mean(lin)))
    lo, hi = band
    outside = (spectrum.freq < lo - guard) | (spectrum.freq > hi + guard)
    if not outside.any():
        raise OutOfRangeError("no bins lie outside the band")
    return in_band - float(spectrum.power_db[outside].max())


def occupied_band(
    spectrum: Spectrum, threshold_db: float = 6.0, smoothing_bins: int = FLATNESS_SMOOTHING_BINS
) -> tuple[float, float]:
    """Outermost frequencies where the smoothed spectrum lies within
    ``threshold_db`` of its maximum, linearly interpolated between bins."""
    smoothed = smooth_db(spectrum.power_db, smoothing_bins)
    level = smoothed.max() - threshold_db
    above = np.flatnonzero(smoothed >= level)
    i, j = above[0], above[-1]
    f = spectrum.freq

    def cross(a, b):
        ya, yb = smoothed[a], smoothed[b]
        if ya == yb:
            return f[a]
        return f[a] + (level - ya) * (f[b] - f[a]) / (yb - ya)

    lo = cross(i - 1, i) if i > 0 else f[0]
    hi = cross(j, j + 1) if j + 1 < len(f) else f[-1]
    return float(lo), float(hi)


def stft(
    sig: RealSignal, window_length: int = 2048, hop: int = 512, chunk_frames: int = 512
) -> Spectrogram:
    """Hann-windowed short-time Fourier magnitude, scaled so a tone of
    amplitude A reads A at its bin."""
    x = np.asarray(sig.samples, dtype=float)
    if window_length > len(x):
        raise OutOfRangeError(
            f"window length {window_length} exceeds signal length {len(x)}"
        )
    if hop < 1:
        raise ValueError("hop must be >= 1")
    win = get_window("hann", window_length)
    scale = 2.0 / win.sum()
    n_frames = 1 + (len(x) - window_length) // hop
    frames = np.lib.stride_tricks.sliding_window_view(x, window_length)[::hop]
    mag = np.empty((n_frames, window_length // 2 + 1))
    # chunked so the windowed frame block stays small for long captures
    for start in range(0, n_frames, chunk_frames):
        block = frames[start:start + chunk_frames] * win
        mag[start:start + chunk_frames] = np.abs(np.fft.rfft(block, axis=1)) * scale
    centers = np.arange(n_frames) * hop + window_length / 2.0
    return Spectrogram(
        magnitude=mag,
        time_axis=sig.t0 + centers / sig.sample_rate,
        freq_axis=np.fft.rfftfreq(window_length, 1.0 / sig.sample_rate),
        window_length=window_length,
        hop=hop,
    )


def ridge_fit(sg: Spectrogram, interior: float = 0.9) -> tuple[float, float, float]:
    """Least-squares line through the interior ridge.

    Returns (slope Hz/s, intercept Hz, max |residual| Hz).
    """
    n = len(sg.time_axis)
    drop = int(round(n * (1.0 - interior) / 2.0))
    sl = slice(drop, n - drop if drop else None)
    t = sg.time_axis[sl]
    f = sg.ridge()[sl]
    slope, intercept = np.polyfit(t, f, 1)
    resid = f - (slope * t + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


def butterworth_gain(freq: np.ndarray, cutoff: float, order: int, highpass: bool = False) -> np.ndarray:
    """Zero-phase Butterworth magnitude response."""
    f = np.abs(np.asarray(freq, dtype=float))
    if highpass:
        with np.errstate(divide="ignore"):
            ratio = np.where(f > 0, cutoff / np.where(f > 0, f, 1.0), np.inf)
    else:
        ratio = f / cutoff
    with np.errstate(over="ignore"):
        return 1.0 / np.sqrt(1.0 + ratio ** (2 * order))


def _apply_gain(sig: RealSignal, gain_fn) -> RealSignal:
    n = len(sig)
    spec = np.fft.rfft(sig.samples)
    spec *= gain_fn(np.fft.rfftfreq(n, 1.0 / sig.sample_rate))
    return RealSignal(np.fft.irfft(spec, n), sig.sample_rate, sig.t0)


def butterworth_lowpass(sig: RealSignal, cutoff: float, order: int = 4) -> RealSignal:
    return _apply_gain(sig, lambda f: butterworth_gain(f, cutoff, order))


def bandpass(sig: RealSignal, low: float, high: float, order: int) -> RealSignal:
    """Butterworth-magnitude band-pass built from a high-pass and a low-pass section."""
    return _apply_gain(
        sig,
        lambda f: butterworth_gain(f, low, order, highpass=True) * butterworth_gain(f, high, order),
    )


def decimation_factor(sample_rate: float, out_rate: float) -> int:
    ratio = sample_rate / out_rate
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9 * ratio:
        raise SamplingError(
            f"output rate {out_rate} Hz is not an integer divisor of {sample_rate} Hz"
        )
    return factor


def lowpass_decimate(
    sig: RealSignal, out_rate: float, cutoff_fraction: float = 0.45, gain_fn=None
) -> RealSignal:
    """Brick-wall low-pass at ``cutoff_fraction·out_rate`` followed by an
    integer-ratio resample, done in one rfft/irfft pair. ``gain_fn`` (a
    frequency response) is applied on the way."""
    factor = decimation_factor(sig.sample_rate, out_rate)
    n = len(sig)
    if n % factor:
        raise SamplingError(f"signal length {n} is not a multiple of the decimation factor {factor}")
    n_out = n // factor
    spec = np.fft.rfft(sig.samples)
    freq = np.fft.rfftfreq(n, 1.0 / sig.sample_rate)
    keep = n_out // 2 + 1
    spec = spec[:keep].copy()
    freq = freq[:keep]
    if gain_fn is not None:
        spec *= gain_fn(freq)
    spec[freq > cutoff_fraction * out_rate] = 0.0
    return RealSignal(np.fft.irfft(spec, n_out) * (n_out / n), out_rate, sig.t0)


def add_noise(sig: RealSignal, rms: float, rng: np.random.Generator) -> RealSignal:
    """Additive white Gaussian noise; the input is returned unchanged when ``rms`` is zero."""
    if rms <= 0:
        return sig
    return RealSignal(sig.samples + rng.normal(0.0, rms, len(sig)), sig.sample_rate, sig.t0)
