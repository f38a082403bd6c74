"""De-chirp reception, range profiles and peak metrics.

A delay τ on the transmitted chirp (RF rate K = 2k) becomes a beat tone at
K·τ after de-chirping. Range follows as L = (c·T / 2B)·f with B = K·T the
transmitted bandwidth, so the range scale reduces to c / (2K).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .constants import C_LIGHT, db20
from .errors import PeakNotFoundError, SamplingError
from .photonics import MzmSpec, OpticalEnvelope, PdSpec, mzm_transfer
from .waveform import ChirpSpec, RealSignal, butterworth_gain, lowpass_decimate

DEFAULT_OUT_RATE = 100e6
DEFAULT_ZERO_PAD = 16
WINDOWS = ("rectangular", "hann", "hamming", "blackman", "taylor")


@dataclass(frozen=True)
class DechirpOutput:
    samples: np.ndarray
    sample_rate: float
    chirp_rate_rf: float  # Hz/s, slope of the transmitted (doubled) chirp
    pulse_duration: float

    def __post_init__(self):
        if self.sample_rate * self.pulse_duration < 16:
            raise SamplingError(
                f"{self.sample_rate} Hz over {self.pulse_duration} s gives fewer than 16 samples"
            )

    @property
    def range_scale(self) -> float:
        return C_LIGHT / (2.0 * self.chirp_rate_rf)

    def as_signal(self) -> RealSignal:
        return RealSignal(self.samples, self.sample_rate)


@dataclass(frozen=True)
class RangeProfile:
    magnitude_db: np.ndarray
    freq_axis: np.ndarray
    range_scale: float  # m/Hz
    window_name: str
    reference_offset: float = 0.0  # m, subtracted from every range

    def __post_init__(self):
        if self.range_scale <= 0:
            raise ValueError("range_scale must be > 0")

    @property
    def range_axis(self) -> np.ndarray:
        return self.freq_axis * self.range_scale - self.reference_offset

    @property
    def bin_spacing(self) -> float:
        return float(self.freq_axis[1] - self.freq_axis[0])


@dataclass(frozen=True)
class PeakReport:
    peak_freq: float
    range: float
    width_3db: float
    resolution: float
    slsr: float
    peak_db: float = 0.0

    def as_dict(self) -> dict:
        return {
            "peak_freq_hz": self.peak_freq,
            "range_m": self.range,
            "width_3db_hz": self.width_3db,
            "resolution_m": self.resolution,
            "slsr_db": self.slsr if np.isfinite(self.slsr) else None,
        }


def _check_beats(beats, out_rate: float) -> None:
    beats = np.abs(np.asarray(beats, dtype=float))
    if beats.size and beats.max() >= out_rate / 2.0:
        raise SamplingError(
            f"beat frequency {beats.max():.6g} Hz aliases at output rate {out_rate:.6g} Hz"
        )


def dechirp_physical(
    reference: OpticalEnvelope,
    echo_rf: RealSignal,
    mzm2: MzmSpec,
    pd2: PdSpec,
    chirp: ChirpSpec,
    out_rate: float = DEFAULT_OUT_RATE,
    max_beat: float | None = None,
    multiplier: int = 2,
) -> DechirpOutput:
    """Modulate the reference light with the echo on MZM2 and detect on PD2.

    The echo-free background R·|E_ref·g(0)|² is subtracted before detection
    (AC coupling of the static photocurrent), then the photocurrent is
    low-passed by the PD response and decimated to ``out_rate``.
    """
    if echo_rf.sample_rate != reference.sample_rate or len(echo_rf) != len(reference):
        raise SamplingError("echo and reference must share sample rate and length")
    if max_beat is not None:
        _check_beats([max_beat], out_rate)
    ref_power = reference.power
    gain = mzm_transfer(echo_rf.samples, mzm2)
    g0 = mzm_transfer(0.0, mzm2)
    modulated = gain.real**2 + gain.imag**2 - abs(g0) ** 2
    current = RealSignal(pd2.responsivity * ref_power * modulated, reference.sample_rate)
    out = lowpass_decimate(
        current, out_rate, gain_fn=lambda f: butterworth_gain(f, pd2.bandwidth, pd2.order)
    )
    return DechirpOutput(out.samples, out_rate, multiplier * chirp.chirp_rate, chirp.duration)


def video_phase(chirp: ChirpSpec, tau: float, multiplier: int = 2) -> float:
    """Residual phase of the de-chirped tone for delay ``tau``.

    With the transmitted phase 2π(M·f0·t + M·k·t²/2), the product with its
    delayed copy carries 2π(M·f0·τ + M·k·τ·t − M·k·τ²/2).
    """
    return 2.0 * np.pi * multiplier * (chirp.f0 * tau - 0.5 * chirp.chirp_rate * tau * tau)


def dechirp_behavioral(
    spec: ChirpSpec,
    delays,
    duration: float | None = None,
    out_rate: float = DEFAULT_OUT_RATE,
    multiplier: int = 2,
) -> DechirpOutput:
    """Synthesise Σ a_i·cos(2π·K·τ_i·t + φ_i) directly, each tone present
    only where the echo overlaps the reference pulse (t ≥ τ_i).

    ``delays`` is a sequence of (τ, amplitude) pairs.
    """
    duration = spec.duration if duration is None else duration
    pairs = [(float(t), float(a)) for t, a in delays]
    rate = multiplier * spec.chirp_rate
    _check_beats([rate * t for t, _ in pairs], out_rate)
    n = int(round(duration * out_rate))
    t = np.arange(n) / out_rate
    out = np.zeros(n)
    for tau, amp in pairs:
        tone = amp * np.cos(2.0 * np.pi * rate * tau * t + video_phase(spec, tau, multiplier))
        out += np.where(t >= tau, tone, 0.0)
    return DechirpOutput(out, out_rate, rate, spec.duration)


def window_samples(name: str, n: int) -> np.ndarray:
    if name == "rectangular":
        return np.ones(n)
    if name not in WINDOWS:
        raise ValueError(f"unknown window {name!r}; choose from {WINDOWS}")
    return get_window(name, n, fftbins=False)


def range_spectrum(
    d: DechirpOutput, window: str = "rectangular", zero_pad: int = DEFAULT_ZERO_PAD
) -> tuple[np.ndarray, np.ndarray]:
    """Complex one-sided spectrum, scaled so a tone of amplitude A has |X| = A."""
    n = len(d.samples)
    w = window_samples(window, n)
    nfft = n * zero_pad
    spec = np.fft.rfft(d.samples * w, nfft) * (2.0 / w.sum())
    return np.fft.rfftfreq(nfft, 1.0 / d.sample_rate), spec


def range_profile(
    d: DechirpOutput,
    window: str = "rectangular",
    zero_pad: int = DEFAULT_ZERO_PAD,
    reference_offset: float = 0.0,
) -> RangeProfile:
    if len(d.samples) == 0:
        raise ValueError("de-chirped record is empty")
    freq, spec = range_spectrum(d, window, zero_pad)
    return RangeProfile(db20(spec), freq, d.range_scale, window, reference_offset)


def resolution_from_width(width_3db: float, range_scale: float) -> float:
    if width_3db < 0:
        raise ValueError(f"width must be >= 0, got {width_3db}")
    return width_3db * range_scale


def _mirrored(mag: np.ndarray, i: int) -> float:
    # one-sided spectrum of a real record: |X(-f)| = |X(f)|
    return mag[-i] if i < 0 else mag[i]


def parabolic_peak(mag: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex (fractional index, value) of the parabola through bins i-1, i, i+1."""
    if i + 1 >= len(mag):
        return float(i), float(mag[i])
    a, b, c = _mirrored(mag, i - 1), mag[i], mag[i + 1]
    denom = a - 2.0 * b + c
    if denom == 0.0:
        return float(i), float(b)
    shift = 0.5 * (a - c) / denom
    return i + shift, b - 0.25 * (a - c) * shift


def local_maxima(mag: np.ndarray) -> np.ndarray:
    inner = (mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])
    return np.flatnonzero(inner) + 1


def _crossing(mag, freq, i, level, step):
    """Walk from bin i in direction ``step`` to the first sample below
    ``level``; return the linearly interpolated crossing frequency."""
    j = i
    while 0 <= j + step < len(mag) and mag[j + step] >= level:
        j += step
    k = j + step
    if k < 0:
        # mirror through DC
        return -_crossing(mag, freq, 0, level, +1) if i == 0 else freq[0]
    if k >= len(mag):
        return freq[-1]
    return freq[j] + (level - mag[j]) * (freq[k] - freq[j]) / (mag[k] - mag[j])


def _main_lobe(mag: np.ndarray, i: int) -> tuple[int, int]:
    """Indices of the first local minima on each side of the peak at ``i``."""
    lo = i
    while lo > 0 and mag[lo - 1] <= mag[lo]:
        lo -= 1
    hi = i
    while hi + 1 < len(mag) and mag[hi + 1] <= mag[hi]:
        hi += 1
    return lo, hi


def strongest_sidelobe(
    p: RangeProfile, exclusion: float, peak_index: int | None = None
) -> tuple[float, float]:
    """(signed offset [Hz], suppression [dB]) of the strongest local maximum
    lying beyond the main lobe and at least ``exclusion`` Hz from the peak,
    both maxima refined by parabolic interpolation. Returns (nan, inf) if
    none exists."""
    mag = p.magnitude_db
    i = int(np.argmax(mag)) if peak_index is None else peak_index
    lo, hi = _main_lobe(mag, i)
    maxima = local_maxima(mag)
    dist = np.abs(p.freq_axis[maxima] - p.freq_axis[i])
    maxima = maxima[(dist >= exclusion) & ((maxima < lo) | (maxima > hi))]
    if maxima.size == 0:
        return float("nan"), float("inf")
    j = int(maxima[np.argmax(mag[maxima])])
    pi_, vi = parabolic_peak(mag, i)
    pj, vj = parabolic_peak(mag, j)
    return float((pj - pi_) * p.bin_spacing), float(vi - vj)


def measure_slsr(p: RangeProfile, exclusion: float, peak_index: int | None = None) -> float:
    """Main peak minus the strongest sidelobe; inf if there is none."""
    return strongest_sidelobe(p, exclusion, peak_index)[1]


def estimate_peak(
    p: RangeProfile,
    min_prominence_db: float = 10.0,
    freq_range: tuple[float, float] | None = None,
) -> PeakReport:
    """Strongest peak, refined by 3-point parabolic interpolation on dB,
    with its −3 dB width and sidelobe suppression ratio."""
    mag = p.magnitude_db
    freq = p.freq_axis
    if freq_range is None:
        candidates = np.arange(len(mag))
    else:
        candidates = np.flatnonzero((freq >= freq_range[0]) & (freq <= freq_range[1]))
        if candidates.size == 0:
            raise PeakNotFoundError(f"no bins within {freq_range}")
    i = int(candidates[np.argmax(mag[candidates])])
    floor = float(np.median(mag))
    if mag[i] - floor < min_prominence_db:
        raise PeakNotFoundError(
            f"peak {mag[i]:.2f} dB is only {mag[i] - floor:.2f} dB above the median floor"
        )
    pos, peak_db = parabolic_peak(mag, i)
    df = p.bin_spacing
    peak_freq = abs(freq[0] + pos * df)
    level = peak_db - 3.0
    f_hi = _crossing(mag, freq, i, level, +1)
    f_lo = _crossing(mag, freq, i, level, -1)
    width = float(f_hi - f_lo)
    slsr = measure_slsr(p, exclusion=width, peak_index=i)
    return PeakReport(
        peak_freq=float(peak_freq),
        range=float(peak_freq * p.range_scale - p.reference_offset),
        width_3db=width,
        resolution=resolution_from_width(width, p.range_scale),
        slsr=slsr,
        peak_db=float(peak_db),
    )
