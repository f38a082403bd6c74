"""On-chip optical devices acting on a complex baseband optical envelope.

The envelope is referenced to the laser carrier: a spectral component at
offset f in ``OpticalEnvelope.samples`` represents optical frequency
``carrier_freq + f``. Power is |E|² in watts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .constants import db10
from .errors import InfeasibleError, OutOfRangeError, SamplingError
from .waveform import RealSignal, butterworth_lowpass

DEFAULT_ENVELOPE_RATE = 80e9


@dataclass(frozen=True)
class OpticalEnvelope:
    samples: np.ndarray
    sample_rate: float
    carrier_freq: float

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.carrier_freq <= 0:
            raise ValueError(f"carrier_freq must be > 0, got {self.carrier_freq}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def power(self) -> np.ndarray:
        return self.samples.real**2 + self.samples.imag**2

    def energy(self) -> float:
        return float(np.sum(self.power))

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Two-sided power per bin [W], offsets sorted ascending."""
        n = len(self.samples)
        spec = np.fft.fftshift(np.fft.fft(self.samples)) / n
        freq = np.fft.fftshift(np.fft.fftfreq(n, 1.0 / self.sample_rate))
        return freq, spec.real**2 + spec.imag**2

    def with_samples(self, samples: np.ndarray) -> OpticalEnvelope:
        return OpticalEnvelope(samples, self.sample_rate, self.carrier_freq)


@dataclass(frozen=True)
class MzmSpec:
    """Push-pull Mach-Zehnder modulator.

    ``bias_phase`` is the static phase difference between the arms (π is
    the null point); ``arm_imbalance`` is an extra uncompensated phase on
    one arm that leaks carrier at null bias.
    """

    v_pi: float
    bias_phase: float = np.pi
    arm_imbalance: float = 0.0
    insertion_loss: float = 0.0  # dB

    def __post_init__(self):
        if self.v_pi <= 0:
            raise ValueError(f"v_pi must be > 0, got {self.v_pi}")
        if self.insertion_loss < 0:
            raise ValueError(f"insertion_loss must be >= 0 dB, got {self.insertion_loss}")

    @property
    def field_loss(self) -> float:
        return 10.0 ** (-self.insertion_loss / 20.0)

    def modulation_index(self, amplitude: float) -> float:
        """Per-arm peak phase swing π·V/(2·Vπ) for a drive of peak ``amplitude``."""
        return np.pi * amplitude / (2.0 * self.v_pi)


@dataclass(frozen=True)
class MrrSpec:
    """All-pass ring: H(φ) = (t − a·e^{iφ}) / (1 − t·a·e^{iφ})."""

    fsr: float
    self_coupling: float
    round_trip_amplitude: float
    resonance_offset: float = 0.0

    def __post_init__(self):
        if self.fsr <= 0:
            raise ValueError(f"fsr must be > 0, got {self.fsr}")
        if not 0.0 < self.self_coupling < 1.0:
            raise ValueError(f"self_coupling must lie in (0, 1), got {self.self_coupling}")
        if not 0.0 < self.round_trip_amplitude <= 1.0:
            raise ValueError(
                f"round_trip_amplitude must lie in (0, 1], got {self.round_trip_amplitude}"
            )

    @property
    def h_max(self) -> float:
        t, a = self.self_coupling, self.round_trip_amplitude
        return (a + t) / (1.0 + a * t)

    @property
    def h_min(self) -> float:
        t, a = self.self_coupling, self.round_trip_amplitude
        return abs(a - t) / (1.0 - a * t)

    @property
    def extinction_ratio_db(self) -> float:
        """20·log10(|H|max / |H|min); infinite at critical coupling."""
        if self.h_min == 0.0:
            return float("inf")
        return float(20.0 * np.log10(self.h_max / self.h_min))

    @property
    def notch_fwhm(self) -> float:
        return _notch_fwhm(self.self_coupling, self.round_trip_amplitude, self.fsr)


@dataclass(frozen=True)
class PdSpec:
    responsivity: float  # A/W
    bandwidth: float  # Hz, 4th-order Butterworth magnitude
    order: int = 4

    def __post_init__(self):
        if self.responsivity <= 0:
            raise ValueError(f"responsivity must be > 0, got {self.responsivity}")
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")


def cw_source(power: float, carrier_freq: float, duration: float, sample_rate: float) -> OpticalEnvelope:
    if power < 0:
        raise ValueError(f"optical power must be >= 0, got {power}")
    n = int(round(duration * sample_rate))
    samples = np.full(n, np.sqrt(power), dtype=complex)
    return OpticalEnvelope(samples, sample_rate, carrier_freq)


def _check_aligned(field: OpticalEnvelope, drive: RealSignal) -> None:
    if field.sample_rate != drive.sample_rate:
        raise SamplingError(
            f"drive rate {drive.sample_rate} Hz differs from field rate {field.sample_rate} Hz"
        )
    if len(field) != len(drive):
        raise SamplingError(f"drive length {len(drive)} differs from field length {len(field)}")


def mzm_transfer(v: np.ndarray, spec: MzmSpec) -> np.ndarray:
    """Complex field gain of the modulator for drive voltage ``v``.

    (L/2)·[exp(i(θ + φ_b/2 + δ)) + exp(−i(θ + φ_b/2))] with θ = π·v/(2·Vπ),
    written in the equivalent single-cosine form.
    """
    theta = np.pi * np.asarray(v, dtype=float) / (2.0 * spec.v_pi)
    delta = spec.arm_imbalance
    common = spec.field_loss * np.exp(0.5j * delta)
    return common * np.cos(theta + 0.5 * (spec.bias_phase + delta))


def mzm_modulate(field: OpticalEnvelope, drive: RealSignal, spec: MzmSpec) -> OpticalEnvelope:
    _check_aligned(field, drive)
    return field.with_samples(field.samples * mzm_transfer(drive.samples, spec))


def mzm_sideband_oracle(
    m: float, n: int, bias_phase: float = np.pi, arm_imbalance: float = 0.0, insertion_loss: float = 0.0
) -> complex:
    """Jacobi–Anger coefficient of sideband ``n`` for a drive θ = m·cos(ωt).

    Uses e^{±i m cos x} = Σ (±i)^n J_n(m) e^{inx}; relative to a unit input
    field.
    """
    if abs(n) > 50:
        raise OutOfRangeError(f"sideband order {n} exceeds 50")
    jn = special.jv(n, m)
    loss = 10.0 ** (-insertion_loss / 20.0)
    upper = np.exp(1j * (0.5 * bias_phase + arm_imbalance)) * (1j) ** n
    lower = np.exp(-0.5j * bias_phase) * (-1j) ** n
    return complex(0.5 * loss * jn * (upper + lower))


def mrr_transfer(spec: MrrSpec, detuning):
    t, a = spec.self_coupling, spec.round_trip_amplitude
    phi = 2.0 * np.pi * (np.asarray(detuning, dtype=float) - spec.resonance_offset) / spec.fsr
    z = a * np.exp(1j * phi)
    return (t - z) / (1.0 - t * z)


def _notch_fwhm(t: float, a: float, fsr: float) -> float:
    """Full width of the notch where |H|² crosses halfway between its
    minimum and maximum (linear power)."""
    hmax2 = ((a + t) / (1 + a * t)) ** 2
    hmin2 = ((a - t) / (1 - a * t)) ** 2
    level = 0.5 * (hmax2 + hmin2)
    p, s = a * t, a * a + t * t
    cos_half = (s - level * (1 + p * p)) / (2 * p * (1 - level))
    if cos_half <= -1.0:
        return fsr
    return float(np.arccos(min(cos_half, 1.0)) / np.pi * fsr)


def _er_db(t: float, a: float) -> float:
    return 20.0 * np.log10((a + t) * (1 - a * t) / ((a - t) * (1 + a * t)))


def mrr_solve(fsr: float, er: float, fwhm: float, resonance_offset: float = 0.0) -> MrrSpec:
    """Back-solve (t, a) from a measured extinction ratio [dB] and notch
    width [Hz].

    |H| is symmetric under t ↔ a; the returned spec is the over-coupled
    branch (t < a), i.e. the low-loss ring.
    """
    if not np.isfinite(er):
        raise InfeasibleError("an infinite extinction ratio requires critical coupling (a == t)")
    if er <= 0:
        raise InfeasibleError(f"extinction ratio must be > 0 dB, got {er}")
    if not 0.0 < fwhm < fsr / 2.0:
        raise InfeasibleError(f"notch width {fwhm} Hz must lie in (0, fsr/2 = {fsr / 2} Hz)")

    def t_for(a: float) -> float:
        hi = a * (1.0 - 1e-15)
        return optimize.brentq(lambda t: _er_db(t, a) - er, a * 1e-12, hi, xtol=1e-16)

    def width_err(a: float) -> float:
        return _notch_fwhm(t_for(a), a, fsr) - fwhm

    lo, hi = 1e-6, 1.0 - 1e-13
    try:
        if width_err(lo) * width_err(hi) > 0:
            raise InfeasibleError(f"no (t, a) in (0, 1) gives ER={er} dB with width {fwhm} Hz")
        a = optimize.brentq(width_err, lo, hi, xtol=1e-16)
    except ValueError as exc:
        raise InfeasibleError(str(exc)) from exc
    return MrrSpec(fsr, t_for(a), a, resonance_offset)


def mrr_filter(field: OpticalEnvelope, spec: MrrSpec) -> OpticalEnvelope:
    if len(field) == 0:
        raise ValueError("field is empty")
    n = len(field)
    detuning = np.fft.fftfreq(n, 1.0 / field.sample_rate)
    spec_f = np.fft.fft(field.samples)
    spec_f *= mrr_transfer(spec, detuning)
    return field.with_samples(np.fft.ifft(spec_f))


def split(field: OpticalEnvelope, power_ratio: float = 0.5) -> tuple[OpticalEnvelope, OpticalEnvelope]:
    """Ideal lossless coupler; ``power_ratio`` of the power goes to the first port."""
    if not 0.0 < power_ratio < 1.0:
        raise ValueError(f"power_ratio must lie in (0, 1), got {power_ratio}")
    return (
        field.with_samples(field.samples * np.sqrt(power_ratio)),
        field.with_samples(field.samples * np.sqrt(1.0 - power_ratio)),
    )


def photodetect(field: OpticalEnvelope, pd: PdSpec) -> RealSignal:
    """Square-law detection i = R·|E|² followed by the PD low-pass response."""
    current = pd.responsivity * field.power
    return butterworth_lowpass(RealSignal(current, field.sample_rate), pd.bandwidth, pd.order)


def sideband_and_carrier(
    field: OpticalEnvelope,
    sideband: tuple[float, float],
    carrier_halfwidth: float = 100e6,
) -> tuple[float, float]:
    """(integrated power over the ``sideband`` offsets, carrier power within
    ±``carrier_halfwidth``), both in watts."""
    freq, power = field.spectrum()
    carrier = power[np.abs(freq) <= carrier_halfwidth].sum()
    lo, hi = sideband
    side = power[(freq >= lo) & (freq <= hi)].sum()
    return float(side), float(carrier)


def carrier_suppression_db(
    field: OpticalEnvelope,
    sideband: tuple[float, float],
    carrier_halfwidth: float = 100e6,
) -> float:
    """Integrated +1 sideband power minus carrier power [dB]. Positive means
    the carrier sits below the sideband."""
    side, carrier = sideband_and_carrier(field, sideband, carrier_halfwidth)
    return float(db10(side) - db10(carrier))
