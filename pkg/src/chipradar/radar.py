"""The assembled transceiver: laser → MZM1 → MRR → 3-dB split, with PD1 on
the transmit arm and MZM2 + PD2 de-chirping on the local arm."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .constants import C_LIGHT, db10
from .photonics import (
    DEFAULT_ENVELOPE_RATE,
    MrrSpec,
    MzmSpec,
    OpticalEnvelope,
    PdSpec,
    sideband_and_carrier,
    cw_source,
    mrr_filter,
    mzm_modulate,
    photodetect,
    split,
)
from .receiver import DEFAULT_OUT_RATE, DechirpOutput, dechirp_behavioral, dechirp_physical
from .scene import CrosstalkSpec, delay_sum
from .waveform import ChirpSpec, RealSignal, add_noise, bandpass, synth_lfm

BACKENDS = ("physical", "behavioral")


@dataclass(frozen=True)
class TxFilter:
    """Electrical band-pass after PD1 (Butterworth magnitude)."""

    low: float = 11e9
    high: float = 19.5e9
    order: int = 20


@dataclass(frozen=True)
class TransmitChain:
    tx: RealSignal  # band-passed PD1 output, normalised to unit peak
    pd1: RealSignal  # raw PD1 photocurrent [A]
    reference: OpticalEnvelope  # local arm feeding MZM2
    carrier_suppression_pre_db: float  # +1 sideband over carrier, before the ring
    carrier_suppression_post_db: float
    carrier_drop_db: float  # carrier power removed by the ring


@dataclass
class PhotonicRadar:
    chirp: ChirpSpec
    mzm1: MzmSpec
    mrr: MrrSpec
    pd: PdSpec
    mzm2: MzmSpec
    carrier_freq: float
    laser_power: float = 1e-3
    drive_amplitude: float = 0.64  # V, peak IF drive on MZM1
    echo_drive: float = 0.25  # V, MZM2 drive for a unit-reflectivity echo
    tx_filter: TxFilter = TxFilter()
    envelope_rate: float = DEFAULT_ENVELOPE_RATE
    split_ratio: float = 0.5
    multiplier: int = 2

    @property
    def rf_bandwidth(self) -> float:
        return self.multiplier * self.chirp.bandwidth

    @property
    def rf_chirp_rate(self) -> float:
        return self.multiplier * self.chirp.chirp_rate

    @property
    def center_wavelength(self) -> float:
        f_center = self.multiplier * (self.chirp.f0 + 0.5 * self.chirp.bandwidth)
        return C_LIGHT / f_center

    def sideband_band(self) -> tuple[float, float]:
        return self.chirp.f0, self.chirp.f_stop

    @cached_property
    def chain(self) -> TransmitChain:
        """Run the optical front end once; the result is reused by every pulse."""
        drive = synth_lfm(self.chirp, self.envelope_rate, self.drive_amplitude)
        laser = cw_source(self.laser_power, self.carrier_freq, self.chirp.duration, self.envelope_rate)
        modulated = mzm_modulate(laser, drive, self.mzm1)
        del laser, drive
        side_pre, carrier_pre = sideband_and_carrier(modulated, self.sideband_band())
        filtered = mrr_filter(modulated, self.mrr)
        del modulated
        side_post, carrier_post = sideband_and_carrier(filtered, self.sideband_band())
        upper, lower = split(filtered, self.split_ratio)
        del filtered
        pd1 = photodetect(upper, self.pd)
        del upper
        tx = bandpass(pd1, self.tx_filter.low, self.tx_filter.high, self.tx_filter.order)
        peak = np.max(np.abs(tx.samples))
        tx = RealSignal(tx.samples / peak, tx.sample_rate)
        return TransmitChain(
            tx,
            pd1,
            lower,
            float(db10(side_pre) - db10(carrier_pre)),
            float(db10(side_post) - db10(carrier_post)),
            float(db10(carrier_pre) - db10(carrier_post)),
        )

    def echo(
        self,
        delays,
        gains,
        crosstalk: CrosstalkSpec | None = None,
        main_delay: float | None = None,
    ) -> RealSignal:
        """RF drive of MZM2: scaled, delayed copies of the transmitted signal."""
        delays = list(np.atleast_1d(np.asarray(delays, dtype=float)))
        gains = list(np.atleast_1d(np.asarray(gains, dtype=float)))
        if crosstalk is not None and crosstalk.gain > 0:
            base = delays[0] if main_delay is None else main_delay
            delays.append(base + crosstalk.extra_delay)
            gains.append(crosstalk.gain)
        return delay_sum(self.chain.tx, delays, self.echo_drive * np.asarray(gains))

    def dechirp(
        self,
        delays,
        gains,
        backend: str = "physical",
        out_rate: float = DEFAULT_OUT_RATE,
        crosstalk: CrosstalkSpec | None = None,
        main_delay: float | None = None,
        noise_rms: float = 0.0,
        rng: np.random.Generator | None = None,
    ) -> DechirpOutput:
        delays = np.atleast_1d(np.asarray(delays, dtype=float))
        gains = np.atleast_1d(np.asarray(gains, dtype=float))
        max_beat = self.rf_chirp_rate * float(np.max(np.abs(delays), initial=0.0))
        if crosstalk is not None and crosstalk.gain > 0:
            base = delays[0] if main_delay is None else main_delay
            max_beat = max(max_beat, self.rf_chirp_rate * abs(base + crosstalk.extra_delay))
        if backend == "physical":
            out = dechirp_physical(
                self.chain.reference,
                self.echo(delays, gains, crosstalk, main_delay),
                self.mzm2,
                self.pd,
                self.chirp,
                out_rate,
                max_beat=max_beat,
                multiplier=self.multiplier,
            )
        elif backend == "behavioral":
            pairs = list(zip(delays, gains))
            if crosstalk is not None and crosstalk.gain > 0:
                base = delays[0] if main_delay is None else main_delay
                pairs.append((base + crosstalk.extra_delay, crosstalk.gain))
            out = dechirp_behavioral(self.chirp, pairs, out_rate=out_rate, multiplier=self.multiplier)
        else:
            raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
        if noise_rms > 0:
            noisy = add_noise(out.as_signal(), noise_rms, rng or np.random.default_rng(0))
            out = DechirpOutput(noisy.samples, out.sample_rate, out.chirp_rate_rf, out.pulse_duration)
        return out
