import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import hilbert

from chipradar.errors import OutOfRangeError, SamplingError
from chipradar.waveform import (
    ChirpSpec,
    RealSignal,
    add_noise,
    bandpass,
    butterworth_gain,
    butterworth_lowpass,
    decimation_factor,
    instantaneous_frequency,
    lowpass_decimate,
    measure_flatness,
    measure_spur_rejection,
    occupied_band,
    power_spectrum,
    power_spectrum_linear,
    ridge_fit,
    stft,
    synth_lfm,
    Spectrum,
)


def tone(freq, fs, n, amp=1.0, phase=0.0):
    t = np.arange(n) / fs
    return RealSignal(amp * np.cos(2 * np.pi * freq * t + phase), fs)


# ---------------------------------------------------------------- synthesis


def test_lfm_matches_closed_form_phase():
    spec = ChirpSpec(1e6, 2e6, 1e-3)
    fs = 20e6
    sig = synth_lfm(spec, fs, amplitude=0.5)
    t = np.arange(int(spec.duration * fs)) / fs
    oracle = 0.5 * np.cos(2 * np.pi * (1e6 * t + 0.5 * 2e9 * t**2))
    assert np.max(np.abs(sig.samples - oracle)) < 1e-8


def test_lfm_instantaneous_frequency_tracks_f0_plus_kt():
    # analytic-signal oracle, independent of the synthesis formula
    spec = ChirpSpec(2e6, 3e6, 200e-6)
    fs = 40e6
    sig = synth_lfm(spec, fs)
    phase = np.unwrap(np.angle(hilbert(sig.samples)))
    f_inst = np.diff(phase) * fs / (2 * np.pi)
    t = (np.arange(len(f_inst)) + 0.5) / fs
    interior = slice(len(t) // 20, -len(t) // 20)
    expected = spec.f0 + spec.chirp_rate * t
    bin_width = 1.0 / spec.duration
    assert np.max(np.abs(f_inst[interior] - expected[interior])) < bin_width


def test_zero_bandwidth_chirp_is_a_tone():
    spec = ChirpSpec(1e6, 0.0, 1e-4)
    sig = synth_lfm(spec, 10e6)
    ref = tone(1e6, 10e6, len(sig))
    assert np.allclose(sig.samples, ref.samples, atol=1e-12)


def test_lfm_rejects_undersampling():
    spec = ChirpSpec(6e9, 3e9, 1e-6)
    with pytest.raises(SamplingError):
        synth_lfm(spec, 18e9)


def test_instantaneous_frequency_domain():
    spec = ChirpSpec(6e9, 3e9, 100e-6)
    assert instantaneous_frequency(spec, 0.0) == 6e9
    assert instantaneous_frequency(spec, 100e-6) == pytest.approx(9e9)
    assert instantaneous_frequency(spec, 50e-6) == pytest.approx(7.5e9)
    with pytest.raises(OutOfRangeError):
        instantaneous_frequency(spec, 101e-6)


def test_chirp_spec_validation():
    with pytest.raises(ValueError):
        ChirpSpec(1e9, -1.0, 1e-6)
    with pytest.raises(ValueError):
        ChirpSpec(1e9, 1e9, 0.0)
    assert ChirpSpec(6e9, 3e9, 100e-6).chirp_rate == pytest.approx(3e13)


# ---------------------------------------------------------------- spectra


@settings(max_examples=40, deadline=None)
@given(n=st.integers(16, 4096), seed=st.integers(0, 2**31))
def test_parseval(n, seed):
    x = np.random.default_rng(seed).normal(size=n)
    _, p = power_spectrum_linear(RealSignal(x, 1.0))
    assert abs(p.sum() - np.mean(x**2)) <= 1e-9 * np.mean(x**2)


def test_unit_peak_tone_reads_minus_3db():
    sp = power_spectrum(tone(1e6, 16e6, 1600))
    assert sp.power_db.max() == pytest.approx(10 * np.log10(0.5), abs=1e-9)


def _flat_spectrum(ripple_db=0.0):
    f = np.linspace(0, 100.0, 10001)
    p = np.full_like(f, -100.0)
    band = (f >= 20) & (f <= 60)
    p[band] = 0.0 + ripple_db * np.sin(2 * np.pi * f[band] / 10.0)
    return Spectrum(f, p)


def test_occupied_band_of_rectangular_spectrum():
    lo, hi = occupied_band(_flat_spectrum(), smoothing_bins=1)
    assert lo == pytest.approx(20.0, abs=0.01)
    assert hi == pytest.approx(60.0, abs=0.01)


def test_flatness_reports_half_peak_to_peak():
    sp = _flat_spectrum(ripple_db=0.8)
    assert measure_flatness(sp, (25, 55), smoothing_bins=1) == pytest.approx(0.8, abs=1e-3)


def test_spur_rejection_against_injected_spur():
    f, p = _flat_spectrum()
    p = p.copy()
    p[np.argmin(np.abs(f - 80.0))] = -27.0
    assert measure_spur_rejection(Spectrum(f, p), (20, 60), guard=2.0) == pytest.approx(27.0, abs=1e-9)


def test_band_outside_axis_rejected():
    with pytest.raises(OutOfRangeError):
        measure_flatness(_flat_spectrum(), (50, 150))


# ---------------------------------------------------------------- STFT


def test_stft_ridge_slope_equals_chirp_rate():
    spec = ChirpSpec(1e6, 4e6, 1e-3)
    sg = stft(synth_lfm(spec, 20e6), 256, 64)
    slope, intercept, resid = ridge_fit(sg)
    assert slope == pytest.approx(spec.chirp_rate, rel=0.01)
    assert intercept == pytest.approx(spec.f0, abs=2 * 20e6 / 256)


def test_stft_tone_amplitude():
    sg = stft(tone(2.5e6, 20e6, 4096, amp=0.3), 512, 128)
    assert sg.magnitude.max() == pytest.approx(0.3, rel=1e-3)


def test_stft_window_longer_than_signal():
    with pytest.raises(OutOfRangeError):
        stft(tone(1e6, 10e6, 100), 256, 64)


# ---------------------------------------------------------------- filters


def test_butterworth_half_power_at_cutoff():
    g = butterworth_gain(np.array([0.0, 1e9, 1e12]), 1e9, 4)
    assert g[0] == 1.0
    assert 20 * np.log10(g[1]) == pytest.approx(-3.0103, abs=1e-3)
    assert g[2] < 1e-11
    assert butterworth_gain(np.array([0.0]), 1e9, 4, highpass=True)[0] == 0.0


def test_bandpass_passes_centre_and_blocks_edges():
    fs, n = 1e3, 10000
    inside = bandpass(tone(100.0, fs, n), 50.0, 200.0, 8)
    outside = bandpass(tone(10.0, fs, n), 50.0, 200.0, 8)
    assert np.std(inside.samples) == pytest.approx(np.std(tone(100.0, fs, n).samples), rel=1e-3)
    assert np.std(outside.samples) < 1e-4


def test_unit_gain_filter_preserves_energy():
    x = RealSignal(np.random.default_rng(3).normal(size=4096), 1.0)
    y = butterworth_lowpass(x, 1e9, 4)  # cutoff far above Nyquist
    assert abs(y.energy() - x.energy()) <= 1e-9 * x.energy()


def test_decimation_factor():
    assert decimation_factor(80e9, 100e6) == 800
    with pytest.raises(SamplingError):
        decimation_factor(80e9, 3e9)


def test_lowpass_decimate_keeps_tone_and_drops_alias():
    fs = 1e6
    sig = RealSignal(tone(10e3, fs, 10000).samples + tone(300e3, fs, 10000).samples, fs)
    out = lowpass_decimate(sig, 100e3)
    assert out.sample_rate == 100e3
    ref = tone(10e3, 100e3, 1000)
    assert np.max(np.abs(out.samples - ref.samples)) < 1e-9


def test_add_noise_rms(rng):
    sig = RealSignal(np.zeros(100000), 1.0)
    noisy = add_noise(sig, 0.1, rng)
    assert np.std(noisy.samples) == pytest.approx(0.1, rel=0.02)
    assert add_noise(sig, 0.0, rng) is sig
