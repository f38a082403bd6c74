import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chipradar.constants import C_LIGHT
from chipradar.errors import PeakNotFoundError, SamplingError
from chipradar.receiver import (
    DechirpOutput,
    PeakReport,
    RangeProfile,
    dechirp_behavioral,
    estimate_peak,
    measure_slsr,
    parabolic_peak,
    range_profile,
    range_spectrum,
    resolution_from_width,
    strongest_sidelobe,
    video_phase,
)
from chipradar.waveform import ChirpSpec

CHIRP = ChirpSpec(6e9, 3e9, 100e-6)
K = 2 * CHIRP.chirp_rate  # transmitted (doubled) rate
T = CHIRP.duration
FS = 100e6


def tone_output(freq, amp=1.0, n=10000, fs=FS, phase=0.0):
    t = np.arange(n) / fs
    return DechirpOutput(amp * np.cos(2 * np.pi * freq * t + phase), fs, K, n / fs)


# ---------------------------------------------------------------- de-chirp law


def test_loopback_tone_frequency():
    d = dechirp_behavioral(CHIRP, [(208.33e-9, 1.0)])
    rep = estimate_peak(range_profile(d))
    assert rep.peak_freq == pytest.approx(K * 208.33e-9, abs=1e3)
    assert rep.peak_freq == pytest.approx(12.5e6, abs=1e3)


@settings(max_examples=25, deadline=None)
@given(tau=st.floats(10e-9, 400e-9))
def test_dechirp_law(tau):
    d = dechirp_behavioral(CHIRP, [(tau, 1.0)])
    p = range_profile(d, zero_pad=1)
    i = int(np.argmax(p.magnitude_db))
    assert abs(p.freq_axis[i] - K * tau) <= 0.5 / T + 1e-6
    rep = estimate_peak(range_profile(d))
    assert abs(rep.peak_freq - K * tau) <= 1.0 / (10 * T)


def test_zero_delay_gives_dc_peak():
    d = dechirp_behavioral(CHIRP, [(0.0, 1.0)])
    rep = estimate_peak(range_profile(d))
    assert rep.peak_freq == pytest.approx(0.0, abs=100.0)


def test_two_delays_two_peaks():
    tau, delta = 100e-9, 50e-9
    d = dechirp_behavioral(CHIRP, [(tau, 1.0), (tau + delta, 0.5)])
    p = range_profile(d)
    a = estimate_peak(p, freq_range=(K * tau - 50e3, K * tau + 50e3))
    b = estimate_peak(p, freq_range=(K * (tau + delta) - 50e3, K * (tau + delta) + 50e3))
    assert b.peak_freq - a.peak_freq == pytest.approx(K * delta, abs=1e3)
    # amplitudes (1, 0.5) → 6.02 dB
    assert a.peak_db - b.peak_db == pytest.approx(20 * np.log10(2), abs=0.05)


def test_aliasing_boundary_rejected():
    tau = (FS / 2) / K
    with pytest.raises(SamplingError):
        dechirp_behavioral(CHIRP, [(tau, 1.0)])
    dechirp_behavioral(CHIRP, [(0.99 * tau, 1.0)])


def test_video_phase_closed_form():
    tau = 3e-9
    expected = 2 * np.pi * (2 * CHIRP.f0 * tau - CHIRP.chirp_rate * tau**2)
    assert video_phase(CHIRP, tau) == pytest.approx(expected, rel=1e-12)


def test_tone_starts_at_delay():
    d = dechirp_behavioral(CHIRP, [(0.5e-6, 1.0)])
    assert not d.samples[:50].any()
    assert np.abs(d.samples[50:]).max() > 0.9


def test_dechirp_output_needs_sixteen_samples():
    with pytest.raises(SamplingError):
        DechirpOutput(np.zeros(10), 1e5, K, T)


# ---------------------------------------------------------------- range axis


def test_range_scale():
    d = tone_output(1e6)
    assert d.range_scale == pytest.approx(C_LIGHT / (2 * K))
    assert d.range_scale == pytest.approx(2.5e-6, rel=2e-3)
    # 12.5 MHz ↔ 31.25 m; 1.1 kHz ↔ 2.75 mm
    assert 12.5e6 * d.range_scale == pytest.approx(31.25, rel=2e-3)
    assert 1.1e3 * d.range_scale == pytest.approx(2.75e-3, rel=2e-3)


def test_resolution_from_width():
    scale = C_LIGHT / (2 * K)
    assert resolution_from_width(1 / T, scale) == pytest.approx(C_LIGHT / (2 * 6e9))
    assert resolution_from_width(10.8e3, scale) == pytest.approx(0.027, rel=2e-3)
    assert resolution_from_width(0.0, scale) == 0.0
    with pytest.raises(ValueError):
        resolution_from_width(-1.0, scale)


def test_scale_correctness_with_reference_offset():
    offset = 31.25
    for target in (0.1, 0.37, 1.2):
        tau = 2 * (offset + target) / C_LIGHT
        d = dechirp_behavioral(CHIRP, [(tau, 1.0)])
        rep = estimate_peak(range_profile(d, reference_offset=offset))
        assert rep.range == pytest.approx(target, abs=0.5e-3)


def test_monotone_range():
    taus = np.linspace(50e-9, 350e-9, 12)
    ranges = [estimate_peak(range_profile(dechirp_behavioral(CHIRP, [(t, 1.0)]))).range for t in taus]
    assert np.all(np.diff(ranges) > 0)


# ---------------------------------------------------------------- peak metrics


def test_spectrum_scaling_reads_tone_amplitude():
    freq, spec = range_spectrum(tone_output(1e6, amp=0.4), "hann", 4)
    assert np.abs(spec).max() == pytest.approx(0.4, rel=1e-6)


def test_rectangular_width_matches_sinc_oracle():
    # oracle: Dirichlet kernel of an n-sample rectangular record, sampled densely
    rep = estimate_peak(range_profile(tone_output(10e6)))
    n = 10000
    f = np.linspace(-20e3, 20e3, 400001)
    x = np.pi * f / FS
    with np.errstate(invalid="ignore"):
        kernel = np.abs(np.where(f == 0, n, np.sin(n * x) / np.sin(x)))
    above = f[kernel >= n / np.sqrt(2)]
    assert rep.width_3db == pytest.approx(above.max() - above.min(), rel=5e-3)
    assert rep.width_3db == pytest.approx(0.8859 / T, rel=5e-3)


def test_on_bin_tone_interpolates_exactly():
    # Hann keeps the neighbouring bins symmetric (the rectangular nulls are
    # dominated by leakage from the negative-frequency image)
    p = range_profile(tone_output(1e6), "hann", zero_pad=1)
    rep = estimate_peak(p)
    assert rep.peak_freq == pytest.approx(1e6, rel=1e-9)


def test_parabolic_peak_vertex():
    x = np.array([0.0, -1.0, -4.0]) - 2.0
    mag = -((np.arange(6) - 2.3) ** 2)
    pos, val = parabolic_peak(mag, 2)
    assert pos == pytest.approx(2.3)
    assert val == pytest.approx(0.0)
    assert parabolic_peak(x, 2) == (2.0, x[2])


def test_slsr_rectangular_and_hann():
    d = tone_output(10.03e6)
    rect = estimate_peak(range_profile(d, "rectangular"))
    hann = estimate_peak(range_profile(d, "hann"))
    assert rect.slsr >= 13.0
    assert rect.slsr == pytest.approx(13.26, abs=0.3)
    assert hann.slsr >= 31.0


def test_slsr_without_sidelobes_is_infinite():
    mag = -np.abs(np.linspace(-10, 10, 101))
    p = RangeProfile(mag, np.linspace(0, 100, 101), 1.0, "rectangular")
    assert measure_slsr(p, exclusion=1.0) == np.inf
    off, level = strongest_sidelobe(p, 1.0)
    assert np.isnan(off) and level == np.inf


def test_weak_peak_rejected(rng):
    d = DechirpOutput(rng.normal(size=10000), FS, K, T)
    with pytest.raises(PeakNotFoundError):
        estimate_peak(range_profile(d), min_prominence_db=40.0)
    with pytest.raises(PeakNotFoundError):
        estimate_peak(range_profile(tone_output(1e6)), freq_range=(60e6, 70e6))


def test_unknown_window():
    with pytest.raises(ValueError):
        range_profile(tone_output(1e6), "gaussian")


def test_peak_report_json_keys():
    rep = PeakReport(1.0, 2.0, 3.0, 4.0, float("inf"))
    assert rep.as_dict() == {
        "peak_freq_hz": 1.0,
        "range_m": 2.0,
        "width_3db_hz": 3.0,
        "resolution_m": 4.0,
        "slsr_db": None,
    }


# ---------------------------------------------------------------- physical path


@pytest.mark.slow
def test_physical_two_delays_match_behavioral(radar):
    taus = [120e-9, 180e-9]
    amps = [1.0, 0.5]
    phys = range_profile(radar.dechirp(taus, amps, backend="physical"))
    beh = range_profile(radar.dechirp(taus, amps, backend="behavioral"))
    for tau in taus:
        window = (K * tau - 30e3, K * tau + 30e3)
        a = estimate_peak(phys, freq_range=window)
        b = estimate_peak(beh, freq_range=window)
        assert a.peak_freq == pytest.approx(b.peak_freq, abs=1 / T)
    diff_p = estimate_peak(phys, freq_range=(7.1e6, 7.3e6)).peak_db - estimate_peak(
        phys, freq_range=(10.7e6, 10.9e6)
    ).peak_db
    assert diff_p == pytest.approx(6.02, abs=1.0)


@pytest.mark.slow
def test_physical_zero_delay_dc(radar):
    rep = estimate_peak(range_profile(radar.dechirp([0.0], [1.0])))
    assert rep.peak_freq < 1e3
