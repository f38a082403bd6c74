"""The five experiments, each a config-driven run that writes its artifacts
and returns a :class:`RunSummary`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimConfig
from .constants import C_LIGHT, wavelength_to_frequency
from .errors import ConfigError
from .io import (
    write_csv,
    write_json,
    write_mrr_sweep_csv,
    write_peak_json,
    write_pgm,
    write_range_profile_csv,
    write_spectrogram_csv,
    write_spectrum_csv,
    write_targets_csv,
)
from .isar import (
    centred_initial_angle,
    collect_profiles,
    extract_targets,
    form_image,
    resolution_cell,
    silhouette_extent,
)
from .photonics import MrrSpec, MzmSpec, PdSpec, mrr_solve, mrr_transfer
from .radar import PhotonicRadar, TxFilter
from .receiver import estimate_peak, local_maxima, parabolic_peak, range_profile, strongest_sidelobe
from .scene import (
    CrosstalkSpec,
    Scatterer,
    TurntableScene,
    resolve_scene_source,
    rotated_positions,
)
from .waveform import (
    ChirpSpec,
    measure_flatness,
    measure_spur_rejection,
    occupied_band,
    power_spectrum,
    ridge_fit,
    stft,
)

DEFAULT_LOOPBACK_DELAY_NS = 208.33
CROSSTALK_OFFSET_HZ = 15.5e3


@dataclass
class RunSummary:
    command: str
    config_hash: str
    metrics: dict = field(default_factory=dict)  # name -> {"value", "unit"}
    checks: dict = field(default_factory=dict)  # name -> bool, thresholds from the reference results
    outputs: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def metric(self, name: str, value, unit: str = "") -> None:
        self.metrics[name] = {"value": value, "unit": unit}

    def value(self, name: str):
        return self.metrics[name]["value"]

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "metrics": self.metrics,
            "checks": self.checks,
            "passed": self.passed,
            "outputs": [str(p) for p in self.outputs],
            "wall_time_s": self.wall_time_s,
        }

    def write(self, out_dir: str | Path) -> Path:
        path = Path(out_dir) / f"{self.command}_summary.json"
        return write_json(path, self.as_dict())


def _near(value: float, target: float, tol: float) -> bool:
    return bool(np.isfinite(value) and abs(value - target) <= tol)


def _within(value: float, lo: float, hi: float) -> bool:
    return bool(np.isfinite(value) and lo <= value <= hi)


# ---------------------------------------------------------------- builders


def _mzm(c) -> MzmSpec:
    return MzmSpec(c.v_pi, c.bias_phase, c.arm_imbalance, c.insertion_loss_db)


def build_mrr(cfg: SimConfig) -> MrrSpec:
    m = cfg.mrr
    return mrr_solve(cfg.fsr_hz, m.er_db, m.fwhm_ghz * 1e9, m.resonance_offset_ghz * 1e9)


def build_chirp(cfg: SimConfig) -> ChirpSpec:
    c = cfg.chirp
    return ChirpSpec(c.f0_ghz * 1e9, c.bandwidth_ghz * 1e9, c.duration_us / 1e6)


def build_radar(cfg: SimConfig) -> PhotonicRadar:
    return PhotonicRadar(
        chirp=build_chirp(cfg),
        mzm1=_mzm(cfg.mzm1),
        mrr=build_mrr(cfg),
        pd=PdSpec(cfg.pd.responsivity, cfg.pd.bandwidth_ghz * 1e9),
        mzm2=_mzm(cfg.mzm2),
        carrier_freq=wavelength_to_frequency(cfg.laser.wavelength_nm * 1e-9),
        laser_power=cfg.laser.power_mw * 1e-3,
        drive_amplitude=cfg.chirp.amplitude_v,
        echo_drive=cfg.receiver.echo_drive_v,
        tx_filter=TxFilter(cfg.tx_filter.low_ghz * 1e9, cfg.tx_filter.high_ghz * 1e9, cfg.tx_filter.order),
        envelope_rate=cfg.envelope_rate_gsps * 1e9,
    )


def build_crosstalk(cfg: SimConfig) -> CrosstalkSpec | None:
    x = cfg.crosstalk
    if not x.enabled:
        return None
    return CrosstalkSpec(x.relative_db, x.extra_delay_ps * 1e-12)


def scene_scatterers(cfg: SimConfig, source: str | Path | None = None) -> tuple[list[Scatterer], str]:
    """Scatterers and a label: ``source`` overrides the config, which falls
    back to the bundled two-target scene."""
    if source is None and cfg.scene.scatterers is not None:
        return [Scatterer(s.x_m, s.y_m, s.amplitude) for s in cfg.scene.scatterers], "config"
    source = source or cfg.scene.source or "two_targets"
    return resolve_scene_source(source), Path(str(source)).stem


def build_scene(cfg: SimConfig, scatterers) -> TurntableScene:
    s, i = cfg.scene, cfg.isar
    omega = math.radians(s.rotation_deg_per_s)
    if s.initial_angle_deg is None:
        start = centred_initial_angle(i.n_pulses, i.pri_us / 1e6, omega)
    else:
        start = math.radians(s.initial_angle_deg)
    return TurntableScene(tuple(scatterers), omega, s.standoff_m, start)


def _backend(cfg: SimConfig, override: str | None, default: str) -> str:
    return override or cfg.backend or default


def _prepare(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands


def cmd_mrr(cfg: SimConfig, out_dir) -> RunSummary:
    """Sweep the solved ring over ±1.25 FSR; report FSR, ER and notch width."""
    t0 = time.perf_counter()
    out = _prepare(out_dir)
    run = RunSummary("mrr", cfg.digest())
    spec = build_mrr(cfg)
    step = 5e6
    half = int(math.ceil(1.25 * spec.fsr / step))
    detuning = spec.resonance_offset + step * np.arange(-half, half + 1)
    mag_db = 20.0 * np.log10(np.abs(mrr_transfer(spec, detuning)))

    notches = local_maxima(-mag_db)
    centres = np.array([detuning[0] + parabolic_peak(-mag_db, i)[0] * step for i in notches])
    fsr = float(np.mean(np.diff(centres))) if len(centres) > 1 else float("nan")
    er = float(mag_db.max() - mag_db.min())

    run.outputs.append(write_mrr_sweep_csv(out / "mrr_sweep.csv", spec, detuning))
    run.metric("fsr_ghz", fsr / 1e9, "GHz")
    run.metric("er_db", er, "dB")
    run.metric("fwhm_ghz", spec.notch_fwhm / 1e9, "GHz")
    run.metric("self_coupling", spec.self_coupling)
    run.metric("round_trip_amplitude", spec.round_trip_amplitude)
    run.check("er_db", _near(er, 9.0, 0.1))
    run.check("fsr_ghz", _near(fsr, 70.9e9, 70.9e9 * 1e-3))
    run.wall_time_s = time.perf_counter() - t0
    return run


def cmd_transmit(cfg: SimConfig, out_dir) -> RunSummary:
    """Laser → MZM1 → MRR → PD1; spectrum, spectrogram and band metrics."""
    t0 = time.perf_counter()
    out = _prepare(out_dir)
    run = RunSummary("transmit", cfg.digest())
    radar = build_radar(cfg)
    chain = radar.chain
    spectrum = power_spectrum(chain.tx)
    lo, hi = occupied_band(spectrum)
    width = hi - lo
    inner = (lo + 0.01 * width, hi - 0.01 * width)
    flatness = measure_flatness(spectrum, inner)
    spur = measure_spur_rejection(spectrum, (lo, hi), guard=0.05 * width)
    sg = stft(chain.tx, 2048, 4096)
    slope, _, resid = ridge_fit(sg)

    run.outputs.append(write_spectrum_csv(out / "tx_spectrum.csv", spectrum))
    run.outputs.append(write_spectrogram_csv(out / "tx_spectrogram.csv", sg))
    run.metric("band_low_ghz", lo / 1e9, "GHz")
    run.metric("band_high_ghz", hi / 1e9, "GHz")
    run.metric("bandwidth_ghz", width / 1e9, "GHz")
    run.metric("flatness_db", flatness, "dB (±)")
    run.metric("spur_rejection_db", spur, "dB")
    run.metric("ridge_slope_hz_per_s", slope, "Hz/s")
    run.metric("ridge_max_residual_mhz", resid / 1e6, "MHz")
    run.metric("carrier_suppression_pre_db", chain.carrier_suppression_pre_db, "dB")
    run.metric("carrier_suppression_db", chain.carrier_suppression_post_db, "dB")
    run.metric("carrier_drop_db", chain.carrier_drop_db, "dB")

    b_ref = radar.rf_bandwidth
    f_lo = radar.multiplier * radar.chirp.f0
    run.check("band_low_ghz", _near(lo, f_lo, 0.01 * b_ref))
    run.check("band_high_ghz", _near(hi, f_lo + b_ref, 0.01 * b_ref))
    run.check("bandwidth_ghz", _near(width, b_ref, 0.01 * b_ref))
    run.check("ridge_slope", _near(slope, radar.rf_chirp_rate, 0.01 * radar.rf_chirp_rate))
    run.check("spur_rejection_db", spur >= 25.0)
    run.check("flatness_db", flatness <= 1.0)
    run.check("carrier_suppression_db", chain.carrier_suppression_post_db >= 5.0)
    run.check("carrier_drop_db", chain.carrier_drop_db >= cfg.mrr.er_db - 1.0)
    run.wall_time_s = time.perf_counter() - t0
    return run


def _beat_check(cfg: SimConfig, radar: PhotonicRadar, delays) -> None:
    out_rate = cfg.receiver.out_rate_msps * 1e6
    beat = radar.rf_chirp_rate * np.max(np.abs(delays))
    if beat >= out_rate / 2.0:
        raise ConfigError(
            f"beat frequency {beat / 1e6:.4g} MHz aliases at receiver.out_rate_msps = "
            f"{cfg.receiver.out_rate_msps}; reduce the delay or raise the rate"
        )
    if np.min(delays) < 0:
        raise ConfigError("delays must be >= 0")


def cmd_loopback(
    cfg: SimConfig, out_dir, delay_ns: float = DEFAULT_LOOPBACK_DELAY_NS, backend: str | None = None
) -> RunSummary:
    """Feed the transmitted chirp back through a fixed delay and de-chirp it."""
    t0 = time.perf_counter()
    out = _prepare(out_dir)
    run = RunSummary("loopback", cfg.digest())
    radar = build_radar(cfg)
    backend = _backend(cfg, backend, "physical")
    tau = delay_ns * 1e-9
    _beat_check(cfg, radar, [tau])
    xt = build_crosstalk(cfg)
    rc = cfg.receiver
    d = radar.dechirp(
        [tau],
        [1.0],
        backend=backend,
        out_rate=rc.out_rate_msps * 1e6,
        crosstalk=xt,
        noise_rms=rc.noise_rms,
        rng=np.random.default_rng(cfg.seed),
    )
    p = range_profile(d, rc.window, rc.zero_pad, reference_offset=0.0)
    rep = estimate_peak(p)
    offset, side = strongest_sidelobe(p, rep.width_3db, int(np.argmax(p.magnitude_db)))

    run.outputs.append(write_range_profile_csv(out / "loopback_profile.csv", p, max_freq=d.sample_rate / 2))
    run.outputs.append(write_peak_json(out / "loopback_peak.json", rep))
    run.metric("backend", backend)
    run.metric("delay_ns", delay_ns, "ns")
    run.metric("peak_freq_mhz", rep.peak_freq / 1e6, "MHz")
    run.metric("width_khz", rep.width_3db / 1e3, "kHz")
    run.metric("resolution_cm", rep.resolution * 100.0, "cm")
    run.metric("slsr_db", rep.slsr, "dB")
    run.metric("sidelobe_offset_khz", abs(offset) / 1e3, "kHz")

    expected = radar.rf_chirp_rate * tau
    run.check("peak_freq", _near(rep.peak_freq, expected, 1e3))
    run.check("width_khz", _within(rep.width_3db, 8.5e3, 12e3))
    run.check("resolution_cm", _within(rep.resolution, 0.025, 0.030))
    if xt is not None:
        run.check("sidelobe_offset_khz", _near(abs(offset), CROSSTALK_OFFSET_HZ, 0.5e3))
        run.check("slsr_db", _near(side, 6.0, 1.0))
    run.wall_time_s = time.perf_counter() - t0
    return run


def sweep_positions(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ConfigError(f"step must be > 0, got {step}")
    if stop < start:
        raise ConfigError(f"stop {stop} m lies before start {start} m")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def cmd_sweep(
    cfg: SimConfig,
    out_dir,
    start_m: float = 0.30,
    stop_m: float = 0.46,
    step_m: float = 0.02,
    backend: str | None = None,
) -> RunSummary:
    """Static target stepped in range; estimated vs true range per position."""
    t0 = time.perf_counter()
    out = _prepare(out_dir)
    run = RunSummary("sweep", cfg.digest())
    radar = build_radar(cfg)
    backend = _backend(cfg, backend, "physical")
    positions = sweep_positions(start_m, stop_m, step_m)
    path = cfg.scene.path_offset_m
    delays = 2.0 * (path + positions) / C_LIGHT
    _beat_check(cfg, radar, delays)
    rc = cfg.receiver
    rng = np.random.default_rng(cfg.seed)
    est, freq = [], []
    for tau in delays:
        d = radar.dechirp(
            [tau], [1.0], backend=backend, out_rate=rc.out_rate_msps * 1e6, noise_rms=rc.noise_rms, rng=rng
        )
        rep = estimate_peak(range_profile(d, rc.window, rc.zero_pad, rc.reference_offset_m))
        est.append(rep.range)
        freq.append(rep.peak_freq)
    est = np.array(est)
    freq = np.array(freq)
    true_freq = radar.rf_chirp_rate * delays
    err = est - positions

    run.outputs.append(
        write_csv(
            out / "sweep.csv",
            ["true_range_m", "est_range_m", "error_mm", "true_freq_Hz", "est_freq_Hz"],
            [positions, est, err * 1e3, true_freq, freq],
        )
    )
    run.metric("backend", backend)
    run.metric("n_positions", len(positions))
    run.metric("max_abs_error_mm", float(np.max(np.abs(err))) * 1e3, "mm")
    run.metric("max_freq_error_khz", float(np.max(np.abs(freq - true_freq))) / 1e3, "kHz")
    run.check("max_abs_error_mm", run.value("max_abs_error_mm") <= 2.75)
    run.check("max_freq_error_khz", run.value("max_freq_error_khz") <= 1.1)
    run.wall_time_s = time.perf_counter() - t0
    return run


def image_scene(cfg: SimConfig, scene: TurntableScene, radar: PhotonicRadar, backend: str):
    i, s, rc = cfg.isar, cfg.scene, cfg.receiver
    m = collect_profiles(
        scene,
        radar,
        n_pulses=i.n_pulses,
        pri=i.pri_us / 1e6,
        backend=backend,
        out_rate=i.out_rate_msps * 1e6,
        window=i.range_window,
        zero_pad=i.zero_pad,
        range_limits=(-i.range_limit_m, i.range_limit_m),
        instrument_offset=s.path_offset_m,
        reference_offset=rc.reference_offset_m,
        path_loss=s.path_loss,
        exact=s.exact_geometry,
        noise_rms=rc.noise_rms,
        seed=cfg.seed,
    )
    return form_image(m, radar.center_wavelength, scene.rotation_rate, i.azimuth_window, i.zero_pad)


def match_targets(targets, truth_range, truth_cross) -> list[tuple[float, float]]:
    """(range error, cross-range error) from each detection to its nearest
    true scatterer."""
    out = []
    for t in targets:
        k = int(np.argmin(np.hypot(truth_range - t.range, truth_cross - t.crossrange)))
        out.append((t.range - truth_range[k], t.crossrange - truth_cross[k]))
    return out


def cmd_isar(cfg: SimConfig, out_dir, scene_source=None, backend: str | None = None) -> RunSummary:
    """Turntable ISAR image, extracted targets and shape metrics."""
    t0 = time.perf_counter()
    out = _prepare(out_dir)
    run = RunSummary("isar", cfg.digest())
    scatterers, label = scene_scatterers(cfg, scene_source)
    if not scatterers:
        raise ConfigError("the scene has no scatterers")
    radar = build_radar(cfg)
    backend = _backend(cfg, backend, "behavioral")
    scene = build_scene(cfg, scatterers)
    i = cfg.isar
    pri = i.pri_us / 1e6
    img = image_scene(cfg, scene, radar, backend)
    targets = extract_targets(img, i.threshold_db)
    res_r, res_c = resolution_cell(radar, i.n_pulses, pri, scene.rotation_rate)

    # truth in the image frame: positions at mid-dwell
    mid = scene.angle(0.5 * i.n_pulses * pri)
    tr, tc = rotated_positions(scene, mid)
    errors = match_targets(targets, tr, tc)
    within = [abs(er) <= res_r and abs(ec) <= res_c for er, ec in errors]

    point = TurntableScene((Scatterer(0.0, 0.0),), scene.rotation_rate, scene.standoff, scene.initial_angle)
    psf = image_scene(cfg, point, radar, backend)
    ext_r, ext_c = silhouette_extent(img, psf, i.threshold_db)

    pgm, sidecar = write_pgm(out / "isar_image.pgm", img)
    run.outputs += [pgm, sidecar, write_targets_csv(out / "isar_targets.csv", targets)]
    run.metric("backend", backend)
    run.metric("scene", label)
    run.metric("n_detections", len(targets))
    run.metric("n_within_cell", int(sum(within)))
    run.metric("resolution_range_cm", res_r * 100.0, "cm")
    run.metric("resolution_crossrange_cm", res_c * 100.0, "cm")
    run.metric("extent_range_cm", ext_r * 100.0, "cm")
    run.metric("extent_crossrange_cm", ext_c * 100.0, "cm")
    if len(targets) >= 2:
        a, b = targets[0], targets[1]
        run.metric("range_separation_cm", abs(a.range - b.range) * 100.0, "cm")
        run.metric("crossrange_separation_cm", abs(a.crossrange - b.crossrange) * 100.0, "cm")

    if label == "two_targets":
        run.check("n_detections", len(targets) == 2)
        run.check("range_separation_cm", len(targets) >= 2 and _within(run.value("range_separation_cm"), 2.5, 3.5))
        run.check(
            "crossrange_separation_cm",
            len(targets) >= 2 and _within(run.value("crossrange_separation_cm"), 9.5, 11.5),
        )
    elif label == "a_shape":
        run.check("n_detections", len(targets) == 6)
        run.check("n_within_cell", all(within))
    elif label == "airplane":
        run.check("extent_range_cm", _near(ext_r, 0.28, 0.15 * 0.28))
        run.check("extent_crossrange_cm", _near(ext_c, 0.32, 0.15 * 0.32))
    run.wall_time_s = time.perf_counter() - t0
    return run
