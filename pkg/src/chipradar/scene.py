"""Point-scatterer echoes from a turntable target, plus probe crosstalk."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .constants import C_LIGHT
from .waveform import RealSignal

BUNDLED_SCENES = ("two_targets", "a_shape", "airplane")


@dataclass(frozen=True)
class Scatterer:
    x: float  # m, range direction at zero rotation
    y: float  # m, cross-range direction at zero rotation
    amplitude: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"scatterer amplitude must be >= 0, got {self.amplitude}")

    @property
    def radius(self) -> float:
        return float(np.hypot(self.x, self.y))


@dataclass(frozen=True)
class TurntableScene:
    scatterers: tuple[Scatterer, ...] = ()
    rotation_rate: float = 2.0 * np.pi  # rad/s
    standoff: float = 1.0  # m, antenna to turntable centre
    initial_angle: float = 0.0  # rad

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        r_max = max((s.radius for s in self.scatterers), default=0.0)
        if self.standoff <= r_max:
            raise ValueError(
                f"standoff {self.standoff} m must exceed the largest scatterer radius {r_max} m"
            )

    def angle(self, t: float) -> float:
        return self.initial_angle + self.rotation_rate * t

    def union(self, other: TurntableScene) -> TurntableScene:
        return TurntableScene(
            self.scatterers + other.scatterers, self.rotation_rate, self.standoff, self.initial_angle
        )

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([s.amplitude for s in self.scatterers], dtype=float)


@dataclass(frozen=True)
class CrosstalkSpec:
    relative_amplitude: float = -np.inf  # dB below the echo; -inf disables
    extra_delay: float = 0.0  # s

    def __post_init__(self):
        if self.relative_amplitude > 0:
            raise ValueError(
                f"crosstalk relative amplitude must be <= 0 dB, got {self.relative_amplitude}"
            )

    @property
    def gain(self) -> float:
        return 0.0 if np.isneginf(self.relative_amplitude) else 10.0 ** (self.relative_amplitude / 20.0)


def rotated_positions(scene: TurntableScene, angle: float) -> tuple[np.ndarray, np.ndarray]:
    """(range, cross-range) coordinates of every scatterer at turntable angle
    ``angle``, in the radar frame centred on the turntable."""
    x = np.array([s.x for s in scene.scatterers], dtype=float)
    y = np.array([s.y for s in scene.scatterers], dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    return x * c - y * s, x * s + y * c


def scatterer_delay(s: Scatterer, scene: TurntableScene, t: float, exact: bool = False) -> float:
    single = TurntableScene((s,), scene.rotation_rate, scene.standoff, scene.initial_angle)
    return float(scene_delays(single, t, exact)[0])


def scene_delays(scene: TurntableScene, t: float, exact: bool = False) -> np.ndarray:
    """Round-trip delays [s] of all scatterers at slow time ``t``.

    Plane-wave (far-field) geometry by default; ``exact`` uses the two-way
    Euclidean distance from an antenna on the -range axis.
    """
    rng, xr = rotated_positions(scene, scene.angle(t))
    if exact:
        dist = np.hypot(scene.standoff + rng, xr)
    else:
        dist = scene.standoff + rng
    return 2.0 * dist / C_LIGHT


def scene_gains(scene: TurntableScene, t: float, path_loss: bool = False) -> np.ndarray:
    """Per-scatterer echo amplitudes, optionally scaled as (R0/R)² (R⁻⁴ in power)."""
    amps = scene.amplitudes
    if path_loss and len(amps):
        rng, _ = rotated_positions(scene, scene.angle(t))
        amps = amps * (scene.standoff / (scene.standoff + rng)) ** 2
    return amps


def delay_sum(sig: RealSignal, delays, gains) -> RealSignal:
    """Σ gain_i · sig(t − delay_i), each delay applied as a linear phase ramp
    on the (circular) spectrum of the whole record."""
    x = np.asarray(sig.samples, dtype=float)
    n = len(x)
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    gains = np.atleast_1d(np.asarray(gains, dtype=float))
    if len(delays) == 0:
        return RealSignal(np.zeros(n), sig.sample_rate, sig.t0)
    freq = np.fft.rfftfreq(n, 1.0 / sig.sample_rate)
    spec = np.fft.rfft(x)
    ramp = np.zeros(len(freq), dtype=complex)
    for tau, g in zip(delays, gains):
        ramp += g * np.exp(-2j * np.pi * freq * tau)
    if n % 2 == 0:
        # the Nyquist bin of a real signal must stay real
        ramp[-1] = ramp[-1].real
    return RealSignal(np.fft.irfft(spec * ramp, n), sig.sample_rate, sig.t0)


def fractional_delay(sig: RealSignal, delay: float) -> RealSignal:
    return delay_sum(sig, [delay], [1.0])


def synthesize_echo(
    tx: RealSignal,
    scene: TurntableScene,
    pulse_start: float = 0.0,
    extra_delay: float = 0.0,
    path_loss: bool = False,
    exact: bool = False,
) -> RealSignal:
    """Stop-and-go echo of one pulse: delays frozen at ``pulse_start``.

    ``extra_delay`` adds a fixed instrument path (cables, fibre) to every
    scatterer.
    """
    delays = scene_delays(scene, pulse_start, exact) + extra_delay
    return delay_sum(tx, delays, scene_gains(scene, pulse_start, path_loss))


def inject_crosstalk(
    echo: RealSignal, tx: RealSignal, spec: CrosstalkSpec, main_delay: float = 0.0
) -> RealSignal:
    """Add a leaked copy of ``tx`` delayed by ``main_delay + spec.extra_delay``."""
    if len(echo) != len(tx) or echo.sample_rate != tx.sample_rate:
        raise ValueError("echo and tx must share length and sample rate")
    if spec.gain == 0.0:
        return echo
    leak = delay_sum(tx, [main_delay + spec.extra_delay], [spec.gain])
    return RealSignal(echo.samples + leak.samples, echo.sample_rate, echo.t0)


def load_scatterers_csv(path) -> list[Scatterer]:
    """Read scatterers from a CSV with columns x_m, y_m, amplitude."""
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_rows(csv.DictReader(fh), str(path))


def _parse_rows(reader, origin: str) -> list[Scatterer]:
    required = {"x_m", "y_m", "amplitude"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise ValueError(f"{origin}: expected columns {sorted(required)}, got {reader.fieldnames}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            out.append(Scatterer(float(row["x_m"]), float(row["y_m"]), float(row["amplitude"])))
        except ValueError as exc:
            raise ValueError(f"{origin}:{lineno}: {exc}") from exc
    return out


def bundled_scene(name: str) -> list[Scatterer]:
    if name not in BUNDLED_SCENES:
        raise ValueError(f"unknown bundled scene {name!r}; choose from {BUNDLED_SCENES}")
    text = resources.files("chipradar.data").joinpath(f"{name}.csv").read_text(encoding="utf-8")
    return _parse_rows(csv.DictReader(text.splitlines()), name)


def resolve_scene_source(source: str | Path) -> list[Scatterer]:
    """A bundled scene name or a path to a scatterer CSV."""
    if str(source) in BUNDLED_SCENES:
        return bundled_scene(str(source))
    return load_scatterers_csv(source)
