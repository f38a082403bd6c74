"""Strict TOML configuration. Every physical key carries its unit in the name."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal, Optional

import tomli
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .constants import C_LIGHT
from .errors import ConfigError

Window = Literal["rectangular", "hann", "hamming", "blackman", "taylor"]
Backend = Literal["physical", "behavioral"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LaserConfig(_Section):
    wavelength_nm: float = Field(1552.9, gt=0)
    power_mw: float = Field(1.0, gt=0)


class ChirpConfig(_Section):
    f0_ghz: float = Field(6.0, gt=0)
    bandwidth_ghz: float = Field(3.0, ge=0)
    duration_us: float = Field(100.0, gt=0)
    amplitude_v: float = Field(0.64, gt=0)  # peak IF drive on MZM1


class MzmConfig(_Section):
    v_pi: float = Field(4.0, gt=0)  # V
    bias_phase: float = math.pi  # rad
    arm_imbalance: float = 0.0  # rad
    insertion_loss_db: float = Field(0.0, ge=0)


class Mzm1Config(MzmConfig):
    arm_imbalance: float = 0.354  # rad; leaves the carrier 3 dB above the +1 sideband


class Mzm2Config(MzmConfig):
    bias_phase: float = math.pi / 2  # quadrature, linear in the echo drive


class MrrConfig(_Section):
    fsr_ghz: Optional[float] = Field(None, gt=0)
    fsr_nm: Optional[float] = Field(None, gt=0)  # converted at the laser wavelength
    er_db: float = Field(9.0, gt=0)
    fwhm_ghz: float = Field(2.0, gt=0)
    resonance_offset_ghz: float = 0.0

    @model_validator(mode="after")
    def _one_fsr(self):
        if self.fsr_ghz is not None and self.fsr_nm is not None:
            raise ValueError("give either fsr_ghz or fsr_nm, not both")
        return self


class PdConfig(_Section):
    responsivity: float = Field(0.8, gt=0)  # A/W
    bandwidth_ghz: float = Field(30.0, gt=0)


class TxFilterConfig(_Section):
    low_ghz: float = Field(11.0, gt=0)
    high_ghz: float = Field(19.5, gt=0)
    order: int = Field(20, ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.high_ghz <= self.low_ghz:
            raise ValueError("high_ghz must exceed low_ghz")
        return self


class ReceiverConfig(_Section):
    out_rate_msps: float = Field(100.0, gt=0)
    window: Window = "taylor"  # 30 dB Taylor: −3 dB width ≈ 1.12/T
    zero_pad: int = Field(16, ge=1)
    reference_offset_m: float = 31.25  # calibrated instrument path removed from ranges
    echo_drive_v: float = Field(0.25, gt=0)  # MZM2 drive for a unit-reflectivity echo
    noise_rms: float = Field(0.0, ge=0)


class CrosstalkConfig(_Section):
    enabled: bool = False
    relative_db: float = Field(-6.0, le=0)
    extra_delay_ps: float = 258.3


class ScattererConfig(_Section):
    x_m: float
    y_m: float
    amplitude: float = Field(1.0, ge=0)


class SceneConfig(_Section):
    standoff_m: float = Field(1.0, gt=0)
    rotation_deg_per_s: float = 360.0
    initial_angle_deg: Optional[float] = None  # None centres the dwell on zero rotation
    path_offset_m: float = Field(31.25, ge=0)  # true one-way instrument path
    source: Optional[str] = None  # bundled scene name or CSV path; default two_targets
    scatterers: Optional[list[ScattererConfig]] = None
    path_loss: bool = False
    exact_geometry: bool = False

    @model_validator(mode="after")
    def _one_source(self):
        if self.scatterers is not None and self.source is not None:
            raise ValueError("give either scatterers or source, not both")
        return self


class IsarConfig(_Section):
    n_pulses: int = Field(256, ge=2)
    pri_us: float = Field(100.0, gt=0)
    azimuth_window: Window = "taylor"
    range_window: Window = "taylor"
    zero_pad: int = Field(4, ge=1)
    out_rate_msps: float = Field(50.0, gt=0)
    threshold_db: float = Field(15.0, gt=0)
    range_limit_m: float = Field(0.3, gt=0)


class SimConfig(_Section):
    laser: LaserConfig = LaserConfig()
    chirp: ChirpConfig = ChirpConfig()
    mzm1: Mzm1Config = Mzm1Config()
    mzm2: Mzm2Config = Mzm2Config()
    mrr: MrrConfig = MrrConfig()
    pd: PdConfig = PdConfig()
    tx_filter: TxFilterConfig = TxFilterConfig()
    receiver: ReceiverConfig = ReceiverConfig()
    crosstalk: CrosstalkConfig = CrosstalkConfig()
    scene: SceneConfig = SceneConfig()
    isar: IsarConfig = IsarConfig()
    envelope_rate_gsps: float = Field(80.0, gt=0)
    backend: Optional[Backend] = None  # None: per-command default
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _mrr_width(self):
        fsr = self.fsr_hz
        if self.mrr.fwhm_ghz * 1e9 >= fsr / 2.0:
            raise ValueError(
                f"mrr.fwhm_ghz = {self.mrr.fwhm_ghz} must be below half the FSR ({fsr / 2e9:.4g} GHz)"
            )
        if self.tx_filter.high_ghz >= self.envelope_rate_gsps / 2.0:
            raise ValueError("tx_filter.high_ghz lies above the envelope Nyquist frequency")
        return self

    @property
    def fsr_hz(self) -> float:
        if self.mrr.fsr_ghz is not None:
            return self.mrr.fsr_ghz * 1e9
        fsr_nm = 0.57 if self.mrr.fsr_nm is None else self.mrr.fsr_nm
        lam = self.laser.wavelength_nm * 1e-9
        return C_LIGHT * fsr_nm * 1e-9 / lam**2

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; stable across key order."""
        text = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _format(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> SimConfig:
    try:
        return SimConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format(exc)) from None


def load_config(path: str | Path | None) -> SimConfig:
    """Read a TOML file; ``None`` gives the built-in defaults."""
    if path is None:
        return SimConfig()
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)
