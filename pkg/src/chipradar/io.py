"""Plot-ready artifacts: CSV tables, 16-bit PGM images and JSON summaries."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .constants import db10
from .isar import IsarImage, Target
from .photonics import MrrSpec, mrr_transfer
from .receiver import PeakReport, RangeProfile
from .waveform import Spectrogram, Spectrum


def _clean(obj):
    # JSON has no inf/nan; they become null
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(path: str | Path, header: list[str], columns) -> Path:
    """Columns of equal length written row by row, floats in repr form so
    the file round-trips exactly."""
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    if len({len(c) for c in cols}) > 1:
        raise ValueError("all columns must have the same length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_spectrum_csv(path, spectrum: Spectrum, resolution: float = 1e6) -> Path:
    """Power averaged (linearly) into ``resolution``-wide bins."""
    df = spectrum.freq[1] - spectrum.freq[0]
    group = max(1, int(round(resolution / df)))
    n = len(spectrum.freq) // group * group
    lin = 10.0 ** (spectrum.power_db[:n] / 10.0)
    power = db10(lin.reshape(-1, group).mean(axis=1))
    freq = spectrum.freq[:n].reshape(-1, group).mean(axis=1)
    return write_csv(path, ["freq_Hz", "power_dB"], [freq, power])


def write_spectrogram_csv(path, sg: Spectrogram, max_frames: int = 200, max_bins: int = 256) -> Path:
    """Long-format (time, frequency, magnitude) table, thinned to at most
    ``max_frames`` × ``max_bins`` points."""
    ft = max(1, -(-len(sg.time_axis) // max_frames))
    fb = max(1, -(-len(sg.freq_axis) // max_bins))
    t = sg.time_axis[::ft]
    f = sg.freq_axis[::fb]
    mag = sg.magnitude[::ft, ::fb]
    tt, ff = np.meshgrid(t, f, indexing="ij")
    mag_db = 20.0 * np.log10(np.maximum(mag, 1e-300))
    return write_csv(path, ["time_s", "freq_Hz", "magnitude_dB"], [tt.ravel(), ff.ravel(), mag_db.ravel()])


def write_mrr_sweep_csv(path, spec: MrrSpec, detuning: np.ndarray) -> Path:
    h = mrr_transfer(spec, detuning)
    return write_csv(
        path,
        ["detuning_Hz", "magnitude_dB", "phase_rad"],
        [detuning, 20.0 * np.log10(np.maximum(np.abs(h), 1e-300)), np.angle(h)],
    )


def write_range_profile_csv(path, p: RangeProfile, max_freq: float | None = None) -> Path:
    keep = slice(None) if max_freq is None else p.freq_axis <= max_freq
    return write_csv(
        path,
        ["freq_Hz", "range_m", "magnitude_dB"],
        [p.freq_axis[keep], p.range_axis[keep], p.magnitude_db[keep]],
    )


def write_peak_json(path, report: PeakReport) -> Path:
    return write_json(path, report.as_dict())


def write_targets_csv(path, targets: list[Target]) -> Path:
    return write_csv(
        path,
        ["range_m", "crossrange_m", "amplitude_dB"],
        [[t.range for t in targets], [t.crossrange for t in targets], [t.amplitude_db for t in targets]],
    )


def write_pgm(path, img: IsarImage) -> tuple[Path, Path]:
    """Binary 16-bit PGM (row = range bin, column = cross-range bin) of the
    peak-normalised linear magnitude, plus a JSON sidecar with the axes."""
    path = Path(path)
    lin = np.clip(img.linear, 0.0, 1.0)
    data = np.round(lin * 65535.0).astype(">u2")
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())
    sidecar = path.with_suffix(".json")
    write_json(
        sidecar,
        {
            "rows": "range",
            "columns": "crossrange",
            "range_m": {"start": img.range_axis[0], "step": img.range_axis[1] - img.range_axis[0], "count": rows},
            "crossrange_m": {
                "start": img.crossrange_axis[0],
                "step": img.crossrange_axis[1] - img.crossrange_axis[0],
                "count": cols,
            },
            "center_wavelength_m": img.center_wavelength,
            "rotation_rate_rad_per_s": img.rotation_rate,
            "scale": "linear magnitude, peak = 65535",
        },
    )
    return path, sidecar


def read_pgm(path) -> np.ndarray:
    """Inverse of :func:`write_pgm` for the image data (uint16 array)."""
    raw = Path(path).read_bytes()
    magic, size, maxval, body = raw.split(b"\n", 3)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows = (int(v) for v in size.split())
    if int(maxval) != 65535:
        raise ValueError(f"{path}: expected 16-bit data")
    data = np.frombuffer(body, dtype=">u2", count=rows * cols)
    return data.reshape(rows, cols).astype(np.uint16)
