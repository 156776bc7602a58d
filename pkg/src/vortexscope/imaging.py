"""Finite-pixel rendering of analytic fields, photon shot noise, and image
file I/O (16-bit binary portable graymap with a JSON provenance comment, or
exact CSV with a JSON sidecar).

Pixel values are point samples of the intensity at pixel centers; at CCD
pitches far below the beam width the in-pixel variation is negligible, and
the resolution-consistency test guards the choice.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .probefield import TruncationWarning


class ImageFormatError(ValueError):
    """Malformed image file or metadata inconsistent with the payload."""


@dataclass(frozen=True)
class SensorConfig:
    """Pixel grid geometry; lengths in millimeters.

    pixel (i, j) sits at x = offset_x + (j - (width-1)/2) * pitch,
    y = offset_y + (i - (height-1)/2) * pitch.
    """

    pixel_pitch: float
    width: int
    height: int
    center_offset: tuple = (0.0, 0.0)
    photon_budget: Optional[float] = None

    def __post_init__(self):
        if self.pixel_pitch <= 0:
            raise ValueError("pixel pitch must be positive")
        if self.width < 16 or self.height < 16:
            raise ValueError("sensor must be at least 16x16 pixels")
        object.__setattr__(self, "center_offset",
                           (float(self.center_offset[0]), float(self.center_offset[1])))

    def coordinates(self):
        """Physical pixel-center coordinate grids (X, Y), row-major."""
        ox, oy = self.center_offset
        xs = ox + (np.arange(self.width) - (self.width - 1) / 2) * self.pixel_pitch
        ys = oy + (np.arange(self.height) - (self.height - 1) / 2) * self.pixel_pitch
        return np.meshgrid(xs, ys, indexing="xy")

    def extent(self) -> float:
        return min(self.width, self.height) * self.pixel_pitch


def experiment_ccd() -> SensorConfig:
    """Laboratory CCD geometry: 6.45 um pitch, 1024x1024 pixels."""
    return SensorConfig(pixel_pitch=6.45e-3, width=1024, height=1024)


def fast_sensor(w0: float, pixels: int = 512, extent_factor: float = 8.0) -> SensorConfig:
    """Fast test preset covering extent_factor * w0 with a square grid."""
    return SensorConfig(pixel_pitch=extent_factor * w0 / pixels,
                        width=pixels, height=pixels)


@dataclass(frozen=True, eq=False)
class IntensityImage:
    """Nonnegative pixel grid with sensor geometry and provenance record."""

    pixels: np.ndarray
    sensor: SensorConfig
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.shape != (self.sensor.height, self.sensor.width):
            raise ImageFormatError(
                f"pixel array {px.shape} does not match sensor "
                f"{self.sensor.height}x{self.sensor.width}")
        if np.any(px < 0):
            raise ImageFormatError("negative intensities are not allowed")
        object.__setattr__(self, "pixels", px)

    def coordinates(self):
        return self.sensor.coordinates()

    def max_intensity(self) -> float:
        return float(self.pixels.max())


def render(field, sensor: SensorConfig, mode: Optional[str] = None,
           rows_per_chunk: Optional[int] = None) -> IntensityImage:
    """Sample |field|^2 at pixel centers.

    `rows_per_chunk` partitions the evaluation by scanlines; results are
    bit-identical for any partitioning because sampling is pointwise.
    """
    xg, yg = sensor.coordinates()
    if rows_per_chunk is None:
        pixels = np.asarray(field.intensity(xg, yg), dtype=float)
    else:
        chunks = [np.asarray(field.intensity(xg[i:i + rows_per_chunk],
                                             yg[i:i + rows_per_chunk]), dtype=float)
                  for i in range(0, sensor.height, rows_per_chunk)]
        pixels = np.concatenate(chunks, axis=0)

    provenance = {
        "mode": mode if mode is not None else getattr(field, "description", "unknown"),
        "probe": {"w0": field.probe.w0, "g": field.probe.g, "l": field.probe.l},
        "state": "unknown",
        "noise": None,
        "warnings": [],
    }
    if getattr(field, "weak_value", None) is not None:
        w = complex(field.weak_value)
        provenance["weak_value"] = [w.real, w.imag]
    needed = field.min_extent() if hasattr(field, "min_extent") else 0.0
    if sensor.extent() < needed:
        msg = (f"field of view {sensor.extent():.3g} below recommended "
               f"{needed:.3g}; tails are truncated")
        provenance["warnings"].append(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return IntensityImage(pixels, sensor, provenance)


def add_shot_noise(img: IntensityImage, photon_budget: float, seed: int) -> IntensityImage:
    """Replace pixels by Poisson counts with expected total = photon_budget.

    Counter-based Philox stream keyed by the seed makes the draw
    deterministic; geometry and upstream provenance are untouched.
    """
    if photon_budget <= 0:
        raise ValueError("photon budget must be positive")
    total = img.pixels.sum()
    if total <= 0:
        raise ValueError("cannot scale a zero image to a photon budget")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    counts = rng.poisson(img.pixels * (photon_budget / total)).astype(float)
    provenance = dict(img.provenance)
    provenance["noise"] = {"photon_budget": float(photon_budget), "seed": int(seed)}
    return IntensityImage(counts, img.sensor, provenance)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

_PGM_MAXVAL = 65535


def _header_dict(img: IntensityImage, scale: float = 1.0) -> dict:
    ox, oy = img.sensor.center_offset
    return {
        "pixel_pitch_mm": img.sensor.pixel_pitch,
        "width": img.sensor.width,
        "height": img.sensor.height,
        "origin_offset_mm": [ox, oy],
        "intensity_scale": scale,
        "provenance": img.provenance,
    }


def _sensor_from_header(header: dict) -> SensorConfig:
    try:
        return SensorConfig(pixel_pitch=header["pixel_pitch_mm"],
                            width=int(header["width"]),
                            height=int(header["height"]),
                            center_offset=tuple(header["origin_offset_mm"]))
    except KeyError as missing:
        raise ImageFormatError(f"header lacks field {missing}") from None


def _resolve_format(path, fmt: Optional[str]) -> str:
    if fmt is not None:
        if fmt not in ("pgm", "csv"):
            raise ValueError(f"unsupported format {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix in (".pgm", ".pnm"):
        return "pgm"
    if suffix == ".csv":
        return "csv"
    raise ValueError(f"cannot infer image format from {path}")


def write_image(img: IntensityImage, path, fmt: Optional[str] = None) -> None:
    """Write a 16-bit binary graymap (scaled to peak) or an exact CSV."""
    path = Path(path)
    if _resolve_format(path, fmt) == "pgm":
        peak = img.max_intensity()
        scale = peak / _PGM_MAXVAL if peak > 0 else 1.0
        header = _header_dict(img, scale=scale)
        quantized = np.rint(img.pixels / scale).astype(">u2") if peak > 0 \
            else np.zeros_like(img.pixels, dtype=">u2")
        with open(path, "wb") as fh:
            fh.write(b"P5\n")
            fh.write(b"# " + json.dumps(header).encode() + b"\n")
            fh.write(f"{img.sensor.width} {img.sensor.height}\n".encode())
            fh.write(f"{_PGM_MAXVAL}\n".encode())
            fh.write(quantized.tobytes())
    else:
        header = _header_dict(img)
        with open(path, "w") as fh:
            for row in img.pixels:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
            json.dump(header, fh, indent=2)


def _read_pgm(path) -> IntensityImage:
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    tokens = []
    header_json = None
    while len(tokens) < 4:
        if pos >= len(data):
            raise ImageFormatError(f"{path}: truncated header at byte {pos}")
        end = data.find(b"\n", pos)
        end = len(data) if end == -1 else end
        line = data[pos:end]
        pos = end + 1
        if line.startswith(b"#"):
            text = line[1:].strip()
            if text.startswith(b"{"):
                header_json = json.loads(text.decode())
            continue
        tokens.extend(line.split())
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != b"P5":
        raise ImageFormatError(f"{path}: expected binary graymap magic P5, got {magic!r}")
    if maxval != _PGM_MAXVAL:
        raise ImageFormatError(f"{path}: expected 16-bit maxval {_PGM_MAXVAL}, got {maxval}")
    if header_json is None:
        raise ImageFormatError(f"{path}: missing provenance comment")
    expected = width * height * 2
    payload = data[pos:pos + expected]
    if len(payload) != expected:
        raise ImageFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}")
    raw = np.frombuffer(payload, dtype=">u2").reshape(height, width)
    sensor = _sensor_from_header(header_json)
    if (sensor.width, sensor.height) != (width, height):
        raise ImageFormatError(
            f"{path}: header geometry {sensor.width}x{sensor.height} "
            f"does not match payload {width}x{height}")
    pixels = raw.astype(float) * header_json.get("intensity_scale", 1.0)
    return IntensityImage(pixels, sensor, header_json.get("provenance", {}))


def _read_csv(path) -> IntensityImage:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as bad:
                raise ImageFormatError(f"{path}:{lineno}: {bad}") from None
    if not rows:
        raise ImageFormatError(f"{path}: empty image")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ImageFormatError(f"{path}: ragged rows with widths {sorted(widths)}")
    pixels = np.array(rows, dtype=float)
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        raise ImageFormatError(f"{path}: missing JSON sidecar {sidecar}")
    with open(sidecar) as fh:
        header = json.load(fh)
    sensor = _sensor_from_header(header)
    if (sensor.height, sensor.width) != pixels.shape:
        raise ImageFormatError(
            f"{path}: header geometry {sensor.height}x{sensor.width} "
            f"does not match payload {pixels.shape}")
    if np.any(pixels < 0):
        raise ImageFormatError(f"{path}: negative intensities rejected")
    return IntensityImage(pixels, sensor, header.get("provenance", {}))


def read_image(path, fmt: Optional[str] = None) -> IntensityImage:
    path = Path(path)
    if _resolve_format(path, fmt) == "pgm":
        return _read_pgm(path)
    return _read_csv(path)
