"""State recovery from intensity images: dark-core (ZIP) localization,
calibration from reference images, inversion to a state estimate, and the
multi-post-selection least-squares reconstruction of mixed states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import IntensityImage
from .polarization import BlochVector, QubitState
from .weakvalue import (SOUTH_POLE, X_AXIS, projection_frame,
                        stereographic_invert, weak_value_pure)


class NoVortexError(ValueError):
    """No interior low-intensity component: the image shows no vortex core."""


class AmbiguousVortexError(ValueError):
    """Several equal-size interior dark components; candidates attached."""

    def __init__(self, message, candidates):
        super().__init__(message)
        self.candidates = candidates


class NearPoleError(ValueError):
    """Estimated weak value too large: the projection is ill-conditioned."""


class DegenerateGeometryError(ValueError):
    """Reconstruction lines too close to parallel to intersect reliably."""


class CalibrationError(ValueError):
    """Reference set insufficient to determine the calibration."""


@dataclass(frozen=True)
class ZipEstimate:
    """Dark-core location in physical coordinates with extraction context."""

    position: tuple
    pixel_count_used: int
    threshold_used: float

    def __post_init__(self):
        if self.pixel_count_used < 1:
            raise ValueError("a ZIP estimate must use at least one pixel")
        object.__setattr__(self, "position",
                           (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class Calibration:
    """Affine map from weak values to image positions: w = 0 lands at
    `origin`, |w| = 1 is `scale` away, axes rotated by `orientation`."""

    origin: tuple = (0.0, 0.0)
    scale: float = 1.0
    orientation: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("calibration scale must be positive")
        object.__setattr__(self, "origin",
                           (float(self.origin[0]), float(self.origin[1])))

    def apply(self, w: complex):
        rot = complex(w) * np.exp(1j * self.orientation) * self.scale
        return (self.origin[0] + rot.real, self.origin[1] + rot.imag)

    def unapply(self, position) -> complex:
        d = complex(position[0] - self.origin[0], position[1] - self.origin[1])
        return d * np.exp(-1j * self.orientation) / self.scale

    def to_json(self) -> dict:
        return {"origin_mm": list(self.origin), "scale_mm": self.scale,
                "orientation_rad": self.orientation}

    @classmethod
    def from_json(cls, data: dict) -> "Calibration":
        return cls(origin=tuple(data["origin_mm"]), scale=data["scale_mm"],
                   orientation=data.get("orientation_rad", 0.0))


@dataclass(frozen=True)
class ReconstructionResult:
    bloch: BlochVector
    residual: float
    images_used: int
    clipped: bool = False


# ---------------------------------------------------------------------------
# ZIP extraction
# ---------------------------------------------------------------------------

def extract_zip(img: IntensityImage, threshold_fraction: float = 0.01) -> ZipEstimate:
    """Locate the dark vortex core of an intensity image.

    Pixels at or below threshold_fraction * max form candidate regions; the
    largest connected region not touching the border (the beam's dark
    exterior always touches it) is averaged with weights
    (threshold - intensity), so the darkest pixels dominate.
    """
    if not 0.0 < threshold_fraction < 0.5:
        raise ValueError("threshold_fraction must lie in (0, 0.5)")
    pixels = img.pixels
    peak = pixels.max()
    if peak <= 0:
        raise NoVortexError("image has no positive intensity")
    threshold = threshold_fraction * peak
    labels, count = ndimage.label(pixels <= threshold)
    if count == 0:
        raise NoVortexError("no pixels below threshold")
    border = np.unique(np.concatenate([labels[0, :], labels[-1, :],
                                       labels[:, 0], labels[:, -1]]))
    sizes = ndimage.sum_labels(np.ones_like(labels), labels,
                               index=np.arange(1, count + 1))
    interior = [(int(sizes[k - 1]), k) for k in range(1, count + 1)
                if k not in border and sizes[k - 1] > 0]
    if not interior:
        raise NoVortexError("no interior low-intensity component found")
    interior.sort(reverse=True)
    best_size = interior[0][0]
    ties = [k for size, k in interior if size == best_size]
    xg, yg = img.coordinates()
    if len(ties) > 1:
        candidates = [(float(xg[labels == k].mean()), float(yg[labels == k].mean()))
                      for k in ties]
        raise AmbiguousVortexError(
            f"{len(ties)} equal-size dark components", candidates)
    component = labels == ties[0]
    weights = np.where(component, threshold - pixels, 0.0)
    weights = np.clip(weights, 0.0, None)
    total = weights.sum()
    if total <= 0:  # every selected pixel sits exactly at the threshold
        weights = component.astype(float)
        total = weights.sum()
    position = (float((xg * weights).sum() / total),
                float((yg * weights).sum() / total))
    return ZipEstimate(position=position,
                       pixel_count_used=int(component.sum()),
                       threshold_used=float(threshold))


# ---------------------------------------------------------------------------
# State estimation and calibration
# ---------------------------------------------------------------------------

def estimate_state(zip_estimate: ZipEstimate, calibration: Calibration,
                   postselection: BlochVector = SOUTH_POLE,
                   max_weak_value: float = 50.0) -> QubitState:
    """Map a ZIP through the calibration to a weak value and invert the
    projection.  Estimates beyond `max_weak_value` are refused: near the
    pole the projection stretches and small image errors explode."""
    w = calibration.unapply(zip_estimate.position)
    if abs(w) > max_weak_value:
        raise NearPoleError(
            f"|w| = {abs(w):.1f} exceeds the cap {max_weak_value}; "
            "the estimate is ill-conditioned this close to the pole")
    return stereographic_invert(w, postselection).to_state()


def calibrate(references) -> tuple:
    """Least-squares fit of (origin, scale, orientation) from reference
    images of known states.

    Each reference is an (IntensityImage, QubitState) pair taken with the
    default |1> post-selection.  Solves z = origin + c * w over complex
    unknowns (origin, c); needs two distinct weak values.  Returns the
    calibration together with the RMS position residual.
    """
    if len(references) < 2:
        raise CalibrationError("need at least two reference images")
    ws, zs = [], []
    for image, state in references:
        ws.append(weak_value_pure(state).value)
        zip_est = extract_zip(image)
        zs.append(complex(*zip_est.position))
    ws = np.array(ws)
    zs = np.array(zs)
    if np.max(np.abs(ws[:, None] - ws[None, :])) < 1e-12:
        raise CalibrationError("reference weak values are all identical")
    if np.max(np.abs(ws)) < 1e-12:
        raise CalibrationError("need at least one reference with w != 0")
    design = np.column_stack([np.ones_like(ws), ws])
    coeff, *_ = np.linalg.lstsq(design, zs, rcond=None)
    origin, c = coeff
    if abs(c) < 1e-15:
        raise CalibrationError("degenerate fit: zero scale")
    fit = Calibration(origin=(origin.real, origin.imag),
                      scale=float(abs(c)), orientation=float(np.angle(c)))
    residual = float(np.sqrt(np.mean(np.abs(design @ coeff - zs) ** 2)))
    return fit, residual


# ---------------------------------------------------------------------------
# Mixed-state reconstruction
# ---------------------------------------------------------------------------

def _reconstruction_line(w: complex, postselection: BlochVector):
    """Line through the projection pole and the plane point of w."""
    pole, e_hat = projection_frame(postselection)
    plane_point = w.real * X_AXIS - w.imag * e_hat
    direction = plane_point - pole
    return pole, direction / np.linalg.norm(direction)


def reconstruct_mixed(observations, condition_limit: float = 1e8) -> ReconstructionResult:
    """Least-squares crossing point of the projection lines of several
    post-selections.

    Each observation is (ZipEstimate, Calibration, postselection).  The
    Bloch vector of the measured state lies on every line through the pole
    -f and that plane's projection point, so the closest point to all lines
    recovers it; the RMS point-to-line distance is reported as the residual.
    """
    if len(observations) < 2:
        raise ValueError("need at least two observations")
    poles, dirs = [], []
    for zip_estimate, calibration, postselection in observations:
        w = calibration.unapply(zip_estimate.position)
        pole, direction = _reconstruction_line(w, postselection)
        poles.append(pole)
        dirs.append(direction)
    normal = np.zeros((3, 3))
    rhs = np.zeros(3)
    for pole, direction in zip(poles, dirs):
        proj = np.eye(3) - np.outer(direction, direction)
        normal += proj
        rhs += proj @ pole
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > condition_limit:
        overlaps = [(abs(float(dirs[i] @ dirs[j])), i, j)
                    for i in range(len(dirs)) for j in range(i + 1, len(dirs))]
        _, i, j = max(overlaps)
        raise DegenerateGeometryError(
            f"reconstruction lines {i} and {j} are (near-)parallel; "
            "add a post-selection on another axis")
    point = np.linalg.solve(normal, rhs)
    dists = [np.linalg.norm((point - pole) - ((point - pole) @ d) * d)
             for pole, d in zip(poles, dirs)]
    residual = float(np.sqrt(np.mean(np.square(dists))))
    clipped = False
    norm = np.linalg.norm(point)
    if norm > 1.0 + 1e-6:
        point = point / norm
        clipped = True
    elif norm > 1.0:
        point = point / norm
    return ReconstructionResult(bloch=BlochVector.from_array(point),
                                residual=residual,
                                images_used=len(observations),
                                clipped=clipped)
