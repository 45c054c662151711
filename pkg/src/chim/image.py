"""Channel images: two-plane real encoding of complex time-frequency grids.

A grid is an (m, n) complex ndarray. Its channel image is an (m, n, 2)
real array with the real part in plane 0 and the imaginary part in
plane 1; the conversion is lossless in both directions. Normalization
maps a dataset into the [-1, 1] range expected by bounded-output
generative models and is inverted with the scale stored alongside the
data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_GLOBAL_MAX = "global-max"
NORM_GLOBAL_PERCENTILE = "global-percentile"
_PERCENTILE = 99.9


@dataclass(frozen=True)
class ChannelLabel:
    """What a sample is: channel type identifier and user speed in km/h."""

    channel_type: str
    user_speed: float

    def __post_init__(self):
        if not (math.isfinite(self.user_speed) and self.user_speed >= 0):
            raise ValueError(f"user_speed must be finite and >= 0, got {self.user_speed}")


@dataclass(frozen=True)
class ChannelImage:
    """(m, n, 2) real planes plus the label of the sample they encode."""

    planes: np.ndarray
    label: ChannelLabel

    def __post_init__(self):
        p = np.asarray(self.planes)
        if p.ndim != 3 or p.shape[2] != 2:
            raise ValueError(f"planes must have shape (m, n, 2), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("planes must be finite")


def grid_to_image(grid: np.ndarray, label: ChannelLabel) -> ChannelImage:
    """Stack Re(grid) and Im(grid) as planes 0 and 1. No normalization."""
    g = np.asarray(grid)
    if g.ndim != 2:
        raise ValueError(f"grid must be 2-D, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("grid must be finite")
    planes = np.stack([g.real, g.imag], axis=-1)
    return ChannelImage(planes=planes, label=label)


def image_to_grid(image: ChannelImage, scale: float | None = None) -> np.ndarray:
    """Recompose plane0 + j*plane1; multiplies by `scale` when given
    (the inverse of a normalization applied earlier)."""
    planes = np.asarray(image.planes, dtype=float)
    grid = planes[:, :, 0] + 1j * planes[:, :, 1]
    if scale is not None:
        grid = grid * float(scale)
    return grid


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-dataset scale mapping the chosen statistic of |values| to 1."""

    scale: float
    method: str = NORM_GLOBAL_MAX

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be finite and > 0, got {self.scale}")
        if self.method not in (NORM_GLOBAL_MAX, NORM_GLOBAL_PERCENTILE):
            raise ValueError(f"unknown normalization method {self.method!r}")


def fit_normalization(values: np.ndarray, method: str = NORM_GLOBAL_MAX) -> NormalizationSpec:
    """Fit the scale over all plane values of a dataset.

    global-max: scale = max |value| (nothing ever clamps).
    global-percentile: scale = 99.9th percentile of |value|; outliers are
    clamped by apply_normalization, never an error.
    """
    v = np.abs(np.asarray(values, dtype=float)).ravel()
    if v.size == 0:
        raise ValueError("cannot fit normalization on empty data")
    if method == NORM_GLOBAL_MAX:
        scale = float(v.max())
    elif method == NORM_GLOBAL_PERCENTILE:
        scale = float(np.percentile(v, _PERCENTILE))
    else:
        raise ValueError(f"unknown normalization method {method!r}")
    if scale <= 0.0:
        raise ValueError("degenerate scale: data is all zero")
    return NormalizationSpec(scale=scale, method=method)


def apply_normalization(values: np.ndarray, spec: NormalizationSpec):
    """Divide by the scale and clamp into [-1, 1].

    Returns (normalized, clamp_count). With global-max on the data the
    scale was fitted to, clamp_count is 0.
    """
    out = np.asarray(values, dtype=float) / spec.scale
    clamped = int(np.count_nonzero((out < -1.0) | (out > 1.0)))
    if clamped:
        out = np.clip(out, -1.0, 1.0)
    return out, clamped


def invert_normalization(values: np.ndarray, spec: NormalizationSpec) -> np.ndarray:
    """Multiply normalized values back to physical units."""
    return np.asarray(values, dtype=float) * spec.scale
