"""Video and motion quality metrics that need no pretrained networks.

psnr and movie_simplified follow the standard pixel-level formulas;
movie_simplified is the scalar spatial+temporal variant (not the full
Gabor-based MOVIE index, hence the name). The pose statistics mirror
common retrieval diagnostics: 2D joint diversity and frame-to-frame
consistency. Report fields for perceptual metrics (lpips, fvd) are kept in
the schema as nulls so downstream tooling sees one stable shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StructuralError
from .pose import PoseFrame, pair_distance

PSNR_INFINITE = math.inf  # sentinel for identical inputs (MSE == 0)


@dataclass(frozen=True)
class FrameArray:
    """A 2-D (H, W) or 3-D (H, W, C) pixel grid with its value-range peak."""

    data: np.ndarray
    max_value: float = 255.0

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim not in (2, 3):
            raise StructuralError(f"frame must be 2-D or 3-D, got {arr.ndim}-D")
        if not np.isfinite(arr).all():
            raise StructuralError("frame contains non-finite values")
        if self.max_value <= 0 or not math.isfinite(self.max_value):
            raise StructuralError(f"max_value must be positive, got {self.max_value}")
        object.__setattr__(self, "data", arr)


def _check_comparable(a: FrameArray, b: FrameArray):
    if a.data.shape != b.data.shape:
        raise StructuralError(f"shape mismatch: {a.data.shape} vs {b.data.shape}")
    if a.max_value != b.max_value:
        raise StructuralError(f"max_value mismatch: {a.max_value} vs {b.max_value}")


def psnr(a: FrameArray, b: FrameArray) -> float:
    """10 * log10(MAX^2 / MSE) in dB; identical inputs return the +inf
    sentinel (documented, serialized as the string "inf" in reports)."""
    _check_comparable(a, b)
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return PSNR_INFINITE
    return 10.0 * math.log10(a.max_value**2 / mse)


def movie_simplified(gen: Sequence[FrameArray], ref: Sequence[FrameArray]) -> float:
    """Spatial plus temporal mean squared difference between two videos.

    temporal term: mean over all frame steps and pixels of
    [(v1(t+1)-v1(t)) - (v2(t+1)-v2(t))]^2; spatial term: mean over all frames
    and pixels of (v1-v2)^2. Zero iff the videos are identical.
    """
    if len(gen) != len(ref):
        raise StructuralError(f"length mismatch: {len(gen)} vs {len(ref)} frames")
    if len(gen) < 2:
        raise StructuralError("movie needs at least 2 frames")
    for g, r in zip(gen, ref):
        _check_comparable(g, r)
    g = np.stack([f.data for f in gen])
    r = np.stack([f.data for f in ref])
    temporal = float(np.mean((np.diff(g, axis=0) - np.diff(r, axis=0)) ** 2))
    spatial = float(np.mean((g - r) ** 2))
    return temporal + spatial


def motion_diversity(frames: Sequence[PoseFrame]) -> float:
    """Mean pairwise L2 distance between flattened 2D joint vectors over all
    unordered frame pairs; 0 for fewer than two frames."""
    if any(f.joints_2d is None for f in frames):
        raise StructuralError("motion_diversity needs joints_2d on every frame")
    n = len(frames)
    if n < 2:
        return 0.0
    flat = np.stack([f.joints_2d.reshape(-1) for f in frames])
    total = 0.0
    count = 0
    for i in range(n):
        d = np.sqrt(np.square(flat[i + 1:] - flat[i]).sum(axis=1))
        total += float(d.sum())
        count += d.size
    return total / count


def frame_consistency(frames: Sequence[PoseFrame]) -> float:
    """Mean consecutive pose distance (local + global), lower is smoother."""
    if len(frames) < 2:
        raise StructuralError("frame_consistency needs at least 2 frames")
    dists = [pair_distance(frames[t], frames[t + 1]) for t in range(len(frames) - 1)]
    return float(np.mean(dists))


def metric_report(values: dict) -> dict:
    """Normalize a metric dict into the stable report schema: psnr_db,
    movie_simplified, motion_diversity, frame_consistency, lpips, fvd.
    Unset and network-dependent entries are null; +inf becomes "inf"."""
    out = {
        "psnr_db": None,
        "movie_simplified": None,
        "motion_diversity": None,
        "frame_consistency": None,
        "lpips": None,  # requires a pretrained network; reserved
        "fvd": None,  # requires a pretrained network; reserved
    }
    for key, val in values.items():
        if key not in out:
            raise StructuralError(f"unknown metric field {key!r}")
        if val is not None and math.isinf(val):
            out[key] = "inf"
        else:
            out[key] = val
    return out
