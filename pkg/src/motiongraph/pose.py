"""Pose data types and the distance kernels everything else consumes.

A pose frame carries two joint sets: root-relative positions (the local set,
capturing body shape) and world positions (the global set, capturing where
the body is). Frame-to-frame distance is the sum of the Euclidean norms over
the flattened local and global joint vectors; that sum is the quantity the
transition-graph builder thresholds. All coordinates are meters, times are
seconds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import StructuralError


def _as_joint_array(values, name: str, width: int) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != width or arr.shape[0] < 1:
        raise StructuralError(f"{name} must be a (J, {width}) array with J >= 1, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise StructuralError(f"{name} has a non-finite coordinate at joint {bad[0]}")
    return arr


@dataclass(frozen=True)
class PoseFrame:
    """One frame's skeleton sample.

    joints_local holds root-relative joint positions, joints_global world
    positions; both are (J, 3) float64. joints_2d is an optional (J, 2) pixel
    projection used only by metrics and the viewer.
    """

    frame_index: int
    time_s: float
    joints_local: np.ndarray
    joints_global: np.ndarray
    joints_2d: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.frame_index < 0:
            raise StructuralError(f"frame_index must be >= 0, got {self.frame_index}")
        if not np.isfinite(self.time_s) or self.time_s < 0:
            raise StructuralError(f"time_s must be finite and >= 0, got {self.time_s}")
        jl = _as_joint_array(self.joints_local, "joints_local", 3)
        jg = _as_joint_array(self.joints_global, "joints_global", 3)
        if jl.shape[0] != jg.shape[0]:
            raise StructuralError(
                f"joint count mismatch: {jl.shape[0]} local vs {jg.shape[0]} global"
            )
        object.__setattr__(self, "joints_local", jl)
        object.__setattr__(self, "joints_global", jg)
        if self.joints_2d is not None:
            j2 = _as_joint_array(self.joints_2d, "joints_2d", 2)
            if j2.shape[0] != jl.shape[0]:
                raise StructuralError("joints_2d joint count differs from 3D joint sets")
            object.__setattr__(self, "joints_2d", j2)

    @property
    def joint_count(self) -> int:
        return self.joints_local.shape[0]


@dataclass(frozen=True)
class Skeleton:
    """Joint names plus parent indices forming a tree rooted at joint 0."""

    names: tuple
    parents: tuple

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        parents = tuple(int(p) for p in self.parents)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "parents", parents)
        j = len(names)
        if j < 1 or len(parents) != j:
            raise StructuralError("skeleton needs matching, nonempty names and parents")
        if parents[0] != -1:
            raise StructuralError("skeleton not a tree: joint 0 must be the root (parent -1)")
        for i, p in enumerate(parents[1:], start=1):
            if not 0 <= p < j:
                raise StructuralError(f"skeleton not a tree: joint {i} has parent {p} out of range")
        # Walking parents from every joint must reach the root without repeats.
        for i in range(1, j):
            seen = set()
            node = i
            while node != 0:
                if node in seen:
                    raise StructuralError(f"skeleton not a tree: cycle through joint {node}")
                seen.add(node)
                node = parents[node]

    @property
    def joint_count(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class PoseSequence:
    """An ordered pose track at a fixed frame rate."""

    frames: tuple
    fps: float
    skeleton: Skeleton

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if self.fps <= 0 or not np.isfinite(self.fps):
            raise StructuralError(f"fps must be positive and finite, got {self.fps}")
        if len(frames) < 2:
            raise StructuralError(f"a sequence needs at least 2 frames, got {len(frames)}")
        j = self.skeleton.joint_count
        prev_t = -np.inf
        for i, f in enumerate(frames):
            if f.frame_index != i:
                raise StructuralError(f"frame_index not dense: expected {i}, got {f.frame_index}")
            if f.joint_count != j:
                raise StructuralError(
                    f"frame {i} has {f.joint_count} joints, skeleton has {j}"
                )
            if f.time_s <= prev_t:
                raise StructuralError(f"time_s not strictly increasing at frame {i}")
            prev_t = f.time_s

    def __len__(self) -> int:
        return len(self.frames)

    def times(self) -> np.ndarray:
        return np.array([f.time_s for f in self.frames], dtype=np.float64)

    def local_matrix(self) -> np.ndarray:
        """All local joints flattened to an (N, 3J) C-contiguous matrix."""
        return np.ascontiguousarray(
            np.stack([f.joints_local.reshape(-1) for f in self.frames])
        )

    def global_matrix(self) -> np.ndarray:
        return np.ascontiguousarray(
            np.stack([f.joints_global.reshape(-1) for f in self.frames])
        )


def _check_pair(a: PoseFrame, b: PoseFrame):
    if a.joint_count != b.joint_count:
        raise StructuralError(
            f"joint count mismatch: {a.joint_count} vs {b.joint_count}"
        )


def local_distance(a: PoseFrame, b: PoseFrame) -> float:
    """Euclidean norm of the difference of the flattened local joint vectors."""
    _check_pair(a, b)
    dl, _ = _kernels.pair_parts(
        a.joints_local.reshape(-1), a.joints_global.reshape(-1),
        b.joints_local.reshape(-1), b.joints_global.reshape(-1),
    )
    return dl


def global_distance(a: PoseFrame, b: PoseFrame) -> float:
    """Euclidean norm of the difference of the flattened global joint vectors."""
    _check_pair(a, b)
    _, dg = _kernels.pair_parts(
        a.joints_local.reshape(-1), a.joints_global.reshape(-1),
        b.joints_local.reshape(-1), b.joints_global.reshape(-1),
    )
    return dg


def pair_distance(a: PoseFrame, b: PoseFrame) -> float:
    """local_distance + global_distance: the edge-admission quantity."""
    _check_pair(a, b)
    dl, dg = _kernels.pair_parts(
        a.joints_local.reshape(-1), a.joints_global.reshape(-1),
        b.joints_local.reshape(-1), b.joints_global.reshape(-1),
    )
    return dl + dg


def velocity_profile(seq: PoseSequence) -> np.ndarray:
    """Aggregate motion speed per frame step: pair_distance(t, t+1) * fps.

    Length N-1; sample t covers the interval between frames t and t+1.
    """
    frames = seq.frames
    if len(frames) < 2:
        raise StructuralError("velocity profile needs at least 2 frames")
    out = np.empty(len(frames) - 1, dtype=np.float64)
    for t in range(len(frames) - 1):
        out[t] = pair_distance(frames[t], frames[t + 1]) * seq.fps
    return out


def make_sequence(
    local: Sequence[np.ndarray],
    global_: Sequence[np.ndarray],
    fps: float,
    skeleton: Optional[Skeleton] = None,
    joints_2d: Optional[Sequence[Optional[np.ndarray]]] = None,
) -> PoseSequence:
    """Assemble a PoseSequence from raw per-frame joint arrays.

    Convenience for tests and the synthetic corpus generator; times are laid
    out uniformly at 1/fps. A chain skeleton is generated when none is given.
    """
    n = len(local)
    if skeleton is None:
        j = np.asarray(local[0]).shape[0]
        skeleton = Skeleton(
            names=tuple(f"j{k}" for k in range(j)),
            parents=(-1,) + tuple(range(j - 1)),
        )
    frames = []
    for i in range(n):
        frames.append(
            PoseFrame(
                frame_index=i,
                time_s=i / fps,
                joints_local=np.asarray(local[i], dtype=np.float64),
                joints_global=np.asarray(global_[i], dtype=np.float64),
                joints_2d=None if joints_2d is None else joints_2d[i],
            )
        )
    return PoseSequence(frames=tuple(frames), fps=fps, skeleton=skeleton)
