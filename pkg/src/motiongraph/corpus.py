"""Seeded synthetic pose corpora with ground-truth annotations.

Desk-scale test material: exact loops (bit-identical pose revisits every
period), figure-eights, constant-velocity translations, and sinusoidal limb
motion whose velocity minima (motion beats) are known analytically. The
generator emits the annotations alongside the poses so oracle tests can
check the pipeline against construction-derived truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import StructuralError
from .io import canonical_dumps, save_pose_sequence
from .pose import PoseFrame, PoseSequence, Skeleton

CORPUS_KINDS = ("loop", "figure_eight", "linear", "sinusoid")


@dataclass(frozen=True)
class CorpusSpec:
    kind: str
    n_frames: int = 96
    fps: float = 24.0
    joints: int = 8
    seed: int = 0
    period_frames: int = 24  # loop / figure_eight
    amplitude: float = 0.5  # limb swing / oscillation, meters
    freq_hz: float = 0.9  # sinusoid
    root_height: float = 1.0
    radius: float = 1.5  # loop / figure_eight root circle

    def __post_init__(self):
        if self.kind not in CORPUS_KINDS:
            raise StructuralError(f"corpus kind must be one of {CORPUS_KINDS}, got {self.kind!r}")
        if self.n_frames < 8:
            raise StructuralError("corpus needs at least 8 frames")
        if self.joints < 2:
            raise StructuralError("corpus skeleton needs at least 2 joints")
        if self.kind in ("loop", "figure_eight") and self.period_frames < 4:
            raise StructuralError("period_frames must be >= 4")


def _chain_skeleton(j: int) -> Skeleton:
    return Skeleton(
        names=tuple(["root"] + [f"j{k}" for k in range(1, j)]),
        parents=(-1,) + tuple(range(j - 1)),
    )


def _rest_pose(spec: CorpusSpec, rng: np.random.Generator) -> np.ndarray:
    # Deterministic per seed; a slightly irregular vertical chain. Quantized
    # to 1/1024 m so rest + dyadic root offsets stay exactly representable
    # (the linear corpus relies on a bit-constant velocity profile).
    rest = np.zeros((spec.joints, 3))
    rest[:, 1] = np.round(np.linspace(0.0, 1.0, spec.joints) * 1024.0) / 1024.0
    rest += np.round(rng.uniform(-0.05, 0.05, size=rest.shape) * 1024.0) / 1024.0
    rest[0] = 0.0
    return rest


def generate_synthetic_corpus(spec: CorpusSpec):
    """Returns (PoseSequence, annotations dict). Deterministic per spec."""
    rng = np.random.default_rng(spec.seed)
    rest = _rest_pose(spec, rng)
    n, fps = spec.n_frames, spec.fps
    annotations = {
        "kind": spec.kind,
        "seed": spec.seed,
        "fps": fps,
        "n_frames": n,
        "beats_s": [],
        "loop_pairs": [],
    }

    locals_, globals_ = [], []
    if spec.kind in ("loop", "figure_eight"):
        # One period of linear walk-in, then an exact loop: revisited poses
        # are bit-identical, so loop closures land at pair distance zero,
        # while the intro keeps the mean nearest-neighbour threshold
        # positive. Dead-end pruning removes exactly the intro.
        p = spec.period_frames
        intro = min(p, max(4, n // 4))
        if n - intro < 2 * p:
            raise StructuralError(
                f"loop corpus needs n_frames >= intro + 2 periods ({intro + 2 * p}), got {n}"
            )
        swing_joint = spec.joints - 1

        def loop_root(phase: float) -> np.ndarray:
            if spec.kind == "loop":
                return np.array([spec.radius * math.cos(phase), spec.root_height,
                                 spec.radius * math.sin(phase)])
            return np.array([spec.radius * math.sin(phase), spec.root_height,
                             spec.radius * math.sin(2.0 * phase) / 2.0])

        entry = loop_root(0.0)
        start = entry + np.array([-2.0 * spec.radius, 0.0, -1.0 * spec.radius])
        for i in range(n):
            local = rest.copy()
            if i < intro:
                u = i / intro
                root = start + u * (entry - start)
            else:
                # Phase from ((i - intro) mod p) so revisits are bit-identical.
                phase = 2.0 * math.pi * (((i - intro) % p) / p)
                local[swing_joint, 0] += spec.amplitude * math.sin(phase)
                local[swing_joint, 2] += spec.amplitude * math.cos(phase)
                root = loop_root(phase)
            locals_.append(local)
            globals_.append(local + root)
        # Every multiple of the period revisits exactly.
        annotations["loop_pairs"] = [
            [i, j]
            for i in range(intro, n - p)
            for j in range(i + p, n, p)
        ]
        annotations["period_frames"] = p
        annotations["loop_start"] = intro
    elif spec.kind == "linear":
        # Dyadic per-frame step: root positions and their differences are
        # exactly representable, so the velocity profile is bit-constant.
        step = np.array([0.03125, 0.0, 0.015625])
        for i in range(n):
            local = rest.copy()
            root = step * i + np.array([0.0, spec.root_height, 0.0])
            locals_.append(local)
            globals_.append(local + root)
        annotations["velocity_mps"] = (step * fps).tolist()
    else:  # sinusoid
        omega = 2.0 * math.pi * spec.freq_hz
        phi = 0.3  # breaks sampling symmetry so velocity minima are strict
        osc_joint = spec.joints - 1
        root = np.array([0.0, spec.root_height, 0.0])
        for i in range(n):
            t = i / fps
            local = rest.copy()
            local[osc_joint, 0] += spec.amplitude * math.sin(omega * t + phi)
            locals_.append(local)
            globals_.append(local + root)
        # |velocity| ~ |cos(omega t + phi)|: minima where omega t + phi = pi/2 + k pi.
        duration = (n - 1) / fps
        margin = 2.0 / fps
        beats = []
        k = 0
        while True:
            t_beat = (math.pi / 2.0 + k * math.pi - phi) / omega
            if t_beat > duration - margin:
                break
            if t_beat >= margin:
                beats.append(t_beat)
            k += 1
        annotations["beats_s"] = beats
        annotations["freq_hz"] = spec.freq_hz
        annotations["phase"] = phi

    frames = tuple(
        PoseFrame(frame_index=i, time_s=i / fps, joints_local=locals_[i],
                  joints_global=globals_[i])
        for i in range(n)
    )
    seq = PoseSequence(frames=frames, fps=fps, skeleton=_chain_skeleton(spec.joints))
    return seq, annotations


def write_corpus(spec: CorpusSpec, pose_path, annotation_path: Optional[str] = None):
    seq, annotations = generate_synthetic_corpus(spec)
    save_pose_sequence(pose_path, seq)
    if annotation_path:
        with open(annotation_path, "w", encoding="utf-8") as f:
            f.write(canonical_dumps(annotations))
    return seq, annotations
