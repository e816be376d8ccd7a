"""Pose-level transition inbetweening and time-warp resampling.

A searched path plays source frames back verbatim; every synthetic-edge step
is a visual discontinuity. This module replaces a window around each
discontinuity with inbetweened frames (linear joint interpolation by
default; the inbetweener is pluggable so a learned model can slot in), and
resamples keyframe bridge segments to their exact target lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import StructuralError
from .pose import PoseFrame, PoseSequence

# 12 interior frames per transition window: half a second at 24 FPS.
DEFAULT_TRANSITION_WINDOW = 12

Inbetweener = Callable[[PoseFrame, PoseFrame, int], List[PoseFrame]]


@dataclass(frozen=True)
class BlendedTimeline:
    """Final pose timeline plus per-frame provenance.

    Provenance kinds: retrieved(source), blended(from_frame, to_frame, u),
    resampled(position, segment). Retrieved frames are bit-identical to their
    source frames.
    """

    frames: PoseSequence
    provenance: tuple


def _lerp_frame(a: PoseFrame, b: PoseFrame, u: float, index: int) -> PoseFrame:
    jl = a.joints_local + u * (b.joints_local - a.joints_local)
    jg = a.joints_global + u * (b.joints_global - a.joints_global)
    j2 = None
    if a.joints_2d is not None and b.joints_2d is not None:
        j2 = a.joints_2d + u * (b.joints_2d - a.joints_2d)
    t = a.time_s + u * (b.time_s - a.time_s)
    return PoseFrame(frame_index=index, time_s=t, joints_local=jl,
                     joints_global=jg, joints_2d=j2)


def blend_linear(a: PoseFrame, b: PoseFrame, n_mid: int = DEFAULT_TRANSITION_WINDOW) -> List[PoseFrame]:
    """n_mid interior frames between a and b: frame k sits at u = k/(n_mid+1).

    Both joint sets interpolate independently. The boundary frames are not
    part of the output; a span keeps its anchors verbatim.
    """
    if n_mid < 1:
        raise StructuralError(f"n_mid must be >= 1, got {n_mid}")
    if a.joint_count != b.joint_count:
        raise StructuralError("cannot blend frames with different joint counts")
    return [
        _lerp_frame(a, b, k / (n_mid + 1), k - 1) for k in range(1, n_mid + 1)
    ]


def resample_path(frames: Sequence[PoseFrame], target_len: int) -> List[PoseFrame]:
    """Uniform time warp of a pose list to exactly target_len frames.

    Output frame t samples source position p = t*(S-1)/(T-1) with per-joint
    linear interpolation; integral positions (in particular both endpoints)
    copy the source frame exactly.
    """
    s = len(frames)
    if target_len < 2:
        raise StructuralError(f"target_len must be >= 2, got {target_len}")
    if s < 2:
        raise StructuralError(f"resampling needs at least 2 source frames, got {s}")
    out: List[PoseFrame] = []
    for t in range(target_len):
        p = t * (s - 1) / (target_len - 1)
        i0 = int(np.floor(p))
        u = p - i0
        if u == 0.0:
            f = frames[i0]
            out.append(PoseFrame(frame_index=t, time_s=f.time_s,
                                 joints_local=f.joints_local,
                                 joints_global=f.joints_global,
                                 joints_2d=f.joints_2d))
        else:
            out.append(_lerp_frame(frames[i0], frames[min(i0 + 1, s - 1)], u, t))
    return out


def _resample_positions(source_len: int, target_len: int) -> List[float]:
    return [t * (source_len - 1) / (target_len - 1) for t in range(target_len)]


def _merge_spans(positions: Sequence[int], half: int, n: int) -> List[tuple]:
    """Interior spans [s, e] to replace, clipped so the timeline endpoints
    stay retrieved; spans that overlap or touch (no retrieved anchor frame
    between them) merge into one."""
    spans = []
    for pos in positions:
        s = max(1, pos - half)
        e = min(n - 2, pos + half - 1)
        if s > e:
            continue
        spans.append((s, e))
    spans.sort()
    merged: List[tuple] = []
    for s, e in spans:
        if merged and s <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def _blend_span_list(
    frames: List[PoseFrame],
    provenance: List[dict],
    positions: Sequence[int],
    inbetweener: Inbetweener,
    window: int,
):
    half = window // 2
    for s, e in _merge_spans(positions, half, len(frames)):
        a, b = frames[s - 1], frames[e + 1]
        n_mid = e - s + 1
        mids = inbetweener(a, b, n_mid)
        if len(mids) != n_mid:
            raise StructuralError(
                f"inbetweener returned {len(mids)} frames, expected {n_mid}"
            )
        for k, f in enumerate(mids):
            frames[s + k] = f
            provenance[s + k] = {
                "kind": "blended",
                "from_frame": provenance[s - 1].get("source", None),
                "to_frame": provenance[e + 1].get("source", None),
                "u": (k + 1) / (n_mid + 1),
            }


def _retime(frames: Sequence[PoseFrame], fps: float) -> List[PoseFrame]:
    return [
        PoseFrame(frame_index=i, time_s=i / fps, joints_local=f.joints_local,
                  joints_global=f.joints_global, joints_2d=f.joints_2d)
        for i, f in enumerate(frames)
    ]


def apply_blending(
    graph,
    result,
    seq: PoseSequence,
    inbetweener: Optional[Inbetweener] = None,
    window: int = DEFAULT_TRANSITION_WINDOW,
) -> BlendedTimeline:
    """Gather the searched path and inbetween every transition window.

    Each transition replaces ``window`` frames (half before the jump, half
    after); windows that collide merge and blend end to end. Keyframe results
    additionally time-warp each bridge segment to its exact target length, so
    pinned frames land on their target positions verbatim.
    """
    inbetweener = inbetweener or blend_linear
    if window < 2 or window % 2:
        raise StructuralError(f"window must be a positive even frame count, got {window}")

    if result.segments:
        return _assemble_keyframes(result, seq, inbetweener, window)

    frames = [seq.frames[v] for v in result.path]
    provenance = [{"kind": "retrieved", "source": int(v)} for v in result.path]
    _blend_span_list(frames, provenance, [tr.position for tr in result.transitions],
                     inbetweener, window)
    timeline = PoseSequence(frames=tuple(_retime(frames, seq.fps)), fps=seq.fps,
                            skeleton=seq.skeleton)
    return BlendedTimeline(frames=timeline, provenance=tuple(provenance))


def _assemble_keyframes(result, seq: PoseSequence, inbetweener: Inbetweener, window: int) -> BlendedTimeline:
    out_frames: List[PoseFrame] = []
    out_prov: List[dict] = []
    for si, seg in enumerate(result.segments):
        raw = [seq.frames[result.path[k]] for k in range(seg.path_start, seg.path_end + 1)]
        prov = [
            {"kind": "retrieved", "source": int(result.path[k])}
            for k in range(seg.path_start, seg.path_end + 1)
        ]
        # Blend transitions inside the segment first (anchors are real
        # retrieved frames), then stretch to the target length.
        local_transitions = [
            tr.position - seg.path_start
            for tr in result.transitions
            if seg.path_start < tr.position <= seg.path_end
        ]
        _blend_span_list(raw, prov, local_transitions, inbetweener, window)

        if seg.target_len == 0:
            seg_frames = [raw[0]]
            seg_prov = [prov[0]]
        elif seg.hops == seg.target_len:
            seg_frames = list(raw)
            seg_prov = prov
        else:
            seg_frames = resample_path(raw, seg.target_len + 1)
            positions = _resample_positions(len(raw), seg.target_len + 1)
            seg_prov = []
            for t, p in enumerate(positions):
                if p == int(p) and prov[int(p)]["kind"] == "retrieved":
                    seg_prov.append(prov[int(p)])
                else:
                    seg_prov.append({"kind": "resampled", "position": p, "segment": si})
        if out_frames:
            seg_frames = seg_frames[1:]
            seg_prov = seg_prov[1:]
        out_frames.extend(seg_frames)
        out_prov.extend(seg_prov)
    if len(out_frames) < 2:
        raise StructuralError(
            "keyframe timeline collapses to a single frame; pin a nonzero target span"
        )
    timeline = PoseSequence(frames=tuple(_retime(out_frames, seq.fps)), fps=seq.fps,
                            skeleton=seq.skeleton)
    return BlendedTimeline(frames=timeline, provenance=tuple(out_prov))


def blend_feasibility(
    seq: PoseSequence,
    window: int = DEFAULT_TRANSITION_WINDOW,
    threshold: float = 0.001,
    joint_set: str = "local",
    scale: Optional[float] = None,
    stride: int = 1,
) -> float:
    """Fraction of motion windows whose interior linear blending reproduces
    the ground truth within ``threshold`` mean per-joint squared deviation.

    A window spans ``window`` interior frames between two endpoint frames.
    Coordinates are normalized by ``scale`` before the deviation; when scale
    is None the mean global root height (Y of joint 0) is used, falling back
    to 1.0 for sequences without a meaningful root height.
    """
    if window < 1:
        raise StructuralError(f"window must be >= 1, got {window}")
    if threshold < 0:
        raise StructuralError("threshold must be >= 0")
    if stride < 1:
        raise StructuralError("stride must be >= 1")
    if joint_set not in ("local", "global"):
        raise StructuralError(f"joint_set must be local or global, got {joint_set!r}")
    n = len(seq)
    if n < window + 2:
        raise StructuralError(
            f"sequence too short for feasibility windows: need {window + 2} frames, got {n}"
        )
    pick = (lambda f: f.joints_local) if joint_set == "local" else (lambda f: f.joints_global)
    if scale is None:
        root_y = float(np.mean([f.joints_global[0][1] for f in seq.frames]))
        scale = abs(root_y) if abs(root_y) > 1e-9 else 1.0

    passes = 0
    total = 0
    for start in range(0, n - window - 1, stride):
        a = pick(seq.frames[start]) / scale
        b = pick(seq.frames[start + window + 1]) / scale
        devs = []
        for k in range(1, window + 1):
            u = k / (window + 1)
            blended = a + u * (b - a)
            gt = pick(seq.frames[start + k]) / scale
            devs.append(np.sum((blended - gt) ** 2, axis=1))
        dev = float(np.mean(np.stack(devs)))
        total += 1
        if dev < threshold:
            passes += 1
    return passes / total
