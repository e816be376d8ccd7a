"""Task-specific path costs: beat alignment, anti-repetition, action tags,
keyframe pins, and a hook for externally supplied per-frame feature costs.

Every term is nonnegative so the searchers can rely on monotone path costs.
A tag mismatch charges a large finite cost (big-M) rather than infinity; the
searchers treat totals at or above it as infeasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import StructuralError
from .pose import PoseSequence, velocity_profile

TAG_MISMATCH_COST = 1.0e6

BEAT_SOURCES = ("music_ingested", "motion_derived")


@dataclass(frozen=True)
class BeatTrack:
    """Sorted beat timestamps in seconds."""

    beats_s: tuple
    source: str = "music_ingested"

    def __post_init__(self):
        beats = tuple(float(b) for b in self.beats_s)
        object.__setattr__(self, "beats_s", beats)
        if self.source not in BEAT_SOURCES:
            raise StructuralError(f"beat source must be one of {BEAT_SOURCES}, got {self.source!r}")
        for i, b in enumerate(beats):
            if not math.isfinite(b) or b < 0:
                raise StructuralError(f"beat {i} must be finite and >= 0, got {b}")
            if i and b <= beats[i - 1]:
                raise StructuralError(f"beats must be strictly increasing (index {i})")

    def __len__(self):
        return len(self.beats_s)

    def nearest_deltas(self, times: np.ndarray) -> np.ndarray:
        """Distance from each query time to the nearest beat; inf when empty."""
        times = np.asarray(times, dtype=np.float64)
        if not self.beats_s:
            return np.full(times.shape, np.inf)
        beats = np.array(self.beats_s)
        idx = np.searchsorted(beats, times)
        left = beats[np.clip(idx - 1, 0, len(beats) - 1)]
        right = beats[np.clip(idx, 0, len(beats) - 1)]
        return np.minimum(np.abs(times - left), np.abs(right - times))

    def inter_beat_cv(self) -> Optional[float]:
        """Coefficient of variation of inter-beat intervals (diagnostic for
        how evenly the beats are spread); None with fewer than 3 beats."""
        if len(self.beats_s) < 3:
            return None
        gaps = np.diff(np.array(self.beats_s))
        mean = float(gaps.mean())
        if mean == 0:
            return None
        return float(gaps.std() / mean)


@dataclass(frozen=True)
class TagSpan:
    start_s: float
    end_s: float
    global_tag: str
    local_order: int

    def __post_init__(self):
        if not (math.isfinite(self.start_s) and math.isfinite(self.end_s)):
            raise StructuralError("tag span bounds must be finite")
        if self.start_s >= self.end_s:
            raise StructuralError(f"tag span must have start < end, got [{self.start_s}, {self.end_s})")
        if self.local_order < 0:
            raise StructuralError(f"local_order must be >= 0, got {self.local_order}")


@dataclass(frozen=True)
class TagTrack:
    """Non-overlapping labeled time spans: a global action tag plus a local
    ordering tag for temporal coherence inside one action."""

    spans: tuple

    def __post_init__(self):
        spans = tuple(
            s if isinstance(s, TagSpan) else TagSpan(*s) for s in self.spans
        )
        spans = tuple(sorted(spans, key=lambda s: s.start_s))
        for a, b in zip(spans, spans[1:]):
            if b.start_s < a.end_s:
                raise StructuralError(
                    f"tag spans overlap: [{a.start_s}, {a.end_s}) and [{b.start_s}, {b.end_s})"
                )
        object.__setattr__(self, "spans", spans)

    def lookup(self, t: float) -> Optional[TagSpan]:
        for s in self.spans:
            if s.start_s <= t < s.end_s:
                return s
        return None


class ExternalCost:
    """Contract for externally supplied per-(target frame, source frame)
    feature distances. Subclass or use the factory helpers."""

    def row(self, t: int, nodes: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def from_matrix(matrix: np.ndarray) -> "ExternalCost":
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or (m < 0).any() or not np.isfinite(m).all():
            raise StructuralError("external cost matrix must be 2-D, finite and >= 0")

        class _Matrix(ExternalCost):
            def row(self, t: int, nodes: np.ndarray) -> np.ndarray:
                return m[t, nodes]

        return _Matrix()

    @staticmethod
    def from_callable(fn: Callable[[int, int], float]) -> "ExternalCost":
        class _Callable(ExternalCost):
            def row(self, t: int, nodes: np.ndarray) -> np.ndarray:
                return np.array([float(fn(t, int(v))) for v in nodes])

        return _Callable()


@dataclass(frozen=True)
class Weights:
    edge: float = 1.0
    beat: float = 1.0
    struct: float = 1.0
    tag: float = 1.0
    ext: float = 1.0

    def __post_init__(self):
        for name in ("edge", "beat", "struct", "tag", "ext"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise StructuralError(f"weight {name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class ConditionTrack:
    """A full query: what the synthesized timeline should satisfy."""

    duration_s: float
    music_beats: Optional[BeatTrack] = None
    tags: Optional[TagTrack] = None
    external: Optional[ExternalCost] = None
    keyframes: tuple = ()
    weights: Weights = field(default_factory=Weights)
    sigma_s: float = 0.1
    struct_window: int = 48
    struct_penalty: Optional[float] = None  # None: resolve to 0.1 * tau at query time
    tag_unit_cost: float = 1.0
    tag_mismatch_cost: float = TAG_MISMATCH_COST

    def __post_init__(self):
        if self.duration_s <= 0 or not math.isfinite(self.duration_s):
            raise StructuralError(f"duration_s must be positive, got {self.duration_s}")
        if self.sigma_s <= 0:
            raise StructuralError(f"sigma_s must be > 0, got {self.sigma_s}")
        if self.struct_window < 0:
            raise StructuralError("struct_window must be >= 0")
        if self.struct_penalty is not None and self.struct_penalty < 0:
            raise StructuralError("struct_penalty must be >= 0")
        if self.tag_mismatch_cost < 1.0e6:
            raise StructuralError("tag_mismatch_cost must be at least 1e6")
        kfs = tuple((float(t), int(v)) for t, v in self.keyframes)
        for i, (t, v) in enumerate(kfs):
            if t < 0 or not math.isfinite(t):
                raise StructuralError(f"keyframe {i} target time must be finite and >= 0")
            if i and t <= kfs[i - 1][0]:
                raise StructuralError(f"keyframe target times must be strictly increasing (index {i})")
            if v < 0:
                raise StructuralError(f"keyframe {i} references a negative source frame")
        object.__setattr__(self, "keyframes", kfs)


def extract_motion_beats(seq: PoseSequence, min_separation_s: float = 0.2) -> BeatTrack:
    """Beat times from strict local minima of the motion velocity profile.

    A velocity sample covers the interval between two frames, so a beat gets
    the interval's midpoint time. Minima closer together than
    min_separation_s are thinned greedily, deepest first.
    """
    if min_separation_s < 0:
        raise StructuralError("min_separation_s must be >= 0")
    if len(seq) < 3:
        raise StructuralError("beat extraction needs at least 3 frames")
    v = velocity_profile(seq)
    times = seq.times()
    mids = (times[:-1] + times[1:]) / 2.0
    candidates = [
        (float(v[t]), float(mids[t]))
        for t in range(1, len(v) - 1)
        if v[t - 1] > v[t] < v[t + 1]
    ]
    candidates.sort()  # depth first, then time: deterministic greedy order
    accepted: list = []
    for depth, t in candidates:
        if all(abs(t - a) >= min_separation_s for a in accepted):
            accepted.append(t)
    return BeatTrack(beats_s=tuple(sorted(accepted)), source="motion_derived")


def beat_alignment_score(motion_beats: BeatTrack, music_beats: BeatTrack, sigma_s: float) -> float:
    """Mean Gaussian agreement between each music beat and its nearest motion
    beat: exp(-delta^2 / (2 sigma^2)). Empty music track scores 1.0 (nothing
    demanded); motion silence against demanded beats scores 0.0."""
    if sigma_s <= 0:
        raise StructuralError(f"sigma_s must be > 0, got {sigma_s}")
    if not music_beats.beats_s:
        return 1.0
    if not motion_beats.beats_s:
        return 0.0
    deltas = motion_beats.nearest_deltas(np.array(music_beats.beats_s))
    return float(np.mean(np.exp(-(deltas**2) / (2.0 * sigma_s**2))))


def structural_penalty(
    path_prefix: Sequence[int], candidate: int, window_w: int, penalty_p: float
) -> float:
    """penalty_p per occurrence of the candidate within the last window_w
    path entries; discourages replaying the same source frames."""
    if penalty_p < 0:
        raise StructuralError("penalty_p must be >= 0")
    if window_w < 0:
        raise StructuralError("window_w must be >= 0")
    if window_w == 0 or not path_prefix:
        return 0.0
    window = path_prefix[-window_w:]
    count = sum(1 for x in window if x == candidate)
    return penalty_p * count


def tag_cost(
    target_time_s: float,
    candidate_time_s: float,
    source_tags: Optional[TagTrack],
    query_tags: Optional[TagTrack],
    unit_cost: float = 1.0,
    mismatch_cost: float = TAG_MISMATCH_COST,
) -> float:
    """Cost of placing the source frame at candidate_time_s onto the target
    time: zero when the query demands nothing there; big-M when global tags
    differ or the source frame is untagged; otherwise the local-order gap
    times unit_cost."""
    demand = query_tags.lookup(target_time_s) if query_tags else None
    if demand is None:
        return 0.0
    have = source_tags.lookup(candidate_time_s) if source_tags else None
    if have is None or have.global_tag != demand.global_tag:
        return mismatch_cost
    return abs(have.local_order - demand.local_order) * unit_cost


class SearchContext:
    """Query-scoped lookups binding a graph + source sequence to a condition.

    Precomputes, per surviving node, the static parts of every cost term so
    the searchers can fetch whole cost rows per target frame. The context is
    immutable once built; path prefixes stay with each search worker.

    Beat agreement is defined per (target frame t, source node v) as:

        dm = |source_time(v) - nearest motion beat|   (inf without beats)
        dq = |target_time(t) - nearest music beat|    (inf without beats)
        agreement = 1.0        if no music demand near t (dq > sigma or no music)
                    1.0        if dm <= sigma  (a motion beat lands on the demand)
                    exp(-dm^2 / (2 sigma^2))   otherwise

    and the beat cost is weights.beat * (1 - agreement).
    """

    def __init__(
        self,
        graph,
        seq: PoseSequence,
        track: ConditionTrack,
        source_tags: Optional[TagTrack] = None,
        motion_beats: Optional[BeatTrack] = None,
        beat_min_separation_s: float = 0.2,
    ):
        self.graph = graph
        self.seq = seq
        self.track = track
        self.source_tags = source_tags
        self.nodes = graph.alive_nodes()
        if self.nodes.size == 0:
            raise StructuralError("graph has no surviving nodes")
        self.fps = seq.fps
        times = seq.times()
        self.node_times = times[self.nodes]

        if motion_beats is None and track.music_beats is not None:
            motion_beats = extract_motion_beats(seq, beat_min_separation_s)
        self.motion_beats = motion_beats

        self.sigma = track.sigma_s
        w = track.weights
        self.w = w
        self.struct_window = track.struct_window
        self.struct_penalty = (
            track.struct_penalty
            if track.struct_penalty is not None
            else 0.1 * graph.threshold_tau
        )
        # Effective infeasibility threshold: a path whose total reaches one
        # weighted mismatch charge is considered tag-infeasible.
        if track.tags is not None and w.tag > 0:
            self.big_m = w.tag * track.tag_mismatch_cost
        else:
            self.big_m = math.inf

        # Beat term: static per-node kernel, per-target demand gate.
        self._beat_active = track.music_beats is not None and w.beat > 0
        if self._beat_active:
            dm = (motion_beats or BeatTrack(beats_s=())).nearest_deltas(self.node_times)
            kernel = np.where(
                dm <= self.sigma, 1.0, np.exp(-(dm**2) / (2.0 * self.sigma**2))
            )
            kernel[np.isinf(dm)] = 0.0
            self._beat_kernel = kernel

        # Tag term: intern tags, per-node source labels.
        self._tag_active = track.tags is not None and w.tag > 0
        if self._tag_active:
            tag_ids: dict = {}
            for span in track.tags.spans:
                tag_ids.setdefault(span.global_tag, len(tag_ids))
            if source_tags is not None:
                for span in source_tags.spans:
                    tag_ids.setdefault(span.global_tag, len(tag_ids))
            self._tag_ids = tag_ids
            src_tag = np.full(self.nodes.size, -1, dtype=np.int64)
            src_order = np.zeros(self.nodes.size, dtype=np.int64)
            if source_tags is not None:
                for k, t in enumerate(self.node_times):
                    span = source_tags.lookup(float(t))
                    if span is not None:
                        src_tag[k] = tag_ids[span.global_tag]
                        src_order[k] = span.local_order
            self._src_tag = src_tag
            self._src_order = src_order

        self._ext_active = track.external is not None and w.ext > 0

    def target_time(self, t: int) -> float:
        return t / self.fps

    def frame_cost_row(self, t: int) -> np.ndarray:
        """Prefix-independent condition cost for target frame t over all
        surviving nodes: ((beat + tag) + ext), each term pre-weighted."""
        row = np.zeros(self.nodes.size, dtype=np.float64)
        if self._beat_active:
            tt = self.target_time(t)
            dq = float(self.track.music_beats.nearest_deltas(np.array([tt]))[0])
            if dq <= self.sigma:
                row = self.w.beat * (1.0 - self._beat_kernel)
        if self._tag_active:
            demand = self.track.tags.lookup(self.target_time(t))
            if demand is not None:
                demand_id = self._tag_ids[demand.global_tag]
                tc = np.where(
                    self._src_tag == demand_id,
                    np.abs(self._src_order - demand.local_order) * self.track.tag_unit_cost,
                    self.track.tag_mismatch_cost,
                )
                row = row + self.w.tag * tc
        if self._ext_active:
            ec = np.asarray(self.track.external.row(t, self.nodes), dtype=np.float64)
            if ec.shape != (self.nodes.size,):
                raise StructuralError("external cost row has wrong length")
            row = row + self.w.ext * ec
        return row

    def struct_term(self, prefix: Sequence[int], candidate: int) -> float:
        """Weighted structural penalty for appending candidate after prefix."""
        if self.w.struct == 0 or self.struct_penalty == 0:
            return 0.0
        return self.w.struct * structural_penalty(
            prefix, candidate, self.struct_window, self.struct_penalty
        )


def frame_condition_cost(
    t: int,
    v: int,
    track: ConditionTrack,
    ctx: SearchContext,
    path_prefix: Sequence[int] = (),
) -> float:
    """Total task-specific cost of placing source node v at target frame t.

    Terms accumulate left to right: beat, struct, tag, ext. Absent tracks
    contribute zero; only a tag mismatch can reach big-M.
    """
    pos = np.searchsorted(ctx.nodes, v)
    if pos >= ctx.nodes.size or ctx.nodes[pos] != v:
        raise StructuralError(f"node {v} is not a surviving graph node")
    w = track.weights

    cost = 0.0
    if ctx._beat_active:
        tt = ctx.target_time(t)
        dq = float(track.music_beats.nearest_deltas(np.array([tt]))[0])
        agreement = 1.0 if dq > ctx.sigma else float(ctx._beat_kernel[pos])
        cost += w.beat * (1.0 - agreement)
    cost += ctx.struct_term(path_prefix, v)
    if ctx._tag_active:
        demand = track.tags.lookup(ctx.target_time(t))
        if demand is not None:
            have_id = int(ctx._src_tag[pos])
            if have_id != ctx._tag_ids[demand.global_tag]:
                cost += w.tag * track.tag_mismatch_cost
            else:
                cost += w.tag * abs(int(ctx._src_order[pos]) - demand.local_order) * track.tag_unit_cost
    if ctx._ext_active:
        cost += w.ext * float(track.external.row(t, np.array([v]))[0])
    return cost
