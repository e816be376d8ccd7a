"""Query orchestration shared by the CLI and the HTTP server.

One immutable (graph, sequence) pair serves any number of queries; each
query builds its own SearchContext from a ConditionFile plus the engine
config, runs a searcher, blends the resulting path into a timeline, and
serializes both to canonical documents.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .blend import BlendedTimeline, apply_blending
from .conditions import BeatTrack, ConditionTrack, SearchContext, TagTrack, Weights, extract_motion_beats
from .config import EngineConfig
from .errors import StructuralError
from .graph import MotionGraph, build_graph, compute_threshold, prune_graph, scc_size_histogram
from .io import ConditionFile, pose_sequence_to_doc, sha256_of
from .pose import PoseSequence
from .search import BeamSession, SearchResult, search_beam, search_dp, search_keyframes
from . import _kernels


def build_pipeline(seq: PoseSequence, config: EngineConfig):
    """Threshold, build, prune; returns (pruned graph, stats dict).

    The stats include the SCC size histogram of the unpruned relation, which
    is the number the paper-style dead-end pruning acts on.
    """
    t0 = time.perf_counter()
    tau = config.tau if config.tau is not None else compute_threshold(seq, config.alpha)
    if tau <= 0:
        raise StructuralError(
            "computed threshold is 0: every frame has an exact duplicate; "
            "pass an explicit tau override"
        )
    provenance = {
        "builder": "motiongraph",
        "alpha": config.alpha,
        "tau": tau,
        "tau_overridden": config.tau is not None,
        "kernel_backend": _kernels.BACKEND,
        "config": config.to_doc(),
    }
    g = build_graph(seq, tau, provenance=provenance)
    hist = scc_size_histogram(g)
    pruned = prune_graph(g)
    stats = {
        **pruned.summary(),
        "alpha": config.alpha,
        "scc_size_histogram": hist,
        "build_seconds": round(time.perf_counter() - t0, 6),
        "kernel_backend": _kernels.BACKEND,
        "config_hash": sha256_of(provenance),
    }
    return pruned, stats


def make_condition(config: EngineConfig, duration_s: float,
                   music_beats: Optional[BeatTrack] = None,
                   tags: Optional[TagTrack] = None,
                   keyframes=()) -> ConditionTrack:
    """A ConditionTrack from engine defaults, for queries without a file."""
    return ConditionTrack(
        duration_s=duration_s,
        music_beats=music_beats,
        tags=tags,
        keyframes=tuple(keyframes),
        weights=Weights(edge=config.w_edge, beat=config.w_beat, struct=config.w_struct,
                        tag=config.w_tag, ext=config.w_ext),
        sigma_s=config.sigma_s,
        struct_window=config.struct_window,
        struct_penalty=config.struct_penalty,
    )


@dataclass
class Engine:
    """Immutable query surface over one loaded graph + pose sequence."""

    graph: MotionGraph
    seq: PoseSequence
    config: EngineConfig
    source_tags: Optional[TagTrack] = None

    def __post_init__(self):
        if len(self.seq) != self.graph.node_count:
            raise StructuralError(
                f"pose sequence has {len(self.seq)} frames but the graph was built "
                f"over {self.graph.node_count}; wrong file pairing"
            )
        # Motion beats depend only on the source sequence: compute once.
        self.motion_beats = extract_motion_beats(self.seq, self.config.beat_min_separation_s)

    def context(self, track: ConditionTrack) -> SearchContext:
        return SearchContext(self.graph, self.seq, track, source_tags=self.source_tags,
                             motion_beats=self.motion_beats)

    def frames_for(self, track: ConditionTrack) -> int:
        return max(1, int(round(track.duration_s * self.seq.fps)))

    def search(self, cf: ConditionFile, searcher: str = "dp",
               frames: Optional[int] = None, beam_width: Optional[int] = None):
        ctx = self.context(cf.track)
        T = frames if frames is not None else self.frames_for(cf.track)
        if searcher == "dp":
            result = search_dp(ctx, T)
        elif searcher == "beam":
            result = search_beam(ctx, T, beam_width or self.config.beam_width)
        else:
            raise StructuralError(f"unknown searcher {searcher!r} (use dp or beam)")
        timeline = apply_blending(self.graph, result, self.seq, window=self.config.blend_window)
        return result, timeline

    def keyframe_search(self, cf: ConditionFile, d: Optional[float] = None):
        ctx = self.context(cf.track)
        d_eff = d if d is not None else (cf.d_scale if cf.d_scale is not None else self.config.d_scale)
        result = search_keyframes(ctx, d_eff)
        timeline = apply_blending(self.graph, result, self.seq, window=self.config.blend_window)
        return result, timeline

    def stream_session(self, cf: ConditionFile, beam_width: Optional[int] = None,
                       commit_lag: Optional[int] = None) -> BeamSession:
        ctx = self.context(cf.track)
        return BeamSession(ctx, beam_width or self.config.beam_width,
                           commit_lag if commit_lag is not None else self.config.commit_lag)

    def result_provenance(self, searcher: str, extra: Optional[dict] = None) -> dict:
        prov = {
            "searcher": searcher,
            "graph_config_hash": sha256_of(self.graph.provenance),
            "kernel_backend": _kernels.BACKEND,
            "config": self.config.to_doc(),
        }
        prov.update(extra or {})
        return prov


def execute_query(engine: Engine, cf: ConditionFile, mode: str,
                  searcher: str = "dp", frames: Optional[int] = None,
                  beam_width: Optional[int] = None, d: Optional[float] = None):
    """Run one query end to end and serialize. The CLI and the HTTP API both
    call this, which is what makes their payloads byte-identical."""
    if mode == "keyframe":
        d_eff = d if d is not None else (cf.d_scale if cf.d_scale is not None else engine.config.d_scale)
        result, timeline = engine.keyframe_search(cf, d_eff)
        prov = engine.result_provenance("keyframe_dijkstra", {"d_scale": d_eff})
    elif mode == "sequence":
        T = frames if frames is not None else engine.frames_for(cf.track)
        width = None
        if searcher == "beam":
            width = beam_width if beam_width is not None else engine.config.beam_width
        result, timeline = engine.search(cf, searcher, T, width)
        prov = engine.result_provenance(searcher, {"frames": T, "beam_width": width})
    else:
        raise StructuralError(f"unknown query mode {mode!r}")
    return result, timeline, result_to_doc(result, prov), timeline_to_doc(timeline)


def result_to_doc(result: SearchResult, provenance: Optional[dict] = None) -> dict:
    return {
        "version": 1,
        "searcher": result.searcher,
        "path": list(result.path),
        "transitions": [
            {"position": tr.position, "from_frame": tr.from_frame, "to_frame": tr.to_frame}
            for tr in result.transitions
        ],
        "cost_total": result.cost_total,
        "cost_breakdown": dict(result.cost_breakdown),
        "segments": None if result.segments is None else [
            {"path_start": s.path_start, "path_end": s.path_end, "hops": s.hops,
             "target_len": s.target_len, "target_start": s.target_start}
            for s in result.segments
        ],
        "provenance": provenance if provenance is not None else dict(result.provenance),
    }


def timeline_to_doc(timeline: BlendedTimeline) -> dict:
    doc = pose_sequence_to_doc(timeline.frames)
    for entry, prov in zip(doc["frames"], timeline.provenance):
        entry["provenance"] = prov
    return doc
