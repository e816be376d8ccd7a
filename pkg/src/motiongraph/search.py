"""Path searchers over the transition graph.

Three searchers share one objective: the sum over target frames of the
condition cost plus the weighted intrinsic distance of every traversed edge
(natural edges cost zero, synthetic edges their stored pose distance).

* search_dp: exact dynamic programming, offline.
* search_beam: width-limited beam with deterministic tie-breaking; supports
  streaming commits with a fixed lag for real-time use.
* search_keyframes: per-segment hop-bounded shortest path bridging pinned
  frames, with a length tolerance before time-warp resampling.

Determinism: all ties resolve by (cost, then node index, then hop count).
Cost accumulation order is pinned to ``((acc + edge) + struct) + frame`` so
an audit can recompute totals bit-exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .conditions import SearchContext
from .errors import InfeasibleQueryError, StructuralError


class Transition(NamedTuple):
    """A non-natural step: path[position-1] -> path[position] crosses a
    synthetic edge and needs inbetweening."""

    position: int
    from_frame: int
    to_frame: int


class SegmentInfo(NamedTuple):
    """Keyframe segment: path[path_start..path_end] bridges two pins and is
    resampled from ``hops`` steps to ``target_len`` steps."""

    path_start: int
    path_end: int
    hops: int
    target_len: int
    target_start: int


@dataclass(frozen=True)
class SearchResult:
    path: tuple
    transitions: tuple
    cost_total: float
    cost_breakdown: dict
    searcher: str
    segments: Optional[tuple] = None
    provenance: dict = field(default_factory=dict)


class _CompactGraph:
    """Surviving nodes renumbered 0..n-1 (ascending original index) with the
    edge list in the two layouts the searchers need."""

    def __init__(self, graph):
        self.nodes = graph.alive_nodes()
        self.index = {int(v): k for k, v in enumerate(self.nodes)}
        src, dst, w, natural = graph.all_edges()
        cs = np.array([self.index[int(u)] for u in src], dtype=np.int32)
        cd = np.array([self.index[int(v)] for v in dst], dtype=np.int32)
        cw = np.asarray(w, dtype=np.float64)

        order = np.lexsort((cs, cd))  # (dst, src) for the DP relaxation
        self.rel_src = np.ascontiguousarray(cs[order])
        self.rel_dst = np.ascontiguousarray(cd[order])
        self.rel_w = np.ascontiguousarray(cw[order])

        order = np.lexsort((cd, cs))  # (src, dst) for successor iteration
        s_src, s_dst, s_w = cs[order], cd[order], cw[order]
        n = self.nodes.size
        self.succ_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.succ_ptr, s_src + 1, 1)
        self.succ_ptr = np.cumsum(self.succ_ptr)
        self.succ_dst = s_dst
        self.succ_w = s_w

    def successors(self, u: int):
        lo, hi = self.succ_ptr[u], self.succ_ptr[u + 1]
        return self.succ_dst[lo:hi], self.succ_w[lo:hi]

    def edge_weight(self, u: int, v: int) -> Optional[float]:
        dsts, ws = self.successors(u)
        pos = np.searchsorted(dsts, v)
        if pos < dsts.size and dsts[pos] == v:
            return float(ws[pos])
        return None


def _require_searchable(ctx: SearchContext):
    if not ctx.graph.pruned:
        raise StructuralError("search requires a pruned graph (run prune_graph first)")


def _check_row_feasible(row: np.ndarray, big_m: float, t: int):
    if math.isfinite(big_m) and float(row.min()) >= big_m:
        raise InfeasibleQueryError(
            f"infeasible at target frame {t}: every source frame violates the tag demand",
            detail={"step": t},
        )


def _struct_scaled(ctx: SearchContext) -> float:
    if ctx.w.struct == 0 or ctx.struct_penalty == 0 or ctx.struct_window == 0:
        return 0.0
    return ctx.w.struct * ctx.struct_penalty


def _count_recent(prefix: Sequence[int], candidate: int, window: int) -> int:
    if window <= 0:
        return 0
    lo = max(0, len(prefix) - window)
    count = 0
    for k in range(lo, len(prefix)):
        if prefix[k] == candidate:
            count += 1
    return count


def _transitions_of(path: Sequence[int]) -> tuple:
    out = []
    for k in range(1, len(path)):
        if path[k] != path[k - 1] + 1:
            out.append(Transition(position=k, from_frame=path[k - 1], to_frame=path[k]))
    return tuple(out)


def _locate_big_m_step(ctx: SearchContext, cg: _CompactGraph, path, times) -> int:
    for t, v in zip(times, path):
        row = ctx.frame_cost_row(t)
        if float(row[cg.index[v]]) >= ctx.big_m:
            return t
    return times[0]


# ---------------------------------------------------------------------------
# dynamic programming


def search_dp(ctx: SearchContext, T: int) -> SearchResult:
    """Exact minimum-cost path of length T.

    The structural penalty is history-dependent and would break optimal
    substructure; inside the DP it is approximated by counting repeats along
    the backpointer-reconstructed best prefix (the exact penalty lives in
    beam search). With struct weight zero the DP is exact and its cost equals
    exhaustive enumeration bit-for-bit.
    """
    _require_searchable(ctx)
    if T < 1:
        raise StructuralError(f"T must be >= 1, got {T}")
    cg = _CompactGraph(ctx.graph)
    n = cg.nodes.size
    sp = _struct_scaled(ctx)

    row = ctx.frame_cost_row(0)
    _check_row_feasible(row, ctx.big_m, 0)
    cost = row.copy()
    bp_hist = np.full((max(T, 1), n), -1, dtype=np.int32)

    for t in range(1, T):
        row = ctx.frame_cost_row(t)
        _check_row_feasible(row, ctx.big_m, t)
        cost, bp = _kernels.dp_relax(
            cost, cg.rel_src, cg.rel_dst, cg.rel_w, ctx.w.edge,
            row, sp, ctx.struct_window, bp_hist, t,
        )
        bp_hist[t] = bp
        if not np.isfinite(cost).any():
            raise InfeasibleQueryError(
                f"infeasible at target frame {t}: no reachable continuation",
                detail={"step": t},
            )

    end = int(np.argmin(cost))  # first minimum: smallest node index wins ties
    total = float(cost[end])
    compact_path = [end]
    for t in range(T - 1, 0, -1):
        compact_path.append(int(bp_hist[t, compact_path[-1]]))
    compact_path.reverse()
    path = tuple(int(cg.nodes[k]) for k in compact_path)

    if total >= ctx.big_m:
        step = _locate_big_m_step(ctx, cg, path, list(range(T)))
        raise InfeasibleQueryError(
            f"infeasible at target frame {step}: the optimal path cannot avoid a tag mismatch",
            detail={"step": step},
        )
    return _finish_sequence_result(ctx, cg, path, total, "dp")


# ---------------------------------------------------------------------------
# beam search


class _Partial(NamedTuple):
    cost: float
    path: tuple


class BeamSession:
    """Incremental beam search with optional fixed-lag commits.

    push(t) advances one target frame and returns newly committed
    (position, node) pairs when a commit lag is set; finalize() commits the
    remainder and returns the SearchResult. Without a lag this is plain beam
    search over the whole horizon.
    """

    def __init__(self, ctx: SearchContext, beam_width: int, commit_lag: Optional[int] = None):
        _require_searchable(ctx)
        if beam_width < 1:
            raise StructuralError(f"beam width must be >= 1, got {beam_width}")
        if commit_lag is not None and commit_lag < 0:
            raise StructuralError("commit lag must be >= 0")
        self.ctx = ctx
        self.cg = _CompactGraph(ctx.graph)
        self.width = beam_width
        self.lag = commit_lag
        self.sp = _struct_scaled(ctx)
        self.partials: List[_Partial] = []
        self.committed: List[int] = []
        self.next_t = 0

    def push(self, t: int) -> list:
        if t != self.next_t:
            raise StructuralError(f"steps must be fed in order: expected {self.next_t}, got {t}")
        row = self.ctx.frame_cost_row(t)
        _check_row_feasible(row, self.ctx.big_m, t)

        if t == 0:
            candidates = [
                _Partial(float(row[k]), (k,)) for k in range(self.cg.nodes.size)
            ]
        else:
            candidates = []
            for p in self.partials:
                last = p.path[-1]
                dsts, ws = self.cg.successors(last)
                for v, w in zip(dsts.tolist(), ws.tolist()):
                    c = p.cost + self.ctx.w.edge * w
                    if self.sp > 0.0:
                        c = c + self.sp * _count_recent(p.path, v, self.ctx.struct_window)
                    c = c + float(row[v])
                    candidates.append(_Partial(c, p.path + (v,)))
            if not candidates:
                raise InfeasibleQueryError(
                    f"beam exhausted at target frame {t}: no partial path can be extended",
                    detail={"step": t},
                )

        # State = last node: keep the best partial per node. Ties resolve on
        # the reversed path so the survivor matches the DP's backpointer
        # reconstruction (smallest predecessor first).
        best_by_node: dict = {}
        for p in candidates:
            node = p.path[-1]
            cur = best_by_node.get(node)
            if cur is None or p.cost < cur.cost or (
                p.cost == cur.cost and p.path[::-1] < cur.path[::-1]
            ):
                best_by_node[node] = p
        ranked = sorted(best_by_node.values(), key=lambda p: (p.cost, p.path[-1]))
        self.partials = ranked[: self.width]
        self.next_t = t + 1

        emitted = []
        if self.lag is not None:
            while len(self.committed) <= t - self.lag:
                emitted.append(self._commit_one())
        return emitted

    def _commit_one(self):
        pos = len(self.committed)
        node = self.partials[0].path[pos]
        self.committed.append(node)
        kept = [p for p in self.partials if p.path[pos] == node]
        self.partials = kept
        return (pos, int(self.cg.nodes[node]))

    def finalize(self) -> SearchResult:
        if self.next_t == 0:
            raise StructuralError("no steps were fed to the beam session")
        best = self.partials[0]
        total = best.cost
        path = tuple(int(self.cg.nodes[k]) for k in best.path)
        if total >= self.ctx.big_m:
            step = _locate_big_m_step(self.ctx, self.cg, path, list(range(len(path))))
            raise InfeasibleQueryError(
                f"infeasible at target frame {step}: the best beam path cannot avoid a tag mismatch",
                detail={"step": step},
            )
        return _finish_sequence_result(self.ctx, self.cg, path, total, "beam")


def search_beam(ctx: SearchContext, T: int, beam_width: int) -> SearchResult:
    """Beam search over T target frames. With beam_width >= surviving node
    count and struct weight zero this reproduces search_dp exactly."""
    if T < 1:
        raise StructuralError(f"T must be >= 1, got {T}")
    session = BeamSession(ctx, beam_width)
    for t in range(T):
        session.push(t)
    return session.finalize()


# ---------------------------------------------------------------------------
# keyframe bridging


def _hop_window(L: int, d: float, upper_scale: Optional[float]) -> Tuple[int, int]:
    # 1e-9 slack guards against float noise in (1 +- d) * L landing a hair
    # off an integer and shifting ceil/floor by one.
    lo = int(math.ceil((1.0 - d) * L - 1e-9))
    up = upper_scale if upper_scale is not None else 1.0 + d
    hi = int(math.floor(up * L + 1e-9))
    lo = max(lo, 0 if L == 0 else 1)
    return lo, hi


def _segment_costs(ctx: SearchContext, target_frames: Sequence[int]):
    return [ctx.frame_cost_row(tf) for tf in target_frames]


def _dijkstra_fixed_hops(cg: _CompactGraph, ctx: SearchContext, start: int, goal: int,
                         hops: int, rows: Sequence[np.ndarray], base: float):
    """Min-cost path with exactly ``hops`` steps; rows[j] is the condition
    cost row charged on arrival at hop j. ``base`` seeds the start cost so
    the whole-path accumulation order matches the audit. Returns
    (cost, compact path) or None. Ties: smallest predecessor per cell."""
    if hops == 0:
        return (base, [start]) if start == goal else None
    n = cg.nodes.size
    INF = math.inf
    dist = np.full((hops + 1, n), INF)
    bp = np.full((hops + 1, n), -1, dtype=np.int64)
    dist[0, start] = base
    heap = [(base, 0, start)]
    while heap:
        c, h, u = heapq.heappop(heap)
        if c > dist[h, u] or h == hops:
            continue
        dsts, ws = cg.successors(u)
        row = rows[h + 1]
        for v, w in zip(dsts.tolist(), ws.tolist()):
            cand = c + ctx.w.edge * w
            cand = cand + float(row[v])
            if cand < dist[h + 1, v]:
                dist[h + 1, v] = cand
                bp[h + 1, v] = u
                heapq.heappush(heap, (cand, h + 1, v))
            elif cand == dist[h + 1, v] and u < bp[h + 1, v]:
                bp[h + 1, v] = u  # equal cost, smaller predecessor: fix the tie only
    if not math.isfinite(dist[hops, goal]):
        return None
    path = [goal]
    for h in range(hops, 0, -1):
        path.append(int(bp[h, path[-1]]))
    path.reverse()
    return float(dist[hops, goal]), path


def _achievable_hops(cg: _CompactGraph, start: int, goal: int, max_hops: int) -> list:
    reach = np.zeros(cg.nodes.size, dtype=bool)
    reach[start] = True
    feasible = [0] if start == goal else []
    for h in range(1, max_hops + 1):
        nxt = np.zeros_like(reach)
        for u in np.flatnonzero(reach):
            dsts, _ = cg.successors(int(u))
            nxt[dsts] = True
        reach = nxt
        if reach[goal]:
            feasible.append(h)
        if not reach.any():
            break
    return feasible


def _min_hops(cg: _CompactGraph, start: int, goal: int) -> Optional[int]:
    if start == goal:
        return 0
    seen = np.zeros(cg.nodes.size, dtype=bool)
    seen[start] = True
    frontier = [start]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for u in frontier:
            dsts, _ = cg.successors(u)
            for v in dsts.tolist():
                if v == goal:
                    return depth
                if not seen[v]:
                    seen[v] = True
                    nxt.append(v)
        frontier = nxt
    return None


def search_keyframes(ctx: SearchContext, d: float, upper_scale: Optional[float] = None) -> SearchResult:
    """Bridge consecutive pinned frames with hop-bounded shortest paths.

    For a segment whose pins are L target frames apart, admissible bridge
    lengths are ceil((1-D)*L) .. floor((1+D)*L) hops; each admissible hop
    count is searched with condition costs mapped onto the target timeline by
    uniform stretch, and the cheapest (cost, then fewest hops) wins. The raw
    bridge is later time-warp resampled to exactly L steps by the blend
    module; pinned endpoints are returned verbatim.
    """
    _require_searchable(ctx)
    if not 0.0 <= d < 1.0:
        raise StructuralError(f"length scale factor D must be in [0, 1), got {d}")
    kfs = ctx.track.keyframes
    if len(kfs) < 2:
        raise StructuralError(f"keyframe search needs at least 2 pins, got {len(kfs)}")
    cg = _CompactGraph(ctx.graph)
    for t_s, v in kfs:
        if v not in cg.index:
            raise StructuralError(f"keyframe source frame {v} is not a surviving graph node")

    pin_frames = [int(round(t_s * ctx.fps)) for t_s, _ in kfs]
    for a, b in zip(pin_frames, pin_frames[1:]):
        if b < a:
            raise StructuralError("keyframe target frames must be nondecreasing after rounding")

    path: List[int] = []
    segments: List[SegmentInfo] = []
    total = float(ctx.frame_cost_row(pin_frames[0])[cg.index[kfs[0][1]]])

    for i in range(len(kfs) - 1):
        s_from = cg.index[kfs[i][1]]
        s_to = cg.index[kfs[i + 1][1]]
        L = pin_frames[i + 1] - pin_frames[i]
        lo, hi = _hop_window(L, d, upper_scale)

        best = None  # (cost, hops, compact path)
        for hops in range(lo, hi + 1):
            target_frames = [
                pin_frames[i] + int(round(j * L / hops)) if hops else pin_frames[i]
                for j in range(hops + 1)
            ]
            rows = _segment_costs(ctx, target_frames)
            found = _dijkstra_fixed_hops(cg, ctx, s_from, s_to, hops, rows, total)
            if found is not None and (best is None or (found[0], hops) < (best[0], best[1])):
                best = (found[0], hops, found[1])

        if best is None:
            feasible = _achievable_hops(cg, s_from, s_to, hi)
            shortest = _min_hops(cg, s_from, s_to)
            raise InfeasibleQueryError(
                f"keyframe segment {i}: no path from frame {kfs[i][1]} to {kfs[i + 1][1]} "
                f"with hop count in [{lo}, {hi}]"
                + (f"; shortest possible bridge is {shortest} hops" if shortest is not None else "; target is unreachable"),
                detail={
                    "segment": i,
                    "requested_hops": [lo, hi],
                    "achievable_hops_within_window": [h for h in feasible if lo <= h <= hi],
                    "min_hops": shortest,
                },
            )

        seg_cost, hops, seg_path = best
        total = seg_cost  # already accumulated from the running total
        start_idx = len(path) - 1 if path else 0
        if path:
            path.extend(seg_path[1:])  # shared pin already present
        else:
            path.extend(seg_path)
        segments.append(
            SegmentInfo(
                path_start=start_idx,
                path_end=len(path) - 1,
                hops=hops,
                target_len=L,
                target_start=pin_frames[i],
            )
        )

    full_path = tuple(int(cg.nodes[k]) for k in path)
    if total >= ctx.big_m:
        raise InfeasibleQueryError(
            "keyframe query cannot avoid a tag mismatch",
            detail={"segments": len(segments)},
        )
    breakdown = _breakdown_keyframes(ctx, cg, full_path, segments)
    result = SearchResult(
        path=full_path,
        transitions=_transitions_of(full_path),
        cost_total=total,
        cost_breakdown=breakdown,
        searcher="keyframe_dijkstra",
        segments=tuple(segments),
    )
    audit_result(ctx, result)
    return result


# ---------------------------------------------------------------------------
# audit and assembly


def _term_costs(ctx: SearchContext, t: int, v: int) -> dict:
    cg_idx = int(np.searchsorted(ctx.nodes, v))
    out = {"beat": 0.0, "tag": 0.0, "ext": 0.0}
    if ctx._beat_active:
        dq = float(ctx.track.music_beats.nearest_deltas(np.array([ctx.target_time(t)]))[0])
        agreement = 1.0 if dq > ctx.sigma else float(ctx._beat_kernel[cg_idx])
        out["beat"] = ctx.w.beat * (1.0 - agreement)
    if ctx._tag_active:
        demand = ctx.track.tags.lookup(ctx.target_time(t))
        if demand is not None:
            if int(ctx._src_tag[cg_idx]) != ctx._tag_ids[demand.global_tag]:
                out["tag"] = ctx.w.tag * ctx.track.tag_mismatch_cost
            else:
                out["tag"] = ctx.w.tag * abs(int(ctx._src_order[cg_idx]) - demand.local_order) * ctx.track.tag_unit_cost
    if ctx._ext_active:
        out["ext"] = ctx.w.ext * float(ctx.track.external.row(t, np.array([v]))[0])
    return out


def _finish_sequence_result(ctx: SearchContext, cg: _CompactGraph, path: tuple,
                            total: float, searcher: str) -> SearchResult:
    breakdown = {"edge": 0.0, "beat": 0.0, "struct": 0.0, "tag": 0.0, "ext": 0.0}
    sp = _struct_scaled(ctx)
    compact = [cg.index[v] for v in path]
    for t, v in enumerate(path):
        terms = _term_costs(ctx, t, v)
        breakdown["beat"] += terms["beat"]
        breakdown["tag"] += terms["tag"]
        breakdown["ext"] += terms["ext"]
        if t:
            w = cg.edge_weight(compact[t - 1], compact[t])
            breakdown["edge"] += ctx.w.edge * w
            if sp > 0.0:
                breakdown["struct"] += sp * _count_recent(compact[:t], compact[t], ctx.struct_window)
    result = SearchResult(
        path=path,
        transitions=_transitions_of(path),
        cost_total=total,
        cost_breakdown=breakdown,
        searcher=searcher,
    )
    audit_result(ctx, result)
    return result


def _breakdown_keyframes(ctx: SearchContext, cg: _CompactGraph, path: tuple, segments) -> dict:
    breakdown = {"edge": 0.0, "beat": 0.0, "struct": 0.0, "tag": 0.0, "ext": 0.0}
    for seg in segments:
        for j in range(0 if seg.path_start == 0 else 1, seg.hops + 1):
            k = seg.path_start + j
            tf = seg.target_start + (int(round(j * seg.target_len / seg.hops)) if seg.hops else 0)
            terms = _term_costs(ctx, tf, path[k])
            breakdown["beat"] += terms["beat"]
            breakdown["tag"] += terms["tag"]
            breakdown["ext"] += terms["ext"]
            if j:
                w = cg.edge_weight(cg.index[path[k - 1]], cg.index[path[k]])
                breakdown["edge"] += ctx.w.edge * w
    return breakdown


def audit_result(ctx: SearchContext, result: SearchResult) -> float:
    """Re-derive the path cost from scratch and check structure.

    Raises StructuralError when an edge is missing, the transition list does
    not match the non-natural steps, or the recomputed total differs from
    cost_total (exact comparison; the accumulation order is part of the
    searcher contract).
    """
    cg = _CompactGraph(ctx.graph)
    path = result.path
    for v in path:
        if v not in cg.index:
            raise StructuralError(f"path node {v} is not a surviving graph node")
    for k in range(1, len(path)):
        if cg.edge_weight(cg.index[path[k - 1]], cg.index[path[k]]) is None:
            raise StructuralError(f"path step {k}: no edge {path[k - 1]} -> {path[k]}")
    if result.transitions != _transitions_of(path):
        raise StructuralError("transition list does not match the non-natural steps of the path")

    sp = _struct_scaled(ctx)
    if result.searcher == "keyframe_dijkstra":
        segs = result.segments or ()
        acc = float(ctx.frame_cost_row(segs[0].target_start)[cg.index[path[0]]])
        for seg in segs:
            for j in range(1, seg.hops + 1):
                k = seg.path_start + j
                tf = seg.target_start + int(round(j * seg.target_len / seg.hops))
                w = cg.edge_weight(cg.index[path[k - 1]], cg.index[path[k]])
                acc = acc + ctx.w.edge * w
                acc = acc + float(ctx.frame_cost_row(tf)[cg.index[path[k]]])
    else:
        compact = [cg.index[v] for v in path]
        acc = float(ctx.frame_cost_row(0)[compact[0]])
        for t in range(1, len(path)):
            w = cg.edge_weight(compact[t - 1], compact[t])
            acc = acc + ctx.w.edge * w
            if sp > 0.0:
                acc = acc + sp * _count_recent(compact[:t], compact[t], ctx.struct_window)
            acc = acc + float(ctx.frame_cost_row(t)[compact[t]])
    if acc != result.cost_total:
        raise StructuralError(
            f"cost audit failed: recomputed {acc!r} != reported {result.cost_total!r}"
        )
    return acc
