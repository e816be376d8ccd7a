"""Transition-graph construction over a pose sequence.

Nodes are frame indices. Consecutive frames are connected by natural edges;
a synthetic edge joins any non-adjacent pair whose pose distance (local +
global) falls under the threshold tau. Pruning trims nodes that cannot
sustain playback and keeps the largest strongly connected component, so a
search can continue from any surviving node indefinitely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .errors import DegenerateGraphError, StructuralError
from .pose import PoseSequence

# Rows of the pairwise matrix are computed in blocks of this many frames so
# the full N^2 matrix never has to be materialized.
BLOCK_ROWS = 256


@dataclass(frozen=True)
class MotionGraph:
    """Directed transition graph over frame indices.

    Synthetic edges are stored as parallel arrays sorted by (src, dst); both
    directions of an admitted pair are present. Natural edges (i, i+1) are
    implicit between surviving consecutive nodes.
    """

    node_count: int
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_w: np.ndarray
    threshold_tau: float
    pruned_nodes: tuple = ()
    pruned: bool = False
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        src = np.ascontiguousarray(self.edge_src, dtype=np.int32)
        dst = np.ascontiguousarray(self.edge_dst, dtype=np.int32)
        w = np.ascontiguousarray(self.edge_w, dtype=np.float64)
        if not (src.shape == dst.shape == w.shape) or src.ndim != 1:
            raise StructuralError("edge arrays must be 1-D and of equal length")
        if self.node_count < 1:
            raise StructuralError("graph needs at least one node")
        if self.threshold_tau <= 0:
            raise StructuralError(f"threshold_tau must be > 0, got {self.threshold_tau}")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.node_count:
                raise StructuralError("edge endpoint out of range")
            if (src == dst).any():
                raise StructuralError("self edges are not allowed")
            if (dst == src + 1).any():
                raise StructuralError("synthetic edge duplicates a natural edge")
            if (w > self.threshold_tau).any():
                raise StructuralError("synthetic edge weight exceeds threshold_tau")
            if (~np.isfinite(w)).any() or (w < 0).any():
                raise StructuralError("synthetic edge weights must be finite and >= 0")
            order = np.lexsort((dst, src))
            src, dst, w = src[order], dst[order], w[order]
        object.__setattr__(self, "edge_src", src)
        object.__setattr__(self, "edge_dst", dst)
        object.__setattr__(self, "edge_w", w)
        pruned = tuple(sorted(int(p) for p in self.pruned_nodes))
        if any(p < 0 or p >= self.node_count for p in pruned):
            raise StructuralError("pruned node index out of range")
        object.__setattr__(self, "pruned_nodes", pruned)

    # -- views ------------------------------------------------------------

    def alive_nodes(self) -> np.ndarray:
        mask = np.ones(self.node_count, dtype=bool)
        if self.pruned_nodes:
            mask[list(self.pruned_nodes)] = False
        return np.flatnonzero(mask)

    def natural_pairs(self) -> np.ndarray:
        """Surviving natural edges as an (M, 2) array of (i, i+1)."""
        mask = np.ones(self.node_count, dtype=bool)
        if self.pruned_nodes:
            mask[list(self.pruned_nodes)] = False
        both = mask[:-1] & mask[1:]
        i = np.flatnonzero(both)
        return np.stack([i, i + 1], axis=1) if i.size else np.empty((0, 2), dtype=np.int64)

    def all_edges(self) -> tuple:
        """(src, dst, weight, natural_mask) over every edge of the graph.

        Natural edges carry weight 0.0: traversing the original frame order
        costs nothing in the search objective.
        """
        nat = self.natural_pairs()
        src = np.concatenate([nat[:, 0], self.edge_src]).astype(np.int64)
        dst = np.concatenate([nat[:, 1], self.edge_dst]).astype(np.int64)
        w = np.concatenate([np.zeros(len(nat)), self.edge_w])
        natural = np.concatenate([np.ones(len(nat), dtype=bool), np.zeros(len(self.edge_src), dtype=bool)])
        return src, dst, w, natural

    def synthetic_pairs(self) -> set:
        return set(zip(self.edge_src.tolist(), self.edge_dst.tolist()))

    def summary(self) -> dict:
        alive = self.alive_nodes()
        return {
            "node_count": int(self.node_count),
            "nodes_surviving": int(alive.size),
            "pruned_count": len(self.pruned_nodes),
            "natural_edges": int(len(self.natural_pairs())),
            "synthetic_edges": int(self.edge_src.size),
            "threshold_tau": float(self.threshold_tau),
            "pruned": bool(self.pruned),
        }

    def __eq__(self, other):
        if not isinstance(other, MotionGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.edge_src, other.edge_src)
            and np.array_equal(self.edge_dst, other.edge_dst)
            and np.array_equal(self.edge_w, other.edge_w)
            and self.threshold_tau == other.threshold_tau
            and self.pruned_nodes == other.pruned_nodes
            and self.pruned == other.pruned
            and self.provenance == other.provenance
        )


def _iter_blocks(n: int):
    for row0 in range(0, n, BLOCK_ROWS):
        yield row0, min(row0 + BLOCK_ROWS, n)


def compute_threshold(seq: PoseSequence, alpha: float = 1.0) -> float:
    """alpha times the mean nearest-neighbour pair distance.

    The nearest neighbour of frame i excludes i itself and its temporal
    neighbours i-1, i+1; otherwise natural adjacency dominates the statistic
    and the threshold collapses. Frames with no admissible neighbour (only
    possible at N == 3 for the middle frame) are skipped from the mean.
    """
    if alpha <= 0:
        raise StructuralError(f"alpha must be > 0, got {alpha}")
    n = len(seq)
    if n < 3:
        raise StructuralError(f"threshold needs at least 3 frames, got {n}")
    L = seq.local_matrix()
    G = seq.global_matrix()
    nn_sum = 0.0
    nn_count = 0
    for row0, row1 in _iter_blocks(n):
        block = _kernels.pairwise_block(L, G, row0, row1)
        for i in range(row0, row1):
            row = block[i - row0]
            lo = max(0, i - 1)
            hi = min(n, i + 2)
            admissible = np.concatenate([row[:lo], row[hi:]])
            if admissible.size:
                nn_sum += float(admissible.min())
                nn_count += 1
    return alpha * (nn_sum / nn_count)


def build_graph(seq: PoseSequence, tau: float, provenance: Optional[dict] = None) -> MotionGraph:
    """Admit a synthetic edge for every ordered pair |i-j| > 1 with
    pair distance strictly below tau. Deterministic for identical inputs."""
    if tau <= 0:
        raise StructuralError(f"tau must be > 0, got {tau}")
    n = len(seq)
    L = seq.local_matrix()
    G = seq.global_matrix()
    us, vs, ws = [], [], []
    for row0, row1 in _iter_blocks(n):
        block = _kernels.pairwise_block(L, G, row0, row1)
        for i in range(row0, row1):
            row = block[i - row0]
            # Upper triangle only; the mirror direction is added below.
            js = np.flatnonzero(row[i + 2:] < tau) + i + 2
            for j in js:
                us.append(i)
                vs.append(int(j))
                ws.append(float(row[j]))
    src = np.array(us + vs, dtype=np.int32)
    dst = np.array(vs + us, dtype=np.int32)
    w = np.array(ws + ws, dtype=np.float64)
    return MotionGraph(
        node_count=n,
        edge_src=src,
        edge_dst=dst,
        edge_w=w,
        threshold_tau=float(tau),
        provenance=dict(provenance or {}),
    )


def strongly_connected_components(n: int, src: np.ndarray, dst: np.ndarray, nodes: Iterable[int]) -> list:
    """Iterative Tarjan over the subgraph induced by ``nodes``.

    Returns components as sorted lists, in a deterministic order.
    """
    nodeset = set(int(x) for x in nodes)
    adj = {u: [] for u in nodeset}
    for u, v in zip(src.tolist(), dst.tolist()):
        if u in nodeset and v in nodeset:
            adj[u].append(v)
    for u in adj:
        adj[u].sort()

    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    components = []
    counter = 0

    for root in sorted(nodeset):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            succs = adj[node]
            while pi < len(succs):
                nxt = succs[pi]
                pi += 1
                if nxt not in index:
                    work[-1] = (node, pi)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == node:
                        break
                components.append(sorted(comp))
            if work:
                parent, _ = work[-1]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return components


def _full_edge_lists(g: MotionGraph, alive: set):
    nat_src = [i for i in range(g.node_count - 1) if i in alive and i + 1 in alive]
    src = np.concatenate([np.array(nat_src, dtype=np.int64), g.edge_src.astype(np.int64)])
    dst = np.concatenate([np.array(nat_src, dtype=np.int64) + 1, g.edge_dst.astype(np.int64)])
    return src, dst


def prune_graph(g: MotionGraph) -> MotionGraph:
    """Remove dead ends, then keep the largest strongly connected component.

    A dead end is a node with in-degree or out-degree zero over natural plus
    synthetic edges; removal iterates to a fixpoint. Restricting to the
    largest SCC (ties: smallest minimum node index) then guarantees every
    survivor lies on a cycle, so playback can continue forever. Idempotent.
    """
    alive = set(int(x) for x in g.alive_nodes())
    if not alive:
        raise DegenerateGraphError("graph fully pruned: no nodes to start from")

    src, dst = _full_edge_lists(g, alive)
    out_adj = {u: set() for u in alive}
    in_adj = {u: set() for u in alive}
    for u, v in zip(src.tolist(), dst.tolist()):
        if u in alive and v in alive:
            out_adj[u].add(v)
            in_adj[v].add(u)

    queue = [u for u in alive if not out_adj[u] or not in_adj[u]]
    while queue:
        u = queue.pop()
        if u not in alive:
            continue
        alive.discard(u)
        for v in out_adj.pop(u, ()):
            if v in alive:
                in_adj[v].discard(u)
                if not in_adj[v]:
                    queue.append(v)
        for v in in_adj.pop(u, ()):
            if v in alive:
                out_adj[v].discard(u)
                if not out_adj[v]:
                    queue.append(v)

    if not alive:
        raise DegenerateGraphError(
            "degenerate graph: dead-end pruning removed every node "
            "(the transition relation has no cycle)"
        )

    src, dst = _full_edge_lists(g, alive)
    comps = strongly_connected_components(g.node_count, src, dst, alive)
    comps.sort(key=lambda c: (-len(c), c[0]))
    largest = comps[0]
    if len(largest) < 2:
        raise DegenerateGraphError(
            "degenerate graph: largest strongly connected component has a single "
            "node, which cannot sustain playback (no self transitions)"
        )
    survivors = set(largest)

    keep = np.array(
        [u in survivors and v in survivors for u, v in zip(g.edge_src.tolist(), g.edge_dst.tolist())],
        dtype=bool,
    )
    pruned = tuple(sorted(set(range(g.node_count)) - survivors))
    return MotionGraph(
        node_count=g.node_count,
        edge_src=g.edge_src[keep],
        edge_dst=g.edge_dst[keep],
        edge_w=g.edge_w[keep],
        threshold_tau=g.threshold_tau,
        pruned_nodes=pruned,
        pruned=True,
        provenance=dict(g.provenance),
    )


def scc_size_histogram(g: MotionGraph) -> dict:
    """Size histogram of the SCCs of the full (unpruned) edge relation."""
    alive = set(range(g.node_count))
    src, dst = _full_edge_lists(g, alive)
    comps = strongly_connected_components(g.node_count, src, dst, alive)
    hist: dict = {}
    for c in comps:
        hist[len(c)] = hist.get(len(c), 0) + 1
    return {str(k): hist[k] for k in sorted(hist)}
