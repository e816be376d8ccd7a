"""Pure-NumPy reference implementation of the hot kernels.

Selected by ``motiongraph._kernels`` when the compiled extension is missing
or when ``MOTIONGRAPH_KERNELS=python`` is set. Semantics here are the
contract; the compiled backend must match it (same accumulation orders, same
tie-breaking) so results are deterministic within a backend.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def pair_parts(al: np.ndarray, ag: np.ndarray, bl: np.ndarray, bg: np.ndarray):
    """Local and global Euclidean distances between two flattened pose vectors.

    Uses the same reduction as the row kernel in :func:`pairwise_block` so a
    stored edge weight always equals the recomputed single-pair distance.
    """
    dl = float(np.sqrt(np.square(al - bl).sum()))
    dg = float(np.sqrt(np.square(ag - bg).sum()))
    return dl, dg


def pairwise_block(L: np.ndarray, G: np.ndarray, row0: int, row1: int) -> np.ndarray:
    """Rows [row0, row1) of the full pair-distance matrix.

    L and G are (N, 3J) float64; entry (i, j) of the result is
    ||L[i]-L[j]|| + ||G[i]-G[j]||.
    """
    out = np.empty((row1 - row0, L.shape[0]), dtype=np.float64)
    for i in range(row0, row1):
        dl = np.sqrt(np.square(L - L[i]).sum(axis=1))
        dg = np.sqrt(np.square(G - G[i]).sum(axis=1))
        out[i - row0] = dl + dg
    return out


def dp_relax(
    prev_cost: np.ndarray,
    edge_src: np.ndarray,
    edge_dst: np.ndarray,
    edge_w: np.ndarray,
    w_edge: float,
    frame_row: np.ndarray,
    struct_p: float,
    struct_w: int,
    bp_hist: np.ndarray,
    step: int,
):
    """One dynamic-programming step over the edge list.

    Edges must be pre-sorted by (dst, src). For every edge u->v the candidate
    cost is ``prev_cost[u] + w_edge*edge_w`` plus, when struct_p > 0, the
    repetition penalty counted by walking the backpointer history of u. The
    best candidate per node wins; ties go to the smallest source node (strict
    ``<`` on a (dst, src)-sorted edge list guarantees that). ``frame_row`` is
    added after the minimisation, which pins the accumulation order
    ``((prev + edge) + struct) + frame`` relied on by the cost audit.

    Returns (new_cost, backpointer_row); unreachable nodes get +inf / -1.
    """
    n = prev_cost.shape[0]
    best = np.full(n, np.inf, dtype=np.float64)
    bp = np.full(n, -1, dtype=np.int32)

    if struct_p > 0.0 and step > 0:
        for e in range(edge_src.shape[0]):
            u = int(edge_src[e])
            v = int(edge_dst[e])
            cand = prev_cost[u] + w_edge * edge_w[e]
            cand = cand + struct_p * _history_count(bp_hist, step - 1, u, v, struct_w)
            if cand < best[v]:
                best[v] = cand
                bp[v] = u
    else:
        cand = prev_cost[edge_src] + w_edge * edge_w
        # Stable lexsort: per dst take the cheapest candidate, smallest src on ties.
        order = np.lexsort((edge_src, cand, edge_dst))
        dst_sorted = edge_dst[order]
        first = np.ones(order.shape[0], dtype=bool)
        first[1:] = dst_sorted[1:] != dst_sorted[:-1]
        idx = order[first]
        best[edge_dst[idx]] = cand[idx]
        bp[edge_dst[idx]] = edge_src[idx]

    new_cost = best + frame_row
    new_cost[best == np.inf] = np.inf
    return new_cost, bp


def _history_count(bp_hist: np.ndarray, last_step: int, last_node: int, target: int, window: int) -> int:
    """Occurrences of ``target`` in the last ``window`` nodes of the best path
    ending at (last_step, last_node), reconstructed through backpointers."""
    count = 0
    node = last_node
    s = last_step
    for _ in range(window):
        if node == target:
            count += 1
        if s == 0:
            break
        node = int(bp_hist[s, node])
        s -= 1
    return count
