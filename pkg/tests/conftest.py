import numpy as np
import pytest

from motiongraph.conditions import ConditionTrack, ExternalCost, Weights
from motiongraph.graph import MotionGraph, prune_graph
from motiongraph.pose import PoseFrame, make_sequence


def rand_frame(rng, joints=24, index=0, t=0.0, with_2d=False):
    return PoseFrame(
        frame_index=index,
        time_s=t,
        joints_local=rng.normal(size=(joints, 3)),
        joints_global=rng.normal(size=(joints, 3)),
        joints_2d=rng.normal(size=(joints, 2)) * 100 if with_2d else None,
    )


def rand_sequence(rng, n=30, joints=8, fps=24.0):
    return make_sequence(
        local=[rng.normal(size=(joints, 3)) for _ in range(n)],
        global_=[rng.normal(size=(joints, 3)) for _ in range(n)],
        fps=fps,
    )


def dummy_sequence(n, fps=24.0, joints=2):
    """Still poses; used when only the graph topology matters."""
    return make_sequence(
        local=[np.zeros((joints, 3)) for _ in range(n)],
        global_=[np.zeros((joints, 3)) for _ in range(n)],
        fps=fps,
    )


def graph_from_edges(n, synthetic, tau=10.0, pruned=False):
    """synthetic: iterable of (u, v) or (u, v, w)."""
    triples = [(e[0], e[1], e[2] if len(e) > 2 else 1.0) for e in (tuple(x) for x in synthetic)]
    g = MotionGraph(
        node_count=n,
        edge_src=np.array([t[0] for t in triples], dtype=np.int32),
        edge_dst=np.array([t[1] for t in triples], dtype=np.int32),
        edge_w=np.array([t[2] for t in triples], dtype=np.float64),
        threshold_tau=tau,
    )
    return prune_graph(g) if pruned else g


def cycle_graph(n):
    """Natural chain 0..n-1 closed by a synthetic back edge, pruned."""
    return graph_from_edges(n, [(n - 1, 0, 0.0)], pruned=True)


def random_pruned_graph(rng, n=10, extra=8, max_w=2.0):
    """Random synthetic edges over a natural chain; returns the pruned graph
    or None when pruning degenerates."""
    from motiongraph.errors import DegenerateGraphError

    edges = set()
    for _ in range(extra):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v and v != u + 1:
            edges.add((u, v))
    triples = [(u, v, float(rng.uniform(0.0, max_w))) for u, v in sorted(edges)]
    g = graph_from_edges(n, triples, tau=max_w + 1.0)
    try:
        return prune_graph(g)
    except DegenerateGraphError:
        return None


def cost_track(duration_s, matrix=None, w_edge=1.0, **kw):
    """A ConditionTrack whose only active term is an external cost matrix."""
    weights = Weights(edge=w_edge, beat=0.0, struct=0.0, tag=0.0,
                      ext=1.0 if matrix is not None else 0.0)
    external = ExternalCost.from_matrix(matrix) if matrix is not None else None
    return ConditionTrack(duration_s=duration_s, external=external, weights=weights, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
