import math

import networkx as nx
import numpy as np
import pytest

from motiongraph.errors import DegenerateGraphError, StructuralError
from motiongraph.graph import build_graph, compute_threshold, prune_graph
from motiongraph.pose import make_sequence, pair_distance

from conftest import graph_from_edges, rand_sequence, random_pruned_graph


def brute_threshold(seq, alpha):
    """Exhaustive O(N^2) nearest-neighbour scan."""
    n = len(seq)
    nns = []
    for i in range(n):
        best = math.inf
        for j in range(n):
            if j in (i - 1, i, i + 1):
                continue
            best = min(best, pair_distance(seq.frames[i], seq.frames[j]))
        if math.isfinite(best):
            nns.append(best)
    return alpha * sum(nns) / len(nns)


def brute_edges(seq, tau):
    """Exhaustive ordered-pair filter."""
    n = len(seq)
    out = set()
    for i in range(n):
        for j in range(n):
            if abs(i - j) > 1:
                if pair_distance(seq.frames[i], seq.frames[j]) < tau:
                    out.add((i, j))
    return out


def test_threshold_identical_frames():
    frames = [np.ones((2, 3))] * 3
    seq = make_sequence(frames, frames, fps=24.0)
    assert compute_threshold(seq, alpha=1.0) == 0.0
    assert compute_threshold(seq, alpha=7.0) == 0.0


def test_threshold_matches_brute_scan(rng):
    seq = rand_sequence(rng, n=50, joints=6)
    got = compute_threshold(seq, alpha=1.0)
    assert got == pytest.approx(brute_threshold(seq, 1.0), rel=1e-9)


def test_threshold_alpha_linearity(rng):
    seq = rand_sequence(rng, n=20, joints=4)
    assert compute_threshold(seq, alpha=2.0) == 2.0 * compute_threshold(seq, alpha=1.0)


def test_threshold_needs_three_frames(rng):
    seq = rand_sequence(rng, n=2)
    with pytest.raises(StructuralError):
        compute_threshold(seq)


def test_build_tau_below_min_distance_gives_no_synthetic(rng):
    seq = rand_sequence(rng, n=15, joints=4)
    dmin = min(
        pair_distance(seq.frames[i], seq.frames[j])
        for i in range(15)
        for j in range(15)
        if abs(i - j) > 1
    )
    g = build_graph(seq, tau=dmin * 0.5)
    assert g.edge_src.size == 0
    assert len(g.natural_pairs()) == 14


def test_build_exact_revisit_zero_weighted_bidirectional(rng):
    base = [rng.normal(size=(3, 3)) for _ in range(8)]
    local = base + [base[2]]  # frame 8 revisits frame 2 exactly
    seq = make_sequence(local, [x + 0.5 for x in local], fps=24.0)
    g = build_graph(seq, tau=1e-6)
    assert (2, 8) in g.synthetic_pairs() and (8, 2) in g.synthetic_pairs()
    assert all(w == 0.0 for w in g.edge_w.tolist())


def test_build_matches_brute_filter(rng):
    seq = rand_sequence(rng, n=30, joints=5)
    tau = compute_threshold(seq, alpha=1.1)
    g = build_graph(seq, tau)
    assert g.synthetic_pairs() == brute_edges(seq, tau)


def test_build_weight_roundtrip_integrity(rng):
    seq = rand_sequence(rng, n=25, joints=5)
    g = build_graph(seq, compute_threshold(seq, alpha=1.2))
    for u, v, w in zip(g.edge_src.tolist(), g.edge_dst.tolist(), g.edge_w.tolist()):
        assert w == pair_distance(seq.frames[u], seq.frames[v])


def test_build_tau_monotonicity(rng):
    seq = rand_sequence(rng, n=25, joints=5)
    tau1 = compute_threshold(seq, alpha=0.8)
    tau2 = compute_threshold(seq, alpha=1.3)
    assert build_graph(seq, tau1).synthetic_pairs() <= build_graph(seq, tau2).synthetic_pairs()


def test_build_deterministic(rng):
    seq = rand_sequence(rng, n=20, joints=4)
    tau = compute_threshold(seq)
    g1, g2 = build_graph(seq, tau), build_graph(seq, tau)
    assert g1 == g2


# -- pruning ---------------------------------------------------------------


def oracle_survivors(g):
    """Largest SCC of the full edge relation via networkx; ties broken by
    smallest minimum node index. None when no SCC can sustain playback."""
    G = nx.DiGraph()
    G.add_nodes_from(range(g.node_count))
    for i in range(g.node_count - 1):
        G.add_edge(i, i + 1)
    for u, v in zip(g.edge_src.tolist(), g.edge_dst.tolist()):
        G.add_edge(u, v)
    comps = [sorted(c) for c in nx.strongly_connected_components(G)]
    comps.sort(key=lambda c: (-len(c), c[0]))
    return set(comps[0]) if len(comps[0]) >= 2 else None


def test_prune_cycle_untouched():
    g = graph_from_edges(3, [(2, 0, 0.5)])
    pruned = prune_graph(g)
    assert pruned.pruned_nodes == ()
    assert pruned.alive_nodes().tolist() == [0, 1, 2]


def test_prune_pure_chain_degenerate():
    g = graph_from_edges(3, [])
    with pytest.raises(DegenerateGraphError, match="cycle"):
        prune_graph(g)


def test_prune_matches_scc_oracle(rng):
    checked = 0
    for seed in range(60):
        local = np.random.default_rng(seed)
        n = int(local.integers(5, 14))
        edges = set()
        for _ in range(int(local.integers(2, 12))):
            u, v = int(local.integers(0, n)), int(local.integers(0, n))
            if u != v and v != u + 1:
                edges.add((u, v))
        g = graph_from_edges(n, sorted(edges))
        expected = oracle_survivors(g)
        if expected is None:
            with pytest.raises(DegenerateGraphError):
                prune_graph(g)
            continue
        pruned = prune_graph(g)
        assert set(pruned.alive_nodes().tolist()) == expected
        checked += 1
    assert checked >= 20


def test_prune_idempotent(rng):
    for seed in range(30):
        g = random_pruned_graph(np.random.default_rng(seed))
        if g is None:
            continue
        again = prune_graph(g)
        assert again.pruned_nodes == g.pruned_nodes
        assert again == g or np.array_equal(again.edge_src, g.edge_src)


def test_every_survivor_on_a_cycle(rng):
    for seed in range(30):
        g = random_pruned_graph(np.random.default_rng(seed))
        if g is None:
            continue
        src, dst, _, _ = g.all_edges()
        G = nx.DiGraph(zip(src.tolist(), dst.tolist()))
        for v in g.alive_nodes().tolist():
            # reachable back to itself through at least one edge
            assert any(nx.has_path(G, s, v) for s in G.successors(v))


def test_survivors_have_in_and_out_degree(rng):
    for seed in range(20):
        g = random_pruned_graph(np.random.default_rng(seed))
        if g is None:
            continue
        src, dst, _, _ = g.all_edges()
        outs, ins = set(src.tolist()), set(dst.tolist())
        for v in g.alive_nodes().tolist():
            assert v in outs and v in ins


def test_graph_type_invariants():
    with pytest.raises(StructuralError, match="self edges"):
        graph_from_edges(4, [(2, 2)])
    with pytest.raises(StructuralError, match="natural"):
        graph_from_edges(4, [(1, 2)])
    with pytest.raises(StructuralError, match="threshold"):
        graph_from_edges(4, [(0, 2, 99.0)], tau=1.0)
