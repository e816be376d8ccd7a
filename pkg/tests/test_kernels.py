"""Backend contract: the compiled kernels and the NumPy reference must agree
bit for bit on the accumulation orders they pin down."""

import numpy as np
import pytest

from motiongraph import _kernels
from motiongraph._kernels import pyref

try:
    from motiongraph._kernels import _core
except ImportError:
    _core = None

BACKENDS = [pyref] + ([_core] if _core is not None else [])


def test_selected_backend_is_known():
    assert _kernels.BACKEND in ("python", "cython")


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_single_pair_matches_matrix_entry(impl, rng):
    L = np.ascontiguousarray(rng.normal(size=(12, 30)))
    G = np.ascontiguousarray(rng.normal(size=(12, 30)))
    block = impl.pairwise_block(L, G, 0, 12)
    for i in range(12):
        for j in range(12):
            dl, dg = impl.pair_parts(L[i], G[i], L[j], G[j])
            assert dl + dg == block[i, j]
    assert np.array_equal(block, block.T)
    assert np.all(np.diag(block) == 0.0)


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
def test_dp_relax_backends_agree(rng):
    n = 15
    edges = sorted(
        {(int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(60)
         if True},
        key=lambda e: (e[1], e[0]),
    )
    edges = [(u, v) for u, v in edges if u != v]
    src = np.array([e[0] for e in edges], dtype=np.int32)
    dst = np.array([e[1] for e in edges], dtype=np.int32)
    w = rng.uniform(0, 3, len(edges))
    prev = rng.uniform(0, 5, n)
    row = rng.uniform(0, 1, n)
    hist = rng.integers(0, n, size=(6, n)).astype(np.int32)
    for sp, sw, step in ((0.0, 0, 1), (0.7, 4, 5)):
        c1, b1 = _core.dp_relax(prev, src, dst, w, 1.0, row, sp, sw, hist, step)
        c2, b2 = pyref.dp_relax(prev, src, dst, w, 1.0, row, sp, sw, hist, step)
        assert np.array_equal(c1, c2)
        assert np.array_equal(b1, b2)


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
def test_pairwise_block_backends_close(rng):
    # Cross-backend values may differ in the last bits (different summation
    # orders are allowed across, not within, backends).
    L = np.ascontiguousarray(rng.normal(size=(20, 24)))
    G = np.ascontiguousarray(rng.normal(size=(20, 24)))
    a = _core.pairwise_block(L, G, 3, 11)
    b = pyref.pairwise_block(L, G, 3, 11)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    # exact zeros stay exact in both
    L2 = np.ascontiguousarray(np.vstack([L[:1], L[:1]]))
    G2 = np.ascontiguousarray(np.vstack([G[:1], G[:1]]))
    assert _core.pairwise_block(L2, G2, 0, 2)[0, 1] == 0.0
    assert pyref.pairwise_block(L2, G2, 0, 2)[0, 1] == 0.0


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_dp_relax_tie_breaks_to_smallest_source(impl):
    # two predecessors reach node 2 at identical cost; bp must pick node 0
    src = np.array([0, 1], dtype=np.int32)
    dst = np.array([2, 2], dtype=np.int32)
    w = np.array([1.0, 1.0])
    prev = np.array([2.0, 2.0, 0.0])
    row = np.zeros(3)
    hist = np.full((2, 3), -1, dtype=np.int32)
    cost, bp = impl.dp_relax(prev, src, dst, w, 1.0, row, 0.0, 0, hist, 1)
    assert bp[2] == 0
    assert cost[2] == 3.0
    assert bp[0] == -1 and cost[0] == np.inf
