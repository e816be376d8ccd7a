import math

import numpy as np
import pytest

from motiongraph.blend import (
    apply_blending,
    blend_feasibility,
    blend_linear,
    resample_path,
)
from motiongraph.errors import StructuralError
from motiongraph.pose import PoseFrame, make_sequence
from motiongraph.search import SearchResult, SegmentInfo, Transition

from conftest import cycle_graph, graph_from_edges, rand_frame


def lerp_oracle(a, b, u):
    """Independent scalar lerp, coordinate by coordinate."""
    out = np.empty_like(a)
    for j in range(a.shape[0]):
        for c in range(a.shape[1]):
            out[j, c] = a[j, c] + u * (b[j, c] - a[j, c])
    return out


def test_blend_linear_identical_endpoints(rng):
    a = rand_frame(rng, 6)
    b = PoseFrame(1, 1.0, a.joints_local.copy(), a.joints_global.copy())
    for f in blend_linear(a, b, 5):
        assert np.array_equal(f.joints_local, a.joints_local)
        assert np.array_equal(f.joints_global, a.joints_global)


def test_blend_linear_midpoint(rng):
    a, b = rand_frame(rng, 4), rand_frame(rng, 4, index=1, t=1.0)
    (mid,) = blend_linear(a, b, 1)
    assert np.array_equal(mid.joints_local, lerp_oracle(a.joints_local, b.joints_local, 0.5))
    assert np.array_equal(mid.joints_global, lerp_oracle(a.joints_global, b.joints_global, 0.5))


def test_blend_linear_matches_scalar_oracle(rng):
    a, b = rand_frame(rng, 8), rand_frame(rng, 8, index=1, t=1.0)
    mids = blend_linear(a, b, 12)
    assert len(mids) == 12
    for k, f in enumerate(mids, start=1):
        u = k / 13
        assert np.array_equal(f.joints_local, lerp_oracle(a.joints_local, b.joints_local, u))
        assert np.array_equal(f.joints_global, lerp_oracle(a.joints_global, b.joints_global, u))


def test_blend_linear_scale_commutes(rng):
    a, b = rand_frame(rng, 4), rand_frame(rng, 4, index=1, t=1.0)
    s = 2.0  # power of two: exact
    scaled = [
        PoseFrame(f.frame_index, f.time_s, s * f.joints_local, s * f.joints_global)
        for f in (a, b)
    ]
    for f1, f2 in zip(blend_linear(*scaled, 4), blend_linear(a, b, 4)):
        assert np.array_equal(f1.joints_local, s * f2.joints_local)


def sequence_result(path, transitions=(), segments=None, searcher="dp"):
    return SearchResult(path=tuple(path), transitions=tuple(transitions),
                        cost_total=0.0, cost_breakdown={}, searcher=searcher,
                        segments=segments)


def test_apply_blending_no_transitions_passthrough(rng):
    seq = make_sequence([rng.normal(size=(4, 3)) for _ in range(10)],
                        [rng.normal(size=(4, 3)) for _ in range(10)], fps=24.0)
    g = cycle_graph(10)
    result = sequence_result(range(10))
    tl = apply_blending(g, result, seq)
    assert len(tl.frames.frames) == 10
    for i, (f, prov) in enumerate(zip(tl.frames.frames, tl.provenance)):
        assert prov == {"kind": "retrieved", "source": i}
        assert np.array_equal(f.joints_local, seq.frames[i].joints_local)


def test_apply_blending_single_transition_window(rng):
    n = 30
    seq = make_sequence([rng.normal(size=(3, 3)) for _ in range(n)],
                        [rng.normal(size=(3, 3)) for _ in range(n)], fps=24.0)
    g = graph_from_edges(n, [(20, 5, 0.1)], pruned=True)
    path = list(range(6, 21)) + list(range(5, 20))
    result = sequence_result(path, transitions=(Transition(15, 20, 5),))
    tl = apply_blending(g, result, seq, window=12)
    kinds = [p["kind"] for p in tl.provenance]
    assert kinds.count("blended") == 12
    assert kinds[9:21] == ["blended"] * 12
    # anchors around the span are bit-identical retrieved frames
    assert np.array_equal(tl.frames.frames[8].joints_local, seq.frames[path[8]].joints_local)
    assert np.array_equal(tl.frames.frames[21].joints_local, seq.frames[path[21]].joints_local)
    assert len(tl.frames.frames) == len(path)


def test_apply_blending_merges_adjacent_windows(rng):
    n = 40
    seq = make_sequence([rng.normal(size=(3, 3)) for _ in range(n)],
                        [rng.normal(size=(3, 3)) for _ in range(n)], fps=24.0)
    g = graph_from_edges(n, [(30, 4, 0.1), (8, 20, 0.1), (39, 0, 0.1)], pruned=True)
    path = list(range(25, 31)) + list(range(4, 9)) + list(range(20, 34))
    result = sequence_result(
        path, transitions=(Transition(6, 30, 4), Transition(11, 8, 20))
    )
    tl = apply_blending(g, result, seq, window=12)
    assert len(tl.frames.frames) == len(path)  # frame count preserved
    kinds = [p["kind"] for p in tl.provenance]
    # two overlapping 12-frame windows merged into one contiguous span
    first = kinds.index("blended")
    last = len(kinds) - 1 - kinds[::-1].index("blended")
    assert all(k == "blended" for k in kinds[first:last + 1])
    assert kinds[first - 1] == "retrieved" and kinds[last + 1] == "retrieved"


def test_resample_identity(rng):
    frames = [rand_frame(rng, 5, index=i, t=i / 24) for i in range(9)]
    out = resample_path(frames, 9)
    for a, b in zip(out, frames):
        assert np.array_equal(a.joints_local, b.joints_local)
        assert np.array_equal(a.joints_global, b.joints_global)


def test_resample_two_to_four():
    a = PoseFrame(0, 0.0, np.zeros((1, 3)), np.zeros((1, 3)))
    b = PoseFrame(1, 1.0, np.ones((1, 3)) * 3.0, np.ones((1, 3)) * 3.0)
    out = resample_path([a, b], 4)
    assert np.array_equal(out[0].joints_local, a.joints_local)
    assert np.array_equal(out[3].joints_local, b.joints_local)
    assert out[1].joints_local[0, 0] == pytest.approx(1.0, rel=1e-12)  # u = 1/3
    assert out[2].joints_local[0, 0] == pytest.approx(2.0, rel=1e-12)  # u = 2/3


def test_resample_matches_scalar_oracle(rng):
    frames = [rand_frame(rng, 4, index=i, t=i / 10) for i in range(9)]
    out = resample_path(frames, 10)
    for t, f in enumerate(out):
        p = t * 8 / 9
        i0 = math.floor(p)
        u = p - i0
        if u == 0:
            expected = frames[i0].joints_local
        else:
            expected = lerp_oracle(frames[i0].joints_local, frames[i0 + 1].joints_local, u)
        assert np.array_equal(f.joints_local, expected)
    # endpoints exact
    assert np.array_equal(out[0].joints_global, frames[0].joints_global)
    assert np.array_equal(out[-1].joints_global, frames[-1].joints_global)


def test_keyframe_timeline_resampled_and_pinned(rng):
    n = 10
    seq = make_sequence([rng.normal(size=(3, 3)) for _ in range(n)],
                        [rng.normal(size=(3, 3)) for _ in range(n)], fps=10.0)
    g = graph_from_edges(n, [(9, 0, 0.5)], pruned=True)
    # 9-hop bridge resampled to 10 target steps (11 frames)
    path = tuple(range(10))
    result = sequence_result(
        path,
        segments=(SegmentInfo(path_start=0, path_end=9, hops=9, target_len=10, target_start=0),),
        searcher="keyframe_dijkstra",
    )
    tl = apply_blending(g, result, seq, window=4)
    assert len(tl.frames.frames) == 11
    assert np.array_equal(tl.frames.frames[0].joints_local, seq.frames[0].joints_local)
    assert np.array_equal(tl.frames.frames[-1].joints_local, seq.frames[9].joints_local)
    assert tl.provenance[0]["kind"] == "retrieved"
    assert tl.provenance[-1]["kind"] == "retrieved"
    assert any(p["kind"] == "resampled" for p in tl.provenance)


def linear_seq(n=40, fps=24.0, joints=4):
    step = np.array([0.03125, 0.0, 0.0])
    glob = [np.zeros((joints, 3)) + step * i + np.array([0, 1.0, 0]) for i in range(n)]
    loc = [np.zeros((joints, 3)) + step * i for i in range(n)]
    return make_sequence(loc, glob, fps=fps)


def sinusoid_seq(n=60, fps=24.0, amplitude=2.0, joints=4):
    loc = []
    for i in range(n):
        x = amplitude * math.sin(2 * math.pi * 0.9 * i / fps + 0.3)
        arr = np.zeros((joints, 3))
        arr[-1, 0] = x
        loc.append(arr)
    glob = [x + np.array([0, 1.0, 0]) for x in loc]
    return make_sequence(loc, glob, fps=fps)


def test_feasibility_linear_motion_is_one():
    assert blend_feasibility(linear_seq(), window=12, threshold=0.001) == 1.0


def test_feasibility_large_sinusoid_is_zero():
    assert blend_feasibility(sinusoid_seq(), window=12, threshold=0.001) == 0.0


def test_feasibility_mixed_half(rng):
    # half linear windows, half sinusoidal: non-overlapping windows via stride
    window = 6
    stride = window + 2
    lin = linear_seq(n=4 * stride + window + 2)
    sin = sinusoid_seq(n=4 * stride + window + 2)
    frames_mix = [f.joints_local for f in lin.frames] + [f.joints_local for f in sin.frames]
    glob_mix = [f.joints_global for f in lin.frames] + [f.joints_global for f in sin.frames]
    seq = make_sequence(frames_mix, glob_mix, fps=24.0)
    frac = blend_feasibility(seq, window=window, threshold=0.001)
    # recount oracle: windows fully inside the linear half pass, fully inside
    # the sinusoid half fail; straddling windows may go either way
    n = len(seq)
    total = len(range(0, n - window - 1))
    lin_n = len(lin.frames)
    pass_min = len(range(0, lin_n - window - 1))
    assert pass_min / total <= frac <= (pass_min + window + 2) / total


def test_feasibility_monotone_in_threshold():
    seq = sinusoid_seq(amplitude=0.05)
    prev = 0.0
    for thr in (1e-6, 1e-4, 1e-2, 1.0):
        frac = blend_feasibility(seq, window=8, threshold=thr)
        assert frac >= prev
        prev = frac
    assert prev == 1.0


def test_feasibility_validation():
    with pytest.raises(StructuralError):
        blend_feasibility(linear_seq(n=5), window=12)
