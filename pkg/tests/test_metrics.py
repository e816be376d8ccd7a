import math

import numpy as np
import pytest

from motiongraph.errors import StructuralError
from motiongraph.metrics import (
    FrameArray,
    frame_consistency,
    metric_report,
    motion_diversity,
    movie_simplified,
    psnr,
)
from motiongraph.pose import pair_distance

from conftest import rand_frame


def psnr_oracle(a, b, max_value):
    """Scalar-loop reference."""
    total = 0.0
    count = 0
    for x, y in zip(a.reshape(-1).tolist(), b.reshape(-1).tolist()):
        total += (x - y) ** 2
        count += 1
    mse = total / count
    return math.inf if mse == 0 else 10.0 * math.log10(max_value**2 / mse)


def test_psnr_identical_is_inf_sentinel(rng):
    a = FrameArray(rng.uniform(0, 255, size=(8, 8)))
    b = FrameArray(a.data.copy())
    assert psnr(a, b) == math.inf


def test_psnr_full_scale_error_zero_db():
    a = FrameArray(np.zeros((4, 4)), max_value=255.0)
    b = FrameArray(np.full((4, 4), 255.0), max_value=255.0)
    assert psnr(a, b) == pytest.approx(0.0, abs=1e-9)


def test_psnr_matches_scalar_oracle(rng):
    for _ in range(10):
        a = FrameArray(rng.uniform(0, 255, size=(8, 8)))
        b = FrameArray(rng.uniform(0, 255, size=(8, 8)))
        assert psnr(a, b) == pytest.approx(psnr_oracle(a.data, b.data, 255.0), rel=1e-9)


def test_psnr_symmetry(rng):
    a = FrameArray(rng.uniform(0, 255, size=(6, 6, 3)))
    b = FrameArray(rng.uniform(0, 255, size=(6, 6, 3)))
    assert psnr(a, b) == psnr(b, a)


def test_psnr_shape_guard(rng):
    with pytest.raises(StructuralError, match="shape"):
        psnr(FrameArray(np.zeros((2, 2))), FrameArray(np.zeros((3, 3))))
    with pytest.raises(StructuralError, match="max_value"):
        psnr(FrameArray(np.zeros((2, 2)), 255.0), FrameArray(np.zeros((2, 2)), 1.0))


def movie_oracle(gen, ref):
    n = len(gen)
    flat = lambda f: f.data.reshape(-1).tolist()
    temporal = 0.0
    tcount = 0
    for t in range(n - 1):
        for g1, g0, r1, r0 in zip(flat(gen[t + 1]), flat(gen[t]), flat(ref[t + 1]), flat(ref[t])):
            temporal += ((g1 - g0) - (r1 - r0)) ** 2
            tcount += 1
    spatial = 0.0
    scount = 0
    for t in range(n):
        for g, r in zip(flat(gen[t]), flat(ref[t])):
            spatial += (g - r) ** 2
            scount += 1
    return temporal / tcount + spatial / scount


def test_movie_identical_zero(rng):
    video = [FrameArray(rng.uniform(0, 1, size=(4, 4))) for _ in range(3)]
    same = [FrameArray(f.data.copy()) for f in video]
    assert movie_simplified(video, same) == 0.0


def test_movie_constant_offset_closed_form():
    c = 3.5
    ref = [FrameArray(np.zeros((4, 4))) for _ in range(4)]
    gen = [FrameArray(np.full((4, 4), c)) for _ in range(4)]
    assert movie_simplified(gen, ref) == pytest.approx(c * c, abs=1e-12)


def test_movie_matches_scalar_oracle(rng):
    gen = [FrameArray(rng.uniform(0, 2, size=(3, 5))) for _ in range(4)]
    ref = [FrameArray(rng.uniform(0, 2, size=(3, 5))) for _ in range(4)]
    assert movie_simplified(gen, ref) == pytest.approx(movie_oracle(gen, ref), rel=1e-9)


def test_movie_symmetry_and_nonnegativity(rng):
    gen = [FrameArray(rng.uniform(0, 2, size=(4, 4))) for _ in range(3)]
    ref = [FrameArray(rng.uniform(0, 2, size=(4, 4))) for _ in range(3)]
    assert movie_simplified(gen, ref) == movie_simplified(ref, gen)
    assert movie_simplified(gen, ref) > 0.0


def test_motion_diversity_identical_zero(rng):
    f = rand_frame(rng, 6, with_2d=True)
    frames = [f, f, f]
    assert motion_diversity(frames) == 0.0


def test_motion_diversity_two_frames(rng):
    a = rand_frame(rng, 6, with_2d=True)
    b = rand_frame(rng, 6, index=1, t=1.0, with_2d=True)
    expected = float(np.sqrt(np.square(a.joints_2d - b.joints_2d).sum()))
    assert motion_diversity([a, b]) == pytest.approx(expected, rel=1e-12)


def test_motion_diversity_matches_pair_scan(rng):
    frames = [rand_frame(rng, 5, index=i, t=i * 0.1, with_2d=True) for i in range(10)]
    total, count = 0.0, 0
    for i in range(10):
        for j in range(i + 1, 10):
            d = 0.0
            for a, b in zip(frames[i].joints_2d.reshape(-1), frames[j].joints_2d.reshape(-1)):
                d += (a - b) ** 2
            total += math.sqrt(d)
            count += 1
    assert motion_diversity(frames) == pytest.approx(total / count, rel=1e-9)


def test_motion_diversity_reorder_invariant(rng):
    frames = [rand_frame(rng, 4, index=i, t=i * 0.1, with_2d=True) for i in range(6)]
    shuffled = [frames[i] for i in (3, 0, 5, 1, 4, 2)]
    assert motion_diversity(frames) == pytest.approx(motion_diversity(shuffled), rel=1e-12)


def test_motion_diversity_requires_2d(rng):
    with pytest.raises(StructuralError, match="joints_2d"):
        motion_diversity([rand_frame(rng, 4)])


def test_frame_consistency_static(rng):
    f = rand_frame(rng, 5)
    assert frame_consistency([f, f, f]) == 0.0


def test_frame_consistency_constant_step():
    step = np.array([0.5, 0.0, 0.0])
    frames = [
        type(rand_frame(np.random.default_rng(0)))(
            frame_index=i, time_s=float(i), joints_local=np.zeros((4, 3)),
            joints_global=np.zeros((4, 3)) + step * i,
        )
        for i in range(5)
    ]
    d = pair_distance(frames[0], frames[1])
    assert frame_consistency(frames) == pytest.approx(d, rel=1e-12)


def test_frame_consistency_matches_loop_oracle(rng):
    frames = [rand_frame(rng, 5, index=i, t=i * 0.1) for i in range(8)]
    expected = sum(pair_distance(frames[t], frames[t + 1]) for t in range(7)) / 7
    assert frame_consistency(frames) == pytest.approx(expected, rel=1e-12)


def test_metric_report_schema():
    report = metric_report({"psnr_db": math.inf, "movie_simplified": 1.5})
    assert report["psnr_db"] == "inf"
    assert report["movie_simplified"] == 1.5
    assert report["lpips"] is None and report["fvd"] is None
    with pytest.raises(StructuralError):
        metric_report({"nope": 1.0})
