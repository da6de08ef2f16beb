import numpy as np
import pytest

from qexlab.rng import CHUNK, Stream, chunk_ranges, chunked_sum


def test_uniforms_deterministic():
    a = Stream(42, "x").uniforms(0, 1000, 3)
    b = Stream(42, "x").uniforms(0, 1000, 3)
    assert np.array_equal(a, b)


def test_uniforms_range_split_invariance():
    full = Stream(7, "x").uniforms(0, 1000, 2)
    s = Stream(7, "x")
    parts = np.vstack([s.uniforms(0, 137, 2), s.uniforms(137, 863, 2)])
    assert np.array_equal(full, parts)


def test_different_tags_decorrelate():
    a = Stream(7, "a").uniforms(0, 4096, 1)[:, 0]
    b = Stream(7, "b").uniforms(0, 4096, 1)[:, 0]
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_uniform_moments():
    u = Stream(3, "m").uniforms(0, 200000, 1)[:, 0]
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1.0 / 12.0) < 0.002
    assert u.min() >= 0.0 and u.max() < 1.0


def test_normals_moments_and_range():
    g = Stream(5, "n").normals(0, 200000, 2)
    assert abs(g.mean()) < 0.01
    assert abs(g.std() - 1.0) < 0.01
    assert np.all(np.isfinite(g))


def test_derive_is_stable():
    a = Stream(9, "root").derive("child").uniforms(0, 10, 1)
    b = Stream(9, "root").derive("child").uniforms(0, 10, 1)
    assert np.array_equal(a, b)


def test_chunk_ranges_cover():
    ranges = list(chunk_ranges(3 * CHUNK + 17))
    assert sum(c for _, c in ranges) == 3 * CHUNK + 17
    assert ranges[0] == (0, CHUNK)


def test_chunked_sum_worker_invariance():
    stream = Stream(11, "w")

    def per_chunk(start, count):
        u = stream.uniforms(start, count, 1)
        return (float(u.sum()), int(count))

    serial = chunked_sum(250000, per_chunk, workers=1)
    threaded = chunked_sum(250000, per_chunk, workers=4)
    assert serial == threaded


def test_integers_bounds():
    idx = Stream(13, "i").integers(0, 10000, 2, bound=7)
    assert idx.min() >= 0 and idx.max() <= 6
    counts = np.bincount(idx.ravel(), minlength=7)
    assert counts.min() > 0.8 * counts.mean()


def test_integers_bad_bound():
    with pytest.raises(ValueError):
        Stream(1, "x").integers(0, 1, 1, bound=0)
