import numpy as np
import pytest

from lmfractal.rng import chunk_sizes, run_chunked, stream


def test_stream_is_addressed_by_seed_label_index():
    a = stream(7, "x", 3).standard_normal(5)
    assert np.array_equal(a, stream(7, "x", 3).standard_normal(5))
    assert not np.array_equal(a, stream(7, "x", 4).standard_normal(5))
    assert not np.array_equal(a, stream(7, "y", 3).standard_normal(5))
    assert not np.array_equal(a, stream(8, "x", 3).standard_normal(5))


def test_stream_rejects_negative_seed():
    with pytest.raises(ValueError):
        stream(-1)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    assert chunk_sizes(3, 4) == [3]
    with pytest.raises(ValueError):
        chunk_sizes(0, 4)


def _draw(rng, m):
    return rng.standard_normal((m, 3))


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_run_chunked_independent_of_worker_count(workers):
    ref = run_chunked(_draw, 1001, 5, "t", chunk_size=100, workers=1)
    out = run_chunked(_draw, 1001, 5, "t", chunk_size=100, workers=workers)
    assert ref.shape == (1001, 3)
    assert np.array_equal(ref, out)


def test_run_chunked_tuple_results():
    a, b = run_chunked(lambda rng, m: (np.arange(m), rng.random(m)), 25, 0, "t", chunk_size=10)
    assert np.array_equal(a, np.r_[np.arange(10), np.arange(10), np.arange(5)])
    assert b.shape == (25,)
