import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secrecy_lab.channel import ChannelModel, sample_gains
from secrecy_lab.rng import RngStream, chunk_sizes, parallel_map, set_threads


def test_same_key_same_stream():
    a = RngStream(7).generator(1, 2).random(5)
    b = RngStream(7).generator(1, 2).random(5)
    assert np.array_equal(a, b)


def test_distinct_keys_differ():
    r = RngStream(7)
    assert not np.array_equal(r.generator(1).random(5), r.generator(2).random(5))
    assert not np.array_equal(r.generator(1).random(5), r.substream(1).generator(1).random(5))


def test_seed_range_checked():
    with pytest.raises(ValueError):
        RngStream(-1)


@given(st.integers(0, 10**6), st.integers(1, 5000))
def test_chunk_sizes_partition(n, chunk):
    sizes = chunk_sizes(n, chunk)
    assert sum(sizes) == n
    assert all(0 < s <= chunk for s in sizes)


def test_parallel_map_preserves_order():
    set_threads(4)
    assert parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]


def test_samples_independent_of_thread_count():
    m = ChannelModel.exponential(1, 2, 1)
    set_threads(1)
    a = sample_gains(m, 300_000, RngStream(3))
    set_threads(6)
    b = sample_gains(m, 300_000, RngStream(3))
    assert np.array_equal(a.hm, b.hm) and np.array_equal(a.he, b.he) and np.array_equal(a.hz, b.hz)


def test_prefix_of_longer_run_is_shorter_run():
    m = ChannelModel.exponential(1, 2, 1)
    a = sample_gains(m, 1000, RngStream(3))
    b = sample_gains(m, 200_000, RngStream(3))
    assert np.array_equal(a.hm, b.hm[:1000])
