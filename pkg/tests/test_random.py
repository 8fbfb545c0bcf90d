import numpy as np

from gdlearn._random import Stream, seeded_rng, uint64_stream


def test_same_seed_gives_the_same_stream():
    assert np.array_equal(
        uint64_stream(seeded_rng(42), 100), uint64_stream(seeded_rng(42), 100)
    )


def test_different_seeds_differ():
    assert not np.array_equal(
        uint64_stream(seeded_rng(1), 100), uint64_stream(seeded_rng(2), 100)
    )


def test_substreams_are_independent_of_each_other():
    data = seeded_rng(7, Stream.DATA).standard_normal(50)
    noise = seeded_rng(7, Stream.NOISE).standard_normal(50)

    assert not np.array_equal(data, noise)
    assert np.array_equal(data, seeded_rng(7, Stream.DATA).standard_normal(50))


def test_negative_seeds_wrap_around():
    wrapped = seeded_rng((1 << 64) - 1)

    assert np.array_equal(uint64_stream(seeded_rng(-1), 10), uint64_stream(wrapped, 10))


def test_normal_moments():
    z = seeded_rng(3).standard_normal(1_000_000)

    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.005
