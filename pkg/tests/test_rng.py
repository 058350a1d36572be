import numpy as np
import pytest

from limiar.rng import StreamPurpose, stream


def test_same_triple_same_numbers():
    a = stream(5, StreamPurpose.REPLICA, 3).random(8)
    b = stream(5, StreamPurpose.REPLICA, 3).random(8)
    assert np.array_equal(a, b)


def test_streams_are_distinct():
    base = stream(5, StreamPurpose.REPLICA, 0).random(8)
    assert not np.array_equal(base, stream(5, StreamPurpose.REPLICA, 1).random(8))
    assert not np.array_equal(base, stream(5, StreamPurpose.PILOT, 0).random(8))
    assert not np.array_equal(base, stream(6, StreamPurpose.REPLICA, 0).random(8))


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        stream(-1, StreamPurpose.REPLICA)


def test_purpose_values_are_unique():
    assert [p.name for p in StreamPurpose] == ["REPLICA", "PILOT", "REALISATION", "GIANT"]
    assert len({int(p) for p in StreamPurpose}) == len(StreamPurpose)
