import numpy as np
import pytest
from numpy.random import Generator, SeedSequence

from consensuslab.seeding import as_rng, child_seed, rng_for


def test_same_key_same_stream():
    a = rng_for(7, 1, 2).random(8)
    b = rng_for(7, 1, 2).random(8)
    assert np.array_equal(a, b)


def test_distinct_keys_distinct_streams():
    draws = {rng_for(7, *key).integers(0, 2**63).item()
             for key in [(0,), (1,), (0, 0), (0, 1), (1, 0)]}
    assert len(draws) == 5


def test_key_is_not_flattened_into_master():
    # (master=7, key=1) and (master=8, key=0) must not collide.
    a = rng_for(7, 1).random(4)
    b = rng_for(8, 0).random(4)
    assert not np.array_equal(a, b)


def test_child_seed_type():
    assert isinstance(child_seed(0, 3), SeedSequence)


def test_as_rng_passthrough():
    rng = as_rng(5)
    assert isinstance(rng, Generator)
    assert as_rng(rng) is rng
    first = as_rng(SeedSequence(5)).random()
    assert first == as_rng(SeedSequence(5)).random()


def test_as_rng_rejects_junk():
    with pytest.raises(TypeError):
        as_rng("not a seed")
