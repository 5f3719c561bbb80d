"""Deterministic seed derivation.

All randomness in this package flows from one master seed per run.
Sub-streams are derived with numpy's ``SeedSequence`` spawn-key mechanism:
the stream for a logical unit of work (a trial, a grid point, a candidate
rule) is ``SeedSequence(master, spawn_key=key)`` where ``key`` is a tuple of
small integers identifying that unit.  Streams for distinct keys are
statistically independent, and the derivation does not depend on the order
in which units are processed, so trials can be partitioned or parallelized
without changing any result.
"""

from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | np.random.Generator


def child_seed(master: int, *key: int) -> np.random.SeedSequence:
    """Seed for the sub-stream identified by ``key`` under ``master``."""
    return np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))


def rng_for(master: int, *key: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``key`` under ``master``."""
    return np.random.default_rng(child_seed(master, *key))


def as_rng(seed: SeedLike) -> np.random.Generator:
    """Coerce an int, SeedSequence, or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
