"""Named, reproducible RNG substreams derived from one user seed."""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named stage of the pipeline.

    The same (seed, name) pair always yields the same stream, and distinct
    names never share a stream, so adding draws to one stage cannot disturb
    another.
    """
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))
