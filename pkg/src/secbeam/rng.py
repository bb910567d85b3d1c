"""Deterministic random streams.

Every stochastic routine takes a seed and derives a counter-based Philox
generator from it plus a string tag naming the consumer, so results are
reproducible bit for bit regardless of call order and across platforms.
"""

import hashlib

import numpy as np


def _tag_int(tag):
    digest = hashlib.sha256(str(tag).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed, *tags):
    """A Philox generator keyed by (seed, *tags)."""
    entropy = [int(seed)] + [_tag_int(t) for t in tags]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def crandn(gen, *shape):
    """Standard circular complex normals: CN(0, 1) entries."""
    re = gen.normal(size=shape)
    im = gen.normal(size=shape)
    return (re + 1j * im) / np.sqrt(2.0)
