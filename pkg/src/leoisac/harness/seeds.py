"""Independent random streams derived from one master seed."""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream_seed", "stream"]


def stream_seed(seed: int, label: str, *keys: int) -> list:
    """Entropy for a labelled sub-stream; the same inputs always give the same stream."""
    return [int(seed), zlib.crc32(label.encode()), *(int(k) for k in keys)]


def stream(seed: int, label: str, *keys: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, label, *keys))
