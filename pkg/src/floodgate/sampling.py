"""Random-variate helpers with reproducible, labeled streams."""

from __future__ import annotations

import math
import random


def derive_rng(seed: int, label: str) -> random.Random:
    """One independent generator per (seed, label) pair.

    String seeding hashes through SHA-512 inside random.Random, so the
    stream is stable across platforms and interpreter runs.
    """
    return random.Random(f"{seed}:{label}")


def exponential_from_uniform(u: float, rate: float) -> float:
    """Inverse-CDF transform of a uniform draw u in [0, 1)."""
    if rate <= 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    if not 0 <= u < 1:
        raise ValueError(f"u must be in [0, 1), got {u}")
    return -math.log1p(-u) / rate


def sample_exponential(rate: float, rng: random.Random) -> float:
    """Exponential inter-event time with the given rate (events per second)."""
    return exponential_from_uniform(rng.random(), rate)
