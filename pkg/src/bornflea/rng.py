"""Counter-based random streams: one independent Philox stream per (seed, sample_id)."""
from __future__ import annotations

import numpy as np


def substream(seed: int, sample_id: int) -> np.random.Generator:
    """Generator for sample ``sample_id``; independent of how samples are scheduled."""
    if seed < 0 or sample_id < 0:
        raise ValueError("seed and sample_id must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(sample_id)])))
