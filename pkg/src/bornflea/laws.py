"""Named density families used by experiments, configs and tests."""
from __future__ import annotations

import numpy as np
from scipy import stats

from .arbfun import DEFAULT_RESOLUTION, DensityRV, MixtureRV
from .errors import InvalidArgumentError

__all__ = ["uniform", "triangle", "ramp", "truncated_gaussian", "step", "beta",
           "standard_family", "signed_mixture"]


def uniform(lo: float, hi: float, n: int = DEFAULT_RESOLUTION) -> DensityRV:
    return DensityRV.uniform(lo, hi, n)


def triangle(lo: float, hi: float, mode: float | None = None, n: int = DEFAULT_RESOLUTION) -> DensityRV:
    mode = 0.5 * (lo + hi) if mode is None else mode
    if not lo <= mode <= hi:
        raise InvalidArgumentError("triangle mode must lie in [lo, hi]")
    c = (mode - lo) / (hi - lo)
    return DensityRV.from_function(stats.triang(c, loc=lo, scale=hi - lo).pdf, lo, hi, n,
                                   label=f"triangle[{lo:g},{hi:g}]")


def ramp(lo: float, hi: float, n: int = DEFAULT_RESOLUTION) -> DensityRV:
    """Density growing linearly from 0 at ``lo`` to its maximum at ``hi``."""
    return DensityRV.from_function(lambda x: x - lo, lo, hi, n, label=f"ramp[{lo:g},{hi:g}]")


def truncated_gaussian(mean: float, sd: float, lo: float, hi: float,
                       n: int = DEFAULT_RESOLUTION) -> DensityRV:
    if not sd > 0:
        raise InvalidArgumentError("sd must be positive")
    return DensityRV.from_function(lambda x: np.exp(-0.5 * ((x - mean) / sd) ** 2), lo, hi, n,
                                   label=f"gauss({mean:g},{sd:g})[{lo:g},{hi:g}]")


def step(edges, weights, n: int = DEFAULT_RESOLUTION) -> DensityRV:
    """Piecewise-constant density: ``weights[i]`` on ``[edges[i], edges[i+1])``."""
    edges = np.asarray(edges, float)
    weights = np.asarray(weights, float)
    if edges.size != weights.size + 1 or np.any(np.diff(edges) <= 0) or np.any(weights < 0):
        raise InvalidArgumentError("step needs increasing edges and one non-negative weight per cell")

    def f(x):
        i = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, weights.size - 1)
        return weights[i]
    return DensityRV.from_function(f, edges[0], edges[-1], n, label="step")


def beta(a: float, b: float, lo: float, hi: float, n: int = DEFAULT_RESOLUTION) -> DensityRV:
    if not (a >= 1 and b >= 1):
        raise InvalidArgumentError("beta shape parameters must be >= 1 for a bounded density")
    return DensityRV.from_function(stats.beta(a, b, loc=lo, scale=hi - lo).pdf, lo, hi, n,
                                   label=f"beta({a:g},{b:g})")


def standard_family(lo: float = 1.0, hi: float = 2.0) -> dict[str, DensityRV]:
    """Five bounded-variation densities on ``[lo, hi]``: smooth, kinked and discontinuous."""
    w = hi - lo
    return {
        "uniform": uniform(lo, hi),
        "triangle": triangle(lo, hi),
        "ramp": ramp(lo, hi),
        "gauss": truncated_gaussian(lo + 0.5 * w, 0.2 * w, lo, hi),
        "step": step([lo, lo + 0.3 * w, lo + 0.7 * w, hi], [1.0, 3.0, 0.5]),
    }


def signed_mixture(positive: DensityRV, negative: DensityRV, weight_positive: float = 0.5) -> MixtureRV:
    return MixtureRV(((weight_positive, positive), (1 - weight_positive, negative)))
