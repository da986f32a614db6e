"""Random variables with densities and their wrap-around laws.

The central object is :class:`DensityRV`, a scalar random variable whose
density is sampled on a uniform grid and interpolated linearly in between.
All integrals against it (CDF, characteristic function, wrap-around law)
are taken exactly for that piecewise-linear interpolant, so the only
approximation is the sampling of the density itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import spherical_jn

from .errors import InvalidArgumentError, InvalidInputError, NumericError

DEFAULT_RESOLUTION = 2**14
DEFAULT_BINS = 4096
NORM_TOL = 1e-9

__all__ = [
    "DensityRV",
    "MixtureRV",
    "CircularLaw",
    "pushforward_mod",
    "tv_distance",
    "tv_bound",
    "density_variation",
    "char_fn",
    "char_fn_magnitude",
    "time_average_phase",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityRV:
    """Scalar random variable with a piecewise-linear density on ``[lo, hi]``.

    ``values[i]`` is the density at ``lo + i * (hi - lo) / (n - 1)``; the
    density is zero outside the support.
    """

    lo: float
    hi: float
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        lo, hi, v = float(self.lo), float(self.hi), self.values
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
            raise InvalidInputError(f"support must have positive length, got [{lo}, {hi}]")
        if v.ndim != 1 or v.size < 2:
            raise InvalidInputError("density needs at least two samples")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidInputError("density values must be finite and non-negative")
        mass = self.spacing * (v.sum() - 0.5 * (v[0] + v[-1]))
        if abs(mass - 1.0) > NORM_TOL:
            raise InvalidInputError(f"density integrates to {mass!r}, not 1")

    @classmethod
    def from_function(cls, f: Callable, lo: float, hi: float,
                      n: int = DEFAULT_RESOLUTION, label: str = "") -> "DensityRV":
        """Sample ``f`` on ``n`` grid points and normalise it by the trapezoidal rule."""
        if n < 2:
            raise InvalidArgumentError("grid_resolution must be >= 2")
        x = np.linspace(lo, hi, n)
        v = np.asarray(f(x), dtype=float) * np.ones_like(x)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidInputError("density function must be finite and non-negative")
        h = (hi - lo) / (n - 1)
        mass = h * (v.sum() - 0.5 * (v[0] + v[-1]))
        if mass <= 0:
            raise InvalidInputError("density function has zero mass on the support")
        return cls(lo, hi, v / mass, label)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int = DEFAULT_RESOLUTION) -> "DensityRV":
        if hi <= lo:
            raise InvalidInputError(f"support must have positive length, got [{lo}, {hi}]")
        return cls(lo, hi, np.full(n, 1.0 / (hi - lo)), f"uniform[{lo:g},{hi:g}]")

    @property
    def grid_resolution(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.values.size - 1)

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.values.size)

    def components(self):
        return ((1.0, self),)

    def pdf(self, x):
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def _cum(self) -> np.ndarray:
        v, h = self.values, self.spacing
        return np.concatenate(([0.0], np.cumsum(0.5 * h * (v[1:] + v[:-1]))))

    def cdf(self, x):
        """Exact CDF of the piecewise-linear density (piecewise quadratic)."""
        x = np.asarray(x, dtype=float)
        v, h = self.values, self.spacing
        cum = self._cum()
        s = np.clip((x - self.lo) / h, 0.0, v.size - 1)
        i = np.minimum(np.floor(s).astype(np.int64), v.size - 2)
        r = (s - i) * h
        out = cum[i] + v[i] * r + (v[i + 1] - v[i]) * r * r / (2 * h)
        return np.where(x <= self.lo, 0.0, np.where(x >= self.hi, cum[-1], out))

    def mass_between(self, a: float, b: float) -> float:
        return float(self.cdf(b) - self.cdf(a))

    def mean(self) -> float:
        # exact for the linear interpolant on each cell
        x, v, h = self.grid, self.values, self.spacing
        return float(np.sum(h * (v[:-1] * (2 * x[:-1] + x[1:]) + v[1:] * (x[:-1] + 2 * x[1:])) / 6))

    def ppf(self, u):
        """Inverse CDF, solving the per-cell quadratic exactly."""
        u = np.asarray(u, dtype=float)
        v, h = self.values, self.spacing
        cum = self._cum()
        target = u * cum[-1]
        i = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, v.size - 2)
        rem = target - cum[i]
        a = (v[i + 1] - v[i]) / (2 * h)
        b = v[i]
        # root of a r^2 + b r = rem in the cancellation-free form
        denom = b + np.sqrt(np.maximum(b * b + 4 * a * rem, 0.0))
        safe = np.where(denom > 0, denom, 1.0)
        r = np.where(denom > 0, 2 * rem / safe, 0.0)
        return self.lo + i * h + np.clip(r, 0.0, h)

    def sample(self, rng: np.random.Generator, size=None):
        return self.ppf(rng.random(size))


@dataclass(frozen=True, eq=False)
class MixtureRV:
    """Finite convex combination of :class:`DensityRV` components."""

    parts: tuple
    label: str = ""

    def __post_init__(self):
        parts = tuple((float(w), rv) for w, rv in self.parts)
        if not parts:
            raise InvalidInputError("mixture needs at least one component")
        w = np.array([p[0] for p in parts])
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidInputError("mixture weights must be non-negative and sum to 1")
        object.__setattr__(self, "parts", parts)

    def components(self):
        return self.parts

    @property
    def support(self) -> tuple[float, float]:
        return (min(rv.lo for _, rv in self.parts), max(rv.hi for _, rv in self.parts))

    def pdf(self, x):
        return sum(w * rv.pdf(x) for w, rv in self.parts)

    def cdf(self, x):
        return sum(w * rv.cdf(x) for w, rv in self.parts)

    def mass_between(self, a: float, b: float) -> float:
        return float(self.cdf(b) - self.cdf(a))

    def mean(self) -> float:
        return sum(w * rv.mean() for w, rv in self.parts)

    def sample(self, rng: np.random.Generator, size=None):
        n = 1 if size is None else int(np.prod(size))
        w = np.array([p[0] for p in self.parts])
        which = rng.choice(len(self.parts), size=n, p=w / w.sum())
        u = rng.random(n)
        out = np.empty(n)
        for k, (_, rv) in enumerate(self.parts):
            sel = which == k
            out[sel] = rv.ppf(u[sel])
        return out[0] if size is None else out.reshape(size)


@dataclass(frozen=True, eq=False)
class CircularLaw:
    """Law on ``[0, period)`` given by bin averages of its density.

    Bin ``j`` covers ``[j h, (j + 1) h)`` with ``h = period / n_bins``.
    """

    period: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if not (self.period > 0 and np.isfinite(self.period)):
            raise InvalidInputError("period must be positive")
        v = self.values
        if v.ndim != 1 or v.size < 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidInputError("circular density must be finite and non-negative")
        if abs(v.sum() * self.spacing - 1.0) > NORM_TOL:
            raise InvalidInputError("circular density does not integrate to 1")

    @property
    def n_bins(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        return self.period / self.values.size

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.values.size) + 0.5) * self.spacing

    def expect(self, g: Callable) -> float:
        """Midpoint-rule expectation of ``g`` under the law."""
        return float(np.sum(g(self.centers) * self.values) * self.spacing)


def pushforward_mod(rv: DensityRV, t: float, period: float = 2 * np.pi,
                    n_bins: int = DEFAULT_BINS) -> CircularLaw:
    """Exact law of ``(omega * t) mod period`` for ``omega ~ rv``.

    The wrap-around branches ``omega t in [k P, (k + 1) P)`` are enumerated
    explicitly; the mass of every (branch, bin) cell is a difference of the
    exact CDF, so the bin masses telescope to the total mass.
    """
    if not (t > 0) or not np.isfinite(t):
        raise InvalidArgumentError(f"t must be positive, got {t}")
    if not (period > 0) or not np.isfinite(period):
        raise InvalidArgumentError(f"period must be positive, got {period}")
    if not isinstance(rv, (DensityRV, MixtureRV)):
        raise InvalidInputError("rv must be a DensityRV or MixtureRV")
    masses = np.zeros(n_bins)
    h_ang = period / n_bins
    for weight, comp in rv.components():
        lo, hi = comp.lo * t, comp.hi * t
        k_first = int(np.floor(lo / period))
        n_branches = int(np.ceil(t * (comp.hi - comp.lo) / period)) + 2
        k_last = min(int(np.floor(hi / period)), k_first + n_branches - 1)
        block = max(1, 2**22 // n_bins)
        j = np.arange(n_bins + 1)
        for k0 in range(k_first, k_last + 1, block):
            ks = np.arange(k0, min(k0 + block, k_last + 1))
            # edges of every bin in every branch, in omega-space
            edges = (ks[:, None] * period + j[None, :] * h_ang) / t
            F = comp.cdf(edges)
            masses += weight * np.diff(F, axis=1).sum(axis=0)
    total = masses.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise NumericError(f"wrap-around branches captured mass {total!r}; expected 1")
    return CircularLaw(period, masses / h_ang)


def tv_distance(law: CircularLaw) -> float:
    """Total variation distance between ``law`` and the uniform law on its period."""
    if not isinstance(law, CircularLaw):
        raise InvalidInputError("tv_distance expects a CircularLaw")
    d = 0.5 * np.sum(np.abs(law.values - 1.0 / law.period)) * law.spacing
    return float(min(max(d, 0.0), 1.0))


def density_variation(rv) -> float:
    """Total variation of the density on the whole line, jumps at the support ends included."""
    total = 0.0
    for weight, comp in rv.components():
        v = comp.values
        total += weight * (v[0] + v[-1] + np.sum(np.abs(np.diff(v))))
    return float(total)


def tv_bound(rv, t: float, period: float = 2 * np.pi) -> float:
    """Rigorous bound ``period * V(f) / (8 t)`` on the TV distance of ``(omega t mod period)``.

    Writing the density as a superposition of interval indicators (layer
    cake), each interval of length ``L`` contributes at most ``period/(4 L t)``
    and the interval lengths integrate to ``V(f)/2``.
    """
    if not (t > 0 and period > 0):
        raise InvalidArgumentError("t and period must be positive")
    return period * density_variation(rv) / (8 * t)


def _j1(u):
    # spherical Bessel j1 with its series near 0, where the library form loses accuracy
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    out = spherical_jn(1, safe)
    return np.where(small, u / 3 - u**3 / 30, out)


def char_fn(rv, t):
    """``E[exp(i t omega)]``, integrating the piecewise-linear density exactly.

    ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)[:, None]
    total = np.zeros(tt.shape[0], dtype=complex)
    for weight, comp in rv.components():
        x, v, h = comp.grid, comp.values, comp.spacing
        xm = 0.5 * (x[1:] + x[:-1])
        fbar = 0.5 * (v[1:] + v[:-1])
        df = v[1:] - v[:-1]
        u = tt * (h / 2)
        cell = h * (fbar * np.sinc(u / np.pi) + 0.5j * df * _j1(u))
        total += weight * np.sum(np.exp(1j * tt * xm) * cell, axis=1)
    return total[0] if scalar else total.reshape(t.shape)


def char_fn_magnitude(rv, t: float) -> float:
    """Modulus of the characteristic function of ``rv`` at ``t``."""
    if not isinstance(rv, (DensityRV, MixtureRV)):
        raise InvalidInputError("rv must be a DensityRV or MixtureRV")
    return float(abs(char_fn(rv, float(t))))


def time_average_phase(nu, T: float):
    """``(1/T) * integral_0^T exp(i nu t) dt``, vectorised over ``nu``.

    Evaluated as ``exp(i nu T / 2) * sinc(nu T / 2)`` which equals
    ``(exp(i nu T) - 1) / (i nu T)`` and is 1 at ``nu = 0``.
    """
    if not (T > 0):
        raise InvalidArgumentError(f"averaging window T must be positive, got {T}")
    nu = np.asarray(nu, dtype=float)
    half = 0.5 * nu * T
    out = np.exp(1j * half) * np.sinc(half / np.pi)
    return complex(out) if out.ndim == 0 else out


def trend_ratios(values: Sequence[float]) -> np.ndarray:
    """Successive ratios ``values[i+1] / values[i]`` of a convergence sweep."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return v[1:] / v[:-1]
