"""Grid wavefunctions, Wigner transforms, Weyl pairings and harmonic flow.

Wigner convention: ``W(x, p) = (1/(pi hbar)) int conj(psi(x+y)) psi(x-y) exp(2 i p y / hbar) dy``,
normalised so that ``int int W dx dp = 1`` and ``|W| <= 1/(pi hbar) <= 2/hbar``.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.signal import czt

from .arbfun import DensityRV, MixtureRV, pushforward_mod, char_fn
from .errors import (AliasingError, DomainError, InvalidArgumentError, InvalidInputError,
                     NumericError)

__all__ = [
    "Grid1D", "WaveFn", "WignerField", "TestObservable", "PointMassMixture",
    "wigner_transform", "pair", "weyl_expectation", "classical_flow_ho", "orbit_average",
    "ho_eigenbasis", "evolve_ho", "coherent_state", "bump", "smooth_box",
    "Prop1Residual", "prop1_residual",
]


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise InvalidInputError("grid needs x_max > x_min")
        n = int(self.n_points)
        if n < 2 or n & (n - 1):
            raise InvalidInputError(f"n_points must be a power of two >= 2, got {n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, 2 * self.n_points)


def trapz_norm2(values, dx) -> float:
    a = np.abs(values) ** 2
    return float(dx * (a.sum() - 0.5 * (a[0] + a[-1])))


@dataclass(frozen=True, eq=False)
class WaveFn:
    grid: Grid1D
    values: np.ndarray
    hbar: float
    norm_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n_points,):
            raise InvalidInputError("wavefunction length does not match the grid")
        if not self.hbar > 0:
            raise InvalidArgumentError("hbar must be positive")
        n2 = trapz_norm2(v, self.grid.spacing)
        if abs(n2 - 1.0) > self.norm_tol:
            raise InvalidInputError(f"wavefunction norm^2 is {n2!r}, not 1")
        if max(abs(v[0]), abs(v[-1])) > 1e-8:
            raise InvalidInputError("wavefunction does not decay at the grid boundary; widen the grid")

    @classmethod
    def normalized(cls, grid: Grid1D, values, hbar: float) -> "WaveFn":
        v = np.asarray(values, dtype=complex)
        return cls(grid, v / np.sqrt(trapz_norm2(v, grid.spacing)), hbar)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def coarsened(self, stride: int) -> "WaveFn":
        """Every ``stride``-th sample (``stride`` a power of two), renormalised."""
        n = self.grid.n_points // stride
        if stride < 1 or stride & (stride - 1) or n < 2:
            raise InvalidArgumentError("stride must be a power of two leaving >= 2 points")
        x = self.grid.x
        idx = np.arange(n) * stride
        return WaveFn.normalized(Grid1D(self.grid.x_min, float(x[idx[-1]]), n), self.values[idx], self.hbar)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def inner(self, other: "WaveFn") -> complex:
        """``<self, other>`` (antilinear in ``self``) by the trapezoidal rule."""
        prod = np.conj(self.values) * other.values
        return complex(self.grid.spacing * (prod.sum() - 0.5 * (prod[0] + prod[-1])))

    def mass(self, where) -> float:
        """Trapezoidal probability in the region selected by the boolean mask ``where``."""
        d = np.where(where, self.density, 0.0)
        return float(self.grid.spacing * (d.sum() - 0.5 * (d[0] + d[-1])))


@dataclass(frozen=True, eq=False)
class WignerField:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    hbar: float

    def __post_init__(self):
        for name in ("x", "p", "values"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.values.shape != (self.x.size, self.p.size):
            raise InvalidInputError("Wigner values must have shape (len(x), len(p))")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("Wigner values must be finite")

    def total(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.x))

    def marginal_x(self) -> np.ndarray:
        return np.trapezoid(self.values, self.p, axis=1)

    def marginal_p(self) -> np.ndarray:
        return np.trapezoid(self.values, self.x, axis=0)

    def interpolator(self) -> Callable:
        spline = RectBivariateSpline(self.x, self.p, self.values, kx=5, ky=5)
        xlo, xhi, plo, phi = self.x[0], self.x[-1], self.p[0], self.p[-1]

        def W(x, p):
            x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
            if np.any((x < xlo) | (x > xhi) | (p < plo) | (p > phi)):
                raise DomainError("Wigner field evaluated outside its phase-space grid")
            return spline.ev(x, p)
        return W

    # -- serialisation: header (x_min, x_max, nx, p_min, p_max, np, hbar) then row-major values
    def _header(self):
        return (self.x[0], self.x[-1], self.x.size, self.p[0], self.p[-1], self.p.size, self.hbar)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# x_min,x_max,nx,p_min,p_max,np,hbar\n")
            x0, x1, nx, p0, p1, npts, hb = self._header()
            fh.write(f"{float(x0)!r},{float(x1)!r},{nx},{float(p0)!r},{float(p1)!r},{npts},{float(hb)!r}\n")
            for row in self.values:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "WignerField":
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
        x0, x1, nx, p0, p1, npts, hb = (float(s) for s in lines[0].split(","))
        vals = np.array([[float(s) for s in ln.split(",")] for ln in lines[1:]])
        return cls(np.linspace(x0, x1, int(nx)), np.linspace(p0, p1, int(npts)), vals, hb)

    def to_bytes(self) -> bytes:
        x0, x1, nx, p0, p1, npts, hb = self._header()
        head = struct.pack("<7d", x0, x1, float(nx), p0, p1, float(npts), hb)
        return head + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "WignerField":
        x0, x1, nx, p0, p1, npts, hb = struct.unpack("<7d", blob[:56])
        vals = np.frombuffer(blob[56:], dtype="<f8").reshape(int(nx), int(npts))
        return cls(np.linspace(x0, x1, int(nx)), np.linspace(p0, p1, int(npts)), vals.copy(), hb)


def wigner_transform(psi: WaveFn, p_extent: float | None = None, n_p: int = 256, *,
                     x_window: tuple[float, float] | None = None,
                     x_stride: int = 1, cutoff: float = 1e-14) -> WignerField:
    """Wigner function of ``psi`` on ``x`` grid rows times ``n_p`` momenta.

    The momentum grid is ``linspace(-p_extent/2, p_extent/2, n_p)``. For each
    row the sum over ``y`` is a DFT evaluated at exactly those momenta with a
    chirp-z transform. ``x_window`` / ``x_stride`` restrict the rows computed.
    """
    hbar, dx = psi.hbar, psi.grid.spacing
    if p_extent is None:
        p_extent = 0.9 * np.pi * hbar / dx
    if not p_extent > 0 or n_p < 2:
        raise InvalidArgumentError("p_extent must be positive and n_p >= 2")
    if p_extent * dx / hbar >= np.pi:
        raise AliasingError(
            f"p_extent * dx / hbar = {p_extent * dx / hbar:.3f} >= pi: momentum grid would alias; "
            f"use p_extent < {np.pi * hbar / dx:.4g} or a finer x grid")
    v = psi.values
    x = psi.grid.x
    amp = np.abs(v)
    live = np.nonzero(amp > cutoff * amp.max())[0]
    i_lo, i_hi = live[0], live[-1]
    rows = np.arange(psi.grid.n_points)
    if x_window is not None:
        rows = rows[(x >= x_window[0]) & (x <= x_window[1])]
    rows = rows[::max(1, int(x_stride))]
    if rows.size == 0:
        raise DomainError("x_window selects no grid rows")
    J = (i_hi - i_lo) // 2 + 1
    j = np.arange(-J, J + 1)
    plus = rows[:, None] + j[None, :]
    minus = rows[:, None] - j[None, :]
    ok = (plus >= i_lo) & (plus <= i_hi) & (minus >= i_lo) & (minus <= i_hi)
    R = np.where(ok, np.conj(v[np.clip(plus, 0, v.size - 1)]) * v[np.clip(minus, 0, v.size - 1)], 0)
    p = np.linspace(-p_extent / 2, p_extent / 2, n_p)
    theta0 = 2 * p[0] * dx / hbar
    dtheta = 2 * (p[1] - p[0]) * dx / hbar
    S = czt(R, m=n_p, w=np.exp(1j * dtheta), a=np.exp(-1j * theta0), axis=1)
    S *= np.exp(-1j * (2 * p * dx / hbar) * J)[None, :]
    S *= dx / (np.pi * hbar)
    resid = np.max(np.abs(S.imag)) if S.size else 0.0
    if resid > 1e-9:
        raise NumericError(f"Wigner transform has imaginary residue {resid:.3g}")
    W = S.real
    if np.max(np.abs(W)) > 2 / hbar:
        raise NumericError("Wigner function exceeds the 2/hbar bound")
    return WignerField(x[rows], p, W, hbar)


@dataclass(frozen=True, eq=False)
class TestObservable:
    """Phase-space function with a declared rectangular support."""

    f: Callable
    support: tuple[float, float, float, float]  # x_lo, x_hi, p_lo, p_hi
    label: str = ""

    __test__ = False  # not a pytest class

    def __call__(self, x, p):
        x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
        xl, xh, pl, ph = self.support
        inside = (x >= xl) & (x <= xh) & (p >= pl) & (p <= ph)
        return np.where(inside, self.f(x, p), 0.0)


def _bump1(r2):
    out = np.zeros_like(r2)
    m = r2 < 1
    out[m] = np.exp(1 - 1 / (1 - r2[m]))
    return out


def bump(x0: float, p0: float, rx: float, rp: float | None = None, amp: float = 1.0,
         label: str = "") -> TestObservable:
    """Smooth compactly supported bump, equal to ``amp`` at ``(x0, p0)``."""
    rp = rx if rp is None else rp

    def f(x, p):
        return amp * _bump1(((x - x0) / rx) ** 2 + ((p - p0) / rp) ** 2)
    return TestObservable(f, (x0 - rx, x0 + rx, p0 - rp, p0 + rp),
                          label or f"bump({x0:g},{p0:g};{rx:g},{rp:g})")


def _smoothstep(s):
    # C-infinity transition: 0 for s <= 0, 1 for s >= 1
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1 / np.where(s > 0, s, 1)), 0.0)
        b = np.where(s < 1, np.exp(-1 / np.where(s < 1, 1 - s, 1)), 0.0)
    return a / (a + b)


def smooth_box(x_lo: float, x_hi: float, p_lo: float, p_hi: float, ramp: float,
               label: str = "") -> TestObservable:
    """Equals 1 on the inner box and falls smoothly to 0 over ``ramp`` at its edges."""
    def edge(u, lo, hi):
        return _smoothstep((u - lo) / ramp) * _smoothstep((hi - u) / ramp)

    def f(x, p):
        return edge(x, x_lo, x_hi) * edge(p, p_lo, p_hi)
    return TestObservable(f, (x_lo, x_hi, p_lo, p_hi), label or "smooth_box")


def pair(f: TestObservable, W: WignerField) -> float:
    """``int int f W dx dp`` by the 2-D trapezoidal rule."""
    xl, xh, pl, ph = f.support
    eps = 1e-12
    if xl < W.x[0] - eps or xh > W.x[-1] + eps or pl < W.p[0] - eps or ph > W.p[-1] + eps:
        raise DomainError(f"observable support {f.support} exceeds the Wigner grid "
                          f"[{W.x[0]:g},{W.x[-1]:g}]x[{W.p[0]:g},{W.p[-1]:g}]")
    X, P = np.meshgrid(W.x, W.p, indexing="ij")
    return float(np.trapezoid(np.trapezoid(f(X, P) * W.values, W.p, axis=1), W.x))


def weyl_expectation(f: TestObservable, psi: WaveFn, n_p: int = 257) -> float:
    """``<psi, Q_hbar(f) psi>`` straight from the Weyl quantization kernel.

    ``(Q f psi)(x) = int dq dp / (2 pi hbar) exp(i p (x - q)/hbar) f((x+q)/2, p) psi(q)``;
    the ``p`` integral is done first on ``n_p`` points across the support of ``f``.
    """
    hbar = psi.hbar
    xl, xh, pl, ph = f.support
    x = psi.grid.x
    dx = psi.grid.spacing
    v = psi.values
    keep = np.abs(v) > 1e-13 * np.abs(v).max()
    xs, vs = x[keep], v[keep]
    p = np.linspace(pl, ph, n_p)
    wp = np.full(n_p, p[1] - p[0])
    wp[[0, -1]] *= 0.5
    total = 0.0 + 0.0j
    for xi, vi in zip(xs, vs):
        mid = 0.5 * (xi + xs)
        sel = (mid >= xl) & (mid <= xh)
        if not np.any(sel):
            continue
        q, vq, m = xs[sel], vs[sel], mid[sel]
        F = f(m[:, None], p[None, :])
        phase = np.exp(1j * np.outer(xi - q, p) / hbar)
        K = (F * phase) @ wp / (2 * np.pi * hbar)
        total += np.conj(vi) * np.sum(K * vq) * dx * dx
    return float(total.real)


def classical_flow_ho(x, p, m: float, omega: float, t):
    """Harmonic-oscillator phase-space flow for time ``t`` (vectorised)."""
    if not (m > 0 and omega > 0):
        raise InvalidArgumentError("mass and frequency must be positive")
    c, s = np.cos(omega * t), np.sin(omega * t)
    return x * c + p / (m * omega) * s, -m * omega * x * s + p * c


def orbit_average(W, m_omega: float = 1.0, n_quad: int = 128) -> Callable:
    """Average of ``W`` over the closed orbit through each phase-space point.

    The orbit is that of the unit-frequency oscillator with ``m = m_omega``;
    the period is ``2 pi`` and the rule is the ``n_quad``-point periodic one,
    normalised by ``1/(2 pi)``.
    """
    if not m_omega > 0:
        raise InvalidArgumentError("m_omega must be positive")
    fn = W.interpolator() if isinstance(W, WignerField) else W
    ts = 2 * np.pi * np.arange(n_quad) / n_quad

    def averaged(x, p):
        x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
        acc = np.zeros(x.shape)
        for t in ts:
            acc += fn(*classical_flow_ho(x, p, m_omega, 1.0, t))
        return acc / n_quad
    return averaged


@dataclass(frozen=True)
class PointMassMixture:
    atoms: tuple  # ((x, p, weight), ...)

    def __post_init__(self):
        atoms = tuple((float(x), float(p), float(w)) for x, p, w in self.atoms)
        w = np.array([a[2] for a in atoms])
        if not atoms or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise InvalidInputError("atom weights must be non-negative and sum to 1")
        object.__setattr__(self, "atoms", atoms)

    def pair(self, f: Callable) -> float:
        return float(sum(w * f(x, p) for x, p, w in self.atoms))

    def orbit_pair(self, f: Callable, m_omega: float = 1.0, n_quad: int = 128) -> float:
        """Pairing of ``f`` with the orbit-smeared mixture."""
        ts = 2 * np.pi * np.arange(n_quad) / n_quad
        total = 0.0
        for x, p, w in self.atoms:
            xs, ps = classical_flow_ho(x, p, m_omega, 1.0, ts)
            total += w * float(np.mean(f(xs, ps)))
        return total


# ---------------------------------------------------------------------------
# harmonic oscillator in the Hermite eigenbasis

def ho_eigenbasis(grid: Grid1D, hbar: float, m_omega: float, n_max: int) -> np.ndarray:
    """Rows ``phi_0 .. phi_{n_max}`` of the oscillator with the given ``m * omega``."""
    xi = grid.x * np.sqrt(m_omega / hbar)
    out = np.empty((n_max + 1, grid.n_points))
    out[0] = (m_omega / (np.pi * hbar)) ** 0.25 * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _ho_coefficients(psi: WaveFn, m_omega: float, tol: float = 1e-12, n_cap: int = 600):
    n_max = 32
    while True:
        basis = ho_eigenbasis(psi.grid, psi.hbar, m_omega, n_max)
        c = basis @ psi.values * psi.grid.spacing
        if 1 - np.sum(np.abs(c) ** 2) < tol or n_max >= n_cap:
            break
        n_max *= 2
    if 1 - np.sum(np.abs(c) ** 2) > 1e-8:
        raise NumericError("state is not captured by the Hermite basis on this grid")
    return basis, c


def evolve_ho(psi: WaveFn, m: float, omega: float, t: float) -> WaveFn:
    """Exact oscillator evolution through the Hermite eigenbasis."""
    basis, c = _ho_coefficients(psi, m * omega)
    n = np.arange(c.size)
    out = (c * np.exp(-1j * omega * t * (n + 0.5))) @ basis
    return WaveFn(psi.grid, out, psi.hbar, norm_tol=1e-7)


def coherent_state(grid: Grid1D, hbar: float, x0: float = 1.0, p0: float = 0.0,
                   m_omega: float = 1.0) -> WaveFn:
    x = grid.x
    v = (m_omega / (np.pi * hbar)) ** 0.25 * np.exp(-m_omega * (x - x0) ** 2 / (2 * hbar)
                                                     + 1j * p0 * x / hbar)
    return WaveFn.normalized(grid, v, hbar)


# ---------------------------------------------------------------------------
# uniform-on-orbit limit for a random frequency

@dataclass(frozen=True)
class Prop1Residual:
    hbar: float
    T: float
    quantum: float
    classical: float
    label: str = ""

    @property
    def residual(self) -> float:
        return abs(self.quantum - self.classical)


def phase_profile(psi: WaveFn, f, m_omega: float, n_angles: int = 128,
                  p_extent: float | None = None, n_p: int = 256) -> np.ndarray:
    """``g(theta) = <f, W of psi rotated by theta>`` on ``n_angles`` equispaced angles.

    For ``m * omega`` fixed the evolution depends on ``omega t`` only through
    the phase ``theta = omega t mod 2 pi``. ``f`` may be one observable or a
    sequence; with a sequence the result has shape ``(len(f), n_angles)``.
    """
    fs = [f] if isinstance(f, TestObservable) else list(f)
    basis, c = _ho_coefficients(psi, m_omega)
    n = np.arange(c.size)
    g = np.empty((len(fs), n_angles))
    for k in range(n_angles):
        theta = 2 * np.pi * k / n_angles
        vals = (c * np.exp(-1j * theta * (n + 0.5))) @ basis
        W = wigner_transform(WaveFn(psi.grid, vals, psi.hbar, norm_tol=1e-7), p_extent, n_p)
        for i, fi in enumerate(fs):
            g[i, k] = pair(fi, W)
    return g[0] if isinstance(f, TestObservable) else g


def average_over_phase_law(g: np.ndarray, mu_omega, T: float, method: str = "circular_law",
                           n_bins: int = 4096) -> float:
    """``E[g(omega T mod 2 pi)]`` with ``g`` known on equispaced angles.

    ``g`` is a trigonometric polynomial sampled above its Nyquist rate, so it
    is interpolated exactly by its DFT. ``method="circular_law"`` integrates
    the interpolant against the wrap-around law; ``method="char_fn"`` uses
    ``sum_k ghat_k E[exp(i k omega T)]`` instead.
    """
    n = g.size
    ghat = np.fft.fft(g) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        # split the Nyquist coefficient symmetrically so the interpolant is real
        ghat = np.append(ghat, ghat[n // 2] / 2)
        ghat[n // 2] /= 2
        k = np.append(k, n // 2)
        k[n // 2] = -n // 2
    if method == "circular_law":
        law = pushforward_mod(mu_omega, T, 2 * np.pi, n_bins)
        # bin averages of exp(i k theta) over each bin, so the pairing is exact
        h = law.spacing
        avg = np.exp(1j * np.outer(k, law.centers)) * np.sinc(k * h / (2 * np.pi))[:, None]
        return float(np.real(ghat @ (avg @ law.values) * h))
    if method == "char_fn":
        return float(np.real(np.sum(ghat * char_fn(mu_omega, k * T))))
    raise InvalidArgumentError(f"unknown method {method!r}")


def prop1_residual(psi: Callable[[float], WaveFn], mu_omega, hbar_list: Sequence[float],
                   T, f, classical_limit: PointMassMixture, *,
                   m_omega: float = 1.0, n_angles: int = 128, p_extent=None, n_p: int = 256,
                   method: str = "circular_law") -> list[Prop1Residual]:
    """Frequency-averaged pairing ``<f, W(T)>`` against the orbit-averaged classical limit.

    ``psi`` maps ``hbar`` to the initial state; ``T`` may be a scalar or a
    sequence of times and ``f`` one observable or a sequence of them. The
    classical side pairs ``f`` with the orbit average of ``classical_limit``
    (uniform on each orbit, normalised by ``1/(2 pi)``).
    """
    if not isinstance(mu_omega, (DensityRV, MixtureRV)):
        raise InvalidInputError("the frequency law must have a density (got a point mass)")
    if mu_omega.support[0] <= 0:
        raise InvalidInputError("frequency law must be supported on omega > 0")
    fs = [f] if isinstance(f, TestObservable) else list(f)
    Ts = np.atleast_1d(np.asarray(T, dtype=float))
    classical = [classical_limit.orbit_pair(fi, m_omega) for fi in fs]
    out = []
    for hbar in hbar_list:
        g = phase_profile(psi(hbar), fs, m_omega, n_angles, p_extent, n_p)
        for i, fi in enumerate(fs):
            for t in Ts:
                q = average_over_phase_law(g[i], mu_omega, float(t), method)
                out.append(Prop1Residual(float(hbar), float(t), q, classical[i], fi.label))
    return out
