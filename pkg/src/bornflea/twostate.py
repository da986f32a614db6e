"""Two-level truncation of the flea-perturbed double well.

Basis convention: ``PHI_MINUS = (1, 0)`` is the left-well state and
``PHI_PLUS = (0, 1)`` the right-well state. The flea ``delta`` sits on the
left well, so ``H = [[delta, -gap/2], [-gap/2, 0]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import integrate

from .arbfun import DensityRV, MixtureRV, time_average_phase
from .errors import (DegenerateSpectrumError, InvalidArgumentError, InvalidInputError,
                     InvalidMeasureError, NumericError)

DEFAULT_NODES = 256
PANEL_NODES = 32
ZERO_MARGIN = 1e-3

__all__ = [
    "ModelParams", "Splitting", "QState2", "SpectralPair2", "Observable2", "MixtureState2",
    "PI_PLUS", "PI_MINUS", "A_PLUS_MINUS", "A_MINUS_PLUS", "IDENTITY", "Q_OBSERVABLE",
    "BASIS", "splitting", "hamiltonian2", "eigensystem2", "evolve2", "initial_state",
    "born_state", "mixture_expectation", "mixture_expectation_mc", "born_gap", "born_gap_rows",
]


@dataclass(frozen=True)
class ModelParams:
    hbar: float
    a: float = 1.0
    lam: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "a", "lam", "mass"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidArgumentError(f"{name} must be strictly positive, got {v}")

    def with_hbar(self, hbar: float) -> "ModelParams":
        return ModelParams(hbar, self.a, self.lam, self.mass)


@dataclass(frozen=True)
class Splitting:
    delta_hbar: float
    d_V: float


def splitting(params: ModelParams) -> Splitting:
    """Asymptotic tunnelling gap of the unperturbed double well.

    ``d_V`` is the WKB action ``int_{-a}^{a} sqrt(V0)``, integrated
    adaptively; the gap is ``hbar sqrt(2 a^2 lam / (e pi)) exp(-d_V / hbar)``.
    """
    a, lam = params.a, params.lam
    d_V, err = integrate.quad(lambda x: np.sqrt(0.25 * lam * (x * x - a * a) ** 2), -a, a,
                              epsabs=1e-13, epsrel=1e-12)
    if not np.isfinite(d_V) or err > 1e-9 * max(1.0, abs(d_V)):
        raise NumericError(f"WKB action quadrature failed (estimate {d_V}, error {err})")
    gap = params.hbar * np.sqrt(2 * a * a * lam / (np.e * np.pi)) * np.exp(-d_V / params.hbar)
    return Splitting(float(gap), float(d_V))


@dataclass(frozen=True)
class QState2:
    amp_minus: complex
    amp_plus: complex

    def __post_init__(self):
        n = abs(self.amp_minus) ** 2 + abs(self.amp_plus) ** 2
        if abs(n - 1.0) > 1e-12:
            raise InvalidInputError(f"state norm^2 is {n!r}, not 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp_minus, self.amp_plus], dtype=complex)

    @classmethod
    def from_vector(cls, v) -> "QState2":
        return cls(complex(v[0]), complex(v[1]))


def initial_state(alpha2: float, phase: float = 0.0) -> QState2:
    """``alpha PHI_PLUS + beta PHI_MINUS`` with ``|alpha|^2 = alpha2``."""
    if not 0 <= alpha2 <= 1:
        raise InvalidArgumentError("alpha2 must lie in [0, 1]")
    return QState2(np.sqrt(1 - alpha2) + 0j, np.sqrt(alpha2) * np.exp(1j * phase))


@dataclass(frozen=True, eq=False)
class SpectralPair2:
    e0: float
    e1: float
    v0: np.ndarray
    v1: np.ndarray
    gap: float


@dataclass(frozen=True, eq=False)
class Observable2:
    entries: np.ndarray
    label: str = ""
    basis: str = "(phi-, phi+)"

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise InvalidInputError("observable must be a finite 2x2 matrix")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)


PI_MINUS = Observable2([[1, 0], [0, 0]], "Pi-")
PI_PLUS = Observable2([[0, 0], [0, 1]], "Pi+")
# |phi+><phi-| maps phi- = e_0 onto phi+ = e_1
A_PLUS_MINUS = Observable2([[0, 0], [1, 0]], "A+-")
A_MINUS_PLUS = Observable2([[0, 1], [0, 0]], "A-+")
IDENTITY = Observable2(np.eye(2), "I")
Q_OBSERVABLE = Observable2([[-1, 0], [0, 1]], "Q")
BASIS = (PI_PLUS, PI_MINUS, A_PLUS_MINUS, A_MINUS_PLUS)


@dataclass(frozen=True)
class MixtureState2:
    weight_plus: float
    weight_minus: float

    def __post_init__(self):
        if min(self.weight_plus, self.weight_minus) < 0 or \
                abs(self.weight_plus + self.weight_minus - 1) > 1e-12:
            raise InvalidInputError("mixture weights must be in [0, 1] and sum to 1")

    def expectation(self, A: Observable2) -> complex:
        m = A.entries
        return complex(self.weight_plus * m[1, 1] + self.weight_minus * m[0, 0])


def born_state(state0: QState2) -> MixtureState2:
    p = abs(state0.amp_plus) ** 2
    return MixtureState2(p, 1.0 - p)


def hamiltonian2(delta: float, delta_hbar: float) -> np.ndarray:
    return np.array([[delta, -0.5 * delta_hbar], [-0.5 * delta_hbar, 0.0]])


def _eigvecs(delta, g):
    """Closed-form eigenvectors; works elementwise on arrays of ``delta``.

    Uses ``delta +- r`` rewritten as ``g^2 / (r -+ delta)`` where the direct
    form would cancel, so both vectors stay accurate for ``|delta| >> g``.
    """
    delta = np.asarray(delta, dtype=float)
    r = np.hypot(delta, g)
    # s_plus = delta + r, s_minus = delta - r, each computed without cancellation
    pos = delta >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        s_plus = np.where(pos, delta + r, g * g / (r - delta))
        s_minus = np.where(pos, -g * g / (r + delta), delta - r)
    n0 = np.hypot(g, s_plus)
    n1 = np.hypot(g, s_minus)
    v0 = np.stack([g / n0, s_plus / n0], axis=-1)
    v1 = np.stack([g / n1, s_minus / n1], axis=-1)
    return r, v0, v1


def eigensystem2(delta: float, delta_hbar: float) -> SpectralPair2:
    """Eigenvalues ``(delta -+ sqrt(delta^2 + gap^2)) / 2`` and normalised eigenvectors."""
    if delta_hbar < 0 or not np.isfinite(delta_hbar) or not np.isfinite(delta):
        raise InvalidArgumentError("delta_hbar must be a finite non-negative number")
    if delta_hbar == 0:
        if delta == 0:
            raise DegenerateSpectrumError("delta = 0 and gap = 0 give a degenerate spectrum")
        # fully localised limit: ordering by energy
        if delta > 0:
            return SpectralPair2(0.0, float(delta), np.array([0.0, 1.0]), np.array([1.0, 0.0]), float(delta))
        return SpectralPair2(float(delta), 0.0, np.array([1.0, 0.0]), np.array([0.0, 1.0]), float(-delta))
    r, v0, v1 = _eigvecs(delta, delta_hbar)
    r = float(r)
    # e0 = (delta - r)/2 without cancellation for delta > 0
    e0 = 0.5 * (delta - r) if delta <= 0 else -0.5 * delta_hbar**2 / (delta + r)
    e1 = 0.5 * (delta + r) if delta >= 0 else 0.5 * delta_hbar**2 / (r - delta)
    return SpectralPair2(float(e0), float(e1), v0, v1, r)


def evolve2(state0: QState2, spec: SpectralPair2, hbar: float, t: float) -> QState2:
    """Schrodinger evolution expanded in the eigenbasis of ``spec``."""
    if not hbar > 0:
        raise InvalidArgumentError("hbar must be positive")
    psi = state0.vector
    out = (np.exp(-1j * spec.e0 * t / hbar) * np.vdot(spec.v0, psi) * spec.v0
           + np.exp(-1j * spec.e1 * t / hbar) * np.vdot(spec.v1, psi) * spec.v1)
    # the closed-form vectors are unit to ~1 ulp; renormalise so norm drift cannot accumulate
    return QState2.from_vector(out / np.linalg.norm(out))


# ---------------------------------------------------------------------------
# delta-averaged expectations

def _components(mu, margin):
    """Split ``mu`` into (weight, rv, lo, hi) pieces that avoid ``|delta| < margin``."""
    if isinstance(mu, (DensityRV, MixtureRV)):
        comps = mu.components()
    else:
        comps = tuple((float(w), rv) for w, rv in mu)
        wsum = sum(w for w, _ in comps)
        if any(w < 0 for w, _ in comps) or abs(wsum - 1) > 1e-12:
            raise InvalidInputError("mixture weights must be non-negative and sum to 1")
    pieces = []
    for w, rv in comps:
        if not isinstance(rv, DensityRV):
            raise InvalidInputError("flea measure components must be DensityRV")
        forbidden = rv.mass_between(-margin, margin)
        if forbidden > 1e-12:
            raise InvalidMeasureError(
                f"measure puts mass {forbidden:.3g} within {margin:g} of delta = 0; "
                "fleas must take real nonzero values")
        for lo, hi in ((rv.lo, min(rv.hi, -margin)), (max(rv.lo, margin), rv.hi)):
            if hi > lo:
                m = rv.mass_between(lo, hi)
                if m > 0:
                    pieces.append((w, rv, lo, hi))
    return pieces


def _nodes(lo, hi, n_panels, per_panel=PANEL_NODES):
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


def _quadrature(mu, hbar, T, margin, n_nodes):
    """Gauss-Legendre nodes and normalised weights over the flea measure.

    When a finite averaging window ``T`` is requested the panel count grows
    so that every panel spans at most ~pi radians of the phase ``gap * T / hbar``.
    """
    pieces = _components(mu, margin)
    if not pieces:
        raise InvalidMeasureError("flea measure has no mass away from delta = 0")
    xs, ws = [], []
    for w, rv, lo, hi in pieces:
        n_panels = max(1, n_nodes // PANEL_NODES)
        if T is not None:
            n_panels = max(n_panels, int(np.ceil((hi - lo) * T / (hbar * np.pi))))
        x, q = _nodes(lo, hi, n_panels)
        xs.append(x)
        ws.append(w * q * rv.pdf(x))
    x = np.concatenate(xs)
    q = np.concatenate(ws)
    # ratio estimator: the quadrature of the density itself normalises the weights
    return x, q / q.sum()


def _pointwise(A: Observable2, state0: QState2, deltas, gap, hbar, T):
    """Per-delta expectation of ``A``: diagonal ensemble or finite-T average."""
    r, v0, v1 = _eigvecs(deltas, gap)
    psi = state0.vector
    m = A.entries
    c0 = v0 @ psi  # eigenvectors are real
    c1 = v1 @ psi
    # <v_i, A v_j>
    A00 = np.einsum("ni,ij,nj->n", v0, m, v0)
    A11 = np.einsum("ni,ij,nj->n", v1, m, v1)
    diag = np.abs(c0) ** 2 * A00 + np.abs(c1) ** 2 * A11
    if T is None:
        return diag
    A01 = np.einsum("ni,ij,nj->n", v0, m, v1)
    A10 = np.einsum("ni,ij,nj->n", v1, m, v0)
    # psi(t) = sum_i c_i e^{-i E_i t/hbar} v_i, so <psi, A psi> has cross terms
    # conj(c0) c1 e^{i (E0 - E1) t/hbar} A01 and its partner
    nu = r / hbar
    cross = (np.conj(c0) * c1 * A01 * time_average_phase(-nu, T)
             + np.conj(c1) * c0 * A10 * time_average_phase(nu, T))
    return diag + cross


def mixture_expectation(A: Observable2, state0: QState2, mu, params: ModelParams,
                        mode="diagonal", *, margin: float = ZERO_MARGIN,
                        n_nodes: int = DEFAULT_NODES) -> complex:
    """Flea-averaged expectation ``int <psi_delta(t), A psi_delta(t)> dmu(delta)``.

    Parameters
    ----------
    mode : ``"diagonal"`` or ``("finite_T", T)``
        ``"diagonal"`` drops the oscillating cross terms (the long-time
        limit); ``("finite_T", T)`` averages the evolution over ``[0, T]``.
    mu : DensityRV, MixtureRV or sequence of ``(weight, DensityRV)``
        Flea law; components straddling zero are split at zero.
    """
    T = _parse_mode(mode)
    gap = splitting(params).delta_hbar
    x, q = _quadrature(mu, params.hbar, T, margin, n_nodes)
    vals = _pointwise(A, state0, x, gap, params.hbar, T)
    return complex(np.sum(q * vals))


def mixture_expectation_mc(A: Observable2, state0: QState2, mu, params: ModelParams,
                           mode="diagonal", *, n_samples: int = 20000,
                           rng: np.random.Generator | None = None,
                           margin: float = ZERO_MARGIN) -> tuple[complex, float]:
    """Monte Carlo estimate of :func:`mixture_expectation` and its standard error."""
    T = _parse_mode(mode)
    rng = np.random.default_rng() if rng is None else rng
    pieces = _components(mu, margin)  # validation only
    del pieces
    law = mu if isinstance(mu, (DensityRV, MixtureRV)) else MixtureRV(tuple(mu))
    deltas = np.atleast_1d(law.sample(rng, n_samples))
    gap = splitting(params).delta_hbar
    vals = _pointwise(A, state0, deltas, gap, params.hbar, T)
    se = np.sqrt((np.var(vals.real) + np.var(vals.imag)) / max(n_samples - 1, 1))
    return complex(np.mean(vals)), float(se)


def _parse_mode(mode):
    if mode == "diagonal" or mode is None:
        return None
    if isinstance(mode, tuple) and len(mode) == 2 and mode[0] == "finite_T":
        T = float(mode[1])
        if not T > 0:
            raise InvalidArgumentError("finite_T window must be positive")
        return T
    raise InvalidArgumentError(f"unknown mode {mode!r}; use 'diagonal' or ('finite_T', T)")


def born_gap(state0: QState2, mu, params: ModelParams, mode="diagonal", **kw) -> float:
    """Largest deviation from the Born state over the basis ``Pi+, Pi-, A+-, A-+``."""
    target = born_state(state0)
    return max(abs(mixture_expectation(A, state0, mu, params, mode, **kw) - target.expectation(A))
               for A in BASIS)


def born_gap_rows(state0: QState2, mu, params: ModelParams, hbars: Iterable[float],
                  mode="diagonal", **kw) -> list[dict]:
    """Table rows ``{hbar, T_or_diag, A_label, re, im, born_value, abs_gap}``, t->oo before hbar->0."""
    T = _parse_mode(mode)
    target = born_state(state0)
    rows = []
    for hbar in hbars:
        p = params.with_hbar(hbar)
        for A in BASIS:
            val = mixture_expectation(A, state0, mu, p, mode, **kw)
            b = target.expectation(A)
            rows.append({"hbar": hbar, "T_or_diag": "diag" if T is None else T,
                         "A_label": A.label, "re": val.real, "im": val.imag,
                         "born_value": b.real, "abs_gap": abs(val - b)})
    return rows
