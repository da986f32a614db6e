"""Flea-perturbed quartic double well on a finite-difference grid.

Covers the eigenproblem, the localized combinations of the two lowest
states, flea classification, eigenexpansion dynamics, long-time
occupations and the ensemble Born experiment.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, eigvalsh_tridiagonal

from .arbfun import DensityRV, MixtureRV, time_average_phase
from .errors import (DomainTooSmallError, ExperimentFailedError, InvalidArgumentError,
                     InvalidInputError, NumericError, PhaseConventionError, TruncationWarning)
from .rng import substream
from .twostate import ModelParams, splitting
from .wigner import Grid1D, WaveFn, bump, pair, wigner_transform

__all__ = [
    "FleaSpec", "PotentialSpec", "TridiagonalHamiltonian", "SpectralDecomposition",
    "FleaDistribution", "FleaClass", "build_hamiltonian", "solve_eigen", "solve",
    "default_grid", "auto_grid", "localized_states", "right_mass", "classify_flea", "coefficients",
    "evolve_dw", "region_overlaps", "diagonal_ensemble_occupation", "finite_time_occupation",
    "born_experiment", "BornExperimentResult", "delta_splitting_check", "certify_grid",
    "RESULT_COLUMNS",
]

AMBIGUOUS_BAND = (0.45, 0.55)
TRUNCATION_GATE = 0.999
BOUNDARY_ACTION = 18.0  # required WKB decay exp(-S/hbar) of the top state at the walls


@dataclass(frozen=True)
class FleaSpec:
    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidArgumentError("flea width must be positive")
        if not (np.isfinite(self.amplitude) and np.isfinite(self.center)):
            raise InvalidArgumentError("flea parameters must be finite")

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.width, self.center + self.width)

    def excludes(self, a: float) -> bool:
        lo, hi = self.support
        return not (lo <= a <= hi or lo <= -a <= hi)

    def __call__(self, x) -> np.ndarray:
        u = (np.asarray(x, float) - self.center) / self.width
        out = np.zeros(u.shape)
        inside = np.abs(u) < 1
        out[inside] = self.amplitude * np.exp(1 - 1 / (1 - u[inside] ** 2))
        return out

    def mirrored(self) -> "FleaSpec":
        return FleaSpec(self.amplitude, -self.center, self.width)


@dataclass(frozen=True)
class PotentialSpec:
    lam: float = 1.0
    a: float = 1.0
    flea: FleaSpec | None = None

    def __post_init__(self):
        if not (self.lam > 0 and self.a > 0):
            raise InvalidArgumentError("lam and a must be positive")
        if self.flea is not None and not self.flea.excludes(self.a):
            raise InvalidArgumentError(f"flea support {self.flea.support} contains a well minimum")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        v = 0.25 * self.lam * (x * x - self.a ** 2) ** 2
        return v if self.flea is None else v + self.flea(x)

    def unperturbed(self) -> "PotentialSpec":
        return PotentialSpec(self.lam, self.a, None)


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    grid: Grid1D
    diagonal: np.ndarray
    off_diagonal: np.ndarray
    hbar: float
    mass: float
    potential: object = None

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out


def default_grid(a: float = 1.0, n_points: int = 4096) -> Grid1D:
    return Grid1D(-3.0 * a, 3.0 * a, n_points)


def _wall_action(x, V, E, mass):
    """WKB action from the outermost turning points of energy ``E`` to each wall."""
    allowed = np.nonzero(V <= E)[0]
    if allowed.size == 0:
        return np.inf
    dx = x[1] - x[0]
    k = np.sqrt(np.maximum(2 * mass * (V - E), 0.0))
    left = np.trapezoid(k[:allowed[0] + 1], dx=dx)
    right = np.trapezoid(k[allowed[-1]:], dx=dx)
    return min(left, right)


def build_hamiltonian(grid: Grid1D, pot, hbar: float, mass: float = 1.0,
                      K: int = 8) -> TridiagonalHamiltonian:
    """Central-difference ``-hbar^2/(2m) d^2/dx^2 + V`` with Dirichlet walls.

    ``pot`` is a ``PotentialSpec`` or any vectorised callable. The walls must
    sit deep enough in the forbidden region that the ``K``-th state has
    decayed by ``exp(-18)``; otherwise ``DomainTooSmallError`` suggests a
    wider grid.
    """
    if not (hbar > 0 and mass > 0):
        raise InvalidArgumentError("hbar and mass must be positive")
    x = grid.x
    dx = grid.spacing
    V = np.asarray(pot(x), dtype=float)
    if V.shape != x.shape or not np.all(np.isfinite(V)):
        raise InvalidInputError("potential must be finite on the grid")
    kin = hbar * hbar / (2 * mass * dx * dx)
    diag = 2 * kin + V
    off = np.full(grid.n_points - 1, -kin)
    # top-level energy estimate from a coarse copy of the same operator
    stride = max(1, grid.n_points // 512)
    xc, Vc = x[::stride], V[::stride]
    kc = hbar * hbar / (2 * mass * (xc[1] - xc[0]) ** 2)
    E_top = eigvalsh_tridiagonal(2 * kc + Vc, np.full(xc.size - 1, -kc),
                                 select="i", select_range=(K - 1, K - 1))[0]
    action = _wall_action(x, V, E_top, mass)
    if action / hbar < BOUNDARY_ACTION:
        half = max(abs(grid.x_min), abs(grid.x_max))
        suggested = (-1.5 * half, 1.5 * half)
        err = DomainTooSmallError(
            f"grid [{grid.x_min:g}, {grid.x_max:g}] leaves only exp(-{action / hbar:.1f}) decay "
            f"for level {K - 1} (E ~ {E_top:.4g}); try bounds {suggested}")
        err.suggested_bounds = suggested
        raise err
    return TridiagonalHamiltonian(grid, diag, off, float(hbar), float(mass), pot)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    energies: np.ndarray
    vectors: np.ndarray  # (n_points, K), columns normalised so sum |v|^2 dx = 1
    hbar: float
    grid: Grid1D
    potential: object = None
    states: tuple = field(init=False, repr=False)

    def __post_init__(self):
        states = tuple(WaveFn(self.grid, self.vectors[:, k], self.hbar)
                       for k in range(self.vectors.shape[1]))
        object.__setattr__(self, "states", states)

    @property
    def K(self) -> int:
        return self.energies.size

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


def _fix_signs(vectors, x, a):
    ref = int(np.argmin(np.abs(x - a)))
    out = vectors.copy()
    for k in range(out.shape[1]):
        v = out[:, k]
        scale = np.max(np.abs(v))
        if abs(v[ref]) <= 1e-12 * scale:
            raise PhaseConventionError(f"eigenvector {k} vanishes at x = {x[ref]:.6g}; sign is ambiguous")
        if v[ref] < 0:
            out[:, k] = -v
    return out


def solve_eigen(H: TridiagonalHamiltonian, K: int = 8, a: float | None = None) -> SpectralDecomposition:
    """Lowest ``K`` eigenpairs, signs fixed positive at the grid point nearest ``+a``."""
    n = H.grid.n_points
    if K < 2 or K > n // 4:
        raise InvalidArgumentError(f"K must satisfy 2 <= K << n_points, got {K}")
    if a is None:
        a = getattr(H.potential, "a", 1.0)
    try:
        w, v = eigh_tridiagonal(H.diagonal, H.off_diagonal, select="i",
                                select_range=(0, K - 1), lapack_driver="stemr")
    except LinAlgError as exc:
        raise NumericError(f"tridiagonal eigensolver did not converge: {exc}") from exc
    dx = H.grid.spacing
    if np.any(np.diff(w) <= 0):
        raise NumericError(f"spectrum is not strictly ascending: {w}")
    for k in range(K):
        r = np.linalg.norm(H.apply(v[:, k]) - w[k] * v[:, k])
        if r > 1e-6 * abs(w[k]) + 1e-8:
            raise NumericError(f"eigenpair {k} residual {r:.3g} exceeds tolerance")
    gram = v.T @ v
    if np.max(np.abs(gram - np.eye(K))) > 1e-8:
        raise NumericError("eigenvectors are not orthonormal to 1e-8")
    v = _fix_signs(v, H.grid.x, a) / np.sqrt(dx)
    return SpectralDecomposition(w, v, H.hbar, H.grid, H.potential)


def auto_grid(pot: PotentialSpec, hbar: float, K: int = 8, mass: float = 1.0,
              n_points: int = 4096) -> Grid1D:
    """``[-3a, 3a]``, widened by factors of 1.5 until the walls pass the decay check."""
    grid = default_grid(pot.a, n_points)
    for _ in range(8):
        try:
            build_hamiltonian(grid, pot, hbar, mass, K)
            return grid
        except DomainTooSmallError as exc:
            grid = Grid1D(*exc.suggested_bounds, n_points)
    raise DomainTooSmallError(f"no adequate grid found for hbar = {hbar}")


def solve(pot: PotentialSpec, hbar: float, grid: Grid1D | None = None, K: int = 8,
          mass: float = 1.0) -> SpectralDecomposition:
    """Eigen-decomposition on ``grid`` (or on ``auto_grid`` when none is given)."""
    grid = grid or auto_grid(pot, hbar, K, mass)
    return solve_eigen(build_hamiltonian(grid, pot, hbar, mass, K), K, pot.a)


def localized_states(sd: SpectralDecomposition) -> tuple[WaveFn, WaveFn]:
    """``(Psi_plus, Psi_minus) = (Psi0 +- Psi1)/sqrt(2)`` of the unperturbed well."""
    if getattr(sd.potential, "flea", None) is not None:
        raise InvalidInputError("localized states are defined for the unperturbed well")
    v0, v1 = sd.vectors[:, 0], sd.vectors[:, 1]
    s = 1 / np.sqrt(2.0)
    return (WaveFn(sd.grid, s * (v0 + v1), sd.hbar), WaveFn(sd.grid, s * (v0 - v1), sd.hbar))


def right_mass(psi: WaveFn) -> float:
    return psi.mass(psi.x > 0)


def _l2_distance(u: WaveFn, v: WaveFn) -> float:
    d = np.abs(u.values - v.values) ** 2
    return float(np.sqrt(u.grid.spacing * (d.sum() - 0.5 * (d[0] + d[-1]))))


@dataclass(frozen=True)
class FleaClass:
    label: str  # "D_plus", "D_minus" or "ambiguous"
    right_mass: float
    diagnostics: tuple = ()  # ((hbar, ||Psi0_flea - Psi_pm|| / hbar), ...)

    @property
    def ambiguous(self) -> bool:
        return self.label == "ambiguous"


def _label(mass: float) -> str:
    if AMBIGUOUS_BAND[0] <= mass <= AMBIGUOUS_BAND[1]:
        return "ambiguous"
    return "D_plus" if mass > 0.5 else "D_minus"


def classify_flea(flea: FleaSpec, params: ModelParams, grid: Grid1D | None = None,
                  hbar_sweep: Sequence[float] = (), K: int = 2) -> FleaClass:
    """Which well the perturbed ground state settles in at ``params.hbar``.

    For each ``hbar`` in ``hbar_sweep`` the rate diagnostic
    ``||Psi0_flea - Psi_pm|| / hbar`` is reported, with ``Psi_pm`` the
    localized state on the side the ground state chose.
    """
    pot = PotentialSpec(params.lam, params.a, flea)
    sd = solve(pot, params.hbar, grid, K, params.mass)
    mass = right_mass(sd.states[0])
    label = _label(mass)
    diags = []
    for hb in hbar_sweep:
        g_hb = grid or auto_grid(pot, hb, K, params.mass)
        g = solve(pot, hb, g_hb, K, params.mass).states[0]
        plus, minus = localized_states(solve(pot.unperturbed(), hb, g_hb, K, params.mass))
        target = plus if right_mass(g) > 0.5 else minus
        dist = min(_l2_distance(g, target),
                   _l2_distance(g, WaveFn(g_hb, -target.values, hb)))
        diags.append((float(hb), dist / hb))
    return FleaClass(label, mass, tuple(diags))


def coefficients(psi0: WaveFn, sd: SpectralDecomposition) -> np.ndarray:
    """``c_k = <Psi_k, psi0>``; warns when the truncated expansion misses > 1e-3 of the norm."""
    if psi0.grid != sd.grid:
        raise InvalidInputError("state and spectrum live on different grids")
    w = np.full(sd.grid.n_points, sd.grid.spacing)
    w[[0, -1]] *= 0.5
    c = (sd.vectors * w[:, None]).T @ psi0.values
    total = float(np.sum(np.abs(c) ** 2))
    if total > 1 + 1e-8:
        raise NumericError(f"sum |c_k|^2 = {total!r} exceeds 1")
    if total < TRUNCATION_GATE:
        warnings.warn(f"truncated expansion captures only {total:.6f} of the norm",
                      TruncationWarning, stacklevel=2)
    return c


def evolve_dw(psi0: WaveFn, sd: SpectralDecomposition, t: float, c=None) -> WaveFn:
    """``sum_k c_k exp(-i E_k t / hbar) Psi_k``."""
    c = coefficients(psi0, sd) if c is None else np.asarray(c)
    deficit = 1 - float(np.sum(np.abs(c) ** 2))
    vals = sd.vectors @ (c * np.exp(-1j * sd.energies * t / sd.hbar))
    return WaveFn(sd.grid, vals, sd.hbar, norm_tol=abs(deficit) + 1e-9)


def _region_mask(x, region: str):
    if region == "right":
        return x > 0
    if region == "left":
        return x < 0
    raise InvalidArgumentError(f"region must be 'right' or 'left', got {region!r}")


def region_overlaps(sd: SpectralDecomposition, region: str = "right") -> np.ndarray:
    """Matrix ``M_jk = int_region Psi_j Psi_k`` (trapezoidal)."""
    x = sd.grid.x
    w = np.where(_region_mask(x, region), sd.grid.spacing, 0.0)
    w[[0, -1]] *= 0.5
    return (sd.vectors * w[:, None]).T @ sd.vectors


def diagonal_ensemble_occupation(psi0: WaveFn, sd: SpectralDecomposition, region: str = "right",
                                 c=None) -> float:
    """Long-time average of the probability in ``region``: ``sum_k |c_k|^2 M_kk``."""
    c = coefficients(psi0, sd) if c is None else np.asarray(c)
    M = region_overlaps(sd, region)
    return float(np.sum(np.abs(c) ** 2 * np.diag(M)))


def finite_time_occupation(psi0: WaveFn, sd: SpectralDecomposition, T: float,
                           region: str = "right", c=None) -> float:
    """``(1/T) int_0^T int_region |Psi(t)|^2 dx dt``, cross terms averaged in closed form."""
    c = coefficients(psi0, sd) if c is None else np.asarray(c)
    M = region_overlaps(sd, region)
    nu = (sd.energies[:, None] - sd.energies[None, :]) / sd.hbar
    phase = time_average_phase(nu, T)
    return float(np.real(np.sum(np.conj(c)[:, None] * c[None, :] * M * phase)))


# ---------------------------------------------------------------------------
# ensemble experiment

@dataclass(frozen=True)
class FleaDistribution:
    """Law of a random flea: ``|amplitude|``, sign, center and width."""

    amplitude: DensityRV
    center: object  # DensityRV or MixtureRV
    width: object  # DensityRV or a fixed positive float
    sign_weight: float = 0.5  # probability of a positive amplitude
    a: float = 1.0

    def __post_init__(self):
        if not isinstance(self.amplitude, (DensityRV, MixtureRV)) or \
                not isinstance(self.center, (DensityRV, MixtureRV)):
            raise InvalidInputError("amplitude and center laws must have densities")
        if self.amplitude.support[0] <= 0:
            raise InvalidInputError("amplitude law must be bounded away from zero")
        if not 0 <= self.sign_weight <= 1:
            raise InvalidInputError("sign weight must lie in [0, 1]")
        if isinstance(self.width, (DensityRV, MixtureRV)):
            if self.width.support[0] <= 0:
                raise InvalidInputError("width law must be supported on positive reals")
            w_max = self.width.support[1]
        else:
            if not float(self.width) > 0:
                raise InvalidInputError("fixed width must be positive")
            w_max = float(self.width)
        lo, hi = self.center.support
        for m in (self.a, -self.a):
            gap = 0.0 if lo <= m <= hi else min(abs(m - lo), abs(m - hi))
            if gap <= w_max:
                raise InvalidInputError("some sampled flea supports could contain a well minimum")

    def sample(self, rng: np.random.Generator) -> FleaSpec:
        u_sign, = rng.random(1)
        amp = float(self.amplitude.sample(rng))
        center = float(self.center.sample(rng))
        width = float(self.width.sample(rng)) if isinstance(self.width, (DensityRV, MixtureRV)) \
            else float(self.width)
        sign = 1.0 if u_sign < self.sign_weight else -1.0
        return FleaSpec(sign * amp, center, width)


RESULT_COLUMNS = ("hbar", "sample_id", "flea_amp", "flea_center", "flea_width", "class",
                  "c0_sq", "c1_sq", "tail_sq", "occ_right_diag", "occ_right_finiteT",
                  "wigner_right_weight")


@dataclass(frozen=True)
class HbarSummary:
    hbar: float
    n_used: int
    n_ambiguous: int
    mean_right: float
    se_right: float
    mean_right_finite_t: float
    mean_wigner_weight: float
    se_wigner_weight: float
    mean_tail: float
    max_tail: float
    alpha2: float

    @property
    def gap(self) -> float:
        return abs(self.mean_right - self.alpha2)

    @property
    def wigner_gap(self) -> float:
        return abs(self.mean_wigner_weight - self.alpha2)


@dataclass(frozen=True)
class BornExperimentResult:
    rows: tuple  # dicts keyed by RESULT_COLUMNS, ordered by (hbar, sample_id)
    summaries: tuple  # HbarSummary per hbar


def _wigner_weight(sd, c, a, radius, p_extent, n_p, y_stride):
    """Pair the diagonal-ensemble Wigner function with bumps at (+a, 0) and (-a, 0).

    Returns ``P_right / (P_right + P_left)``. Each eigenstate is transformed on
    a copy of the grid thinned by ``y_stride``.
    """
    probs = np.abs(c) ** 2
    f_right = bump(a, 0.0, radius)
    f_left = bump(-a, 0.0, radius)
    right = left = 0.0
    for k in np.nonzero(probs > 1e-10 * probs.max())[0]:
        psi = sd.states[k].coarsened(y_stride)
        pad = 2 * psi.grid.spacing
        Wr = wigner_transform(psi, p_extent, n_p, x_window=(a - radius - pad, a + radius + pad))
        Wl = wigner_transform(psi, p_extent, n_p, x_window=(-a - radius - pad, -a + radius + pad))
        right += probs[k] * pair(f_right, Wr)
        left += probs[k] * pair(f_left, Wl)
    return right / (right + left)


def _one_sample(job):
    (sid, hbar, flea, psi0, grid, params, K, T_factor, wig) = job
    pot = PotentialSpec(params.lam, params.a, flea)
    sd = solve(pot, hbar, grid, K, params.mass)
    label = _label(right_mass(sd.states[0]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        c = coefficients(psi0, sd)
    probs = np.abs(c) ** 2
    occ = diagonal_ensemble_occupation(psi0, sd, "right", c)
    T = T_factor * hbar / sd.gap
    occ_T = finite_time_occupation(psi0, sd, T, "right", c)
    ww = _wigner_weight(sd, c, params.a, *wig) if wig is not None else float("nan")
    return {
        "hbar": float(hbar), "sample_id": int(sid), "flea_amp": flea.amplitude,
        "flea_center": flea.center, "flea_width": flea.width, "class": label,
        "c0_sq": float(probs[0]), "c1_sq": float(probs[1]), "tail_sq": float(probs[2:].sum()),
        "occ_right_diag": occ, "occ_right_finiteT": occ_T, "wigner_right_weight": float(ww),
    }


def _mean_se(values):
    v = np.asarray(values, float)
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
    return float(v.mean()), se


def born_experiment(dist: FleaDistribution, alpha2: float, hbar_list: Sequence[float],
                    n_samples: int, seed: int, *, params: ModelParams | None = None,
                    grid: Grid1D | None = None, K: int = 8, T_factor: float = 1e3,
                    wigner: bool = False, wigner_radius: float = 0.5, wigner_p_extent: float = 2.0,
                    wigner_n_p: int = 64, wigner_y_stride: int = 4,
                    threads: int = 1) -> BornExperimentResult:
    """Ensemble-averaged right-well occupation after the flea has acted.

    The initial state is ``sqrt(alpha2) Psi_plus + sqrt(1 - alpha2) Psi_minus``
    of the unperturbed well. Sample ``i`` draws its flea from the Philox
    stream ``(seed, i)``, so the same fleas are used at every ``hbar`` and the
    result does not depend on ``threads``. Ambiguous fleas are excluded from
    the averages. The finite-time column averages over
    ``T = T_factor * hbar / gap``.
    """
    if not 0 < alpha2 < 1:
        raise InvalidArgumentError("alpha2 must lie in (0, 1)")
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1")
    params = params or ModelParams(hbar_list[0], dist.a)
    fixed_grid = grid
    fleas = [dist.sample(substream(seed, i)) for i in range(n_samples)]
    wig = (wigner_radius, wigner_p_extent, wigner_n_p, wigner_y_stride) if wigner else None
    alpha, beta = np.sqrt(alpha2), np.sqrt(1 - alpha2)
    rows, summaries = [], []
    for hbar in hbar_list:
        bare = PotentialSpec(params.lam, params.a)
        # fleas are small, so the grid that suits the bare well at level K suits them too
        grid = fixed_grid or auto_grid(bare, hbar, K, params.mass)
        plus, minus = localized_states(solve(bare, hbar, grid, 2,
                                             params.mass))
        psi0 = WaveFn(grid, alpha * plus.values + beta * minus.values, hbar)
        jobs = [(i, hbar, fleas[i], psi0, grid, params, K, T_factor, wig) for i in range(n_samples)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                out = list(pool.map(_one_sample, jobs))
        else:
            out = [_one_sample(j) for j in jobs]
        rows.extend(out)
        used = [r for r in out if r["class"] != "ambiguous"]
        if not used:
            raise ExperimentFailedError(f"every flea is ambiguous at hbar = {hbar}")
        m, se = _mean_se([r["occ_right_diag"] for r in used])
        mT, _ = _mean_se([r["occ_right_finiteT"] for r in used])
        mw, sew = _mean_se([r["wigner_right_weight"] for r in used])
        tails = np.array([r["tail_sq"] for r in used])
        summaries.append(HbarSummary(float(hbar), len(used), len(out) - len(used), m, se, mT,
                                     mw, sew, float(tails.mean()), float(tails.max()), alpha2))
    return BornExperimentResult(tuple(rows), tuple(summaries))


# ---------------------------------------------------------------------------
# checks

@dataclass(frozen=True)
class SplittingRow:
    hbar: float
    numeric: float
    asymptotic: float

    @property
    def ratio(self) -> float:
        return self.numeric / self.asymptotic


def delta_splitting_check(params: ModelParams, hbar_list: Sequence[float] = (0.5, 0.4, 0.3, 0.25),
                          grid: Grid1D | None = None) -> list[SplittingRow]:
    """Numerical ``E1 - E0`` of the unperturbed well against the asymptotic gap formula."""
    pot = PotentialSpec(params.lam, params.a)
    rows = []
    for hb in hbar_list:
        sd = solve(pot, hb, grid, 2, params.mass)
        # below ~1e3 ulps of the energies the splitting is eigensolver roundoff
        if not sd.gap > 1e3 * np.finfo(float).eps * np.max(np.abs(sd.energies)):
            raise NumericError(f"splitting {sd.gap:.3g} at hbar = {hb} is below eigenvalue precision")
        rows.append(SplittingRow(float(hb), sd.gap, splitting(params.with_hbar(hb)).delta_hbar))
    return rows


def _lowest_energies(H: TridiagonalHamiltonian, K: int) -> np.ndarray:
    # eigenvalues only, so very fine grids stay O(n) in memory
    return eigvalsh_tridiagonal(H.diagonal, H.off_diagonal, select="i", select_range=(0, K - 1))


def certify_grid(pot: PotentialSpec, hbar: float, grid: Grid1D | None = None, K: int = 8,
                 mass: float = 1.0, tol: float = 1e-7) -> float:
    """Largest eigenvalue shift under grid doubling; ``NumericError`` if above ``tol``."""
    grid = grid or auto_grid(pot, hbar, K, mass)
    e1 = _lowest_energies(build_hamiltonian(grid, pot, hbar, mass, K), K)
    e2 = _lowest_energies(build_hamiltonian(grid.refined(), pot, hbar, mass, K), K)
    shift = float(np.max(np.abs(e1 - e2)))
    if shift > tol:
        raise NumericError(f"eigenvalues move by {shift:.3g} under grid doubling (tol {tol:g})")
    return shift
