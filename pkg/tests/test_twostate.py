import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.linalg import expm

from bornflea import laws
from bornflea.errors import DegenerateSpectrumError, InvalidArgumentError, InvalidInputError, InvalidMeasureError
from bornflea.twostate import (A_MINUS_PLUS, A_PLUS_MINUS, BASIS, IDENTITY, PI_MINUS, PI_PLUS,
                               MixtureState2, ModelParams, QState2, born_gap, born_gap_rows,
                               born_state, eigensystem2, evolve2, hamiltonian2, initial_state,
                               mixture_expectation, mixture_expectation_mc, splitting)

POS = laws.uniform(0.5, 1.5)
NEG = laws.uniform(-1.5, -0.5)
MIXED = laws.signed_mixture(POS, NEG)
HBARS = (0.3, 0.2, 0.15, 0.1)


def unit_states():
    return st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)) \
        .filter(lambda v: np.hypot(np.hypot(v[0], v[1]), np.hypot(v[2], v[3])) > 1e-3) \
        .map(lambda v: QState2.from_vector(np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]])
                                           / np.sqrt(sum(x * x for x in v))))


# -- parameters and splitting ----------------------------------------------

def test_params_must_be_positive():
    with pytest.raises(InvalidArgumentError):
        ModelParams(0.0)
    with pytest.raises(InvalidArgumentError):
        ModelParams(0.1, a=-1)


def test_wkb_action_is_two_thirds():
    # independent oracle: 1/2 int_{-1}^{1} (1 - x^2) dx by Simpson on a fine grid
    x = np.linspace(-1, 1, 20001)
    oracle = integrate.simpson(0.5 * (1 - x * x), x=x)
    assert abs(splitting(ModelParams(0.1)).d_V - oracle) < 1e-8
    assert abs(splitting(ModelParams(0.1, a=1.3, lam=2.0)).d_V - 2 * np.sqrt(2.0) * 1.3**3 / 3) < 1e-9


def test_splitting_closed_form_value():
    want = 0.1 * np.sqrt(2 / (np.e * np.pi)) * np.exp(-20 / 3)
    assert abs(splitting(ModelParams(0.1)).delta_hbar / want - 1) < 1e-12


def test_splitting_shrinks_with_hbar():
    gaps = [splitting(ModelParams(h)).delta_hbar for h in (0.5, 0.3, 0.1, 0.05)]
    assert all(g > 0 for g in gaps) and all(a > b for a, b in zip(gaps, gaps[1:]))


# -- eigensystem -------------------------------------------------------------

def test_unperturbed_eigensystem_is_symmetric_antisymmetric():
    sp = eigensystem2(0.0, 0.2)
    assert np.isclose(sp.e0, -0.1) and np.isclose(sp.e1, 0.1)
    s = 1 / np.sqrt(2)
    assert np.allclose(np.abs(sp.v0), [s, s]) and sp.v0[0] * sp.v0[1] > 0
    assert np.allclose(np.abs(sp.v1), [s, s]) and sp.v1[0] * sp.v1[1] < 0


def test_eigensystem_against_numeric_diagonalisation():
    sp = eigensystem2(3.0, 4.0)
    w = np.linalg.eigvalsh(hamiltonian2(3.0, 4.0))
    assert np.allclose([sp.e0, sp.e1], w, atol=1e-12)
    assert np.allclose([sp.e0, sp.e1, sp.gap], [-1, 4, 5], atol=1e-12)


def test_large_flea_localises_ground_state_right():
    sp = eigensystem2(1e3, 1e-3)
    assert np.max(np.abs(np.abs(sp.v0) - [0, 1])) < 1e-5


def test_degenerate_spectrum_rejected():
    with pytest.raises(DegenerateSpectrumError):
        eigensystem2(0.0, 0.0)


@given(delta=st.floats(-50, 50), gap=st.floats(1e-8, 50))
def test_spectral_consistency(delta, gap):
    sp = eigensystem2(delta, gap)
    H = hamiltonian2(delta, gap)
    scale = max(1.0, abs(delta), gap)
    assert np.linalg.norm(H @ sp.v0 - sp.e0 * sp.v0) <= 1e-12 * scale
    assert np.linalg.norm(H @ sp.v1 - sp.e1 * sp.v1) <= 1e-12 * scale
    assert abs(np.dot(sp.v0, sp.v1)) <= 1e-12
    assert abs(np.linalg.norm(sp.v0) - 1) <= 1e-12 and abs(np.linalg.norm(sp.v1) - 1) <= 1e-12
    assert sp.e0 <= sp.e1 and abs(sp.gap - (sp.e1 - sp.e0)) <= 1e-12 * scale


@given(delta=st.floats(-1e3, 1e3), gap=st.floats(1e-6, 1e3))
def test_gap_law(delta, gap):
    r = eigensystem2(delta, gap).gap
    assert abs(r * r - (delta * delta + gap * gap)) <= 4 * np.spacing(delta * delta + gap * gap)


@given(delta=st.floats(1e-3, 10))
def test_limit_swap_for_negative_flea(delta):
    plus = eigensystem2(delta, 1e-9)
    minus = eigensystem2(-delta, 1e-9)
    assert abs(plus.v0[1]) > 0.999 and abs(minus.v0[0]) > 0.999


# -- evolution ------------------------------------------------------------------

def test_evolution_identity_at_t0():
    s0 = initial_state(0.7)
    out = evolve2(s0, eigensystem2(0.4, 0.3), 0.5, 0.0)
    assert np.allclose(out.vector, s0.vector, atol=1e-14)


def test_stationary_state_keeps_expectations():
    sp = eigensystem2(0.4, 0.3)
    s0 = QState2.from_vector(sp.v0)
    for t in (0.3, 7.0, 120.0):
        st_t = evolve2(s0, sp, 0.2, t)
        for A in BASIS:
            v = st_t.vector
            assert abs(np.vdot(v, A.entries @ v) - np.vdot(sp.v0, A.entries @ sp.v0)) < 1e-12


def test_full_rabi_period_against_matrix_exponential():
    sp = eigensystem2(3.0, 4.0)
    s0 = QState2(0, 1)
    t = 2 * np.pi / 5
    out = evolve2(s0, sp, 1.0, t)
    ref = expm(-1j * hamiltonian2(3.0, 4.0) * t) @ s0.vector
    assert np.allclose(out.vector, ref, atol=1e-12)
    assert abs(abs(np.vdot(out.vector, s0.vector)) - 1) < 1e-12


@given(state=unit_states(), delta=st.floats(-5, 5), gap=st.floats(1e-4, 5),
       hbar=st.floats(0.01, 2), t=st.floats(-1e3, 1e3))
def test_unitarity(state, delta, gap, hbar, t):
    out = evolve2(state, eigensystem2(delta, gap), hbar, t)
    assert abs(np.linalg.norm(out.vector) - 1) <= 1e-12
    ref = expm(-1j * hamiltonian2(delta, gap) * t / hbar) @ state.vector
    assert np.allclose(out.vector, ref, atol=1e-8)


# -- mixtures -------------------------------------------------------------------

def test_state_and_mixture_invariants():
    with pytest.raises(InvalidInputError):
        QState2(1, 1)
    with pytest.raises(InvalidInputError):
        MixtureState2(0.6, 0.6)
    b = born_state(initial_state(0.7))
    assert abs(b.weight_plus - 0.7) < 1e-15
    assert b.expectation(A_PLUS_MINUS) == 0 and b.expectation(A_MINUS_PLUS) == 0


@pytest.mark.parametrize("mode", ["diagonal", ("finite_T", 10.0), ("finite_T", 1e4)])
@pytest.mark.parametrize("mu", [POS, NEG, MIXED])
def test_identity_expectation_is_one(mode, mu):
    v = mixture_expectation(IDENTITY, initial_state(0.3), mu, ModelParams(0.2), mode)
    assert abs(v - 1) < 1e-12


def test_symmetric_superposition_gives_one_half():
    v = mixture_expectation(PI_PLUS, initial_state(0.5), POS, ModelParams(0.1))
    assert abs(v - 0.5) <= 1e-6


def test_symmetric_superposition_offset_matches_leading_order():
    # one-signed fleas leave an O(gap/delta) bias: E[gap / (2 delta)] = gap * ln(3) / 2 on U[0.5, 1.5]
    gap = splitting(ModelParams(0.1)).delta_hbar
    v = mixture_expectation(PI_PLUS, initial_state(0.5), POS, ModelParams(0.1))
    assert abs((v.real - 0.5) - gap * np.log(3) / 2) < 1e-9


def test_born_probability_seventy_percent():
    v = mixture_expectation(PI_PLUS, initial_state(0.7), POS, ModelParams(0.1))
    assert abs(v - 0.7) <= 1e-4


def test_quadrature_against_brute_force_integral():
    # oracle: adaptive quad over delta of the closed-form diagonal-ensemble expectation
    p = ModelParams(0.2)
    gap = splitting(p).delta_hbar
    psi = initial_state(0.7).vector

    def point(d):
        sp = eigensystem2(d, gap)
        c0, c1 = np.vdot(sp.v0, psi), np.vdot(sp.v1, psi)
        return abs(c0) ** 2 * sp.v0[1] ** 2 + abs(c1) ** 2 * sp.v1[1] ** 2
    ref = integrate.quad(point, 0.5, 1.5, epsabs=1e-13, epsrel=1e-12)[0]
    assert abs(mixture_expectation(PI_PLUS, initial_state(0.7), POS, p) - ref) < 1e-11


def test_monte_carlo_path_agrees_within_three_se(rng):
    p = ModelParams(0.3)
    for mode in ("diagonal", ("finite_T", 30.0)):
        for A in BASIS:
            q = mixture_expectation(A, initial_state(0.7), MIXED, p, mode)
            m, se = mixture_expectation_mc(A, initial_state(0.7), MIXED, p, mode, n_samples=20000, rng=rng)
            assert abs(q - m) <= 3 * se + 1e-12, (A.label, mode)


def test_mass_at_zero_rejected():
    with pytest.raises(InvalidMeasureError):
        mixture_expectation(PI_PLUS, initial_state(0.7), laws.uniform(-1, 1), ModelParams(0.1))


@given(alpha2=st.floats(0, 1), hbar=st.floats(0.08, 0.5))
def test_expectations_bounded_by_operator_norm(alpha2, hbar):
    for A in BASIS:
        v = mixture_expectation(A, initial_state(alpha2), MIXED, ModelParams(hbar))
        assert abs(v) <= 1 + 1e-9


def test_finite_t_approaches_diagonal_like_one_over_t():
    p = ModelParams(0.3)
    s0 = initial_state(0.7)
    Ts = np.array([10.0, 100.0, 1e3, 1e4])
    for A in BASIS:
        d = mixture_expectation(A, s0, POS, p)
        diffs = np.array([abs(mixture_expectation(A, s0, POS, p, ("finite_T", T)) - d) for T in Ts])
        C = np.sum(diffs / Ts) / np.sum(1 / Ts**2)
        assert np.all(diffs <= 2 * C / Ts + 1e-14), A.label


# -- Born gap ---------------------------------------------------------------------

def test_born_gap_decreases_and_reaches_1e4():
    gaps = [born_gap(initial_state(0.7), POS, ModelParams(h)) for h in HBARS]
    assert all(a > b for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-4


@pytest.mark.parametrize("mu", [NEG, MIXED])
def test_born_gap_negative_and_mixed_fleas(mu):
    assert born_gap(initial_state(0.7), mu, ModelParams(0.1)) < 1e-4


def test_off_diagonal_expectations_vanish_in_the_limit():
    vals = [abs(mixture_expectation(A_PLUS_MINUS, initial_state(0.7), POS, ModelParams(h))) for h in HBARS]
    assert vals[-1] < 1e-4 and vals[-1] < vals[0]


def test_born_gap_rows_schema():
    rows = born_gap_rows(initial_state(0.7), POS, ModelParams(0.3), [0.3, 0.2])
    assert len(rows) == 8
    assert list(rows[0]) == ["hbar", "T_or_diag", "A_label", "re", "im", "born_value", "abs_gap"]
    assert {r["A_label"] for r in rows} == {"Pi+", "Pi-", "A+-", "A-+"}
