import math

import numpy as np
import pytest

from nltomo.errors import NumericalInvariantError, ValidationError
from nltomo.states import (
    DensityMatrix,
    FockVector,
    InitialStateSpec,
    StateKind,
    build_state,
    coherent_coefficients,
    density_from_pure,
    even_coherent_coefficients,
    ladder_expectations,
    laguerre_value,
    photon_added_coefficients,
    tail_mass,
)


def test_coherent_matches_direct_formula():
    alpha = 1.2 - 0.7j
    dim = 25
    state = coherent_coefficients(alpha, dim)
    direct = np.array(
        [
            math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n))
            for n in range(dim)
        ]
    )
    direct /= np.linalg.norm(direct)
    assert np.max(np.abs(state.amplitudes - direct)) < 1e-13


def test_builders_are_normalized():
    for state in (
        coherent_coefficients(math.sqrt(20), 90),
        photon_added_coefficients(math.sqrt(40) * np.exp(0.25j * math.pi), 3, 110),
        even_coherent_coefficients(math.sqrt(40), 100),
    ):
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12


@pytest.mark.parametrize("alpha_sq,p", [(1.0, 1), (3.0, 2), (5.0, 3)])
def test_photon_added_base_amplitude_closed_form(alpha_sq, p):
    # |C_p|^2 = e^{-|alpha|^2} / L_p(-|alpha|^2); for alpha_sq=1, p=1
    # this is e^{-1}/2
    state = photon_added_coefficients(math.sqrt(alpha_sq), p, 60)
    expected = math.exp(-alpha_sq) / laguerre_value(p, -alpha_sq)
    assert abs(abs(state.amplitudes[p]) ** 2 - expected) < 1e-13
    assert np.max(np.abs(state.amplitudes[:p])) == 0.0


def test_photon_added_mean_photon_number_laguerre_identity():
    alpha_sq, p, dim = 5.0, 3, 60
    rho = density_from_pure(photon_added_coefficients(math.sqrt(alpha_sq), p, dim))
    mom = ladder_expectations(rho)
    expected = (p + 1) * laguerre_value(p + 1, -alpha_sq) / laguerre_value(p, -alpha_sq) - 1.0
    assert abs(mom.n - expected) < 1e-10


def test_even_coherent_structure():
    alpha = math.sqrt(10.0)
    state = even_coherent_coefficients(alpha, 60)
    assert np.max(np.abs(state.amplitudes[1::2])) == 0.0
    rho = density_from_pure(state)
    mom = ladder_expectations(rho)
    assert abs(mom.a) < 1e-15  # parity forbids <a>
    assert abs(mom.n - 10.0 * math.tanh(10.0)) < 1e-9
    # eigenstate of a^2: <a^2> = alpha^2
    assert abs(mom.a_squared - alpha**2) < 1e-9


def test_even_coherent_base_normalization_constant():
    # |C_0|^2 = e^{-|alpha|^2} / [2 (1 + e^{-2|alpha|^2})] * 4
    alpha_sq = 3.0
    state = even_coherent_coefficients(math.sqrt(alpha_sq), 50)
    n_plus_sq = 1.0 / (2.0 * (1.0 + math.exp(-2.0 * alpha_sq)))
    expected_c0_sq = 4.0 * n_plus_sq * math.exp(-alpha_sq)
    assert abs(abs(state.amplitudes[0]) ** 2 - expected_c0_sq) < 1e-13


def test_coherent_ladder_expectations():
    alpha = math.sqrt(10.0) * np.exp(0.25j * math.pi)
    rho = density_from_pure(coherent_coefficients(alpha, 60))
    mom = ladder_expectations(rho)
    assert abs(mom.a - alpha) < 1e-10
    assert abs(mom.a_squared - alpha**2) < 1e-9
    assert abs(mom.n - 10.0) < 1e-9


def test_vacuum_limits():
    vac = coherent_coefficients(0.0, 10)
    assert vac.amplitudes[0] == 1.0
    assert np.max(np.abs(vac.amplitudes[1:])) == 0.0
    fock_p = photon_added_coefficients(0.0, 3, 10)
    assert fock_p.amplitudes[3] == 1.0
    assert tail_mass(fock_p, 4) == 0.0
    even_vac = even_coherent_coefficients(0.0, 10)
    assert even_vac.amplitudes[0] == 1.0


def test_build_state_dispatch():
    spec = InitialStateSpec(StateKind.PHOTON_ADDED, 2.0, p=2)
    state = build_state(spec, 40)
    assert state.amplitudes[0] == 0.0 and state.amplitudes[1] == 0.0
    assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12
    assert spec.build(40).dim == 40


def test_initial_state_spec_validation():
    with pytest.raises(ValidationError):
        InitialStateSpec(StateKind.PHOTON_ADDED, 1.0)  # needs p >= 1
    with pytest.raises(ValidationError):
        InitialStateSpec(StateKind.PHOTON_ADDED, 1.0, p=0)
    with pytest.raises(ValidationError):
        InitialStateSpec(StateKind.COHERENT, 1.0, p=2)  # p meaningless here
    with pytest.raises(ValidationError):
        InitialStateSpec(StateKind.COHERENT, complex("inf"))
    with pytest.raises(ValidationError):
        InitialStateSpec("coherent", 1.0)  # not a StateKind


def test_fock_vector_validation():
    with pytest.raises(NumericalInvariantError):
        FockVector(3, np.array([1.0, 1.0, 0.0]))  # not normalized
    with pytest.raises(ValidationError):
        FockVector(3, np.array([1.0, 0.0]))  # shape mismatch
    with pytest.raises(ValidationError):
        FockVector(2, np.array([np.nan, 0.0]))
    vec = FockVector(2, np.array([1.0, 0.0]))
    assert not vec.amplitudes.flags.writeable


def test_density_matrix_validation():
    good = np.diag([0.5, 0.5]).astype(complex)
    DensityMatrix(2, good)
    bad_herm = good.copy()
    bad_herm[0, 1] = 0.1
    with pytest.raises(NumericalInvariantError):
        DensityMatrix(2, bad_herm)
    with pytest.raises(NumericalInvariantError):
        DensityMatrix(2, np.diag([0.7, 0.5]).astype(complex))  # trace 1.2
    with pytest.raises(ValidationError):
        DensityMatrix(3, good)


def test_density_from_pure_is_projector():
    rho = density_from_pure(coherent_coefficients(1.5, 30))
    assert abs(rho.trace() - 1.0) < 1e-12
    assert abs(rho.purity() - 1.0) < 1e-12


def test_tail_mass():
    state = coherent_coefficients(math.sqrt(5.0), 40)
    assert tail_mass(state, 0) == pytest.approx(1.0, abs=1e-12)
    assert tail_mass(state, 35) < 1e-12
    assert tail_mass(state, 100) == 0.0
    rho = density_from_pure(state)
    assert tail_mass(rho, 35) == pytest.approx(tail_mass(state, 35), abs=1e-15)
    with pytest.raises(ValidationError):
        tail_mass(state, -1)
    # the strongest field the presets use still fits comfortably in dim=100
    assert tail_mass(coherent_coefficients(math.sqrt(40.0), 100), 90) < 1e-8


def test_laguerre_recurrence_against_explicit_polynomials():
    for x in (-4.0, -1.0, 0.0, 2.5):
        assert laguerre_value(0, x) == 1.0
        assert abs(laguerre_value(1, x) - (1.0 - x)) < 1e-14
        assert abs(laguerre_value(2, x) - (1.0 - 2.0 * x + 0.5 * x * x)) < 1e-13
        l3 = 1.0 - 3.0 * x + 1.5 * x * x - x**3 / 6.0
        assert abs(laguerre_value(3, x) - l3) < 1e-12
