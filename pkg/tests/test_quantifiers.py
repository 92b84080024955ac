import math

import numpy as np
import pytest

from nltomo.errors import ValidationError
from nltomo.evolve import (
    MediumKind,
    MediumSpec,
    propagate_phase_damping,
    propagate_unitary,
    revival_time,
)
from nltomo.quantifiers import (
    COHERENT_AREA_BASELINE,
    ENTROPY_BOUND,
    compute_record,
    entropy_pair,
    entropy_sum,
    find_local_minima,
    nonclassical_area,
    quadrature_mean_variance,
    quadrature_moments_from_tomogram,
    tomographic_entropy,
    variance_profile_from_tomogram,
)
from nltomo.states import (
    DensityMatrix,
    FockVector,
    InitialStateSpec,
    StateKind,
    density_from_pure,
)
from nltomo.tomography import QuadratureGrid, symmetric_grid, tomogram_of_density, uniform_thetas

# reference values below were frozen from independent adaptive-quadrature
# and refined-grid computations before this module was written
EVEN10_AREA = 14.278159294710  # even coherent, |alpha|^2 = 10
FOCK1_ENTROPY = 1.342727788386  # single-photon Fock state, any theta
EVEN40_ENTROPY_SUM = 3.531024246969  # even coherent, |alpha|^2=40, delta=pi/4


def coherent_rho(alpha, dim):
    return density_from_pure(InitialStateSpec(StateKind.COHERENT, alpha).build(dim))


def even_rho(alpha, dim):
    return density_from_pure(InitialStateSpec(StateKind.EVEN_COHERENT, alpha).build(dim))


# --- quadrature moments -------------------------------------------------------


def test_coherent_variance_is_half_everywhere():
    rho = coherent_rho(math.sqrt(7.0) * np.exp(0.3j), 60)
    thetas = np.linspace(0.0, 2.0 * math.pi, 37, endpoint=False)
    mean, var = quadrature_mean_variance(rho, thetas)
    expected_mean = math.sqrt(14.0) * np.cos(0.3 - thetas)
    assert np.max(np.abs(mean - expected_mean)) < 1e-9
    assert np.max(np.abs(var - 0.5)) < 1e-9


def test_tomographic_moments_match_analytic():
    alpha = math.sqrt(4.0) * np.exp(0.7j)
    rho = coherent_rho(alpha, 40)
    thetas = (0.0, 1.1)
    grid = symmetric_grid(10.0, 401, thetas)
    tomo = tomogram_of_density(rho, grid)
    mean, var = quadrature_mean_variance(rho, np.asarray(thetas))
    for i in range(2):
        m1 = quadrature_moments_from_tomogram(tomo, i, 1)
        m2 = quadrature_moments_from_tomogram(tomo, i, 2)
        assert abs(m1 - mean[i]) < 1e-9
        assert abs((m2 - m1**2) - var[i]) < 1e-9
    prof = variance_profile_from_tomogram(tomo)
    assert np.max(np.abs(prof - var)) < 1e-9
    with pytest.raises(ValidationError):
        quadrature_moments_from_tomogram(tomo, 0, -1)


# --- nonclassical area --------------------------------------------------------


def test_coherent_area_is_zero():
    for alpha_sq, dim in ((5.0, 40), (10.0, 60), (20.0, 80)):
        rho = coherent_rho(math.sqrt(alpha_sq) * np.exp(0.25j * math.pi), dim)
        assert abs(nonclassical_area(rho, 128, "analytic")) < 1e-8
        assert abs(nonclassical_area(rho, 128, "tomographic")) < 1e-6


def test_even_coherent_area_frozen_value():
    rho = even_rho(math.sqrt(10.0), 60)
    a = nonclassical_area(rho, 512, "analytic")
    assert abs(a - EVEN10_AREA) < 1e-10
    # the default 128-angle rule agrees to ~2e-11
    a128 = nonclassical_area(rho, 128, "analytic")
    assert abs(a128 - EVEN10_AREA) < 1e-9
    a_tomo = nonclassical_area(rho, 128, "tomographic")
    assert abs(a_tomo - EVEN10_AREA) < 1e-9
    a_tomo_wide = nonclassical_area(rho, 128, "tomographic", x_window=(12.0, 241))
    assert abs(a_tomo_wide - EVEN10_AREA) < 1e-9


def test_area_method_validation():
    rho = coherent_rho(1.0, 20)
    with pytest.raises(ValidationError):
        nonclassical_area(rho, 128, "exact")


def test_area_baseline_constant():
    assert COHERENT_AREA_BASELINE == pytest.approx(math.sqrt(2.0) * math.pi, rel=1e-15)


# --- tomographic entropies ------------------------------------------------------


def test_fock_one_entropy_frozen_value():
    amps = np.zeros(20)
    amps[1] = 1.0
    rho = density_from_pure(FockVector(20, amps))
    fine = QuadratureGrid(-10.0, 10.0, 8001, (0.0,))
    s_fine = tomographic_entropy(tomogram_of_density(rho, fine), 0)
    assert abs(s_fine - FOCK1_ENTROPY) < 5e-9
    # the default-resolution window carries ~1e-4 discretization error
    # from the density zero at x = 0
    coarse = QuadratureGrid(-10.0, 10.0, 200, (0.0,))
    s_coarse = tomographic_entropy(tomogram_of_density(rho, coarse), 0)
    assert abs(s_coarse - FOCK1_ENTROPY) < 2e-4


def test_coherent_entropy_pair_saturates_bound():
    rho = coherent_rho(math.sqrt(2.0), 30)
    s = entropy_sum(rho, 0.0, (10.0, 400))
    assert abs(s - ENTROPY_BOUND) < 1e-9
    s0, s90 = entropy_pair(rho, 0.0, (10.0, 400))
    half = 0.5 * (1.0 + math.log(math.pi))
    assert abs(s0 - half) < 1e-9
    assert abs(s90 - half) < 1e-9


def test_even40_entropy_sum_frozen_value():
    alpha = math.sqrt(40.0) * np.exp(0.25j * math.pi)
    rho = even_rho(alpha, 100)
    s0, s90 = entropy_pair(rho, 0.0, (13.5, 271))
    assert abs((s0 + s90) - EVEN40_ENTROPY_SUM) < 1e-8
    # delta = pi/4 makes the two conjugate slices mirror images
    assert abs(s0 - s90) < 1e-9


def test_entropy_slice_periodicity():
    rho = even_rho(math.sqrt(6.0) * np.exp(0.25j * math.pi), 50)
    s_a = entropy_sum(rho, 0.5 * math.pi, (10.0, 200))
    s_b = entropy_sum(rho, 1.5 * math.pi, (10.0, 200))  # wraps past 2*pi
    assert abs(s_a - s_b) < 1e-12


def test_entropy_bound_holds_for_assorted_states():
    states = [
        coherent_rho(0.0, 10),
        coherent_rho(math.sqrt(5.0), 40),
        even_rho(math.sqrt(10.0), 60),
        density_from_pure(
            InitialStateSpec(StateKind.PHOTON_ADDED, math.sqrt(5.0), p=3).build(50)
        ),
    ]
    for rho in states:
        assert entropy_sum(rho) >= ENTROPY_BOUND - 1e-6


# --- minima detection -----------------------------------------------------------


def test_find_local_minima_cosine():
    t = np.linspace(0.0, 1.0, 401)
    v = np.cos(4.0 * math.pi * t)
    hits = find_local_minima(t, v, prominence=0.5)
    assert len(hits) == 2
    assert abs(hits[0] - 0.25) < 1e-12
    assert abs(hits[1] - 0.75) < 1e-12


def test_find_local_minima_prominence_filter():
    t = np.linspace(0.0, 1.0, 101)
    v = 0.1 * np.ones_like(t)
    v[30] = 0.0999  # a 1e-4 dip: below the default prominence
    assert find_local_minima(t, v) == []
    v[30] = 0.05
    assert find_local_minima(t, v) == [pytest.approx(0.3)]


def test_find_local_minima_excludes_endpoints():
    t = np.linspace(0.0, 1.0, 51)
    v = t.copy()  # global minimum at the left endpoint only
    assert find_local_minima(t, v, prominence=1e-6) == []
    with pytest.raises(ValidationError):
        find_local_minima(t, v[:-1])
    with pytest.raises(ValidationError):
        find_local_minima(t, v, prominence=0.0)


# --- record builder --------------------------------------------------------------


def test_compute_record_consistency():
    rho = even_rho(math.sqrt(10.0), 60)
    rec = compute_record(rho, t=0.1, t_rev=0.4, theta_count=128, x_window=(10.0, 200))
    assert rec.t == pytest.approx(0.1)
    assert rec.t_over_trev == pytest.approx(0.25)
    assert rec.nonclassical_area == pytest.approx(
        nonclassical_area(rho, 128, "analytic"), abs=1e-14
    )
    s0, s90 = entropy_pair(rho, 0.0, (10.0, 200))
    assert rec.entropy_0 == pytest.approx(s0, abs=1e-14)
    assert rec.entropy_90 == pytest.approx(s90, abs=1e-14)
    assert rec.entropy_sum == pytest.approx(s0 + s90, abs=1e-14)
    assert rec.trace == pytest.approx(1.0, abs=1e-12)
    assert rec.purity == pytest.approx(1.0, abs=1e-12)
    assert rec.as_row() == (
        rec.t,
        rec.t_over_trev,
        rec.nonclassical_area,
        rec.entropy_0,
        rec.entropy_90,
        rec.entropy_sum,
        rec.trace,
        rec.purity,
    )


# --- cross-path and covariance properties -----------------------------------------


@pytest.mark.parametrize("kind", [StateKind.COHERENT, StateKind.PHOTON_ADDED,
                                  StateKind.EVEN_COHERENT])
def test_area_paths_agree_on_evolved_states(kind):
    alpha = math.sqrt(5.0) * complex(math.cos(0.25 * math.pi), math.sin(0.25 * math.pi))
    p = 3 if kind is StateKind.PHOTON_ADDED else 0
    rho = density_from_pure(InitialStateSpec(kind, alpha, p=p).build(40))
    kerr = MediumSpec(MediumKind.KERR, 5.0)
    t_rev = revival_time(kerr)
    for rho_t in (
        propagate_unitary(rho, kerr, 0.23 * t_rev),
        propagate_phase_damping(rho, kerr, 0.1, 0.4 * t_rev),
    ):
        analytic = nonclassical_area(rho_t, method="analytic")
        tomographic = nonclassical_area(rho_t, method="tomographic")
        assert abs(analytic - tomographic) < 1e-6


def test_area_is_invariant_under_phase_rotation():
    # rotating the state shifts the variance profile in theta; the full-period
    # average must not move
    rho = even_rho(math.sqrt(10.0), 60)
    base = nonclassical_area(rho)
    n = np.arange(60)
    for phi in (0.3, 0.7, 2.9):
        phases = np.exp(-1j * phi * n)
        rotated = DensityMatrix(60, phases[:, None] * rho.elements * phases.conj()[None, :])
        assert abs(nonclassical_area(rotated) - base) < 1e-8
