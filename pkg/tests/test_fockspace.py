"""
Tests for the truncated Fock-space numerics
"""

import math

import allure
import numpy as np
import pytest

from src.numerics.errors import (
    DivergenceInfiniteError,
    InsufficientDimensionError,
    InvalidDimensionError,
    InvalidParameterError,
    TruncationOverflowError,
)
from src.numerics.fockspace import (
    DensityMatrix,
    TruncationPolicy,
    build_annihilation,
    detection_error_min,
    displaced_thermal,
    displacement_operator,
    matrix_inverse_derivative_check,
    matrix_log_derivative_check,
    mean_photon,
    qre,
    qre_vs_thermal,
    random_density_matrix,
    tensor,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)


def fock_state(k, dim):
    entries = np.zeros((dim, dim), dtype=complex)
    entries[k, k] = 1.0
    return DensityMatrix(entries)


@allure.feature("Fock Space")
@allure.story("Operators")
class TestOperators:

    def test_annihilation_entries(self):
        a = build_annihilation(3).entries
        assert a[0, 1] == pytest.approx(1.0)
        assert a[1, 2] == pytest.approx(math.sqrt(2))
        assert np.count_nonzero(a) == 2

    def test_annihilation_kills_vacuum(self):
        a = build_annihilation(6).entries
        vacuum = np.zeros(6)
        vacuum[0] = 1.0
        assert np.allclose(a @ vacuum, 0.0)

    def test_number_operator_is_diagonal(self):
        a = build_annihilation(5).entries
        assert np.allclose(a.conj().T @ a, np.diag(np.arange(5)))

    def test_commutator_holds_below_the_cutoff(self):
        assert build_annihilation(10).commutator_defect() < 1e-12

    def test_annihilation_needs_two_levels(self):
        with pytest.raises(InvalidDimensionError):
            build_annihilation(1)

    def test_zero_displacement_is_identity(self):
        assert np.allclose(displacement_operator(0.0, 10).entries, np.eye(10), atol=1e-14)

    def test_displacement_is_unitary(self):
        d = displacement_operator(0.7 - 0.2j, 40).entries
        assert np.allclose(d @ d.conj().T, np.eye(40), atol=1e-12)

    def test_displacement_guard(self):
        with pytest.raises(InsufficientDimensionError):
            displacement_operator(3.0, 20)

    @pytest.mark.parametrize("alpha", [0.5, 0.3j, 1.0 - 0.5j])
    def test_vacuum_overlap(self, alpha):
        d = displacement_operator(alpha, 40).entries
        assert abs(d[0, 0]) == pytest.approx(math.exp(-abs(alpha) ** 2 / 2), abs=1e-10)


@allure.feature("Fock Space")
@allure.story("States")
class TestStates:

    def test_thermal_zero_is_vacuum(self):
        rho = thermal_state(0.0)
        assert rho.entries[0, 0] == pytest.approx(1.0)
        assert rho.trace == pytest.approx(1.0)

    def test_thermal_weights(self):
        diagonal = np.diag(thermal_state(1.0).entries).real
        assert diagonal[:3] == pytest.approx([0.5, 0.25, 0.125])

    def test_thermal_meets_trace_target(self):
        policy = TruncationPolicy()
        assert thermal_state(3.0, policy).trace_deficit < policy.target_trace_deficit

    def test_thermal_overflow(self):
        with pytest.raises(TruncationOverflowError) as excinfo:
            thermal_state(1.0, TruncationPolicy(max_dim=10))
        assert excinfo.value.max_dim == 10

    def test_negative_photon_number_rejected(self):
        with pytest.raises(InvalidParameterError):
            thermal_state(-0.1)

    def test_undisplaced_thermal_matches_thermal(self):
        displaced = displaced_thermal(0.0, 1.0, dim=40).entries
        assert np.max(np.abs(displaced - thermal_state(1.0, dim=40).entries)) < 1e-12

    def test_coherent_state_is_pure(self):
        rho = displaced_thermal(1.0, 0.0)
        purity = float(np.trace(rho.entries @ rho.entries).real)
        assert purity == pytest.approx(1.0, abs=1e-8)

    def test_displaced_thermal_is_a_state(self):
        rho = displaced_thermal(0.8 + 0.6j, 0.5)
        assert np.min(rho.eigenvalues()) > -1e-10
        assert rho.trace == pytest.approx(1.0, abs=1e-9)

    def test_density_matrix_rejects_non_hermitian(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_density_matrix_rejects_wrong_trace(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.diag([0.5, 0.4]))

    def test_density_matrix_is_read_only(self):
        rho = thermal_state(1.0, dim=4)
        with pytest.raises(ValueError):
            rho.entries[0, 0] = 0.0

    def test_json_dump_restores_entries(self):
        rho = displaced_thermal(0.3j, 0.2, dim=12)
        restored = DensityMatrix.from_json_dump(rho.to_json_dump())
        assert np.array_equal(restored.entries, rho.entries)
        assert restored.trace_deficit == rho.trace_deficit


@allure.feature("Fock Space")
@allure.story("Policy")
class TestTruncationPolicy:

    def test_rejects_loose_trace_target(self):
        with pytest.raises(InvalidParameterError):
            TruncationPolicy(target_trace_deficit=1e-3)

    def test_grow_stops_at_max_dim(self):
        policy = TruncationPolicy(max_dim=40)
        assert policy.grow(20) == 30
        with pytest.raises(TruncationOverflowError):
            policy.grow(30)

    def test_tightened_keeps_the_smaller_target(self):
        policy = TruncationPolicy(target_trace_deficit=1e-12)
        assert policy.tightened(1e-10).target_trace_deficit == 1e-12
        assert policy.tightened(1e-13).target_trace_deficit == 1e-13

    def test_environment_override_for_max_dim(self, monkeypatch):
        monkeypatch.setenv('COVERTLINK_MAX_DIM', '64')
        assert TruncationPolicy().max_dim == 64


@allure.feature("Fock Space")
@allure.story("Entropies and Divergences")
class TestEntropies:

    def test_mean_photon_of_vacuum(self):
        assert mean_photon(fock_state(0, 5)) == 0.0

    def test_mean_photon_of_thermal(self, tight_policy):
        assert mean_photon(thermal_state(2.0, tight_policy)) == pytest.approx(2.0, abs=1e-8)

    def test_mean_photon_of_displaced_thermal(self):
        assert mean_photon(displaced_thermal(1.0, 1.0)) == pytest.approx(2.0, abs=1e-8)

    def test_pure_state_entropy(self):
        assert von_neumann_entropy(fock_state(2, 4)) == pytest.approx(0.0, abs=1e-10)

    def test_thermal_entropy(self):
        assert von_neumann_entropy(thermal_state(1.0)) == pytest.approx(2 * math.log(2), abs=1e-6)

    def test_qre_vacuum_against_thermal(self):
        sigma = thermal_state(1.0)
        vacuum = thermal_state(0.0, dim=sigma.dim)
        assert qre(vacuum, sigma) == pytest.approx(math.log(2), abs=1e-8)

    def test_qre_of_identical_states(self, rng):
        rho = random_density_matrix(4, rng)
        assert qre(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_qre_rank_deficient_reference(self):
        with pytest.raises(DivergenceInfiniteError):
            qre(thermal_state(1.0, dim=4), fock_state(0, 4))

    def test_qre_dimension_mismatch(self):
        with pytest.raises(InvalidParameterError):
            qre(thermal_state(1.0, dim=4), thermal_state(1.0, dim=5))

    def test_qre_vs_thermal_of_thermal(self):
        assert qre_vs_thermal(thermal_state(0.7), 0.7) == pytest.approx(0.0, abs=1e-10)

    def test_qre_vs_thermal_of_vacuum(self):
        assert qre_vs_thermal(fock_state(0, 10), 1.0) == pytest.approx(math.log(2), abs=1e-8)

    def test_qre_vs_thermal_agrees_with_qre(self):
        sigma = thermal_state(0.5, dim=40)
        rho = displaced_thermal(0.4, 0.5, dim=40)
        assert qre_vs_thermal(rho, 0.5) == pytest.approx(qre(rho, sigma), abs=1e-10)

    def test_qre_vs_thermal_rejects_zero_noise(self):
        with pytest.raises(InvalidParameterError):
            qre_vs_thermal(fock_state(0, 4), 0.0)

    def test_qre_is_additive(self, rng):
        rho1, sigma1 = random_density_matrix(3, rng), random_density_matrix(3, rng)
        rho2, sigma2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
        joint = qre(tensor(rho1, rho2), tensor(sigma1, sigma2))
        assert joint == pytest.approx(qre(rho1, sigma1) + qre(rho2, sigma2), abs=1e-10)

    def test_qre_positive_for_distinct_states(self, rng):
        for _ in range(20):
            rho, sigma = random_density_matrix(4, rng), random_density_matrix(4, rng)
            assert qre(rho, sigma) > 0.0
        assert qre(thermal_state(1.0, dim=30), thermal_state(1.1, dim=30)) > 0.0

    @pytest.mark.parametrize("alpha", [0.3, -0.5j, 0.6 + 0.4j])
    @pytest.mark.parametrize("nbar", [0.2, 1.0])
    def test_displacement_keeps_entropy(self, alpha, nbar):
        displaced = von_neumann_entropy(displaced_thermal(alpha, nbar))
        assert displaced == pytest.approx(von_neumann_entropy(thermal_state(nbar)), abs=1e-8)


@allure.feature("Fock Space")
@allure.story("Distances")
class TestDistances:

    def test_identical_states(self):
        rho = thermal_state(1.0, dim=8)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)
        assert detection_error_min(rho, rho) == pytest.approx(0.5)

    def test_orthogonal_pure_states(self):
        assert trace_distance(fock_state(0, 3), fock_state(1, 3)) == pytest.approx(1.0, abs=1e-10)
        assert detection_error_min(fock_state(0, 3), fock_state(1, 3)) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.4, 0.5j, -0.3 + 0.3j])
    def test_joint_displacement_keeps_trace_distance(self, alpha):
        dim = 60
        before = trace_distance(thermal_state(1.0, dim=dim), thermal_state(0.5, dim=dim))
        after = trace_distance(displaced_thermal(alpha, 1.0, dim=dim), displaced_thermal(alpha, 0.5, dim=dim))
        assert after == pytest.approx(before, abs=1e-8)

    def test_helstrom_error_falls_with_displacement(self):
        dim = 40
        background = thermal_state(1.0, dim=dim)
        errors = [detection_error_min(background, displaced_thermal(alpha, 1.0, dim=dim))
                  for alpha in (0.1, 0.3, 0.6)]
        assert all(0.0 < error < 0.5 for error in errors)
        assert errors[0] > errors[1] > errors[2]

    def test_pinsker_on_random_pairs(self, rng):
        for _ in range(200):
            dim = int(rng.integers(2, 7))
            rho, sigma = random_density_matrix(dim, rng), random_density_matrix(dim, rng)
            divergence = qre(rho, sigma)
            assert divergence >= -1e-12
            assert 2 * trace_distance(rho, sigma) <= math.sqrt(2 * max(divergence, 0.0)) + 1e-8
            assert 0.0 <= detection_error_min(rho, sigma) <= 0.5


@allure.feature("Fock Space")
@allure.story("Matrix Calculus")
class TestMatrixCalculus:

    def test_constant_family(self):
        base = np.diag([0.6, 0.4]).astype(complex)
        assert matrix_log_derivative_check(lambda t: base, 0.0, 1e-4) == pytest.approx(0.0, abs=1e-10)

    def test_diagonal_family(self):
        residual = matrix_log_derivative_check(lambda t: np.diag([1.0 + t, 2.0]), 0.0, 1e-4)
        assert residual <= 1e-6

    def test_thermal_family(self):
        residual = matrix_log_derivative_check(lambda t: thermal_state(1.0 + t, dim=8), 0.0, 1e-4)
        assert residual <= 1e-6

    def test_non_diagonal_family(self):
        base = np.array([[0.5, 0.1], [0.1, 0.5]], dtype=complex)
        direction = np.array([[0.1, 0.05j], [-0.05j, -0.1]], dtype=complex)
        assert matrix_log_derivative_check(lambda t: base + t * direction, 0.0, 1e-4) <= 1e-6

    def test_rejects_indefinite_family(self):
        with pytest.raises(InvalidParameterError):
            matrix_log_derivative_check(lambda t: np.diag([1.0, -1.0 + t]), 0.0, 1e-4)

    def test_inverse_derivative(self):
        residual = matrix_inverse_derivative_check(lambda t: np.diag([1.0 + t, 2.0 + t ** 2]), 0.5, 1e-4)
        assert residual <= 1e-6
