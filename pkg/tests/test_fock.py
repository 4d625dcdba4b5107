import numpy as np
import pytest

from usc_polariton.errors import InvalidParameters
from usc_polariton.fock import FockConfig, build_mode_operators, check_density, density
from usc_polariton.hopfield import SystemParams, diagonalize_polaritons


def ops_for(params, n, basis="bare"):
    return build_mode_operators(FockConfig(n, n, basis), params, diagonalize_polaritons(params))


def test_uncoupled_hamiltonian_is_diagonal():
    ops = ops_for(SystemParams(1, 2, 0, 0), 2)
    assert np.allclose(ops.H0, np.diag([0, 2, 1, 3]))


def test_commutator_except_last_level(params):
    n = 6
    ops = ops_for(params, n)
    comm = ops.a @ ops.ad - ops.ad @ ops.a
    photon_level = np.repeat(np.arange(n), n)
    keep = photon_level < n - 1
    assert np.allclose(comm[np.ix_(keep, keep)], np.eye(keep.sum()))


def test_truncated_gap(params, basis):
    energies = np.linalg.eigvalsh(ops_for(params, 10).H0)
    assert energies[1] - energies[0] == pytest.approx(basis.omega[0], abs=1e-3)


def test_polariton_truncation_is_exact(params, basis):
    ops = ops_for(params, 4, "polariton")
    energies = np.linalg.eigvalsh(ops.H0)
    assert energies[0] == pytest.approx(0, abs=1e-12)
    assert energies[1] == pytest.approx(basis.omega[0])
    g = ops.ground_state()
    assert np.allclose(ops.p_L @ g, 0) and np.allclose(ops.p_U @ g, 0)


def test_bare_ground_state_virtual_photons(params):
    ops = ops_for(params, 12)
    g = ops.ground_state()
    assert np.vdot(g, ops.ad @ ops.a @ g).real == pytest.approx(0.207, abs=2e-3)


def test_fock_state_and_density(params):
    ops = ops_for(params, 3)
    rho = density(2 * ops.fock_state(1, 2))
    assert check_density(rho) == []
    assert np.vdot(ops.fock_state(1, 2), ops.ad @ ops.a @ ops.fock_state(1, 2)).real == pytest.approx(1)
    with pytest.raises(InvalidParameters):
        ops.fock_state(3, 0)


def test_check_density_reports_problems():
    rho = np.diag([1.2, -0.2]).astype(complex)
    rho[0, 1] = 0.5
    problems = check_density(rho)
    assert "not Hermitian" in problems and "negative eigenvalue below soft threshold" in problems


def test_config_validation():
    with pytest.raises(InvalidParameters):
        FockConfig(1, 4)
    with pytest.raises(InvalidParameters):
        FockConfig(50, 50)
    with pytest.raises(InvalidParameters):
        FockConfig(4, 4, "coherent")
