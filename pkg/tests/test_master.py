import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usc_polariton.errors import DegenerateSteadyState, InvalidParameters, StepUnstable
from usc_polariton.fock import FockConfig, build_mode_operators, density
from usc_polariton.master import (build_filtered_dissipator, closed_generator, liouvillian_spectrum,
                                  markov_coefficients, markov_generator, polariton_rate_matrices,
                                  propagate, regression_correlation, rwa_rates, steady_state)
from usc_polariton.hopfield import SystemParams, diagonalize_polaritons
from usc_polariton.reservoir import (excitonic, photonic, squeezed_ground_correlations,
                                     vacuum_correlations)


@pytest.fixture(scope="module")
def pol_ops(params, basis):
    return build_mode_operators(FockConfig(4, 4, "polariton"), params, basis)


@pytest.fixture(scope="module")
def bare_ops(params, basis):
    return build_mode_operators(FockConfig(4, 4), params, basis)


@pytest.fixture(scope="module")
def generators(pol_ops, bare_ops, basis, specs):
    vac = vacuum_correlations(specs)
    sq = squeezed_ground_correlations(basis, specs)
    return {
        "filtered_vacuum": build_filtered_dissipator(bare_ops, vac),
        "filtered_squeezed": build_filtered_dissipator(bare_ops, sq),
        "pol_squeezed": build_filtered_dissipator(pol_ops, sq),
        "markov": markov_generator(pol_ops, vac),
        "rwa": markov_generator(pol_ops, vac, "rwa_lindblad"),
    }


def random_state(dim, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), name=st.sampled_from(
    ["filtered_vacuum", "filtered_squeezed", "pol_squeezed", "markov", "rwa"]))
def test_trace_and_hermiticity_preserved(generators, seed, name):
    gen = generators[name]
    out = gen.apply(random_state(gen.dim, seed))
    assert abs(np.trace(out)) < 1e-12
    assert np.max(abs(out - out.conj().T)) < 1e-12


def test_apply_matches_superoperator(generators):
    gen = generators["filtered_squeezed"]
    rho = random_state(gen.dim, 7)
    ii, jj = gen.sector(0)
    even = np.zeros_like(rho)
    even[ii, jj] = rho[ii, jj]
    assert np.allclose(gen.superoperator(0) @ even[ii, jj], gen.apply(even)[ii, jj], atol=1e-14)


def test_ground_state_is_stationary_under_squeezed_reservoirs(pol_ops, generators):
    rho = density(pol_ops.ground_state())
    assert np.max(abs(generators["pol_squeezed"].apply(rho))) < 1e-14


def test_filtered_equals_markov_in_polariton_truncation(pol_ops, basis, specs):
    for corr in (vacuum_correlations(specs), squeezed_ground_correlations(basis, specs)):
        a = build_filtered_dissipator(pol_ops, corr)
        b = markov_generator(pol_ops, corr)
        rho = random_state(pol_ops.dim, 11)
        assert np.allclose(a.apply(rho), b.apply(rho), atol=1e-13)


def test_rate_matrix_diagonal_is_rwa_rate(basis, params, specs):
    for corr in (vacuum_correlations(specs), squeezed_ground_correlations(basis, specs)):
        gamma, _ = polariton_rate_matrices(markov_coefficients(basis, corr, params), basis)
        assert np.allclose(np.diag(gamma), rwa_rates(basis, corr), atol=1e-12)
        assert np.allclose(gamma, gamma.conj().T, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(gamma) >= -1e-14)


def test_rate_reduces_to_bare_rate_without_mixing():
    p = SystemParams(1, 2, 0, 0)
    b = diagonalize_polaritons(p)
    corr = vacuum_correlations([photonic(0.03), excitonic(0.01)])
    gamma, kmat = polariton_rate_matrices(markov_coefficients(b, corr, p), b)
    assert np.allclose(np.diag(gamma), [0.03, 0.01])
    assert np.allclose(kmat, 0)


def test_closed_evolution_conserves_eigenstate_populations(pol_ops):
    gen = closed_generator(pol_ops)
    rho = density(pol_ops.fock_state(1, 2))
    traj = propagate(rho, gen, np.linspace(0, 2, 11))
    assert np.allclose(traj.nL, 1, atol=1e-10) and np.allclose(traj.nU, 2, atol=1e-10)
    assert np.allclose(traj.trace, 1, atol=1e-12)


def test_superoperator_and_direct_rk4_agree(generators, pol_ops):
    gen = generators["markov"]
    rho = density(pol_ops.bare_vacuum())
    t = np.linspace(0, 1, 6)
    a = propagate(rho, gen, t, dt=1e-2, method="superoperator")
    b = propagate(rho, gen, t, dt=1e-2, method="direct")
    assert np.allclose(a.na, b.na, atol=1e-12)
    c = propagate(rho, gen, t, dt=1e-2, store_states=True)
    assert np.allclose(c.nb, a.nb, atol=1e-12) and len(c.states) == len(t)


def test_rk4_step_converges(generators, pol_ops):
    gen = generators["filtered_vacuum"]
    rho = density(gen.ops.bare_vacuum())
    t = np.linspace(0, 1, 3)
    na = [propagate(rho, gen, t, dt=dt).na for dt in (4e-3, 2e-3, 1e-3)]
    ratio = np.max(abs(na[0] - na[1])) / np.max(abs(na[1] - na[2]))
    assert 12 < ratio < 20  # fourth order


def test_unstable_step_detected(generators, pol_ops):
    with pytest.raises(StepUnstable):
        propagate(density(pol_ops.bare_vacuum()), generators["filtered_vacuum"],
                  np.linspace(0, 10, 2), dt=10)


def test_bad_time_grid(generators, pol_ops):
    with pytest.raises(InvalidParameters):
        propagate(density(pol_ops.bare_vacuum()), generators["markov"], [0, 1, 3])


def test_squeezed_steady_state_is_ground_state(pol_ops, generators):
    rho = steady_state(generators["pol_squeezed"])
    g = pol_ops.ground_state()
    assert np.vdot(g, rho @ g).real == pytest.approx(1, abs=1e-10)


def test_vacuum_steady_state_is_excited(pol_ops, generators):
    rho = steady_state(generators["markov"])
    n_l = np.trace(pol_ops.number_ops()["nL"] @ rho).real
    assert n_l > 1e-4
    assert np.allclose(generators["markov"].apply(rho), 0, atol=1e-12)


def test_closed_system_steady_state_is_degenerate(pol_ops):
    with pytest.raises(DegenerateSteadyState):
        steady_state(closed_generator(pol_ops))


def test_liouvillian_spectrum_is_stable(generators):
    vals, right, left = liouvillian_spectrum(generators["filtered_squeezed"])
    assert np.max(vals.real) < 1e-10
    assert np.sum(abs(vals) < 1e-10) == 1
    # rows of the returned dual basis act without further conjugation
    assert np.allclose(np.einsum("ik,ik->k", left, right), 1)


def test_regression_at_zero_delay(pol_ops, generators):
    gen = generators["pol_squeezed"]
    rho = steady_state(gen)
    a = pol_ops.a
    corr = regression_correlation(rho, a, a.conj().T, np.linspace(0, 1, 5), gen)
    assert corr[0] == pytest.approx(np.trace(a @ a.conj().T @ rho), abs=1e-12)


def test_regression_oscillates_at_lower_polariton_frequency(pol_ops, generators, basis, specs):
    gen = generators["pol_squeezed"]
    rho = steady_state(gen)
    p = pol_ops.p_L
    tau = np.linspace(0, 20, 801)
    corr = regression_correlation(rho, p, p.conj().T, tau, gen, dt=5e-3)
    # <p_L(tau) p_L^+> = exp(lambda tau) with lambda the odd-sector Liouvillian eigenvalue
    # next to -i omega_L: Lamb-shifted frequency, half the polariton decay rate
    phase = np.unwrap(np.angle(corr))
    freq = -np.polyfit(2 * np.pi * tau, phase, 1)[0]
    decay = -np.polyfit(2 * np.pi * tau, np.log(abs(corr)), 1)[0]
    vals = liouvillian_spectrum(gen, 1)[0]
    lam = vals[np.argmin(abs(vals + 1j * basis.omega[0]))]
    assert freq == pytest.approx(-lam.imag, rel=1e-4)
    assert decay == pytest.approx(-lam.real, rel=1e-3)
    assert freq == pytest.approx(basis.omega[0], rel=5e-2)
    rate = rwa_rates(basis, squeezed_ground_correlations(basis, specs))[0]
    assert decay == pytest.approx(0.5 * rate, rel=1e-2)


def test_bohr_frequency_at_minus_cutoff(params, basis):
    # 5 omega_U - 5 omega_L = 10 exactly; creation channels see this Bohr frequency at -Lambda
    ops = build_mode_operators(FockConfig(6, 6, "polariton"), params, basis)
    specs = [photonic(0.01, 10.0), excitonic(0.01, 10.0)]
    gen = build_filtered_dissipator(ops, vacuum_correlations(specs))
    assert np.allclose(gen.apply(density(ops.ground_state())).trace(), 0, atol=1e-14)


def occupations(ops, rho):
    obs = ops.number_ops()
    return np.array([np.trace(obs[k] @ rho).real for k in ("na", "nb", "nL", "nU")])


@pytest.mark.parametrize("mode", ["vacuum", "squeezed"])
def test_polariton_truncation_converged(params, basis, specs, mode):
    corr = vacuum_correlations(specs) if mode == "vacuum" else squeezed_ground_correlations(basis, specs)
    values = []
    for n in (6, 8):
        ops = build_mode_operators(FockConfig(n, n, "polariton"), params, basis)
        values.append(occupations(ops, steady_state(build_filtered_dissipator(ops, corr))))
    assert np.max(abs(values[0] - values[1])) < 1e-6


@pytest.fixture(scope="module")
def bare_truncations(params, basis):
    return [build_mode_operators(FockConfig(n, n), params, basis) for n in (8, 10)]


@pytest.mark.slow
@pytest.mark.xfail(reason="bare n=8 misses <b+b> of the vacuum steady state by 4.6e-3", strict=True)
def test_bare_steady_state_truncation_converged(bare_truncations, specs):
    corr = vacuum_correlations(specs)
    values = [occupations(ops, steady_state(build_filtered_dissipator(ops, corr)))
              for ops in bare_truncations]
    assert np.max(abs(values[0] - values[1])) < 1e-3


@pytest.mark.slow
@pytest.mark.xfail(reason="the bare-vacuum quench populates <a+a> near 1; bare n=8 is not "
                          "converged on the transient", strict=True)
def test_quench_transient_truncation_converged(bare_truncations, basis, specs):
    corr = squeezed_ground_correlations(basis, specs)
    t = np.linspace(0, 1.5, 16)
    na = [propagate(density(ops.bare_vacuum()), build_filtered_dissipator(ops, corr), t).na
          for ops in bare_truncations]
    assert np.max(abs(na[0] - na[1])) < 1e-3
