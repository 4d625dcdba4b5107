import numpy as np
import pytest

from usc_polariton.detection import output_detection_spectrum
from usc_polariton.errors import NotStationary, SingularFrequency
from usc_polariton.fock import FockConfig, build_mode_operators, density
from usc_polariton.master import build_filtered_dissipator, steady_state
from usc_polariton.reservoir import (excitonic, photonic, squeezed_ground_correlations,
                                     vacuum_correlations)

OMEGA = np.array([0.2, 0.414, 1.0, 2.414, -0.414, -2.414])


@pytest.fixture(scope="module")
def ops(params, basis):
    return build_mode_operators(FockConfig(4, 4, "polariton"), params, basis)


def spectrum(ops, corr, omega=OMEGA):
    gen = build_filtered_dissipator(ops, corr)
    return output_detection_spectrum(steady_state(gen), gen, corr, omega)


def test_squeezed_ground_state_is_dark(ops, basis, specs):
    result = spectrum(ops, squeezed_ground_correlations(basis, specs))
    assert np.max(abs(result.normal)) < 1e-12
    assert np.max(abs(result.anomalous)) < 1e-3 * specs[0].gamma


def test_vacuum_reservoirs_give_a_signal_at_the_polaritons(ops, specs):
    result = spectrum(ops, vacuum_correlations(specs))
    assert abs(result.normal[3]) > 1e-3
    assert abs(result.normal[1]) > abs(result.normal[0])
    assert np.allclose(result.normal.imag, 0, atol=1e-12)


def test_anomalous_spectrum_is_even(ops, specs):
    # <F(omega) F> pairs omega with -omega
    result = spectrum(ops, vacuum_correlations(specs))
    assert result.anomalous[1] == pytest.approx(result.anomalous[4], abs=1e-12)
    assert result.anomalous[3] == pytest.approx(result.anomalous[5], abs=1e-12)


def test_no_photonic_loss_means_no_output(ops, basis):
    specs = [photonic(0.0), excitonic(0.02)]
    for corr in (vacuum_correlations(specs), squeezed_ground_correlations(basis, specs)):
        result = spectrum(ops, corr)
        assert np.max(abs(result.normal)) < 1e-15 and np.max(abs(result.anomalous)) < 1e-15


def test_delta_kernel_limit(ops, basis):
    # a time-local photonic kernel keeps the squeezed ground state dark
    specs = [photonic(0.01, shape="delta"), excitonic(0.01)]
    result = spectrum(ops, squeezed_ground_correlations(basis, specs), OMEGA[:4])
    assert np.max(abs(result.normal)) < 1e-12


def test_requires_stationary_state(ops, specs):
    corr = vacuum_correlations(specs)
    gen = build_filtered_dissipator(ops, corr)
    with pytest.raises(NotStationary):
        output_detection_spectrum(density(ops.fock_state(1, 1)), gen, corr, OMEGA)


def test_rejects_singular_frequency(ops, specs):
    corr = vacuum_correlations(specs)
    gen = build_filtered_dissipator(ops, corr)
    with pytest.raises(SingularFrequency):
        output_detection_spectrum(steady_state(gen), gen, corr, [0.0])


def test_csv_export(tmp_path, ops, basis, specs):
    result = spectrum(ops, vacuum_correlations(specs), OMEGA[:2])
    path = tmp_path / "s.csv"
    result.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "omega,re_nn,im_nn,re_anom,im_anom" and len(lines) == 3
