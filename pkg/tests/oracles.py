"""Independent reference calculations shared by several test modules."""
import numpy as np


def total_system_moments(params, gamma, cutoff, n_modes, times, initial=None):
    """Second moments <s_p s_q> of the cavity and excitation in a discretized total system.

    Each reservoir is replaced by ``n_modes`` oscillators at the midpoints of
    (0, cutoff) with the rotating-wave coupling i kappa (F^+ a - a^+ F) and
    kappa^2 = gamma dW / 2pi.  Everything starts in the vacuum of the bare
    operators unless ``initial`` gives the 4x4 system moment matrix (reservoirs in vacuum).
    The evolution is exact for the quadratic total Hamiltonian; ``times`` are plain times.
    """
    dw = cutoff / n_modes
    freqs = (np.arange(n_modes) + 0.5) * dw
    kap = np.sqrt(gamma * dw / (2 * np.pi))
    n = 2 + 2 * n_modes
    h = np.zeros((n, n), complex)
    k = np.zeros((n, n), complex)
    h[0, 0] = params.omega_c + 2 * params.diamag
    h[1, 1] = params.omega_x
    h[0, 1], h[1, 0] = 1j * params.rabi, -1j * params.rabi
    k[0, 0] = 2 * params.diamag
    k[0, 1] = k[1, 0] = -1j * params.rabi
    for r in range(2):
        idx = 2 + r * n_modes + np.arange(n_modes)
        h[idx, idx] = freqs
        h[idx, r] = 1j * kap
        h[r, idx] = -1j * kap
    # d c/dt = -i A c for c = (modes, modes^+)
    a_tot = np.block([[h, k], [-k.conj(), -h.conj()]])
    vals, vecs = np.linalg.eig(a_tot)
    inv = np.linalg.inv(vecs)
    n0 = np.zeros((2 * n, 2 * n), complex)
    n0[np.arange(n), n + np.arange(n)] = 1.0
    sel = [0, 1, n, n + 1]
    if initial is not None:
        n0[np.ix_(sel, sel)] = initial
    out = []
    for t in np.atleast_1d(times):
        ut = (vecs[sel] * np.exp(-1j * vals * t)) @ inv
        out.append(ut @ n0 @ ut.T)
    return np.array(out)
