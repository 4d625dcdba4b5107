"""Fano diagonalization of one cavity mode coupled to its flat continuum.

The dressed operator of frequency omega contains the bare photon with weight
u_c(omega) = kappa / (omega - omega_c zeta(omega)), where kappa^2 = Gamma/2pi is the
flat coupling density and

    zeta(omega) = 1 - (1/omega_c) int_0^Lambda dw' kappa^2 / (w' - omega + i0).

On the support the integral is a principal-value logarithm plus a delta
contribution, so zeta has imaginary part +Gamma/(2 omega_c) there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, InvalidParameters, SingularFrequency
from .hopfield import PolaritonBasis, SystemParams
from .reservoir import KernelSpec, _as_kernel_dict, kernel_time


def _photonic(kernels) -> KernelSpec:
    if isinstance(kernels, KernelSpec):
        return kernels
    return _as_kernel_dict(kernels)["photonic"]


def compute_zeta(kernels, omega, omega_c: float = 1.0):
    """zeta(omega) for real omega away from 0 and the cutoff."""
    spec = _photonic(kernels)
    omega = np.asarray(omega, dtype=float)
    lam = spec.cutoff
    if np.any(np.abs(omega) < 1e-9 * lam) or np.any(np.abs(omega - lam) < 1e-9 * lam):
        raise SingularFrequency("zeta is singular at omega = 0 and at the cutoff")
    density = spec.gamma / (2 * np.pi)
    pv = density * np.log(np.abs((lam - omega) / omega))
    inside = (omega > 0) & (omega < lam)
    delta = np.where(inside, np.pi * density, 0.0)
    return (1 - (pv - 1j * delta) / omega_c)[()]


@dataclass(frozen=True)
class FanoCoefficients:
    omega: np.ndarray
    u_c: np.ndarray
    zeta: np.ndarray

    @property
    def weight(self):
        return np.abs(self.u_c) ** 2

    @property
    def normalization(self):
        return float(np.trapezoid(self.weight, self.omega))

    def to_csv(self, path):
        data = np.column_stack([self.omega, self.u_c.real, self.u_c.imag, self.weight])
        np.savetxt(path, data, delimiter=",", header="omega,re_u,im_u,weight",
                   comments="", fmt="%.12g")


def fano_grid(kernels, omega_c: float = 1.0, points: int = 4001):
    """Grid on (0, Lambda) dense around omega_c and log-spaced toward both ends."""
    spec = _photonic(kernels)
    lam = spec.cutoff
    width = max(spec.gamma / 2, 1e-9)
    core = omega_c + width * np.sinh(np.linspace(-12, 12, points)) / np.sinh(12) * 200
    ends = np.geomspace(1e-7 * lam, 0.5 * lam, points)
    grid = np.unique(np.concatenate([core, ends, lam - ends]))
    return grid[(grid > 1e-8 * lam) & (grid < lam * (1 - 1e-8))]


def spectral_weight(kernels, params: SystemParams, omega_grid=None,
                    tol: float = 1e-2) -> FanoCoefficients:
    """u_c(omega) and zeta(omega) on a grid, with the weight normalization checked."""
    spec = _photonic(kernels)
    if spec.gamma == 0:
        raise InvalidParameters("the weight is a delta function when Gamma = 0")
    omega = fano_grid(spec, params.omega_c) if omega_grid is None else np.asarray(omega_grid, float)
    zeta = compute_zeta(spec, omega, params.omega_c)
    kappa = np.sqrt(spec.gamma / (2 * np.pi))
    inside = (omega > 0) & (omega < spec.cutoff)
    u = np.where(inside, kappa / (omega - params.omega_c * zeta), 0.0)
    result = FanoCoefficients(omega, u, zeta)
    if abs(result.normalization - 1) > tol:
        raise GridTooCoarse(f"weight integrates to {result.normalization:.6f}")
    return result


def ground_state_reservoir_correlation(basis: PolaritonBasis, kernels, tau_grid):
    """Weak-dissipation photonic reservoir correlations in the whole-system ground state.

    Returns (<F_c^+ F_c(tau)>, <F_c F_c(tau)>) = G_c(tau) * (<a^+a>_g, <a a>_g),
    with <a^+a>_g = sum_j |y_j|^2 and <a a>_g = -sum_j w_j^* y_j.
    """
    spec = _photonic(kernels)
    g = kernel_time(spec, tau_grid)
    n_photon = float(np.sum(np.abs(basis.y) ** 2))
    anomalous = -complex(np.sum(np.conj(basis.w) * basis.y))
    return g * n_photon, g * anomalous
