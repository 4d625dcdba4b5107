"""Truncated two-mode Fock space: mode operators, H0 and initial states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters
from .hopfield import PolaritonBasis, SystemParams

MAX_DIM = 1600


@dataclass(frozen=True)
class FockConfig:
    """Level cutoffs for the two modes.

    In the default ``basis="bare"`` the modes are the photon (n_a levels) and the
    excitation (n_b levels), ordered |photon> (x) |excitation>.  With
    ``basis="polariton"`` the truncation is done on lower/upper polariton number
    states instead; H0 is then exactly diagonal and p_j annihilates the
    truncated ground state exactly.
    """

    n_a: int = 8
    n_b: int = 8
    basis: str = "bare"

    def __post_init__(self):
        if self.n_a < 2 or self.n_b < 2:
            raise InvalidParameters("Fock cutoffs must be >= 2")
        if self.n_a * self.n_b > MAX_DIM:
            raise InvalidParameters(f"n_a*n_b = {self.n_a * self.n_b} exceeds {MAX_DIM}")
        if self.basis not in ("bare", "polariton"):
            raise InvalidParameters(f"unknown Fock basis {self.basis!r}")

    @property
    def dim(self):
        return self.n_a * self.n_b


def destroy(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


@dataclass(frozen=True)
class ModeOperators:
    """Dense matrices of a, b, their adjoints, the polariton operators and H0."""

    config: FockConfig
    params: SystemParams
    basis: PolaritonBasis
    a: np.ndarray
    b: np.ndarray
    p_L: np.ndarray
    p_U: np.ndarray
    H0: np.ndarray
    parity: np.ndarray

    @property
    def ad(self):
        return self.a.conj().T

    @property
    def bd(self):
        return self.b.conj().T

    @property
    def s(self):
        """The operator vector (a, b, a^+, b^+)."""
        return [self.a, self.b, self.ad, self.bd]

    @property
    def dim(self):
        return self.H0.shape[0]

    def combo(self, coef):
        """sum_m coef[m] s_m as a matrix."""
        return sum(c * op for c, op in zip(coef, self.s))

    def number_ops(self):
        """Observables recorded along trajectories: p_L^+p_L, p_U^+p_U, a^+a, b^+b."""
        return {
            "nL": self.p_L.conj().T @ self.p_L,
            "nU": self.p_U.conj().T @ self.p_U,
            "na": self.ad @ self.a,
            "nb": self.bd @ self.b,
        }

    def ground_state(self):
        """Lowest eigenvector of the truncated H0."""
        if self.config.basis == "polariton":
            psi = np.zeros(self.dim, dtype=complex)
            psi[0] = 1.0
            return psi
        _, vecs = np.linalg.eigh(self.H0)
        return vecs[:, 0]

    def bare_vacuum(self):
        """State with no photon and no excitation."""
        if self.config.basis == "bare":
            psi = np.zeros(self.dim, dtype=complex)
            psi[0] = 1.0
            return psi
        _, vecs = np.linalg.eigh(self.ad @ self.a + self.bd @ self.b)
        psi = vecs[:, 0]
        return psi * abs(psi[0]) / psi[0] if abs(psi[0]) > 0 else psi

    def fock_state(self, n1, n2):
        """Basis state |n1, n2> of the truncation modes (photon/excitation or L/U)."""
        if not (0 <= n1 < self.config.n_a and 0 <= n2 < self.config.n_b):
            raise InvalidParameters(f"Fock state ({n1}, {n2}) outside the truncation")
        psi = np.zeros(self.dim, dtype=complex)
        psi[n1 * self.config.n_b + n2] = 1.0
        return psi


def _parity(config):
    n1 = np.repeat(np.arange(config.n_a), config.n_b)
    n2 = np.tile(np.arange(config.n_b), config.n_a)
    return (n1 + n2) % 2


def build_mode_operators(config: FockConfig, params: SystemParams,
                         basis: PolaritonBasis) -> ModeOperators:
    eye_a = np.eye(config.n_a)
    eye_b = np.eye(config.n_b)
    m1 = np.kron(destroy(config.n_a), eye_b)
    m2 = np.kron(eye_a, destroy(config.n_b))
    if config.basis == "bare":
        a, b = m1, m2
        ad, bd = a.conj().T, b.conj().T
        p_L = basis.w[0] * a + basis.x[0] * b + basis.y[0] * ad + basis.z[0] * bd
        p_U = basis.w[1] * a + basis.x[1] * b + basis.y[1] * ad + basis.z[1] * bd
        xa = a + ad
        H0 = (params.omega_c * ad @ a + params.omega_x * bd @ b
              + 1j * params.rabi * xa @ (b - bd) + params.diamag * xa @ xa)
    else:
        p_L, p_U = m1, m2
        q = [p_L, p_U, p_L.conj().T, p_U.conj().T]
        t = basis.inverse
        a = sum(t[0, k] * q[k] for k in range(4))
        b = sum(t[1, k] * q[k] for k in range(4))
        H0 = basis.omega[0] * p_L.conj().T @ p_L + basis.omega[1] * p_U.conj().T @ p_U
    H0 = 0.5 * (H0 + H0.conj().T)
    return ModeOperators(config, params, basis, a, b, p_L, p_U, H0, _parity(config))


def density(psi):
    """Projector |psi><psi| normalized to unit trace."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def check_density(rho, herm_tol=1e-10, trace_tol=1e-8, min_eig=-1e-3):
    """Return a list of violated DensityOperator invariants (empty when valid)."""
    problems = []
    if np.max(abs(rho - rho.conj().T)) > herm_tol:
        problems.append("not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        problems.append("trace != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < min_eig:
        problems.append("negative eigenvalue below soft threshold")
    return problems
