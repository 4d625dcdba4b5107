"""Closed two-mode light-matter Hamiltonian and its polariton (Hopfield) basis.

The Hamiltonian is

    H0 = wc a^+a + wx b^+b + i Rabi (a + a^+)(b - b^+) + D (a + a^+)^2

with hbar = 1 and frequencies in units of the cavity frequency.  Operators are
ordered throughout the package as the vector s = (a, b, a^+, b^+).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, InvalidParameters, NonPositiveMode

BRANCHES = ("L", "U")

# [s_m, s_n] for s = (a, b, a^+, b^+)
SYMPLECTIC = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [-1, 0, 0, 0],
     [0, -1, 0, 0]], dtype=float)

# index of s_m^+ inside s
DAGGER_INDEX = np.array([2, 3, 0, 1])


@dataclass(frozen=True)
class SystemParams:
    """Cavity frequency, matter frequency, coupling strength and diamagnetic coefficient."""

    omega_c: float = 1.0
    omega_x: float = 1.0
    rabi: float = 1.0
    diamag: float = 1.0

    def __post_init__(self):
        for name in ("omega_c", "omega_x", "rabi", "diamag"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidParameters(f"{name} must be finite and >= 0, got {value}")
        if self.rabi > 0:
            if self.omega_x == 0:
                raise InvalidParameters("omega_x must be > 0 when rabi > 0")
            threshold = self.rabi**2 / self.omega_x
            if self.diamag < threshold * (1 - 1e-12):
                raise InvalidParameters(
                    f"diamag={self.diamag} below rabi^2/omega_x={threshold}")

    @classmethod
    def minimal_coupling(cls, omega_c=1.0, omega_x=1.0, rabi=1.0):
        """Parameters with the diamagnetic term at its lower bound rabi^2/omega_x."""
        return cls(omega_c, omega_x, rabi, rabi**2 / omega_x)


@dataclass(frozen=True)
class PolaritonBasis:
    """Bogoliubov coefficients p_j = w_j a + x_j b + y_j a^+ + z_j b^+ for j = L, U."""

    w: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    omega: np.ndarray

    @property
    def forward(self) -> np.ndarray:
        """Rows express (p_L, p_U, p_L^+, p_U^+) as combinations of s."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array([
            [w[0], x[0], y[0], z[0]],
            [w[1], x[1], y[1], z[1]],
            [y[0].conjugate(), z[0].conjugate(), w[0].conjugate(), x[0].conjugate()],
            [y[1].conjugate(), z[1].conjugate(), w[1].conjugate(), x[1].conjugate()],
        ], dtype=complex)

    @property
    def inverse(self) -> np.ndarray:
        """Rows express s = (a, b, a^+, b^+) through (p_L, p_U, p_L^+, p_U^+)."""
        w, x, y, z = self.w, self.x, self.y, self.z
        c = np.conjugate
        return np.array([
            [c(w[0]), c(w[1]), -y[0], -y[1]],
            [c(x[0]), c(x[1]), -z[0], -z[1]],
            [-c(y[0]), -c(y[1]), w[0], w[1]],
            [-c(z[0]), -c(z[1]), x[0], x[1]],
        ], dtype=complex)

    def symplectic_norms(self) -> np.ndarray:
        return (abs(self.w)**2 + abs(self.x)**2 - abs(self.y)**2 - abs(self.z)**2)

    def cross_overlap(self) -> complex:
        """[p_L, p_U^+]; vanishes for a valid basis."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return (w[0] * w[1].conjugate() + x[0] * x[1].conjugate()
                - y[0].conjugate() * y[1] - z[0].conjugate() * z[1])


@dataclass(frozen=True)
class MomentMatrix:
    """Second moments ``second[m, n] = <s_m s_n>`` with s = (a, b, a^+, b^+)."""

    second: np.ndarray

    @property
    def normal(self) -> np.ndarray:
        """``<s_m s_n^+>``, the layout used for the input-noise correlation matrix."""
        return self.second[:, DAGGER_INDEX]

    @property
    def n_a(self) -> float:
        return self.second[2, 0].real

    @property
    def n_b(self) -> float:
        return self.second[3, 1].real

    @property
    def aa(self) -> complex:
        return self.second[0, 0]

    @property
    def bb(self) -> complex:
        return self.second[1, 1]

    @property
    def ab(self) -> complex:
        return self.second[0, 1]

    @property
    def adag_b(self) -> complex:
        return self.second[2, 1]

    def commutator_defect(self) -> float:
        """max |<s_m s_n> - <s_n s_m> - [s_m, s_n]|."""
        return float(np.max(abs(self.second - self.second.T - SYMPLECTIC)))

    def polariton(self, basis: PolaritonBasis) -> np.ndarray:
        """Moments of (p_L, p_U, p_L^+, p_U^+) in the same layout."""
        c = basis.forward
        return c @ self.second @ c.T

    @classmethod
    def vacuum(cls) -> "MomentMatrix":
        """Bare photon and excitation vacuum: only <a a^+> = <b b^+> = 1."""
        second = np.zeros((4, 4), dtype=complex)
        second[0, 2] = second[1, 3] = 1.0
        return cls(second)


def build_bogoliubov_matrix(params: SystemParams) -> np.ndarray:
    """Matrix whose eigenvectors are the coefficients (w, x, y, z) of p_j.

    Eigenvalues come in pairs +omega_j (annihilators) and -omega_j (creators).
    """
    wc, wx, r, d = params.omega_c, params.omega_x, params.rabi, params.diamag
    return np.array([
        [wc + 2 * d, -1j * r, -2 * d, -1j * r],
        [1j * r, wx, -1j * r, 0],
        [2 * d, -1j * r, -wc - 2 * d, -1j * r],
        [-1j * r, 0, 1j * r, -wx],
    ], dtype=complex)


def heisenberg_matrix(params: SystemParams) -> np.ndarray:
    """Matrix A with [s, H0] = A s; the transpose of the Bogoliubov matrix."""
    return build_bogoliubov_matrix(params).T


def _fix_phase(vec):
    lead = vec[0] if abs(vec[0]) >= 1e-12 else vec[1]
    return vec * (abs(lead) / lead)


def diagonalize_polaritons(params: SystemParams) -> PolaritonBasis:
    """Solve the Bogoliubov eigenproblem and return symplectically normalized branches.

    Branches are sorted by frequency (L below U).  Each eigenvector's global
    phase is chosen so that w_j is real and non-negative (x_j if w_j vanishes).
    """
    mat = build_bogoliubov_matrix(params)
    vals, vecs = np.linalg.eig(mat)
    if np.max(abs(vals.imag)) > 1e-10:
        raise NonPositiveMode(f"complex Bogoliubov eigenvalues {vals}")
    vals = vals.real
    eta = np.array([1, 1, -1, -1])
    norms = np.einsum("im,i,im->m", vecs.conj(), eta, vecs).real
    positive = np.flatnonzero(norms > 0)
    if len(positive) != 2 or np.any(vals[positive] <= 0):
        raise NonPositiveMode(f"eigenvalues {vals} with symplectic norms {norms}")
    order = positive[np.argsort(vals[positive])]
    omega = vals[order]
    if abs(omega[1] - omega[0]) < 1e-12 * max(1.0, abs(omega[1])):
        raise DegenerateSpectrum(f"omega_L = omega_U = {omega[0]}")
    cols = [_fix_phase(vecs[:, k] / np.sqrt(norms[k])) for k in order]
    coef = np.array(cols)
    return PolaritonBasis(w=coef[:, 0].copy(), x=coef[:, 1].copy(), y=coef[:, 2].copy(),
                          z=coef[:, 3].copy(), omega=omega)


def ground_state_moments(basis: PolaritonBasis) -> MomentMatrix:
    """Second moments of s in the state annihilated by both p_L and p_U.

    With s = T q, q = (p_L, p_U, p_L^+, p_U^+), the only nonzero polariton
    moments are <p_j p_j^+> = 1, so <s_m s_n> = sum_j T[m, j] T[n, j + 2].
    """
    t = basis.inverse
    second = t[:, :2] @ t[:, 2:].T
    return MomentMatrix(second)
