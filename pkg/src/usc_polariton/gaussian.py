"""Closed equations for second moments under quadratic generators.

For a generator whose Hamiltonian is quadratic and whose S, K, J operators are
linear in s = (a, b, a^+, b^+), the moments N[p, q] = <s_p s_q> obey

    dN/dt = -i (A N + N A^T)
            - (N kappa^T W^T + W kappa N^T - N^T iota^T W^T - W iota N)

with W = Omega sigma^T and Omega the commutator matrix [s_m, s_n].  No Fock
truncation is involved, which makes this an independent check of the density
matrix propagation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hopfield import SYMPLECTIC, MomentMatrix, PolaritonBasis
from .master import TWO_PI, QuadraticDissipator


def moment_derivative(N, coeffs: QuadraticDissipator):
    W = SYMPLECTIC @ coeffs.sigma.T
    kap, iot, A = coeffs.kappa, coeffs.iota, coeffs.A
    ham = -1j * (A @ N + N @ A.T)
    diss = (N @ kap.T @ W.T + W @ kap @ N.T - N.T @ iot.T @ W.T - W @ iot @ N)
    return ham - diss


def moment_matrix_generator(coeffs: QuadraticDissipator) -> np.ndarray:
    """16x16 matrix G with vec(dN/dt) = G vec(N) (row-major vec)."""
    cols = []
    for k in range(16):
        e = np.zeros(16, dtype=complex)
        e[k] = 1.0
        cols.append(moment_derivative(e.reshape(4, 4), coeffs).reshape(-1))
    return np.array(cols).T


@dataclass
class MomentTrajectory:
    """Second moments along a time grid (units of 2 pi / omega_c)."""

    t: np.ndarray
    second: np.ndarray  # (len(t), 4, 4)
    basis: PolaritonBasis

    def moments(self, k) -> MomentMatrix:
        return MomentMatrix(self.second[k])

    @property
    def na(self):
        return self.second[:, 2, 0].real

    @property
    def nb(self):
        return self.second[:, 3, 1].real

    def polariton_numbers(self):
        c = self.basis.forward
        q = np.einsum("ij,tjk,lk->til", c, self.second, c)
        return q[:, 2, 0].real, q[:, 3, 1].real

    @property
    def nL(self):
        return self.polariton_numbers()[0]

    @property
    def nU(self):
        return self.polariton_numbers()[1]


def gaussian_moment_propagate(moments0: MomentMatrix, coeffs: QuadraticDissipator,
                              basis: PolaritonBasis, t_grid) -> MomentTrajectory:
    """Exact propagation of the moment equations with the matrix exponential."""
    t_grid = np.asarray(t_grid, dtype=float)
    G = moment_matrix_generator(coeffs)
    v0 = np.asarray(moments0.second, dtype=complex).reshape(-1)
    out = np.empty((len(t_grid), 4, 4), dtype=complex)
    spacing = np.diff(t_grid)
    uniform = len(spacing) > 0 and np.ptp(spacing) <= 1e-12 * max(spacing[0], 1e-300)
    if uniform:
        step = scipy.linalg.expm(G * TWO_PI * spacing[0])
        v = scipy.linalg.expm(G * TWO_PI * t_grid[0]) @ v0
        for k in range(len(t_grid)):
            if k:
                v = step @ v
            out[k] = v.reshape(4, 4)
    else:
        for k, t in enumerate(t_grid):
            out[k] = (scipy.linalg.expm(G * TWO_PI * t) @ v0).reshape(4, 4)
    return MomentTrajectory(t_grid, out, basis)


def gaussian_steady_state(coeffs: QuadraticDissipator) -> MomentMatrix:
    """Stationary moments: G vec(N) = 0 together with N - N^T = Omega."""
    G = moment_matrix_generator(coeffs)
    rows, rhs = [G], [np.zeros(16, dtype=complex)]
    for p in range(4):
        for q in range(p + 1, 4):
            r = np.zeros(16, dtype=complex)
            r[4 * p + q] = 1.0
            r[4 * q + p] = -1.0
            rows.append(r[None, :])
            rhs.append(np.array([SYMPLECTIC[p, q]], dtype=complex))
    mat = np.vstack(rows)
    vec = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    return MomentMatrix(sol.reshape(4, 4))
