"""Normal- and time-ordered photodetection spectra from the master equation.

The output field is F_out = F_c + G_c * a (convolution), so in frequency space
F_out(omega) = F_c(omega) + G_c(omega) a(omega).  Before ordering, the photon
operator and the photonic free field are split into lowering and raising parts
in the polariton basis,

    a_l = w_L^* p_L + w_U^* p_U,     a_r = -y_L p_L^+ - y_U p_U^+,

and F_c = F_l + F_r likewise.  A field part F_alpha is paired with the system
part a_alpha: it obeys the same Langevin structure
d a_alpha/dt = [a_alpha, H0]/i - int G_c a_alpha - F_alpha.

For two operators X (at t + tau) and Y (at t) the ordered product is

    :X Y: = T+[X_l Y_l] + T-[X_r Y_r] + X_r Y_l + Y_r X_l

with T+ putting the later lowering operator on the left and T- putting the
later raising operator on the right.  Every piece is a sum of half-line
transforms

    P_XY(omega) = int_0^inf dtau e^{i omega tau} <X(t + tau) Y(t)>
    Q_XY(omega) = int_0^inf dtau e^{i omega tau} <Y(t) X(t + tau)>

which are evaluated in closed form from the Liouvillian eigenmodes of the
odd-parity sector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotStationary, SingularFrequency
from .master import Generator, liouvillian_spectrum
from .reservoir import ReservoirCorrelations

# elementary operators: system parts then field parts
#   0 a_l   1 a_r   2 a_l^+   3 a_r^+   4 F_l   5 F_r   6 F_l^+   7 F_r^+
LOWERING = np.array([1, 0, 0, 1, 1, 0, 0, 1], dtype=bool)


@dataclass
class SpectralResult:
    """Ordered output spectra on a frequency grid (frequencies in units of omega_c)."""

    omega: np.ndarray
    normal: np.ndarray  # <:F_out(omega) F_out^+:>
    anomalous: np.ndarray  # <:F_out(omega) F_out:>

    def to_csv(self, path):
        data = np.column_stack([self.omega, self.normal.real, self.normal.imag,
                                self.anomalous.real, self.anomalous.imag])
        np.savetxt(path, data, delimiter=",", header="omega,re_nn,im_nn,re_anom,im_anom",
                   comments="", fmt="%.12g")


def photon_parts(ops):
    """(a_l, a_r, a_l^+, a_r^+) as matrices of the truncated space."""
    t = ops.basis.inverse
    q = [ops.p_L, ops.p_U, ops.p_L.conj().T, ops.p_U.conj().T]
    a_l = t[0, 0] * q[0] + t[0, 1] * q[1]
    a_r = t[0, 2] * q[2] + t[0, 3] * q[3]
    return [a_l, a_r, a_l.conj().T, a_r.conj().T]


class OrderedSpectrum:
    """Evaluates ordered two-time spectra of the photonic output channel in a stationary state."""

    def __init__(self, gen: Generator, rho_ss, corr: ReservoirCorrelations, tol=1e-6):
        self.gen = gen
        self.rho = np.asarray(rho_ss, dtype=complex)
        residual = np.max(abs(gen.apply(self.rho)))
        if residual > tol:
            raise NotStationary(f"|L[rho]| = {residual:.2e} exceeds {tol:.0e}")
        self.kernel = corr.kernels["photonic"]
        self.parts = photon_parts(gen.ops)
        self.conj = [False, False, True, True]
        # partner moments <A_m A_n> for the field self-correlations
        self.N = np.array([[np.trace(am @ an @ self.rho) for an in self.parts]
                           for am in self.parts])
        rho_dot_diss = gen.apply(self.rho) + 1j * (gen.H @ self.rho - self.rho @ gen.H)
        self._modes(rho_dot_diss)

    def _ghat(self, m, z):
        z = np.asarray(z)
        if np.iscomplexobj(z):
            z = z.real + 1j * np.maximum(z.imag, 0.0)
        return self.kernel.halfline_conj(z) if self.conj[m] else self.kernel.halfline(z)

    def _modes(self, ld_rho):
        gen, rho = self.gen, self.rho
        vals, right, left = liouvillian_spectrum(gen, 1)
        ii, jj = gen.sector(1)
        self.lam = vals
        # Tr{A R_k} for each system part A and mode k
        self.trace_r = np.array([A[jj, ii] @ right for A in self.parts])

        def proj(X):
            return left.conj().T @ X[ii, jj]

        diss = self._dissipative
        self.amp_left = np.array([proj(A @ rho) for A in self.parts])  # A rho
        self.amp_right = np.array([proj(rho @ A) for A in self.parts])  # rho A
        self.amp_gamma = np.array([proj(A @ ld_rho - diss(A @ rho)) for A in self.parts])
        self.amp_delta = np.array([proj(ld_rho @ A - diss(rho @ A)) for A in self.parts])

    def _dissipative(self, X):
        g = self.gen
        return g.apply(X) + 1j * (g.H @ X - X @ g.H)

    def tables(self, omega):
        """8x8 matrices P and Q at a single real frequency."""
        lam = self.lam
        res = -1.0 / (1j * omega + lam)  # int_0^inf e^{(i omega + lam) tau}
        P = np.zeros((8, 8), dtype=complex)
        Q = np.zeros((8, 8), dtype=complex)
        tr = self.trace_r
        g_w = np.array([self._ghat(m, omega) for m in range(4)])
        g_lam = np.array([self._ghat(m, -1j * lam) for m in range(4)])
        diff_den = 1j * omega - lam
        for m in range(4):
            for n in range(4):
                # system-system
                P[m, n] = np.sum(tr[m] * self.amp_left[n] * res)
                Q[m, n] = np.sum(tr[m] * self.amp_right[n] * res)
                # field-field from partner moments
                P[4 + m, 4 + n] = g_w[m] * self.N[m, n]
                Q[4 + m, 4 + n] = self.N[n, m] * g_w[m]
                # field later (X = F_m), system earlier (Y = A_n)
                kern = (g_w[m] - g_lam[m]) / diff_den
                P[4 + m, n] = -np.sum(tr[n] * self.amp_right[m] * kern)
                Q[4 + m, n] = -np.sum(tr[n] * self.amp_left[m] * kern)
                # system later (X = A_m), field earlier (Y = F_n)
                P[m, 4 + n] = -np.sum(tr[m] * (self.amp_left[n] * g_lam[n]
                                               + self.amp_gamma[n]) * res)
                Q[m, 4 + n] = -np.sum(tr[m] * (self.amp_right[n] * g_lam[n]
                                               + self.amp_delta[n]) * res)
        return P, Q

    def ordered(self, x, y, omega):
        """int dtau e^{i omega tau} <:X(t + tau) Y(t):> for coefficient vectors x, y over the 8 parts."""
        Pp, Qp = self.tables(omega)
        Pm, Qm = self.tables(-omega)
        xl, xr = np.where(LOWERING, x, 0), np.where(LOWERING, 0, x)
        yl, yr = np.where(LOWERING, y, 0), np.where(LOWERING, 0, y)
        return (xl @ Pp @ yl + yl @ Pm @ xl
                + xr @ Qp @ yr + yr @ Qm @ xr
                + xr @ Pp @ yl + yl @ Qm @ xr
                + xl @ Qp @ yr + yr @ Pm @ xl)

    def output_spectra(self, omega):
        gw = complex(self.kernel.full(omega))
        gmw = complex(self.kernel.full(-omega))
        x = np.array([gw, gw, 0, 0, 1, 1, 0, 0], dtype=complex)
        y_nn = np.array([0, 0, np.conj(gw), np.conj(gw), 0, 0, 1, 1], dtype=complex)
        y_an = np.array([gmw, gmw, 0, 0, 1, 1, 0, 0], dtype=complex)
        return self.ordered(x, y_nn, omega), self.ordered(x, y_an, omega)


def output_detection_spectrum(rho_ss, gen: Generator, corr: ReservoirCorrelations,
                              omega_grid) -> SpectralResult:
    """<:F_out(omega) F_out^+:> and <:F_out(omega) F_out:> for the photonic output channel."""
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    lam = corr.kernels["photonic"].cutoff
    if np.any(np.abs(omega_grid) < 1e-9 * lam) or np.any(np.abs(np.abs(omega_grid) - lam) < 1e-9 * lam):
        raise SingularFrequency("omega grid touches 0 or the cutoff")
    engine = OrderedSpectrum(gen, rho_ss, corr)
    nn = np.empty(len(omega_grid), dtype=complex)
    an = np.empty(len(omega_grid), dtype=complex)
    for k, w in enumerate(omega_grid):
        nn[k], an[k] = engine.output_spectra(w)
    return SpectralResult(omega_grid, nn, an)
