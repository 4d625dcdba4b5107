"""Reservoir memory kernels and free-field correlation functions.

The photonic (c) and excitonic (x) reservoir fields are collected in the vector
Phi = (F_c, F_x, F_c^+, F_x^+), mirroring s = (a, b, a^+, b^+).  Every
two-point function used by the solvers is of the form

    <Phi_m(tau) Phi_n> = g_m(tau) N[m, n]     (tau > 0)
    <Phi_m(-tau) Phi_n> = g_n(tau) N[m, n]    (tau > 0)

with g_m = G_mu for an annihilation component and conj(G_mu) for a creation
component, and N the second-moment matrix of the matching system operators.
Vacuum reservoirs use the bare vacuum moments, the squeezed/correlated
reservoirs use the moments of the polariton ground state.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameters, SingularFrequency
from .hopfield import SYMPLECTIC, MomentMatrix, PolaritonBasis, ground_state_moments

CHANNELS = ("photonic", "excitonic")
SHAPES = ("flat", "delta")
# channel of Phi_m
FIELD_CHANNEL = ("photonic", "excitonic", "photonic", "excitonic")


@dataclass(frozen=True)
class KernelSpec:
    """Flat spectral density Gamma/2pi on (0, cutoff) for one reservoir channel.

    ``shape="delta"`` is the time-local limit G(tau) = Gamma delta(tau); it is
    only meaningful for frequency-domain quantities.
    """

    channel: str
    gamma: float
    cutoff: float = 1e3
    shape: str = "flat"

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise InvalidParameters(f"unknown channel {self.channel!r}")
        if self.shape not in SHAPES:
            raise InvalidParameters(f"unknown kernel shape {self.shape!r}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise InvalidParameters(f"gamma must be >= 0, got {self.gamma}")
        if not (np.isfinite(self.cutoff) and self.cutoff > 0):
            raise InvalidParameters(f"cutoff must be > 0, got {self.cutoff}")

    def time(self, tau):
        return kernel_time(self, tau)

    def halfline(self, omega):
        return kernel_halfline_fourier(self, omega)

    def halfline_conj(self, omega):
        """int_0^inf dtau e^{i omega tau} conj(G(tau)) = conj(G(-conj(omega))_+)."""
        return np.conj(kernel_halfline_fourier(self, -np.conj(omega)))

    def full(self, omega):
        """Two-sided Fourier transform G(omega) = 2 Re G(omega)_+ on the real axis."""
        omega = np.asarray(omega, dtype=float)
        if self.shape == "delta":
            return np.full(omega.shape, float(self.gamma))[()]
        inside = (omega > 0) & (omega < self.cutoff)
        return np.where(inside, self.gamma, 0.0)[()]


def photonic(gamma, cutoff=1e3, shape="flat"):
    return KernelSpec("photonic", gamma, cutoff, shape)


def excitonic(gamma, cutoff=1e3, shape="flat"):
    return KernelSpec("excitonic", gamma, cutoff, shape)


def kernel_time(spec: KernelSpec, tau):
    """G(tau) = (Gamma/2pi) (1 - exp(-i Lambda tau)) / (i tau), with G(0) = Gamma Lambda / 2pi."""
    if spec.shape == "delta":
        raise ValueError("the delta kernel has no pointwise time-domain value")
    tau = np.asarray(tau, dtype=float)
    lam = spec.cutoff
    pref = spec.gamma / (2 * np.pi)
    small = np.abs(lam * tau) < 1e-6
    safe = np.where(small, 1.0, tau)
    val = pref * (1 - np.exp(-1j * lam * safe)) / (1j * safe)
    # series for small Lambda tau: Lambda (1 - i Lambda tau / 2 - (Lambda tau)^2 / 6)
    x = lam * tau
    series = pref * lam * (1 - 0.5j * x - x**2 / 6)
    return np.where(small, series, val)[()]


def kernel_halfline_fourier(spec: KernelSpec, omega):
    """G(omega)_+ = int_0^inf dtau e^{i omega tau} G(tau).

    For real omega this is Gamma/2 on (0, Lambda) plus i (Gamma/2pi) ln|omega/(omega - Lambda)|.
    Complex omega with Im omega > 0 is accepted (analytic continuation); real
    arguments within 1e-9 Lambda of 0 or Lambda raise SingularFrequency.
    """
    omega = np.asarray(omega)
    if spec.shape == "delta":
        return np.full(omega.shape, spec.gamma / 2, dtype=complex)[()]
    lam = spec.cutoff
    pref = spec.gamma / (2 * np.pi)
    if np.iscomplexobj(omega):
        z = omega.astype(complex)
        if np.any(z.imag < 0):
            raise ValueError("half-line transform needs Im(omega) >= 0")
        real = z.imag == 0
        out = np.empty(z.shape, dtype=complex)
        zc = z[~real]
        out[~real] = 1j * pref * (np.log(zc) - np.log(zc - lam))
        if np.any(real):
            out[real] = _halfline_real(z[real].real, spec)
        return out[()]
    return _halfline_real(omega.astype(float), spec)


def _halfline_real(omega, spec):
    lam = spec.cutoff
    eps = 1e-9 * lam
    omega = np.asarray(omega, dtype=float)
    if np.any(np.abs(omega) < eps) or np.any(np.abs(omega - lam) < eps):
        raise SingularFrequency(f"G(omega)_+ is singular at omega in {{0, {lam}}}")
    pref = spec.gamma / (2 * np.pi)
    inside = (omega > 0) & (omega < lam)
    re = np.where(inside, spec.gamma / 2, 0.0)
    im = pref * np.log(np.abs(omega / (omega - lam)))
    return (re + 1j * im)[()]


@dataclass(frozen=True)
class ReservoirCorrelations:
    """Free-field two-point functions of Phi = (F_c, F_x, F_c^+, F_x^+)."""

    kernels: dict
    mode: str
    moments: MomentMatrix = field(default_factory=MomentMatrix.vacuum)

    def __post_init__(self):
        missing = [ch for ch in CHANNELS if ch not in self.kernels]
        if missing:
            raise InvalidParameters(f"missing kernel for channel(s) {missing}")

    def kernel(self, m) -> KernelSpec:
        return self.kernels[FIELD_CHANNEL[m]]

    @property
    def N(self) -> np.ndarray:
        return self.moments.second

    def g(self, m, tau):
        """g_m(tau): G for annihilation components, conj(G) for creation components."""
        val = kernel_time(self.kernel(m), tau)
        return val if m < 2 else np.conj(val)

    def two_point(self, m, n, tau):
        """<Phi_m(tau) Phi_n(0)> for real tau (either sign)."""
        tau = np.asarray(tau, dtype=float)
        pos = self.g(m, np.abs(tau))
        neg = self.g(n, np.abs(tau))
        return (np.where(tau >= 0, pos, neg) * self.N[m, n])[()]

    def matrix(self, tau) -> np.ndarray:
        """All sixteen <Phi_m(tau) Phi_n> at a single tau."""
        return np.array([[self.two_point(m, n, tau) for n in range(4)] for m in range(4)])

    def commutator(self, m, n, tau):
        """<[Phi_m(tau), Phi_n(0)]> evaluated from the ordered correlations."""
        tau = np.asarray(tau, dtype=float)
        return self.two_point(m, n, tau) - self.two_point(n, m, -tau)

    def exact_commutator(self, m, n, tau):
        """The c-number commutator implied by the kernels alone."""
        return self.g(m, tau) * SYMPLECTIC[m, n] if FIELD_CHANNEL[m] == FIELD_CHANNEL[n] \
            else np.zeros_like(np.asarray(tau, dtype=complex))[()]

    def ghat(self, z) -> np.ndarray:
        """Half-line transforms of g_m at complex or real frequency z, shape (4,) + z.shape."""
        out = []
        for m in range(4):
            spec = self.kernel(m)
            out.append(spec.halfline(z) if m < 2 else spec.halfline_conj(z))
        return np.array(out)

    def plus_transform(self, z) -> np.ndarray:
        """int_0^inf dtau e^{i z tau} <Phi_m(tau) Phi_n>, a 4x4 matrix."""
        gh = self.ghat(z)
        return gh[:, None] * self.N

    def minus_transform(self, z) -> np.ndarray:
        """int_0^inf dtau e^{i z tau} <Phi_m(-tau) Phi_n>, a 4x4 matrix."""
        gh = self.ghat(z)
        return self.N * gh[None, :]


def _as_kernel_dict(specs):
    if isinstance(specs, dict):
        return dict(specs)
    return {spec.channel: spec for spec in specs}


def vacuum_correlations(specs) -> ReservoirCorrelations:
    """Both reservoirs in their vacuum: only <F_mu(t) F_mu^+(t')> = G_mu(t - t') survives."""
    return ReservoirCorrelations(_as_kernel_dict(specs), "vacuum", MomentMatrix.vacuum())


def squeezed_ground_correlations(basis: PolaritonBasis, specs) -> ReservoirCorrelations:
    """Reservoirs carrying the squeezing and photon-matter correlations of the polariton ground state."""
    return ReservoirCorrelations(_as_kernel_dict(specs), "squeezed_ground",
                                 ground_state_moments(basis))


@dataclass(frozen=True)
class PolaritonCorrelations:
    """Free-field correlations of Psi = (F_L, F_U, F_L^+, F_U^+) where F_j = w_j F_c + x_j F_x + y_j F_c^+ + z_j F_x^+."""

    base: ReservoirCorrelations
    basis: PolaritonBasis

    @property
    def transform(self) -> np.ndarray:
        return self.basis.forward

    def matrix(self, tau) -> np.ndarray:
        c = self.transform
        return c @ self.base.matrix(tau) @ c.T

    def two_point(self, j, k, tau):
        c = self.transform
        tau = np.asarray(tau, dtype=float)
        return sum(c[j, m] * c[k, n] * self.base.two_point(m, n, tau)
                   for m in range(4) for n in range(4))


def polariton_basis_correlations(corr: ReservoirCorrelations,
                                 basis: PolaritonBasis) -> PolaritonCorrelations:
    return PolaritonCorrelations(corr, basis)
