"""Frequency-domain Langevin equations and the input-output relation.

With s(omega) = (a(omega), b(omega), a^+(omega), b^+(omega)) and the input
fields Phi(omega) = (F_c, F_x, F_c^+, F_x^+)(omega),

    [M(omega) - omega] s(omega) = i Phi(omega),
    M(omega) = A - i diag(g_c(omega)_+, g_x(omega)_+, g_c(-omega)_+^*, g_x(-omega)_+^*),

where A is the Heisenberg matrix of H0.  Diagonalizing M(omega) = V D V^-1
defines dressed fluctuation operators F~ = V^-1 Phi, in terms of which
s = L F~ with L = i [M - omega]^-1 V, and the photonic output field
F_out = F_c + G_c(omega) a(omega) becomes

    F_out(omega) = T_L F~_L + T_U F~_U + S_L F~_L^+ + S_U F~_U^+,
    T_j = V[0, j] + G_c(omega) L[0, j],  S_j = V[0, j + 2] + G_c(omega) L[0, j + 2].

Spectral correlation matrices are stored with the second operator daggered:
C[m, n] = int dtau e^{i omega tau} <Phi_m(tau) Phi_n^+(0)>, split into the
tau > 0 part (``plus``) and the tau < 0 part (``minus``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import SpectralResult
from .errors import BranchTrackingLost, GridTooCoarse, SingularFrequency
from .hopfield import (DAGGER_INDEX, MomentMatrix, PolaritonBasis, SystemParams,
                       diagonalize_polaritons, heisenberg_matrix)
from .reservoir import (FIELD_CHANNEL, ReservoirCorrelations, _as_kernel_dict,
                        squeezed_ground_correlations, vacuum_correlations)

ETA = np.array([1.0, 1.0, -1.0, -1.0])
ANNIHILATOR_PROJECTOR = np.diag([1.0, 1.0, 0.0, 0.0])


def _kernel_hats(specs, omega):
    """Half-line transforms entering the diagonal of M, shape (4,) + omega.shape."""
    specs = _as_kernel_dict(specs)
    out = []
    for m in range(4):
        spec = specs[FIELD_CHANNEL[m]]
        out.append(spec.halfline(omega) if m < 2 else spec.halfline_conj(omega))
    return np.array(out, dtype=complex)


def _check_grid(specs, omega):
    for spec in _as_kernel_dict(specs).values():
        if spec.shape == "delta":
            continue
        lam = spec.cutoff
        w = np.abs(np.asarray(omega, dtype=float))
        if np.any(w < 1e-9 * lam) or np.any(np.abs(w - lam) < 1e-9 * lam):
            raise SingularFrequency(f"frequency grid touches 0 or +-{lam}")


def build_M(params: SystemParams, kernels, omega):
    """Langevin coefficient matrix at real omega (a stack of matrices for an array)."""
    omega = np.asarray(omega, dtype=float)
    _check_grid(kernels, omega)
    hats = np.moveaxis(_kernel_hats(kernels, omega), 0, -1)
    A = heisenberg_matrix(params)
    M = np.broadcast_to(A, omega.shape + (4, 4)).copy()
    idx = np.arange(4)
    M[..., idx, idx] -= 1j * hats
    return M


@dataclass(frozen=True)
class FrequencyResponse:
    """Dressed Langevin solution at one frequency.

    ``L`` maps the dressed fluctuations onto s, i.e. it includes the factor i
    of the Langevin equation.
    """

    omega: float
    M: np.ndarray
    V: np.ndarray
    eigvals: np.ndarray
    L: np.ndarray
    T: np.ndarray  # (T_L, T_U)
    S: np.ndarray  # (S_L, S_U)
    G_c: float

    @property
    def resolvent(self):
        """[M - omega]^-1."""
        return -1j * self.L @ np.linalg.inv(self.V)

    @property
    def T_L(self):
        return self.T[0]

    @property
    def T_U(self):
        return self.T[1]

    @property
    def S_L(self):
        return self.S[0]

    @property
    def S_U(self):
        return self.S[1]


@dataclass
class ResponseGrid:
    """Frequency responses on a grid, stored as stacked arrays."""

    omega: np.ndarray
    M: np.ndarray
    V: np.ndarray
    eigvals: np.ndarray
    L: np.ndarray
    T: np.ndarray  # (n, 2)
    S: np.ndarray  # (n, 2)
    G_c: np.ndarray

    def __len__(self):
        return len(self.omega)

    def __getitem__(self, k) -> FrequencyResponse:
        return FrequencyResponse(float(self.omega[k]), self.M[k], self.V[k], self.eigvals[k],
                                 self.L[k], self.T[k], self.S[k], float(self.G_c[k]))

    @property
    def resolvent(self):
        return -1j * self.L @ np.linalg.inv(self.V)


def _match(vals, reference, where):
    """Permutation of ``vals`` following ``reference`` by nearest neighbour."""
    dist = np.abs(vals[None, :] - reference[:, None])
    order = np.argsort(dist, axis=1)
    pick = order[:, 0]
    near = dist[np.arange(4), pick]
    second = dist[np.arange(4), order[:, 1]]
    if len(set(pick.tolist())) < 4 or np.any(second < 2 * near):
        raise BranchTrackingLost(f"ambiguous eigenvalue continuation at omega = {where:.6g}")
    return pick


def _normalize_columns(V):
    norms = np.einsum("...im,i,...im->...m", V.conj(), ETA, V).real
    V = V / np.sqrt(np.abs(norms))[..., None, :]
    lead = V[..., 0, :]
    lead = np.where(np.abs(lead) > 1e-12, lead, V[..., 1, :])
    return V * (np.abs(lead) / lead)[..., None, :]


def frequency_responses(params: SystemParams, kernels, omega_grid,
                        basis: PolaritonBasis | None = None) -> ResponseGrid:
    """Eigen-decompose M(omega) on a grid and build L, T and S.

    Eigenvalues are ordered as (L, U, -L*, -U*) branches.  The branches are
    continued point to point from the largest |omega| downward, seeded by the
    closed-system frequencies (+-omega_L, +-omega_U).
    """
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    specs = _as_kernel_dict(kernels)
    M = build_M(params, specs, omega)
    vals, vecs = np.linalg.eig(M)
    if basis is None:
        basis = diagonalize_polaritons(params)
    closed = np.concatenate([basis.omega, -basis.omega]).astype(complex)
    # continuation from the high-|omega| end, separately on each side of zero
    order = np.argsort(-np.abs(omega), kind="stable")
    perm = np.empty((len(omega), 4), dtype=int)
    last = {1: closed, -1: closed}
    for k in order:
        side = 1 if omega[k] >= 0 else -1
        pick = _match(vals[k], last[side], omega[k])
        perm[k] = pick
        last[side] = vals[k][pick]
    rows = np.arange(len(omega))[:, None]
    vals = vals[rows, perm]
    V = _normalize_columns(vecs[rows, :, perm].transpose(0, 2, 1))
    shifted = M - omega[:, None, None] * np.eye(4)
    L = 1j * np.linalg.solve(shifted, V)
    gc = np.asarray(specs["photonic"].full(omega), dtype=float)
    T = V[:, 0, :2] + gc[:, None] * L[:, 0, :2]
    S = V[:, 0, 2:] + gc[:, None] * L[:, 0, 2:]
    return ResponseGrid(omega, M, V, vals, L, T, S, gc)


def frequency_response(params: SystemParams, kernels, omega,
                       basis: PolaritonBasis | None = None) -> FrequencyResponse:
    return frequency_responses(params, kernels, [omega], basis)[0]


@dataclass
class InputCorrelationMatrix:
    """tau > 0 and tau < 0 parts of C[m, n] = <Phi_m(omega) Phi_n^+> (stacked over omega)."""

    omega: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def total(self):
        return self.plus + self.minus

    def dressed(self, V):
        """The same correlations for F~ = V^-1 Phi: V^-1 C V^-+."""
        vinv = np.linalg.inv(V)
        vinv_h = np.conj(np.swapaxes(vinv, -1, -2))
        return (InputCorrelationMatrix(self.omega, vinv @ self.plus @ vinv_h,
                                       vinv @ self.minus @ vinv_h))


def _moment_block(corr: ReservoirCorrelations, V, replaced):
    """Equal-time moments <s_m s_n^+> the input fields inherit."""
    if replaced and corr.mode == "squeezed_ground":
        return V @ ANNIHILATOR_PROJECTOR @ np.conj(np.swapaxes(V, -1, -2))
    return np.broadcast_to(corr.N[:, DAGGER_INDEX], V.shape)


def build_input_correlations(corr: ReservoirCorrelations, response,
                             replaced: bool = True) -> InputCorrelationMatrix:
    """Input-field correlations built from kernel transforms and system moments.

    In squeezed-ground mode the ground-state moments are replaced by
    V(omega) diag(1, 1, 0, 0) V(omega)^+ unless ``replaced`` is False.
    Vacuum mode always uses the bare vacuum.
    """
    omega = np.atleast_1d(np.asarray(response.omega, dtype=float))
    V = response.V.reshape((-1, 4, 4))
    X = _moment_block(corr, V, replaced)
    hats = np.moveaxis(_kernel_hats(corr.kernels, omega), 0, -1)  # (n, 4)
    plus = hats[:, :, None] * X
    minus = X * np.conj(hats)[:, None, :]
    return InputCorrelationMatrix(omega, plus, minus)


def _ordered_sums(T, S, Tm, Sm, cp, cm, cpm, cmm):
    """The two normal/time-ordered sums for one frequency (all indices j, k in {L, U}).

    cp, cm: dressed plus/minus blocks at +omega; cpm, cmm: the same at -omega.
    Tm, Sm: output coefficients at -omega.
    """
    nn = 0j
    an = 0j
    for j in range(2):
        for k in range(2):
            cross_p = cp[j, k + 2] + cpm[k, j + 2]
            cross_m = cm[k + 2, j] + cmm[j + 2, k]
            norm_jk = cpm[k + 2, j + 2] + cmm[k + 2, j + 2]  # <F~_k(omega)^+ F~_j>
            norm_kj = cp[j + 2, k + 2] + cm[j + 2, k + 2]  # <F~_j(-omega)^+ F~_k>
            nn += (T[j] * norm_jk * np.conj(T[k]) + T[j] * cross_p * np.conj(S[k])
                   + S[j] * cross_m * np.conj(T[k]) + S[j] * norm_kj * np.conj(S[k]))
            an += (T[j] * cross_p * Tm[k] + T[j] * norm_jk * Sm[k]
                   + S[j] * norm_kj * Tm[k] + S[j] * cross_m * Sm[k])
    return nn, an


def ordered_output_spectrum(params: SystemParams, kernels, basis: PolaritonBasis, omega_grid,
                            mode: str = "squeezed_ground", replaced: bool = True) -> SpectralResult:
    """<:F_out(omega) F_out^+:> and <:F_out(omega) F_out:> with dressed fluctuations ordered."""
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    corr = (squeezed_ground_correlations(basis, kernels) if mode == "squeezed_ground"
            else vacuum_correlations(kernels))
    pos = frequency_responses(params, kernels, omega, basis)
    neg = frequency_responses(params, kernels, -omega, basis)
    cp = build_input_correlations(corr, pos, replaced).dressed(pos.V)
    cn = build_input_correlations(corr, neg, replaced).dressed(neg.V)
    nn = np.empty(len(omega), dtype=complex)
    an = np.empty(len(omega), dtype=complex)
    for k in range(len(omega)):
        nn[k], an[k] = _ordered_sums(pos.T[k], pos.S[k], neg.T[k], neg.S[k],
                                     cp.plus[k], cp.minus[k], cn.plus[k], cn.minus[k])
    return SpectralResult(omega, nn, an)


def unordered_output_spectrum(params: SystemParams, kernels, corr: ReservoirCorrelations,
                              omega_grid, replaced: bool = True):
    """<F_out(omega) F_out^+> and <F_out^+(omega) F_out> without any ordering.

    The second one is the photon flux seen by a detector at frequency omega.
    """
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    pos = frequency_responses(params, kernels, omega)
    neg = frequency_responses(params, kernels, -omega)
    C = build_input_correlations(corr, pos, replaced).total
    # F_out(omega) = u . Phi(omega) with u = e_0 + i G_c(omega) R(omega)[0]
    u = 1j * pos.G_c[:, None] * pos.resolvent[:, 0, :]
    u[:, 0] += 1.0
    um = 1j * neg.G_c[:, None] * neg.resolvent[:, 0, :]
    um[:, 0] += 1.0
    # F_out^+(omega) = F_out(-omega)^+ = sum_n conj(um_n) Phi_{dagger(n)}(omega)
    ud = np.empty_like(um)
    ud[:, DAGGER_INDEX] = np.conj(um)
    out_in = np.einsum("ki,kij,kj->k", u, C, np.conj(u))
    in_out = np.einsum("ki,kij,kj->k", ud, C, np.conj(ud))
    return out_in, in_out


@dataclass
class Occupations:
    """Equal-time intracavity moments from integrating the Langevin spectra.

    ``moments`` holds <s_m s_n> in the fixed basis; ``dressed`` holds
    <p~_j p~_k^+> for p~ = V(omega)^-1 s, the fluctuations the dressed
    modes actually carry.
    """

    moments: MomentMatrix
    dressed: np.ndarray
    refinement_change: float

    @property
    def n_a(self):
        return self.moments.n_a

    @property
    def n_b(self):
        return self.moments.n_b

    def polariton(self, basis: PolaritonBasis):
        return self.moments.polariton(basis)

    @property
    def dressed_numbers(self):
        """<p~_L^+ p~_L>, <p~_U^+ p~_U>."""
        return self.dressed[2, 2].real, self.dressed[3, 3].real


def integration_grid(basis: PolaritonBasis, specs, points_per_window=801, decades=8):
    """Symmetric nonuniform grid on (-Lambda, Lambda) resolving the polariton lines.

    Log-spaced toward 0 and toward +-Lambda (where the kernels are log-singular),
    with dense uniform windows of +-30 linewidths around +-omega_L and +-omega_U.
    """
    specs = _as_kernel_dict(specs)
    lam = min(s.cutoff for s in specs.values())
    width = max(max(s.gamma for s in specs.values()), 1e-6)
    near = np.geomspace(lam * 10.0**-decades, 0.5 * lam, 60 * decades)
    pieces = [near, lam - near]
    for w in basis.omega:
        pieces.append(np.linspace(max(w - 30 * width, 1e-3), w + 30 * width, points_per_window))
        pieces.append(np.linspace(max(w - 3 * width, 1e-3), w + 3 * width, points_per_window // 4))
    pieces.append(np.linspace(1e-3, 3 * max(basis.omega), 4000))
    half = np.unique(np.concatenate(pieces))
    half = half[(half > 0) & (half < lam)]
    return np.concatenate([-half[::-1], half])


def _trapezoid(y, x):
    dx = np.diff(x)[:, None, None]
    return 0.5 * np.sum(dx * (y[1:] + y[:-1]), axis=0)


def intracavity_occupations(params: SystemParams, kernels, corr: ReservoirCorrelations,
                            omega_grid=None, replaced: bool = False, tol: float = 1e-3) -> Occupations:
    """(1/2 pi) int d omega of the intracavity spectral densities.

    By default the input fields carry the plain ground-state moments.  The
    dressed replacement (``replaced=True``) makes <p~^+ p~> vanish identically
    but no longer preserves [s_m, s_n^+] at order Gamma log(Lambda), so it is
    not used for the fixed-basis moments unless asked for.

    The spectral density of s is R C R^+ with R = [M - omega]^-1.  The result is
    compared with the same integral on every other grid point; a difference
    above ``tol`` raises GridTooCoarse.
    """
    specs = _as_kernel_dict(kernels)
    basis = diagonalize_polaritons(params)
    omega = integration_grid(basis, specs) if omega_grid is None else np.sort(np.asarray(omega_grid, float))
    resp = frequency_responses(params, specs, omega, basis)
    cin = build_input_correlations(corr, resp, replaced)
    C = cin.total
    R = resp.resolvent
    K = R @ C @ np.conj(np.swapaxes(R, -1, -2))
    dressed_density = cin.dressed(resp.V).total
    lam_shift = resp.eigvals - omega[:, None]
    Kd = dressed_density / (lam_shift[:, :, None] * np.conj(lam_shift)[:, None, :])
    full = _trapezoid(K, omega) / (2 * np.pi)
    half = _trapezoid(K[::2], omega[::2]) / (2 * np.pi)
    change = float(np.max(np.abs(full - half)))
    if change > tol:
        raise GridTooCoarse(f"grid refinement changes occupations by {change:.2e}")
    dressed = _trapezoid(Kd, omega) / (2 * np.pi)
    # <s_m s_n> = <s_m s_{dagger(n)}^+>
    second = full[:, DAGGER_INDEX]
    return Occupations(MomentMatrix(second), dressed, change)
