"""Born master equation in a truncated Fock space.

The system-reservoir coupling is written as H_I = sum_m S_m B_m with
S = (a, b, a^+, b^+) and B_m = eps_m Phi_sigma(m), eps = (i, i, -i, -i),
sigma = (2, 3, 0, 1).  With the density operator taken outside the memory
integral, the dissipator is

    L_diss[rho] = -sum_m ([S_m, K_m rho] - [S_m, rho J_m])

    K_m = sum_n int_0^inf dtau <B_m(tau) B_n> U0(tau)[S_n]
    J_m = sum_n int_0^inf dtau <B_n(-tau) B_m> U0(tau)[S_n]

with U0(tau)[X] = exp(-i H0 tau) X exp(i H0 tau).  In the eigenbasis of H0 the
tau integral multiplies each matrix element of S_n by a half-line kernel
transform evaluated at the corresponding Bohr frequency.

Times exposed by this module (trajectories, delays) are in units of the cavity
period 2 pi / omega_c.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (DegenerateSteadyState, InvalidParameters, SingularFrequency,
                     StepUnstable, TruncationWarning)
from .fock import ModeOperators
from .hopfield import DAGGER_INDEX, heisenberg_matrix
from .reservoir import ReservoirCorrelations

EPS = np.array([1j, 1j, -1j, -1j])
TWO_PI = 2 * np.pi
# largest parity sector for which a dense superoperator is built
MAX_SECTOR_DIM = 5200
# above this sector size propagation steps the density matrix directly
PROPAGATOR_SECTOR_DIM = 2600
# generators whose operators are at most this full are applied with sparse products
SPARSE_FILL = 0.15


@dataclass
class Generator:
    """L[rho] = -i[H, rho] - sum_m ([S_m, K_m rho] - [S_m, rho J_m]) on dense matrices."""

    ops: ModeOperators
    H: np.ndarray
    S: list
    K: list
    J: list
    label: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.H.shape[0]
        self.P = sum((s @ k for s, k in zip(self.S, self.K)), np.zeros((d, d), complex))
        self.Q = sum((j @ s for s, j in zip(self.S, self.J)), np.zeros((d, d), complex))
        self._left = -1j * self.H - self.P
        self._right = 1j * self.H - self.Q
        scale = max([np.max(abs(x)) for x in self.K + self.J + [self._left]] + [1e-300])
        self.sparse = all(_density(x, scale) < SPARSE_FILL for x in self.K + self.J + [self._left])
        n = len(self.S)
        if self.sparse:
            cut = 1e-15 * scale
            self._lsp = _csr(self._left, cut)
            self._rtsp = _csr(self._right.T, cut)
            if n:
                self._kcat = _csr(np.hstack(self.K), cut)
                self._jtcat = _csr(np.hstack([j.T for j in self.J]), cut)
        elif n:
            self._kcat = np.hstack(self.K)
            self._jcat = np.vstack(self.J)
        if n:
            self._scat = scipy.sparse.csr_matrix(np.vstack(self.S))
            self._stcat = scipy.sparse.csr_matrix(np.vstack([s.T for s in self.S]))
        self._super_cache = {}

    @property
    def dim(self):
        return self.H.shape[0]

    def apply(self, rho):
        n = len(self.S)
        if self.sparse:
            out = self._lsp @ rho + (self._rtsp @ rho.T).T
        else:
            out = self._left @ rho + rho @ self._right
        if not n:
            return out
        d = self.dim
        # rows m*d:(m+1)*d of these stacks hold (rho S_m)^T and S_m rho
        rho_s = (self._stcat @ rho.T).reshape(n, d, d).transpose(0, 2, 1).reshape(n * d, d)
        s_rho = (self._scat @ rho).reshape(n, d, d)
        if self.sparse:
            out += self._kcat @ rho_s
            out += (self._jtcat @ s_rho.transpose(0, 2, 1).reshape(n * d, d)).T
        else:
            out += self._kcat @ rho_s + np.hstack(list(s_rho)) @ self._jcat
        return out

    def sector(self, diff):
        """Row/column indices (i, j) of matrix elements with parity(i) - parity(j) = diff mod 2.

        Every generator here commutes with the total-number parity, so these
        two index sets are invariant.
        """
        par = self.ops.parity
        ii, jj = np.nonzero((par[:, None] + par[None, :]) % 2 == diff)
        return ii, jj

    def superoperator(self, diff=0):
        """Dense matrix of L restricted to a parity sector (row-major vectorization)."""
        if diff in self._super_cache:
            return self._super_cache[diff]
        ii, jj = self.sector(diff)
        if len(ii) > MAX_SECTOR_DIM:
            raise InvalidParameters(f"sector dimension {len(ii)} exceeds {MAX_SECTOR_DIM}")
        eye = np.eye(self.dim)

        def term(left, right):
            # vec(left X right)[a] = sum_b left[i_a, i_b] X[i_b, j_b] right[j_b, j_a]
            return left[np.ix_(ii, ii)] * right[np.ix_(jj, jj)].T

        sup = term(-1j * self.H - self.P, eye) + term(eye, 1j * self.H - self.Q)
        for s, k, j in zip(self.S, self.K, self.J):
            sup += term(k, s) + term(s, j)
        self._super_cache[diff] = sup
        return sup


def _density(x, scale):
    return np.count_nonzero(abs(x) > 1e-15 * scale) / x.size


def _csr(x, cut):
    return scipy.sparse.csr_matrix(np.where(abs(x) > cut, x, 0))


def build_filtered_dissipator(ops: ModeOperators, corr: ReservoirCorrelations,
                              label="filtered") -> Generator:
    """Born generator with every memory integral evaluated at the Bohr frequencies of H0."""
    energies, vecs = np.linalg.eigh(ops.H0)
    delta = energies[:, None] - energies[None, :]
    z = -delta
    lam = min(corr.kernels[ch].cutoff for ch in corr.kernels)
    # creation channels are evaluated at -z, so both +-Lambda are endpoints
    singular = (np.abs(z) < 1e-9 * lam) | (np.abs(np.abs(z) - lam) < 1e-9 * lam)
    zsafe = np.where(singular, 0.5 * lam, z)
    filters = corr.ghat(zsafe)
    filters[:, singular] = 0.0

    s_eig = [vecs.conj().T @ op @ vecs for op in ops.s]
    scale = max(np.max(abs(x)) for x in s_eig)
    for x in s_eig:
        if np.max(abs(x[singular]), initial=0.0) > 1e-10 * scale:
            raise SingularFrequency("system operator has weight at a singular Bohr frequency")
    relevant = np.zeros(delta.shape, dtype=bool)
    for x in s_eig:
        relevant |= abs(x) > 1e-12 * scale
    if np.any(np.abs(delta[relevant]) > lam):
        warnings.warn(f"Bohr frequencies up to {np.max(np.abs(delta[relevant])):.3g} exceed "
                      f"the kernel cutoff {lam:.3g}", TruncationWarning, stacklevel=2)

    N = corr.N
    sig = DAGGER_INDEX
    K, J = [], []
    for m in range(4):
        f = filters[sig[m]]
        x = sum(EPS[n] * N[sig[m], sig[n]] * s_eig[n] for n in range(4))
        y = sum(EPS[n] * N[sig[n], sig[m]] * s_eig[n] for n in range(4))
        K.append(vecs @ (EPS[m] * f * x) @ vecs.conj().T)
        J.append(vecs @ (EPS[m] * f * y) @ vecs.conj().T)
    return Generator(ops, ops.H0, list(ops.s), K, J, label,
                     {"mode": corr.mode, "max_bohr": float(np.max(np.abs(delta[relevant])))})


@dataclass(frozen=True)
class QuadraticDissipator:
    """Dissipator whose S, K and J operators are all linear in s = (a, b, a^+, b^+).

    Row ``r`` of ``sigma``, ``kappa``, ``iota`` holds the coefficients of
    S_r, K_r, J_r.  Such a generator maps Gaussian states to Gaussian states.
    """

    A: np.ndarray
    sigma: np.ndarray
    kappa: np.ndarray
    iota: np.ndarray


def markov_coefficients(basis, corr: ReservoirCorrelations, params) -> QuadraticDissipator:
    """K_m and J_m with U0(tau)[S_n] replaced by its exact polariton decomposition.

    U0(tau)[q_j] = q_j exp(i lambda_j tau) for q = (p_L, p_U, p_L^+, p_U^+),
    lambda = (omega_L, omega_U, -omega_L, -omega_U), so each memory integral
    becomes a kernel transform at a polariton frequency.
    """
    T = basis.inverse
    C = basis.forward
    lam = np.concatenate([basis.omega, -basis.omega])
    gh = corr.ghat(lam)  # (4 fields, 4 frequencies)
    N = corr.N
    sig = DAGGER_INDEX
    kappa = np.zeros((4, 4), dtype=complex)
    iota = np.zeros((4, 4), dtype=complex)
    for m in range(4):
        wk = np.array([sum(EPS[n] * N[sig[m], sig[n]] * T[n, j] for n in range(4)) for j in range(4)])
        wj = np.array([sum(EPS[n] * N[sig[n], sig[m]] * T[n, j] for n in range(4)) for j in range(4)])
        kappa[m] = EPS[m] * (wk * gh[sig[m]]) @ C
        iota[m] = EPS[m] * (wj * gh[sig[m]]) @ C
    return QuadraticDissipator(heisenberg_matrix(params), np.eye(4, dtype=complex), kappa, iota)


def rwa_coefficients(basis, corr: ReservoirCorrelations, params) -> QuadraticDissipator:
    """Lindblad decay of each polariton at rate Gamma_c |w_j|^2 + Gamma_x |x_j|^2."""
    C = basis.forward
    rates = rwa_rates(basis, corr)
    sigma, kappa, iota = [], [], []
    for j in range(2):
        zero = np.zeros(4, dtype=complex)
        # gamma/2 ([p rho, p^+] + [p, rho p^+]) = -[p^+, (gamma/2) p rho] + [p, rho (gamma/2) p^+]
        sigma += [C[j + 2], C[j]]
        kappa += [0.5 * rates[j] * C[j], zero]
        iota += [zero, 0.5 * rates[j] * C[j + 2]]
    return QuadraticDissipator(heisenberg_matrix(params), np.array(sigma), np.array(kappa),
                               np.array(iota))


def rwa_rates(basis, corr):
    gc = corr.kernels["photonic"].gamma
    gx = corr.kernels["excitonic"].gamma
    return gc * abs(basis.w) ** 2 + gx * abs(basis.x) ** 2


def polariton_rate_matrices(coeffs: QuadraticDissipator, basis):
    """Coefficients of p_j rho p_k^+ (Gamma) and p_j rho p_k (K) in the dissipator.

    ``Gamma[j, k]`` multiplies p_j rho p_k^+ and ``K[j, k]`` multiplies p_j rho p_k.
    """
    T = basis.inverse
    # express S, K, J rows in the polariton basis q: coefficient vectors v_s . s = (v_s T) . q
    sq = coeffs.sigma @ T
    kq = coeffs.kappa @ T
    iq = coeffs.iota @ T
    X = sq.T @ kq  # sum_r S_r (x) K_r -> X[a, b] q_a (x) q_b
    Y = sq.T @ iq
    gamma = np.array([[X[k + 2, j] + Y[j, k + 2] for k in range(2)] for j in range(2)])
    kmat = np.array([[X[k, j] + Y[j, k] for k in range(2)] for j in range(2)])
    return gamma, kmat


def generator_from_coefficients(ops: ModeOperators, coeffs: QuadraticDissipator,
                                label="") -> Generator:
    S = [ops.combo(v) for v in coeffs.sigma]
    K = [ops.combo(v) for v in coeffs.kappa]
    J = [ops.combo(v) for v in coeffs.iota]
    return Generator(ops, ops.H0, S, K, J, label)


def markov_generator(ops: ModeOperators, corr: ReservoirCorrelations,
                     mode="nonlindblad") -> Generator:
    """Markov comparison generators: the non-Lindblad Born-Markov form or the RWA Lindblad form."""
    basis, params = ops.basis, ops.params
    if mode == "nonlindblad":
        coeffs = markov_coefficients(basis, corr, params)
        gen = generator_from_coefficients(ops, coeffs, "markov_nonlindblad")
        gamma, kmat = polariton_rate_matrices(coeffs, basis)
        gen.info.update(coefficients=coeffs, Gamma=gamma, K=kmat)
    elif mode == "rwa_lindblad":
        coeffs = rwa_coefficients(basis, corr, params)
        gen = generator_from_coefficients(ops, coeffs, "rwa_lindblad")
        gen.info.update(coefficients=coeffs, rates=rwa_rates(basis, corr))
    else:
        raise InvalidParameters(f"unknown Markov mode {mode!r}")
    return gen


def closed_generator(ops: ModeOperators) -> Generator:
    return Generator(ops, ops.H0, [], [], [], "closed")


# --------------------------------------------------------------------------- propagation

@dataclass
class Trajectory:
    """Observables along a propagation; ``t`` in units of 2 pi / omega_c."""

    t: np.ndarray
    nL: np.ndarray
    nU: np.ndarray
    na: np.ndarray
    nb: np.ndarray
    trace: np.ndarray
    states: list = None

    def to_csv(self, path):
        header = "t,nL,nU,na,nb"
        data = np.column_stack([self.t, self.nL, self.nU, self.na, self.nb])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.12g")

    def columns(self):
        return {"t": self.t, "nL": self.nL, "nU": self.nU, "na": self.na, "nb": self.nb}


def _time_steps(t_grid, dt):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise InvalidParameters("t_grid needs at least two points")
    spacing = np.diff(t_grid)
    if np.any(spacing <= 0) or np.ptp(spacing) > 1e-9 * spacing[0]:
        raise InvalidParameters("t_grid must be uniform and increasing")
    stride = max(1, int(np.ceil(spacing[0] / dt - 1e-9)))
    return t_grid, stride, TWO_PI * spacing[0] / stride


class SectorPropagator:
    """Exact matrix of `stride` classical RK4 steps of a time-independent linear system."""

    def __init__(self, gen: Generator, diff, h, stride):
        self.ii, self.jj = gen.sector(diff)
        sup = gen.superoperator(diff)
        hl = h * sup
        eye = np.eye(len(self.ii))
        step = eye + hl @ (eye + hl @ (eye + hl @ (eye + hl / 4) / 3) / 2)
        diag = self.ii == self.jj
        drift = np.max(abs(step[diag].sum(axis=0) - diag), initial=0.0)
        if not np.all(np.isfinite(step)) or drift > 1e-6:
            raise StepUnstable(f"single-step trace drift {drift:.2e}")
        self.step = np.linalg.matrix_power(step, stride)

    def vec(self, X):
        return X[self.ii, self.jj]

    def weights(self, O):
        """w with Tr(O X) = w . vec(X) on this sector."""
        return O[self.jj, self.ii]

    def unvec(self, v, dim):
        X = np.zeros((dim, dim), dtype=complex)
        X[self.ii, self.jj] = v
        return X


def _sector_parts(X, gen):
    parts = []
    for diff in (0, 1):
        ii, jj = gen.sector(diff)
        if np.max(abs(X[ii, jj]), initial=0.0) > 0:
            parts.append(diff)
    return parts


def _rk4_matrix(gen, X, h, stride):
    for _ in range(stride):
        k1 = gen.apply(X)
        k2 = gen.apply(X + 0.5 * h * k1)
        k3 = gen.apply(X + 0.5 * h * k2)
        k4 = gen.apply(X + h * k3)
        X = X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return X


def evolve_traces(gen: Generator, X0, observables, n_out, h, stride, method="auto"):
    """Tr(O U(t_k)[X0]) for each observable O at k = 0..n_out-1, plus the evolved traces."""
    out = np.zeros((len(observables) + 1, n_out), dtype=complex)
    eye = np.eye(gen.dim)
    all_obs = list(observables) + [eye]
    use_super = method == "superoperator" or (
        method == "auto" and len(gen.sector(0)[0]) <= PROPAGATOR_SECTOR_DIM)
    if use_super:
        for diff in _sector_parts(X0, gen):
            prop = SectorPropagator(gen, diff, h, stride)
            w = np.array([prop.weights(O) for O in all_obs])
            v = prop.vec(X0)
            for k in range(n_out):
                if k:
                    v = prop.step @ v
                out[:, k] += w @ v
            if not np.all(np.isfinite(v)):
                raise StepUnstable("non-finite state")
        return out
    X = np.array(X0, dtype=complex)
    for k in range(n_out):
        if k:
            X = _rk4_matrix(gen, X, h, stride)
            if not np.all(np.isfinite(X)):
                raise StepUnstable("non-finite state")
        out[:, k] = [np.trace(O @ X) for O in all_obs]
    return out


def propagate(rho0, gen: Generator, t_grid, dt=1e-3, method="auto",
              store_states=False) -> Trajectory:
    """Integrate d rho/dt = L[rho] with fixed-step RK4 and record occupations.

    ``t_grid`` (uniform, units of 2 pi / omega_c) gives the output times; the
    state ``rho0`` is taken at ``t_grid[0]``.  The internal step is the largest
    step not exceeding ``dt`` that divides the output spacing.
    """
    t_grid, stride, h = _time_steps(t_grid, dt)
    rho0 = np.asarray(rho0, dtype=complex)
    obs = gen.ops.number_ops()
    names = ["nL", "nU", "na", "nb"]
    states = None
    if store_states:
        states = []
        X = rho0.copy()
        for k in range(len(t_grid)):
            if k:
                X = _rk4_matrix(gen, X, h, stride)
            states.append(X)
        vals = np.array([[np.trace(obs[n] @ X) for X in states] for n in names]
                        + [[np.trace(X) for X in states]])
    else:
        vals = evolve_traces(gen, rho0, [obs[n] for n in names], len(t_grid), h, stride, method)
    trace = vals[-1].real
    drift = np.max(abs(np.diff(trace)), initial=0.0)
    if drift > 1e-6 * stride:
        raise StepUnstable(f"trace drift {drift:.2e} per output step")
    return Trajectory(t_grid, *[vals[i].real for i in range(4)], trace=trace, states=states)


# --------------------------------------------------------------------------- steady state

def _smallest_singular_estimate(mat, iters=30):
    lu = scipy.linalg.lu_factor(mat)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(mat.shape[0]) + 0j
    x /= np.linalg.norm(x)
    sigma = np.inf
    for _ in range(iters):
        y = scipy.linalg.lu_solve(lu, x, trans=2)  # (M^H)^-1 x
        y = scipy.linalg.lu_solve(lu, y)  # then M^-1
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            return 0.0
        new = 1 / np.sqrt(norm)
        x = y / norm
        if abs(new - sigma) < 1e-6 * new:
            return new
        sigma = new
    return sigma


def steady_state(gen: Generator, tol=1e-10) -> np.ndarray:
    """Unique zero mode of the generator, Hermitized and normalized to unit trace.

    Raises DegenerateSteadyState when the zero eigenvalue is not simple: the
    second-smallest singular value is checked directly for small sectors and
    through the smallest singular value of the trace-bordered system otherwise.
    """
    sup = gen.superoperator(0)
    ii, jj = gen.sector(0)
    diag = np.flatnonzero(ii == jj)
    bordered = sup.copy()
    bordered[diag[0]] = (ii == jj).astype(complex)
    scale = max(1.0, np.max(abs(sup)))
    if len(ii) <= 1100:
        sv = np.linalg.svd(sup, compute_uv=False)
        if sv[-2] < tol * scale:
            raise DegenerateSteadyState(f"second-smallest singular value {sv[-2]:.2e}")
    elif _smallest_singular_estimate(bordered) < tol * scale:
        raise DegenerateSteadyState("trace-bordered generator is singular")
    rhs = np.zeros(len(ii), dtype=complex)
    rhs[diag[0]] = 1.0
    v = np.linalg.solve(bordered, rhs)
    rho = np.zeros((gen.dim, gen.dim), dtype=complex)
    rho[ii, jj] = v
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def regression_correlation(rho_ss, O1, O2, tau_grid, gen: Generator, dt=1e-3,
                           mirrored=False, method="auto"):
    """Two-time correlations from the quantum regression theorem.

    Forward: <O1(t + tau) O2(t)> = Tr{O1 U(tau)[O2 rho]}.
    Mirrored: <O1(t) O2(t + tau)> = Tr{O2 U(tau)[rho O1]}.
    ``tau_grid`` must start at 0 and be uniform (units of 2 pi / omega_c).
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if abs(tau_grid[0]) > 0:
        raise InvalidParameters("tau_grid must start at 0")
    _, stride, h = _time_steps(tau_grid, dt)
    if mirrored:
        X0, obs = rho_ss @ O1, O2
    else:
        X0, obs = O2 @ rho_ss, O1
    return evolve_traces(gen, X0, [obs], len(tau_grid), h, stride, method)[0]


def liouvillian_spectrum(gen: Generator, diff=0):
    """Eigenvalues and right/left eigenvectors of the generator restricted to a sector."""
    sup = gen.superoperator(diff)
    vals, left, right = scipy.linalg.eig(sup, left=True, right=True)
    # normalize so that left[:, k]^H right[:, k] = 1
    norm = np.einsum("ik,ik->k", left.conj(), right)
    return vals, right, left.conj() / norm[None, :]

