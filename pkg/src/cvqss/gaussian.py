"""Multimode Gaussian states and the operations acting on them.

Conventions used throughout the package:

* quadratures are mode-interleaved, ``(x1, p1, x2, p2, ...)``;
* ``x = Re(a)`` and ``p = Im(a)``, so a coherent state ``|alpha>`` has mean
  ``(Re alpha, Im alpha)``;
* the vacuum variance is 1/4 per quadrature;
* squeezing in decibels converts via ``exp(-2 r) = 10 ** (-S / 10)``.

Every operation returns a new :class:`GaussianState`; nothing is mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import constants

VACUUM_VARIANCE = 0.25
SYMMETRY_TOL = 1e-10
ADMISSIBILITY_TOL = 1e-9


class GaussianError(ValueError):
    """Raised for invalid arguments or inadmissible covariance matrices."""


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with 2x2 blocks [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def db_to_r(squeezing_db: float) -> float:
    """Squeezing parameter r for a squeezing level given in dB."""
    return squeezing_db / 20.0 * np.log(10.0)


def r_to_db(r: float) -> float:
    return 20.0 * r / np.log(10.0)


def bose_einstein(frequency_hz: float, temperature_k: float) -> float:
    """Mean thermal photon number of a mode at the given frequency and temperature."""
    if temperature_k <= 0:
        return 0.0
    x = constants.h * frequency_hz / (constants.k * temperature_k)
    return float(1.0 / np.expm1(x))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Sorted symplectic eigenvalues of a 2n x 2n covariance matrix."""
    n = cov.shape[0] // 2
    eigs = np.linalg.eigvals(1j * symplectic_form(n) @ cov)
    vals = np.sort(np.abs(eigs))
    # eigenvalues come in +/- pairs
    return vals[::2]


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state given by its quadrature mean vector and covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if mean.size % 2 or mean.size == 0:
            raise GaussianError("mean must have even, nonzero length")
        if cov.shape != (mean.size, mean.size):
            raise GaussianError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def amplitude(self, mode: int = 0) -> complex:
        """Mean complex amplitude of one mode."""
        _check_mode(self, mode)
        return complex(self.mean[2 * mode], self.mean[2 * mode + 1])

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        return bool(np.allclose(self.cov, self.cov.T, rtol=0.0, atol=tol))

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.cov)

    def is_admissible(self, tol: float = ADMISSIBILITY_TOL) -> bool:
        """Symmetric and satisfying the uncertainty principle (all nu >= 1/4)."""
        if not self.is_symmetric():
            return False
        return bool(np.all(self.symplectic_eigenvalues() >= VACUUM_VARIANCE - tol))

    def check(self) -> "GaussianState":
        """Return ``self`` or raise :class:`GaussianError` if inadmissible."""
        if not self.is_symmetric():
            raise GaussianError("covariance matrix is not symmetric")
        nu = self.symplectic_eigenvalues()
        if np.any(nu < VACUUM_VARIANCE - ADMISSIBILITY_TOL):
            raise GaussianError(f"covariance violates the uncertainty principle (min nu = {nu.min():.6g})")
        return self


@dataclass(frozen=True)
class SymplecticOp:
    """Affine symplectic map ``r -> matrix @ r + displacement``."""

    matrix: np.ndarray
    displacement: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise GaussianError("symplectic matrix must be square with even dimension")
        d = np.zeros(m.shape[0]) if self.displacement is None else np.asarray(self.displacement, dtype=float)
        if d.shape != (m.shape[0],):
            raise GaussianError("displacement length does not match matrix")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "displacement", d)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def is_symplectic(self, tol: float = 1e-10) -> bool:
        omega = symplectic_form(self.n_modes)
        return bool(np.allclose(self.matrix @ omega @ self.matrix.T, omega, rtol=0.0, atol=tol))

    def apply(self, state: GaussianState) -> GaussianState:
        if state.n_modes != self.n_modes:
            raise GaussianError("operation and state have different mode counts")
        return GaussianState(self.matrix @ state.mean + self.displacement,
                             self.matrix @ state.cov @ self.matrix.T)

    def then(self, other: "SymplecticOp") -> "SymplecticOp":
        """The op equivalent to applying ``self`` and then ``other``."""
        return SymplecticOp(other.matrix @ self.matrix,
                            other.matrix @ self.displacement + other.displacement)


def bogoliubov_matrix(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Real quadrature matrix for the mode transformation ``a' = u a + w a^dagger``.

    ``u`` and ``w`` are k x k complex matrices; the result is 2k x 2k in the
    interleaved ordering.
    """
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    k = u.shape[0]
    s = np.zeros((2 * k, 2 * k))
    for i in range(k):
        for j in range(k):
            a, b = u[i, j], w[i, j]
            s[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [
                [a.real + b.real, -a.imag + b.imag],
                [a.imag + b.imag, a.real - b.real],
            ]
    return s


def _check_mode(state: GaussianState, mode: int) -> None:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < state.n_modes:
        raise GaussianError(f"invalid mode index {mode!r} for a {state.n_modes}-mode state")


def _indices(modes: Sequence[int]) -> list[int]:
    return [q for m in modes for q in (2 * m, 2 * m + 1)]


def embed(local: np.ndarray, modes: Sequence[int], n_modes: int) -> np.ndarray:
    """Embed a matrix acting on ``modes`` into the identity on ``n_modes`` modes."""
    full = np.eye(2 * n_modes)
    idx = _indices(modes)
    full[np.ix_(idx, idx)] = local
    return full


def apply_local(state: GaussianState, local: np.ndarray, modes: Sequence[int]) -> GaussianState:
    """Apply a (symplectic) quadrature matrix acting on a subset of modes."""
    for m in modes:
        _check_mode(state, m)
    idx = _indices(modes)
    mean = state.mean.copy()
    mean[idx] = local @ state.mean[idx]
    # only the rows/columns touching `modes` change
    full = embed(local, modes, state.n_modes)
    cov = full @ state.cov @ full.T
    return GaussianState(mean, cov)


# -- state constructors -------------------------------------------------------

def make_vacuum(n_modes: int = 1) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise GaussianError("n_modes must be a positive integer")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def make_coherent(alpha: complex) -> GaussianState:
    alpha = complex(alpha)
    return GaussianState([alpha.real, alpha.imag], VACUUM_VARIANCE * np.eye(2))


def make_thermal(nbar: float) -> GaussianState:
    if nbar < 0:
        raise GaussianError("thermal occupation must be non-negative")
    return GaussianState(np.zeros(2), (2.0 * nbar + 1.0) / 4.0 * np.eye(2))


def tensor(*states: GaussianState) -> GaussianState:
    """Product state of the given states, modes in argument order."""
    if not states:
        raise GaussianError("need at least one state")
    mean = np.concatenate([s.mean for s in states])
    size = mean.size
    cov = np.zeros((size, size))
    pos = 0
    for s in states:
        n = s.mean.size
        cov[pos:pos + n, pos:pos + n] = s.cov
        pos += n
    return GaussianState(mean, cov)


# -- symplectic operations ----------------------------------------------------

def rotation_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def squeeze_matrix(r: float, theta: float = 0.0) -> np.ndarray:
    """Single-mode squeezer that shrinks the quadrature along phase-space angle ``theta``.

    ``theta = 0`` squeezes x, ``theta = pi/2`` squeezes p.
    """
    rot = rotation_matrix(theta)
    return rot @ np.diag([np.exp(-r), np.exp(r)]) @ rot.T


def squeeze(state: GaussianState, mode: int, r: float, theta: float = 0.0) -> GaussianState:
    _check_mode(state, mode)
    return apply_local(state, squeeze_matrix(r, theta), [mode])


def two_mode_squeeze_matrix(r: float, phase: float = 0.0) -> np.ndarray:
    """Two-mode squeezer ``a_i -> cosh r a_i + e^{i phase} sinh r a_j^dagger`` (and i <-> j)."""
    ch, sh = np.cosh(r), np.sinh(r)
    e = np.exp(1j * phase)
    u = np.array([[ch, 0.0], [0.0, ch]])
    w = np.array([[0.0, e * sh], [e * sh, 0.0]])
    return bogoliubov_matrix(u, w)


def two_mode_squeeze(state: GaussianState, mode_i: int, mode_j: int, r: float,
                     phase: float = 0.0) -> GaussianState:
    if mode_i == mode_j:
        raise GaussianError("two-mode squeezing needs two distinct modes")
    return apply_local(state, two_mode_squeeze_matrix(r, phase), [mode_i, mode_j])


def beam_splitter_matrix(tau: float, phi: float = 0.0) -> np.ndarray:
    """Beam splitter with power transmissivity ``tau``.

    ``a_i -> sqrt(tau) a_i + e^{i phi} sqrt(1 - tau) a_j``,
    ``a_j -> -e^{-i phi} sqrt(1 - tau) a_i + sqrt(tau) a_j``.
    The inverse of ``(tau, phi)`` is ``(tau, phi + pi)``.
    """
    if not 0.0 <= tau <= 1.0:
        raise GaussianError(f"transmissivity must lie in [0, 1], got {tau}")
    t, r = np.sqrt(tau), np.sqrt(1.0 - tau)
    u = np.array([[t, np.exp(1j * phi) * r], [-np.exp(-1j * phi) * r, t]])
    return bogoliubov_matrix(u, np.zeros((2, 2)))


def beam_splitter(state: GaussianState, mode_i: int, mode_j: int, tau: float,
                  phi: float = 0.0) -> GaussianState:
    if mode_i == mode_j:
        raise GaussianError("beam splitter needs two distinct modes")
    return apply_local(state, beam_splitter_matrix(tau, phi), [mode_i, mode_j])


def hybrid_ring_matrix(phi: float = 0.0) -> np.ndarray:
    """Balanced 180-degree hybrid: ``a_i -> (a_i + e^{i phi} a_j)/sqrt2``, ``a_j -> (e^{-i phi} a_i - a_j)/sqrt2``.

    The map is its own inverse for every ``phi``.
    """
    e = np.exp(1j * phi)
    u = np.array([[1.0, e], [np.conj(e), -1.0]]) / np.sqrt(2.0)
    return bogoliubov_matrix(u, np.zeros((2, 2)))


def hybrid_ring(state: GaussianState, mode_i: int, mode_j: int, phi: float = 0.0) -> GaussianState:
    if mode_i == mode_j:
        raise GaussianError("hybrid ring needs two distinct modes")
    return apply_local(state, hybrid_ring_matrix(phi), [mode_i, mode_j])


def phase_shift(state: GaussianState, mode: int, angle: float) -> GaussianState:
    """Rotate a mode in phase space: ``a -> e^{i angle} a``."""
    _check_mode(state, mode)
    return apply_local(state, rotation_matrix(angle), [mode])


def displace(state: GaussianState, mode: int, beta: complex) -> GaussianState:
    _check_mode(state, mode)
    beta = complex(beta)
    mean = state.mean.copy()
    mean[2 * mode] += beta.real
    mean[2 * mode + 1] += beta.imag
    return GaussianState(mean, state.cov)


# -- noisy channels -----------------------------------------------------------

def loss_channel(state: GaussianState, mode: int, eta_loss: float, nbar_env: float = 0.0) -> GaussianState:
    """Mix ``mode`` with a thermal environment on a beam splitter of transmissivity ``eta_loss``."""
    _check_mode(state, mode)
    if not 0.0 <= eta_loss <= 1.0:
        raise GaussianError(f"efficiency must lie in [0, 1], got {eta_loss}")
    if nbar_env < 0:
        raise GaussianError("environment occupation must be non-negative")
    x = np.ones(2 * state.n_modes)
    x[2 * mode:2 * mode + 2] = np.sqrt(eta_loss)
    cov = state.cov * np.outer(x, x)
    cov[2 * mode, 2 * mode] += (1.0 - eta_loss) * (2.0 * nbar_env + 1.0) / 4.0
    cov[2 * mode + 1, 2 * mode + 1] += (1.0 - eta_loss) * (2.0 * nbar_env + 1.0) / 4.0
    return GaussianState(state.mean * x, cov)


def amplifier_channel(state: GaussianState, mode: int, gain: float) -> GaussianState:
    """Quantum-limited phase-insensitive amplitude rescaling by ``gain >= 0``.

    ``gain < 1`` is pure loss, ``gain > 1`` a quantum-limited amplifier; both
    add the minimum noise ``|gain^2 - 1| / 4`` per quadrature.
    """
    _check_mode(state, mode)
    if gain < 0:
        raise GaussianError("amplitude gain must be non-negative")
    x = np.ones(2 * state.n_modes)
    x[2 * mode:2 * mode + 2] = gain
    cov = state.cov * np.outer(x, x)
    added = abs(gain * gain - 1.0) / 4.0
    cov[2 * mode, 2 * mode] += added
    cov[2 * mode + 1, 2 * mode + 1] += added
    return GaussianState(state.mean * x, cov)


def add_classical_noise(state: GaussianState, mode: int, variance: float) -> GaussianState:
    """Add Gaussian classical noise of ``variance`` to both quadratures of ``mode``."""
    _check_mode(state, mode)
    if variance < 0:
        raise GaussianError("noise variance must be non-negative")
    cov = state.cov.copy()
    cov[2 * mode, 2 * mode] += variance
    cov[2 * mode + 1, 2 * mode + 1] += variance
    return GaussianState(state.mean, cov)


def partial_trace(state: GaussianState, keep_modes: Sequence[int]) -> GaussianState:
    """Reduced state on ``keep_modes`` (in the given order)."""
    keep = list(keep_modes)
    if not keep:
        raise GaussianError("keep_modes must be nonempty")
    if len(set(keep)) != len(keep):
        raise GaussianError("keep_modes contains duplicates")
    for m in keep:
        _check_mode(state, m)
    idx = _indices(keep)
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def sample_quadratures(state: GaussianState, n_samples: int, seed=None) -> np.ndarray:
    """Draw ``n_samples`` quadrature vectors, shape ``(n_samples, 2 n_modes)``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`; the same
    seed always yields the same samples.
    """
    if n_samples < 1:
        raise GaussianError("n_samples must be at least 1")
    if not state.is_admissible():
        raise GaussianError("cannot sample from an inadmissible covariance")
    try:
        chol = np.linalg.cholesky(state.cov)
    except np.linalg.LinAlgError as exc:
        raise GaussianError("covariance is not positive definite") from exc
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, state.mean.size))
    return state.mean + z @ chol.T


def estimate_state(samples: np.ndarray) -> GaussianState:
    """Gaussian state from sample first and second moments."""
    samples = np.atleast_2d(samples)
    return GaussianState(samples.mean(axis=0), np.cov(samples, rowvar=False).reshape(samples.shape[1], -1))
