"""Gaussian state metrics: fidelity, purity, negativity and mutual information."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianError, GaussianState, symplectic_eigenvalues

CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class MetricReport:
    fidelity: float
    purity: float
    negativity: float
    mi_nats: float
    n_eff: float


def fidelity(state1: GaussianState, state2: GaussianState) -> float:
    """Uhlmann fidelity between two single-mode Gaussian states.

    Uses the closed form for single-mode Gaussians with vacuum variance 1/4:
    ``F = exp(-d^T (V1+V2)^-1 d / 2) / (2 (sqrt(L + D) - sqrt(D)))`` with
    ``L = det(V1+V2)`` and ``D = 16 (det V1 - 1/16)(det V2 - 1/16)``.
    """
    for s in (state1, state2):
        if s.n_modes != 1:
            raise GaussianError("fidelity is implemented for single-mode states only")
        s.check()
    v_sum = state1.cov + state2.cov
    d = state1.mean - state2.mean
    lam = np.linalg.det(v_sum)
    delta = 16.0 * (np.linalg.det(state1.cov) - 1 / 16) * (np.linalg.det(state2.cov) - 1 / 16)
    # rounding can make a pure-state determinant dip just below 1/16
    delta = max(delta, 0.0)
    expo = -0.5 * d @ np.linalg.solve(v_sum, d)
    f = 0.5 * np.exp(expo) / (np.sqrt(lam + delta) - np.sqrt(delta))
    return _clamp(float(f))


def _clamp(f: float) -> float:
    if -CLAMP_TOL < f < 0.0:
        return 0.0
    if 1.0 < f < 1.0 + CLAMP_TOL:
        return 1.0
    if not 0.0 <= f <= 1.0:
        raise GaussianError(f"fidelity {f!r} outside [0, 1]")
    return f


def fidelity_gain_noise(alpha: complex, k: float, v_out: float) -> float:
    """Fidelity of a phase-insensitive output (mean sqrt(k) alpha, cov v_out I) against |alpha>."""
    denom = 1.0 + 4.0 * v_out
    return 2.0 / denom * math.exp(-2.0 * (math.sqrt(k) - 1.0) ** 2 * abs(alpha) ** 2 / denom)


def purity(state: GaussianState) -> float:
    """Purity ``1 / (4^n sqrt(det V))``."""
    state.check()
    return float(1.0 / (4.0 ** state.n_modes * np.sqrt(np.linalg.det(state.cov))))


def partial_transpose(cov: np.ndarray, mode: int = 1) -> np.ndarray:
    """Covariance after transposing ``mode`` (sign flip of its p quadrature)."""
    flip = np.ones(cov.shape[0])
    flip[2 * mode + 1] = -1.0
    return cov * np.outer(flip, flip)


def negativity(state: GaussianState) -> float:
    """Negativity of a two-mode state, ``max(0, (1 - 4 nu) / (8 nu))``.

    ``nu`` is the smallest symplectic eigenvalue of the partially transposed
    covariance; the state is entangled exactly when ``nu < 1/4``.
    """
    if state.n_modes != 2:
        raise GaussianError("negativity needs a two-mode state")
    nu = symplectic_eigenvalues(partial_transpose(state.cov, 1)).min()
    if nu >= 0.25 - 1e-12:  # separable, up to eigenvalue rounding
        return 0.0
    return float((1.0 - 4.0 * nu) / (8.0 * nu))


def mutual_information(sigma_sq: float, n_eff: float) -> float:
    """Mutual information in nats for a Gaussian codebook of variance ``sigma_sq``.

    Negative ``n_eff`` (possible from noisy estimates) is accepted; below -1
    the expression has no meaning and raises.
    """
    if sigma_sq < 0:
        raise ValueError("codebook variance must be non-negative")
    if math.isinf(n_eff):
        return 0.0
    if n_eff <= -1.0:
        raise ValueError(f"effective noise {n_eff} <= -1 is unphysical")
    return math.log1p(4.0 * sigma_sq / (1.0 + n_eff))


def effective_noise(alpha_in: complex, v_in: float, alpha_out: complex, v_out: float) -> float:
    """Output excess noise referred to the input through the amplitude gain.

    ``n_eff = 4 (v_out - v_in) |alpha_in / alpha_out|^2``.
    """
    if abs(alpha_out) == 0:
        raise ZeroDivisionError("effective noise undefined for zero output displacement")
    return 4.0 * (v_out - v_in) * abs(alpha_in / alpha_out) ** 2
