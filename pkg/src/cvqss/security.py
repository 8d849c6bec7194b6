"""Security criteria: mutual-information ordering and no-cloning thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .metrics import fidelity_gain_noise

BRANCH_POINT = 0.5 + 1.0 / math.sqrt(2.0)
ROOT_TOL = 1e-6
DEFAULT_RANGE = (0.1, 20.0)


def nc_threshold_asymptotic() -> float:
    """No-cloning fidelity for coherent states drawn from an unbounded codebook."""
    return 2.0 / 3.0


def nc_threshold_gaussian(sigma_sq: float) -> float:
    """No-cloning fidelity for a Gaussian codebook of variance ``sigma_sq``."""
    if sigma_sq < 0:
        raise ValueError("codebook variance must be non-negative")
    if sigma_sq >= BRANCH_POINT:
        return (4.0 * sigma_sq + 2.0) / (6.0 * sigma_sq + 1.0)
    return 1.0 / ((3.0 - 2.0 * math.sqrt(2.0)) * sigma_sq + 1.0)


@dataclass(frozen=True)
class CodebookSpec:
    """Isotropic complex Gaussian codebook with ``E|alpha|^2 = sigma_sq``.

    ``method`` selects the averaging rule: ``"adaptive"`` (scipy quad) or
    ``"laguerre"`` (Gauss-Laguerre with ``n_nodes`` nodes).
    """

    sigma_sq: float
    method: str = "adaptive"
    n_nodes: int = 80

    def __post_init__(self):
        if self.sigma_sq < 0:
            raise ValueError("codebook variance must be non-negative")
        if self.method not in ("adaptive", "laguerre"):
            raise ValueError(f"unknown averaging method {self.method!r}")


def average_over_codebook(f_of_abs2: Callable[[float], float], spec: CodebookSpec) -> float:
    """E[f(|alpha|^2)]; ``|alpha|^2`` is exponential with mean ``sigma_sq``."""
    s2 = spec.sigma_sq
    if s2 == 0:
        return float(f_of_abs2(0.0))
    if spec.method == "laguerre":
        t, w = np.polynomial.laguerre.laggauss(spec.n_nodes)
        return float(sum(wi * f_of_abs2(s2 * ti) for ti, wi in zip(t, w)))
    val, _ = integrate.quad(lambda t: f_of_abs2(s2 * t) * math.exp(-t), 0.0, math.inf,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def codebook_average_fidelity(k: float, v_out: float, sigma_sq: float,
                              method: str = "adaptive") -> float:
    """Fidelity of a (k, v_out) output averaged over a Gaussian codebook, by quadrature."""
    _check_domain(k, v_out, sigma_sq)
    spec = CodebookSpec(sigma_sq, method)
    return average_over_codebook(lambda a2: fidelity_gain_noise(math.sqrt(a2), k, v_out), spec)


def codebook_average_fidelity_closed(k: float, v_out: float, sigma_sq: float) -> float:
    """Closed form of :func:`codebook_average_fidelity` (Laplace transform of the exponential law)."""
    _check_domain(k, v_out, sigma_sq)
    denom = 1.0 + 4.0 * v_out
    return 2.0 / denom / (1.0 + 2.0 * (math.sqrt(k) - 1.0) ** 2 * sigma_sq / denom)


def _check_domain(k, v_out, sigma_sq):
    if k < 0 or v_out < 0.25 - 1e-9 or sigma_sq < 0:
        raise ValueError(f"invalid averaging domain k={k}, v_out={v_out}, sigma_sq={sigma_sq}")


@dataclass(frozen=True)
class SecurityWindow:
    """Codebook variances where the averaged fidelity beats the no-cloning threshold.

    ``sigma_max`` is ``None`` when the window is still open at the top of the
    search range.  An empty window has every field ``None``.
    """

    sigma_min: float | None
    sigma_max: float | None
    sigma_star: float | None
    delta_star: float | None
    search_range: tuple[float, float] = DEFAULT_RANGE

    @property
    def empty(self) -> bool:
        return self.sigma_min is None

    @property
    def bounded(self) -> bool:
        return not self.empty and self.sigma_max is not None


def security_window(fidelity_curve: Callable[[float], float],
                    search_range: tuple[float, float] = DEFAULT_RANGE, n_scan: int = 400) -> SecurityWindow:
    """Locate the largest interval of ``sigma_sq`` with ``F(sigma_sq) > F_nc(sigma_sq)``.

    Sign changes are bracketed on a scan grid and refined by bisection; the
    point of maximum excess fidelity is refined by a bounded Brent search.
    """
    lo, hi = search_range

    def excess(s2):
        return fidelity_curve(s2) - nc_threshold_gaussian(s2)

    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([excess(s) for s in grid])
    positive = vals > 0
    if not positive.any():
        return SecurityWindow(None, None, None, None, search_range)

    # longest run of positive excess
    runs, start = [], None
    for i, p in enumerate(positive):
        if p and start is None:
            start = i
        if not p and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(grid) - 1))
    first, last = max(runs, key=lambda r: r[1] - r[0])

    sigma_min = lo if first == 0 else optimize.bisect(excess, grid[first - 1], grid[first], xtol=ROOT_TOL / 10)
    sigma_max = None if last == len(grid) - 1 else optimize.bisect(excess, grid[last], grid[last + 1],
                                                                   xtol=ROOT_TOL / 10)
    i_best = first + int(np.argmax(vals[first:last + 1]))
    a = grid[max(i_best - 1, first)] if i_best > first else sigma_min
    b = grid[min(i_best + 1, last)] if i_best < last else (sigma_max if sigma_max is not None else hi)
    if b - a > ROOT_TOL:
        res = optimize.minimize_scalar(lambda s: -excess(s), bracket=None, bounds=(a, b), method="bounded",
                                       options={"xatol": ROOT_TOL / 10})
        sigma_star, delta_star = float(res.x), float(-res.fun)
        if vals[i_best] > delta_star:
            sigma_star, delta_star = float(grid[i_best]), float(vals[i_best])
    else:
        sigma_star, delta_star = float(grid[i_best]), float(vals[i_best])
    return SecurityWindow(float(sigma_min), None if sigma_max is None else float(sigma_max),
                          sigma_star, delta_star, search_range)


def window_for_output(k: float, v_out: float, search_range=DEFAULT_RANGE) -> SecurityWindow:
    """Security window of a phase-insensitive (k, v_out) reconstruction."""
    return security_window(lambda s2: codebook_average_fidelity_closed(k, v_out, s2), search_range)


@dataclass(frozen=True)
class MICheck:
    secure: bool
    margin: float


def mi_security_check(mi_collab: float, mi_adv: float) -> MICheck:
    """Secure when the collaborators hold strictly more information than the adversary."""
    return MICheck(mi_collab > mi_adv, mi_collab - mi_adv)
