"""The {2,3} pipeline read as continuous-variable dense coding.

Comparisons are made at a fixed ensemble variance
``sigma_ens^2 = sigma_cb^2 + sigma_st^2``: squeezing the resource raises the
transmitted-state variance, so less is left for the codebook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import gaussian as gs
from .protocol import DeviceModel, eta_gamma, input_variance, make_tms_resource, scheme_channel

COHERENT_STATE_VARIANCE = 0.25


class BudgetExhausted(ValueError):
    """The transmitted-state noise alone exceeds the ensemble variance."""


@dataclass(frozen=True)
class DenseCodingBudget:
    sigma_ens_sq: float
    sigma_cb_sq: float
    sigma_st_sq: float
    r: float

    def __post_init__(self):
        if min(self.sigma_ens_sq, self.sigma_cb_sq, self.sigma_st_sq, self.r) < 0:
            raise ValueError("budget entries must be non-negative")


def _budget(sigma_ens_sq: float, sigma_st_sq: float, r: float) -> DenseCodingBudget:
    if sigma_st_sq > sigma_ens_sq:
        raise BudgetExhausted(f"state variance {sigma_st_sq:.6g} exceeds ensemble variance {sigma_ens_sq:.6g}")
    return DenseCodingBudget(sigma_ens_sq, sigma_ens_sq - sigma_st_sq, sigma_st_sq, r)


def transmitted_state_variance(squeezing_db: float, device: DeviceModel = DeviceModel()) -> float:
    """State variance of the encoded resource mode, as ``sinh(2 r_eff)``.

    ``r_eff`` is the squeezing of the ideal TMS state with the same local
    variance, ``cosh(2 r_eff) = 4 v_local``; an ideal resource gives ``sinh(2r)``.
    """
    local = gs.partial_trace(make_tms_resource(squeezing_db, device), [0])
    x = 4.0 * float(np.trace(local.cov)) / 2.0
    if x - 1.0 < 1e-12:  # vacuum up to rounding
        return 0.0
    return math.sqrt(x * x - 1.0)


def budget_from_squeezing(sigma_ens_sq: float, squeezing_db: float, ideal: bool = True,
                          device: DeviceModel = DeviceModel()) -> DenseCodingBudget:
    r = gs.db_to_r(squeezing_db)
    st = math.sinh(2.0 * r) if ideal else transmitted_state_variance(squeezing_db, device)
    return _budget(sigma_ens_sq, st, r)


def mi_dense_ideal(budget: DenseCodingBudget) -> float:
    """Dense-coding limit ``ln(1 + sigma_cb^2 e^{2r})`` in nats."""
    return math.log1p(budget.sigma_cb_sq * math.exp(2.0 * budget.r))


def mi_coherent_baseline(sigma_ens_sq: float, s_conv: float = 1.0) -> float:
    """Ideal coherent-state communication with the same ensemble variance.

    ``s_conv`` rescales the signal-to-noise ratio (1 keeps the dense-coding
    convention; 4 matches ``ln(1 + 4 sigma^2)`` at zero added noise).
    """
    if sigma_ens_sq < COHERENT_STATE_VARIANCE:
        raise BudgetExhausted("ensemble variance below the coherent-state variance")
    return math.log1p((sigma_ens_sq - COHERENT_STATE_VARIANCE) * s_conv)


def snr_gain(squeezing_db: float, gain_db: float, device: DeviceModel = DeviceModel()) -> float:
    """Noise suppression of the decoded signal relative to an unsqueezed resource.

    The resource noise left in the decoded output, referred to the input, is
    compared with ``(1 + gamma^2) / 4``, its value for a vacuum resource; for an
    ideal device at ``gamma = 1`` the ratio is ``e^{2r}``.
    """
    channel = scheme_channel(squeezing_db, gain_db, (2, 3), device)
    _, gamma = eta_gamma(gain_db)
    residual = channel.v_out / channel.k - input_variance(device)
    return (1.0 + gamma ** 2) / (4.0 * residual)


def mi_dense_simulated(sigma_ens_sq: float, squeezing_db: float, gain_db: float | None = None,
                       device: DeviceModel = DeviceModel()) -> float:
    """Dense-coding MI of the simulated pipeline; ``gain_db=None`` optimizes the gain."""
    budget = budget_from_squeezing(sigma_ens_sq, squeezing_db, ideal=False, device=device)

    def mi(g):
        return math.log1p(budget.sigma_cb_sq * snr_gain(squeezing_db, g, device))

    if gain_db is not None:
        return mi(gain_db)
    res = optimize.minimize_scalar(lambda g: -mi(g), bounds=(0.0, 20.0), method="bounded",
                                   options={"xatol": 1e-8})
    return float(-res.fun)


@dataclass(frozen=True)
class AdvantageRegion:
    """Squeezing levels (dB) where the dense-coding limit beats the coherent baseline."""

    s_low_db: float | None
    s_high_db: float | None

    @property
    def empty(self) -> bool:
        return self.s_low_db is None


def advantage_region(sigma_ens_sq: float, s_conv: float = 1.0, s_max_db: float = 30.0,
                     n_scan: int = 600) -> AdvantageRegion:
    """Crossing points of the ideal dense-coding MI and the coherent baseline."""
    base = mi_coherent_baseline(sigma_ens_sq, s_conv)

    def diff(s_db):
        try:
            return mi_dense_ideal(budget_from_squeezing(sigma_ens_sq, s_db)) - base
        except BudgetExhausted:
            return -base

    grid = np.linspace(0.0, s_max_db, n_scan)
    vals = np.array([diff(s) for s in grid])
    pos = np.nonzero(vals > 0)[0]
    if pos.size == 0:
        return AdvantageRegion(None, None)
    i, j = pos[0], pos[-1]
    lo = 0.0 if i == 0 else optimize.brentq(diff, grid[i - 1], grid[i], xtol=1e-10)
    hi = s_max_db if j == grid.size - 1 else optimize.brentq(diff, grid[j], grid[j + 1], xtol=1e-10)
    return AdvantageRegion(float(lo), float(hi))
