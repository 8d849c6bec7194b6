"""Erasure correction with the three shares as independent channels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize

from . import gaussian as gs
from .metrics import fidelity
from .protocol import DeviceModel, best_rescale, scheme_channel, share_channel

PLAYERS = (1, 2, 3)


@dataclass(frozen=True)
class ErasureScenario:
    """One combination of erased channels.

    ``scheme`` is the reconstruction pair, ``survivor`` the lone remaining
    player for two erasures, and both are ``None`` when everything is lost.
    """

    erased: frozenset
    probability: float
    scheme: tuple | None = None
    survivor: int | None = None

    @property
    def best_scheme(self) -> str:
        if self.scheme is not None:
            return f"{{{self.scheme[0]},{self.scheme[1]}}} collaborators"
        if self.survivor is not None:
            i, j = sorted(set(PLAYERS) - {self.survivor})
            return f"{{{i},{j}}} adversary"
        return "vacuum state"

    @property
    def label(self) -> str:
        if not self.erased:
            return "none"
        return ", ".join(f"P{p}" for p in sorted(self.erased))


# erased players -> (scheme, survivor)
_BEST = {
    frozenset(): ((1, 2), None),
    frozenset({1}): ((2, 3), None),
    frozenset({2}): ((1, 3), None),
    frozenset({3}): ((1, 2), None),
    frozenset({1, 2}): (None, 3),
    frozenset({1, 3}): (None, 2),
    frozenset({2, 3}): (None, 1),
    frozenset({1, 2, 3}): (None, None),
}
PATTERNS = tuple(_BEST)


def pattern_probability(erased: frozenset, lam: float) -> float:
    n = len(erased)
    return lam ** n * (1.0 - lam) ** (3 - n)


def scenario_table(lam: float) -> list[ErasureScenario]:
    """The eight erasure combinations with probabilities and best reconstruction."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {lam}")
    return [ErasureScenario(e, pattern_probability(e, lam), *_BEST[e]) for e in PATTERNS]


def probability_matrix(lambdas: np.ndarray) -> np.ndarray:
    """Scenario probabilities, shape (len(lambdas), 8), columns in :data:`PATTERNS` order."""
    lam = np.asarray(lambdas, dtype=float)[:, None]
    n = np.array([len(e) for e in PATTERNS])[None, :]
    return lam ** n * (1.0 - lam) ** (3 - n)


@dataclass
class ErasureModel:
    """Per-scenario fidelities of the erasure code at fixed operating point."""

    squeezing_db: float = 6.0
    gain_db: float = 7.0
    device: DeviceModel = field(default_factory=DeviceModel)

    @cached_property
    def _channels(self):
        ch = {}
        for e in PATTERNS:
            scheme, survivor = _BEST[e]
            if scheme is not None:
                ch[e] = scheme_channel(self.squeezing_db, self.gain_db, scheme, self.device, e)
            elif survivor is not None:
                ch[e] = share_channel(self.squeezing_db, survivor, self.device, e)
        return ch

    def scenario_fidelity(self, erased, alpha: complex) -> float:
        erased = frozenset(erased)
        scheme, survivor = _BEST[erased]
        target = gs.make_coherent(alpha)
        if scheme is None and survivor is None:
            if self.device.env_nbar:
                return fidelity(gs.make_thermal(self.device.env_nbar), target)
            return fidelity(gs.make_vacuum(1), target)
        out = self._channels[erased].state(alpha)
        if survivor is not None:
            return best_rescale(out, alpha)[0]
        return fidelity(out, target)

    def alternatives(self, erased, alpha: complex) -> dict[str, float]:
        """Fidelity of every reconstruction the surviving players could run.

        Pairs may use their collaborator scheme or either share alone; a single
        survivor may use the share as received.  Adaptive strategies such as
        rescaling are not counted as alternatives.
        """
        erased = frozenset(erased)
        survivors = [p for p in PLAYERS if p not in erased]
        target = gs.make_coherent(alpha)
        out = {}
        for i in range(len(survivors)):
            for j in range(i + 1, len(survivors)):
                pair = (survivors[i], survivors[j])
                ch = scheme_channel(self.squeezing_db, self.gain_db, pair, self.device, erased)
                out[f"{{{pair[0]},{pair[1]}}}"] = fidelity(ch.state(alpha), target)
        for p in survivors:
            ch = share_channel(self.squeezing_db, p, self.device, erased)
            out[f"P{p}"] = fidelity(ch.state(alpha), target)
        return out

    def fidelity_vector(self, alpha: complex) -> np.ndarray:
        return np.array([self.scenario_fidelity(e, alpha) for e in PATTERNS])

    def average_fidelity(self, alpha: complex, lam: float) -> float:
        p = np.array([s.probability for s in scenario_table(lam)])
        return float(p @ self.fidelity_vector(alpha))


def scenario_fidelity(scenario: ErasureScenario, alpha: complex, squeezing_db: float = 6.0,
                      gain_db: float = 7.0, device: DeviceModel = DeviceModel()) -> float:
    return ErasureModel(squeezing_db, gain_db, device).scenario_fidelity(scenario.erased, alpha)


def average_fidelity(alpha: complex, lam: float, squeezing_db: float = 6.0, gain_db: float = 7.0,
                     device: DeviceModel = DeviceModel()) -> float:
    """Erasure-averaged transmission fidelity, summed over all eight scenarios."""
    return ErasureModel(squeezing_db, gain_db, device).average_fidelity(alpha, lam)


def coherent_baseline(alpha: complex, lam: float) -> float:
    """Fidelity of a bare coherent state through one erasure channel."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {lam}")
    return 1.0 - lam * (1.0 - math.exp(-abs(alpha) ** 2))


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_trials: int


def monte_carlo_fidelity(model: ErasureModel, alpha: complex, lam: float, n_trials: int = 100_000,
                         seed=None) -> MonteCarloEstimate:
    """Estimate the averaged fidelity by sampling independent erasures per channel."""
    rng = np.random.default_rng(seed)
    erased = rng.random((n_trials, 3)) < lam
    f_by_pattern = {e: model.scenario_fidelity(e, alpha) for e in PATTERNS}
    codes = erased @ np.array([1, 2, 4])
    lookup = np.empty(8)
    for e, f in f_by_pattern.items():
        lookup[sum(1 << (p - 1) for p in e)] = f
    samples = lookup[codes]
    return MonteCarloEstimate(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n_trials)), n_trials)


@dataclass(frozen=True)
class AdvantageMap:
    alpha_sq: np.ndarray
    lambdas: np.ndarray
    f_bar: np.ndarray
    f_coh: np.ndarray
    alpha_sq_star: float
    lambda_star: float
    delta_star: float
    zero_contour: list = field(default_factory=list, repr=False)

    @property
    def delta(self) -> np.ndarray:
        return self.f_bar - self.f_coh


def advantage_map(alpha_sq=None, lambdas=None, squeezing_db: float = 6.0, gain_db: float = 7.0,
                  device: DeviceModel = DeviceModel(), polish: bool = True) -> AdvantageMap:
    """Fidelity advantage over the single-channel baseline on an (|alpha|^2, lambda) grid.

    Rows index ``alpha_sq`` and columns ``lambdas``.  Secrets are taken real.
    """
    alpha_sq = np.linspace(0.0, 10.0, 101) if alpha_sq is None else np.asarray(alpha_sq, dtype=float)
    lambdas = np.linspace(0.0, 1.0, 101) if lambdas is None else np.asarray(lambdas, dtype=float)
    model = ErasureModel(squeezing_db, gain_db, device)
    fids = np.array([model.fidelity_vector(math.sqrt(a2)) for a2 in alpha_sq])
    probs = probability_matrix(lambdas)
    f_bar = fids @ probs.T
    f_coh = 1.0 - lambdas[None, :] * (1.0 - np.exp(-alpha_sq[:, None]))
    delta = f_bar - f_coh

    i, j = np.unravel_index(int(np.argmax(delta)), delta.shape)
    a_star, l_star, d_star = float(alpha_sq[i]), float(lambdas[j]), float(delta[i, j])
    if polish:
        def neg(x):
            a2, lam = x
            return -(model.average_fidelity(math.sqrt(max(a2, 0.0)), lam) - coherent_baseline(math.sqrt(max(a2, 0.0)), lam))

        bounds = [(alpha_sq.min(), alpha_sq.max()), (lambdas.min(), lambdas.max())]
        res = optimize.minimize(neg, [a_star, l_star], method="Nelder-Mead", bounds=bounds,
                                options={"xatol": 1e-5, "fatol": 1e-12, "maxiter": 400})
        if -res.fun >= d_star:
            a_star, l_star, d_star = float(res.x[0]), float(res.x[1]), float(-res.fun)
    return AdvantageMap(alpha_sq, lambdas, f_bar, f_coh, a_star, l_star, d_star, zero_contour(alpha_sq, lambdas, delta))


def zero_contour(alpha_sq: np.ndarray, lambdas: np.ndarray, delta: np.ndarray) -> list[tuple[float, float]]:
    """Points (|alpha|^2, lambda) where the advantage changes sign along each grid row."""
    points = []
    for i, a2 in enumerate(alpha_sq):
        row = delta[i]
        for j in np.nonzero(np.sign(row[:-1]) * np.sign(row[1:]) < 0)[0]:
            t = row[j] / (row[j] - row[j + 1])
            points.append((float(a2), float(lambdas[j] + t * (lambdas[j + 1] - lambdas[j]))))
    return points
