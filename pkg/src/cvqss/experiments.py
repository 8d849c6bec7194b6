"""Named batch experiments: parameter grids in, result tables out.

Each experiment turns a parameter dict into a :class:`ResultTable`.  Rows are
produced in grid order whatever the number of worker threads, so identical
inputs give identical tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dense_coding as dc
from .erasure import ErasureModel, advantage_map, monte_carlo_fidelity
from .protocol import (
    DeviceModel,
    ProtocolParams,
    optimal_gain_db,
    run_protocol,
    scheme_channel,
    scheme_label,
)
from .security import codebook_average_fidelity_closed, nc_threshold_gaussian, window_for_output


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    defaults: dict
    grids: tuple[str, ...]
    runner: Callable[[dict, DeviceModel, int, int], ResultTable]


def expand_grid(spec) -> list[float]:
    """A grid is a number, a list of numbers, or ``{"start", "stop", "num"}``."""
    if isinstance(spec, dict):
        return [float(x) for x in np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))]
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    return [float(spec)]


def _map(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- fig2-sweep ---------------------------------------------------------------

def fig2_row(scheme, squeezing_db: float, gain_db, alpha_sq: float, sigma_sq: float,
             optimize_rescale: bool, device: DeviceModel) -> tuple:
    alpha = math.sqrt(alpha_sq)
    if gain_db is None:
        gain_db = optimal_gain_db(alpha, squeezing_db, device)[0] if tuple(scheme) != (1, 2) else 0.0
    params = ProtocolParams(squeezing_db, gain_db, alpha, scheme)
    t = run_protocol(params, device, sigma_sq, optimize_rescale)
    return (scheme_label(scheme), squeezing_db, gain_db, t.report.fidelity, t.adversary_fidelity,
            t.report.mi_nats, t.mi_adv, t.report.negativity, t.report.purity)


def _fig2(p: dict, device: DeviceModel, seed: int, threads: int) -> ResultTable:
    from .protocol import parse_scheme

    schemes = [parse_scheme(s) for s in p["schemes"]]
    s_grid = expand_grid(p["squeezing_db"])
    gain = None if p["gain_db"] is None else float(p["gain_db"])
    jobs = [(sc, s) for sc in schemes for s in s_grid]
    rows = _map(lambda j: fig2_row(j[0], j[1], gain, p["alpha_sq"], p["sigma_sq"], p["optimize_rescale"], device),
                jobs, threads)
    cols = ["scheme", "S_db", "G_db", "F_collab", "F_adv", "MI_collab", "MI_adv", "negativity", "purity"]
    return ResultTable(cols, rows)


# -- fig3-security ------------------------------------------------------------

def _fig3(p: dict, device: DeviceModel, seed: int, threads: int) -> ResultTable:
    ch = scheme_channel(p["squeezing_db"], p["gain_db"], p["scheme"], device)
    k, v = ch.k, ch.v_out
    rows = []
    for s2 in expand_grid(p["sigma_sq"]):
        f = codebook_average_fidelity_closed(k, v, s2)
        f_nc = nc_threshold_gaussian(s2)
        rows.append((s2, f, f_nc, f - f_nc))
    lo, hi = p["search_range"]
    w = window_for_output(k, v, (float(lo), float(hi)))
    summary = {"k": k, "v_out": v, "window_empty": w.empty, "sigma_min": w.sigma_min, "sigma_max": w.sigma_max,
               "sigma_star": w.sigma_star, "delta_star": w.delta_star}
    return ResultTable(["sigma_sq", "F_avg", "F_nc", "delta"], rows, summary)


# -- fig4-dense ---------------------------------------------------------------

def fig4_row(sigma_ens_sq: float, squeezing_db: float, gain_db, s_conv: float, device: DeviceModel) -> tuple:
    nan = math.nan
    base = dc.mi_coherent_baseline(sigma_ens_sq, s_conv)
    try:
        b = dc.budget_from_squeezing(sigma_ens_sq, squeezing_db)
        ideal = dc.mi_dense_ideal(b)
        cb, st = b.sigma_cb_sq, b.sigma_st_sq
    except dc.BudgetExhausted:
        ideal = cb = st = nan
    try:
        sim = dc.mi_dense_simulated(sigma_ens_sq, squeezing_db, gain_db, device)
    except dc.BudgetExhausted:
        sim = nan
    return (squeezing_db, cb, st, ideal, base, sim)


def _fig4(p: dict, device: DeviceModel, seed: int, threads: int) -> ResultTable:
    gain = None if p["gain_db"] is None else float(p["gain_db"])
    rows = _map(lambda s: fig4_row(p["sigma_ens_sq"], s, gain, p["s_conv"], device),
                expand_grid(p["squeezing_db"]), threads)
    region = dc.advantage_region(p["sigma_ens_sq"], p["s_conv"])
    summary = {"advantage_s_low_db": region.s_low_db, "advantage_s_high_db": region.s_high_db}
    return ResultTable(["S_db", "sigma_cb_sq", "sigma_st_sq", "MI_dense_ideal", "MI_baseline", "MI_dense_sim"],
                       rows, summary)


# -- fig5-erasure -------------------------------------------------------------

def _fig5(p: dict, device: DeviceModel, seed: int, threads: int) -> ResultTable:
    a_grid = np.array(expand_grid(p["alpha_sq"]))
    l_grid = np.array(expand_grid(p["lambda"]))
    m = advantage_map(a_grid, l_grid, p["squeezing_db"], p["gain_db"], device, polish=p["polish"])
    rows = [(float(a), float(lam), float(m.f_bar[i, j]), float(m.f_coh[i, j]), float(m.delta[i, j]))
            for i, a in enumerate(a_grid) for j, lam in enumerate(l_grid)]
    summary = {"alpha_sq_star": m.alpha_sq_star, "lambda_star": m.lambda_star, "delta_star": m.delta_star}
    n_mc = int(p["monte_carlo_trials"])
    if n_mc > 0:
        model = ErasureModel(p["squeezing_db"], p["gain_db"], device)
        est = monte_carlo_fidelity(model, math.sqrt(m.alpha_sq_star), m.lambda_star, n_mc, seed)
        summary.update(mc_mean=est.mean, mc_stderr=est.stderr, mc_trials=n_mc,
                       exact=model.average_fidelity(math.sqrt(m.alpha_sq_star), m.lambda_star))
    return ResultTable(["alpha_sq", "lambda", "F_bar", "F_coh", "delta_F"], rows, summary)


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "fig2-sweep",
            "Collaborator and adversary fidelity, MI and resource entanglement versus squeezing",
            {"squeezing_db": {"start": 0, "stop": 10, "num": 11}, "gain_db": None, "schemes": ["12", "23"],
             "alpha_sq": 1.3, "sigma_sq": 3.0, "optimize_rescale": True},
            ("squeezing_db",),
            _fig2,
        ),
        Experiment(
            "fig3-security",
            "Codebook-averaged fidelity against the no-cloning threshold and the security window",
            {"squeezing_db": 6.0, "gain_db": 7.0, "scheme": "23",
             "sigma_sq": {"start": 0.1, "stop": 10, "num": 100}, "search_range": [0.1, 20.0]},
            ("sigma_sq",),
            _fig3,
        ),
        Experiment(
            "fig4-dense",
            "Dense-coding mutual information at fixed ensemble variance versus squeezing",
            {"squeezing_db": {"start": 0, "stop": 8, "num": 17}, "sigma_ens_sq": 3.0, "gain_db": None,
             "s_conv": 1.0},
            ("squeezing_db",),
            _fig4,
        ),
        Experiment(
            "fig5-erasure",
            "Erasure-averaged fidelity advantage over a single coherent channel",
            {"alpha_sq": {"start": 0, "stop": 10, "num": 101}, "lambda": {"start": 0, "stop": 1, "num": 101},
             "squeezing_db": 6.0, "gain_db": 7.0, "polish": True, "monte_carlo_trials": 0},
            ("alpha_sq", "lambda"),
            _fig5,
        ),
    ]
}


def list_experiments() -> list[tuple[str, str]]:
    return [(e.name, e.description) for e in EXPERIMENTS.values()]
