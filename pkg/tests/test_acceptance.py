"""Acceptance suite: ten criteria, each reported as one PASS/FAIL line.

Run under pytest (the lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.  A criterion passes only when every one
of its sub-checks passes; the failing sub-checks are named on its line.
"""

from __future__ import annotations

import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from cvqss import cli
from cvqss import dense_coding as dc
from cvqss import gaussian as gs
from cvqss.erasure import ErasureModel, advantage_map, coherent_baseline, monte_carlo_fidelity, probability_matrix
from cvqss.metrics import fidelity, fidelity_gain_noise, mutual_information
from cvqss.protocol import (
    OPTIMAL_GAIN_LIN,
    DeviceModel,
    collaborator_fidelity,
    collaborator_noise,
    gain_db_from_lin,
    optimal_gain_db,
    scheme_channel,
    share_channel,
)
from cvqss.security import (
    BRANCH_POINT,
    codebook_average_fidelity,
    codebook_average_fidelity_closed,
    nc_threshold_gaussian,
    window_for_output,
)

RESULTS: dict[int, tuple[bool, str]] = {}
CORPUS = Path(__file__).parent / "data" / "validation_corpus.json"


class Checks:
    """Collects named sub-checks for one criterion."""

    def __init__(self):
        self.items: list[tuple[str, bool, str]] = []
        self.t0 = time.perf_counter()

    def add(self, name: str, ok: bool, detail: str = ""):
        self.items.append((name, bool(ok), detail))

    def runtime(self, limit_s: float):
        dt = time.perf_counter() - self.t0
        self.add(f"runtime<{limit_s:g}s", dt < limit_s, f"{dt:.2f}s")

    def line(self) -> tuple[bool, str]:
        ok = all(i[1] for i in self.items)
        failed = [f"{n} ({d})" if d else n for n, good, d in self.items if not good]
        shown = "; ".join(f"{n}={d}" for n, _, d in self.items if d and n.startswith("runtime"))
        text = "all checks passed" if ok else "failed: " + "; ".join(failed)
        return ok, f"{text}{' [' + shown + ']' if shown and ok else ''}"


def _record(n: int, checks: Checks):
    ok, text = checks.line()
    RESULTS[n] = (ok, text)
    return ok, text


# 1 ---------------------------------------------------------------------------

def criterion_1() -> Checks:
    c = Checks()
    c.add("F_nc(3)=14/19", abs(nc_threshold_gaussian(3.0) - 14 / 19) <= 1e-12)
    s = BRANCH_POINT
    upper, lower = (4 * s + 2) / (6 * s + 1), 1 / ((3 - 2 * math.sqrt(2)) * s + 1)
    left, right = nc_threshold_gaussian(s * (1 - 1e-15)), nc_threshold_gaussian(s)
    c.add("branch continuity", abs(upper - lower) <= 1e-12 and abs(left - right) <= 1e-12)
    c.add("asymptote 2/3", abs(nc_threshold_gaussian(1e6) - 2 / 3) <= 1e-6)
    c.runtime(1.0)
    return c


# 2 ---------------------------------------------------------------------------

def criterion_2() -> Checks:
    c = Checks()
    rng = np.random.default_rng(101)
    a = rng.normal(size=(1000, 2)) @ [1, 1j] * 1.5
    b = rng.normal(size=(1000, 2)) @ [1, 1j] * 1.5
    err = max(abs(fidelity(gs.make_coherent(x), gs.make_coherent(y)) - math.exp(-abs(x - y) ** 2)) for x, y in zip(a, b))
    c.add("coherent overlap", err <= 1e-10, f"max err {err:.1e}")
    alphas = rng.normal(size=(1000, 2)) @ [1, 1j] * 1.5
    ks = rng.uniform(0, 4, 1000)
    vs = rng.uniform(0.25, 3, 1000)
    err = 0.0
    for al, k, v in zip(alphas, ks, vs):
        out = gs.GaussianState(math.sqrt(k) * np.array([al.real, al.imag]), v * np.eye(2))
        err = max(err, abs(fidelity(gs.make_coherent(al), out) - fidelity_gain_noise(al, k, v)))
    c.add("gain-noise form", err <= 1e-10, f"max err {err:.1e}")
    c.runtime(5.0)
    return c


# 3 ---------------------------------------------------------------------------

def criterion_3() -> Checks:
    c = Checks()
    alpha = math.sqrt(1.3)
    f12 = [collaborator_fidelity(alpha, s, 0.0, (1, 2)) for s in range(0, 11)]
    c.add("{1,2} exact", max(abs(f - 1) for f in f12) <= 1e-9, f"max dev {max(abs(f - 1) for f in f12):.1e}")
    rng = np.random.default_rng(7)
    err = 0.0
    for _ in range(200):
        s, g = rng.uniform(0, 10), rng.uniform(0, 12)
        al = complex(*rng.normal(size=2))
        err = max(err, abs(collaborator_fidelity(al, s, g, (1, 3)) - collaborator_fidelity(al, s, g, (2, 3))))
    c.add("{1,3}={2,3}", err <= 1e-10, f"max err {err:.1e}")
    f23 = [optimal_gain_db(alpha, s)[1] for s in range(0, 11)]
    c.add("{2,3} increasing", bool(np.all(np.diff(f23) > 0)))
    return c


# 4 ---------------------------------------------------------------------------

def criterion_4() -> Checks:
    c = Checks()
    alpha = math.sqrt(0.1)
    g_db, _ = optimal_gain_db(alpha, 12.0, bounds=(0.0, 20.0))
    g_lin = 10 ** (g_db / 10)
    rel = abs(g_lin / OPTIMAL_GAIN_LIN - 1)
    c.add("argmax G_lin at S=12 dB", rel <= 0.02, f"G_lin={g_lin:.3f} vs {OPTIMAL_GAIN_LIN:.3f}, {100 * rel:.1f}% off")
    c.runtime(10.0)
    return c


# 5 ---------------------------------------------------------------------------

def criterion_5() -> Checks:
    c = Checks()
    dev = DeviceModel()
    bad = []
    for s in range(0, 11):
        mi_adv = mutual_information(3.0, collaborator_noise(share_channel(s, 1, dev), dev))
        for g in range(4, 11):
            mi_collab = mutual_information(3.0, collaborator_noise(scheme_channel(s, g, (2, 3), dev), dev))
            if not mi_collab > mi_adv:
                bad.append((s, g))
    c.add("MI_collab>MI_adv on grid", not bad,
          f"{len(bad)}/77 points violate, e.g. (S,G)={bad[:3]}" if bad else "")
    c.add("MI(3,0)=ln13", abs(mutual_information(3.0, 0.0) - math.log(13)) <= 1e-12)
    return c


# 6 ---------------------------------------------------------------------------

def criterion_6() -> Checks:
    c = Checks()
    rng = np.random.default_rng(66)
    err = 0.0
    for k, v, s2 in zip(rng.uniform(0, 4, 300), rng.uniform(0.25, 3, 300), rng.uniform(0, 20, 300)):
        err = max(err, abs(codebook_average_fidelity(k, v, s2) - codebook_average_fidelity_closed(k, v, s2)))
    c.add("quadrature=closed form", err <= 1e-8, f"max err {err:.1e}")
    ch = scheme_channel(6.0, 7.0, (2, 3), DeviceModel.calibrated())
    w = window_for_output(ch.k, ch.v_out)
    if w.empty or not w.bounded:
        c.add("calibrated window", False, "window empty or unbounded")
    else:
        got = (w.sigma_min, w.sigma_max, w.sigma_star, w.delta_star)
        target = (1.92, 3.81, 2.70, 0.0073)
        for name, x, t in zip(("sigma_min", "sigma_max", "sigma_star", "delta"), got, target):
            c.add(f"window {name}", abs(x / t - 1) <= 0.15, f"{x:.4g} vs {t}")
    c.runtime(60.0)
    return c


# 7 ---------------------------------------------------------------------------

def criterion_7() -> Checks:
    c = Checks()
    b = dc.budget_from_squeezing(3.0, 6.0)
    c.add("sigma_cb^2=1.1448", abs(b.sigma_cb_sq - 1.1448) <= 1e-3, f"got {b.sigma_cb_sq:.4f}")
    mi = dc.mi_dense_ideal(b)
    c.add("MI_dc=1.715", abs(mi - 1.715) <= 1e-3, f"got {mi:.4f}")
    base = dc.mi_coherent_baseline(3.0)
    c.add("baseline=1.322", abs(base - 1.322) <= 1e-3, f"got {base:.4f}")
    c.add("MI_dc>baseline", mi > base)
    outside = []
    for s in range(1, 9):
        try:
            sim = dc.mi_dense_simulated(3.0, float(s))
            limit = dc.mi_dense_ideal(dc.budget_from_squeezing(3.0, float(s)))
            if not (base - 1e-9 <= sim <= limit + 1e-9):
                outside.append(f"S={s}: {sim:.4f} not in [{base:.4f}, {limit:.4f}]")
        except dc.BudgetExhausted:
            outside.append(f"S={s}: no budget (sinh 2r > 3)")
    c.add("simulated in [baseline, limit] for S=1..8", not outside, "; ".join(outside))
    return c


# 8 ---------------------------------------------------------------------------

def criterion_8() -> Checks:
    c = Checks()
    import sympy

    lam = sympy.symbols("lambda")
    total = (1 - lam) ** 3 + 3 * lam * (1 - lam) ** 2 + 3 * lam ** 2 * (1 - lam) + lam ** 3
    c.add("symbolic partition of unity", sympy.simplify(total - 1) == 0)
    lams = np.random.default_rng(8).random(100)
    c.add("numeric partition of unity", np.allclose(probability_matrix(lams).sum(axis=1), 1.0, atol=1e-15))
    f = coherent_baseline(math.sqrt(2.41), 0.474)
    c.add("F_coh(2.41,0.474)=0.5686", abs(f - 0.5686) <= 1e-4, f"got {f:.5f}")
    model = ErasureModel()
    exact = model.average_fidelity(math.sqrt(2.41), 0.474)
    est = monte_carlo_fidelity(model, math.sqrt(2.41), 0.474, 100_000, seed=474)
    c.add("exact vs Monte Carlo", abs(est.mean - exact) <= 3 * est.stderr,
          f"|diff|={abs(est.mean - exact):.2e}, 3se={3 * est.stderr:.2e}")
    ideal = advantage_map(np.linspace(0, 10, 101), np.linspace(0, 1, 101), polish=False)
    interior = ideal.delta[1:-1, 1:-1]
    c.add("ideal map has interior advantage", bool((interior > 0).any()))
    t0 = time.perf_counter()
    cal = advantage_map(device=DeviceModel.calibrated())
    dt = time.perf_counter() - t0
    c.add("101x101 runtime<300s", dt < 300, f"{dt:.1f}s")
    for name, x, t, tol in (("alpha_sq*", cal.alpha_sq_star, 2.41, 0.25), ("lambda*", cal.lambda_star, 0.474, 0.25),
                            ("dF*", cal.delta_star, 0.0245, 0.30)):
        c.add(f"calibrated {name}", abs(x / t - 1) <= tol, f"{x:.4g} vs {t}")
    return c


# 9 ---------------------------------------------------------------------------

def _random_state(rng, n):
    parts = []
    for _ in range(n):
        kind = rng.integers(3)
        if kind == 0:
            parts.append(gs.make_coherent(complex(*rng.normal(size=2))))
        elif kind == 1:
            parts.append(gs.make_thermal(rng.uniform(0, 1)))
        else:
            parts.append(gs.squeeze(gs.make_vacuum(1), 0, rng.uniform(0, 1), rng.uniform(0, np.pi)))
    return gs.tensor(*parts)


def _random_op(rng, state, unitary_only):
    n = state.n_modes
    m = int(rng.integers(n))
    pair = rng.choice(n, 2, replace=False) if n > 1 else None
    ops = ["squeeze", "rotate", "displace"] + (["bs", "tms", "hybrid"] if pair is not None else [])
    if not unitary_only:
        ops += ["loss", "amp", "noise"]
    op = ops[int(rng.integers(len(ops)))]
    if op == "squeeze":
        return gs.squeeze(state, m, rng.uniform(0, 1), rng.uniform(0, 2 * np.pi))
    if op == "rotate":
        return gs.phase_shift(state, m, rng.uniform(0, 2 * np.pi))
    if op == "displace":
        return gs.displace(state, m, complex(*rng.normal(size=2)))
    if op == "bs":
        return gs.beam_splitter(state, int(pair[0]), int(pair[1]), rng.uniform(0, 1), rng.uniform(0, 2 * np.pi))
    if op == "tms":
        return gs.two_mode_squeeze(state, int(pair[0]), int(pair[1]), rng.uniform(0, 0.8), rng.uniform(0, 2 * np.pi))
    if op == "hybrid":
        return gs.hybrid_ring(state, int(pair[0]), int(pair[1]), rng.uniform(0, 2 * np.pi))
    if op == "loss":
        return gs.loss_channel(state, m, rng.uniform(0, 1), rng.uniform(0, 0.5))
    if op == "amp":
        return gs.amplifier_channel(state, m, rng.uniform(0, 3))
    return gs.add_classical_noise(state, m, rng.uniform(0, 0.5))


def criterion_9() -> Checks:
    c = Checks()
    rng = np.random.default_rng(9)
    n_sym = n_adm = n_det = 0
    for i in range(10_000):
        unitary_only = i % 2 == 0
        state = _random_state(rng, int(rng.integers(1, 4)))
        det0 = np.linalg.det(state.cov)
        for _ in range(int(rng.integers(1, 6))):
            state = _random_op(rng, state, unitary_only)
        n_sym += not state.is_symmetric(gs.SYMMETRY_TOL)
        n_adm += not state.is_admissible(gs.ADMISSIBILITY_TOL)
        if unitary_only:
            n_det += abs(np.linalg.det(state.cov) / det0 - 1) > 1e-10
    c.add("symmetry", n_sym == 0, f"{n_sym} violations")
    c.add("admissibility", n_adm == 0, f"{n_adm} violations")
    c.add("det preserved", n_det == 0, f"{n_det} violations")
    c.runtime(30.0)
    return c


# 10 --------------------------------------------------------------------------

def criterion_10() -> Checks:
    c = Checks()
    config = {"device": {"preset": "calibrated"},
              "experiment": {"name": "fig5-erasure", "alpha_sq": {"start": 0, "stop": 6, "num": 7},
                             "lambda": {"start": 0, "stop": 1, "num": 6}, "monte_carlo_trials": 5000},
              "seed": 31}
    config2 = {"experiment": {"name": "fig2-sweep", "squeezing_db": {"start": 0, "stop": 10, "num": 6}}, "seed": 31}
    with tempfile.TemporaryDirectory() as tmp:
        same = True
        for cfg in (config, config2):
            name = cfg["experiment"]["name"]
            outs = []
            for run in ("a", "b"):
                cli.run(cfg, f"{tmp}/{run}", threads=2 if run == "a" else 3)
                outs.append(Path(f"{tmp}/{run}/{name}.csv").read_bytes())
            same &= outs[0] == outs[1]
        c.add("byte-identical CSV", same)
    corpus = json.loads(CORPUS.read_text())
    missed = [case["case"] for case in corpus
              if not any(v.startswith(case["field"]) for v in cli.validate(case["config"]).violations)]
    c.add("20-case corpus", len(corpus) == 20 and not missed, f"missed {missed}" if missed else "")
    return c


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


@pytest.mark.parametrize("n", list(CRITERIA), ids=[f"criterion_{i}" for i in CRITERIA])
def test_criterion(n):
    ok, text = _record(n, CRITERIA[n]())
    print(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {text}")
    assert ok, text


if __name__ == "__main__":
    passed = 0
    for n, fn in CRITERIA.items():
        ok, text = _record(n, fn())
        passed += ok
        print(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {text}", flush=True)
    print(f"{passed}/{len(CRITERIA)} criteria passed")
    sys.exit(0 if passed == len(CRITERIA) else 1)
