import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqss.metrics import fidelity_gain_noise, mutual_information
from cvqss.protocol import DeviceModel, collaborator_noise, scheme_channel, share_channel
from cvqss.security import (
    BRANCH_POINT,
    CodebookSpec,
    codebook_average_fidelity,
    codebook_average_fidelity_closed,
    mi_security_check,
    nc_threshold_asymptotic,
    nc_threshold_gaussian,
    security_window,
    window_for_output,
)


def test_thresholds():
    assert nc_threshold_asymptotic() == 2 / 3
    assert nc_threshold_gaussian(3) == pytest.approx(14 / 19, abs=1e-12)
    assert nc_threshold_gaussian(0) == 1.0
    assert nc_threshold_gaussian(1e6) == pytest.approx(2 / 3, abs=1e-6)
    assert nc_threshold_asymptotic() < nc_threshold_gaussian(3)
    with pytest.raises(ValueError):
        nc_threshold_gaussian(-0.1)


def test_branches_meet():
    s = BRANCH_POINT
    upper = (4 * s + 2) / (6 * s + 1)
    lower = 1 / ((3 - 2 * math.sqrt(2)) * s + 1)
    assert upper == pytest.approx(lower, abs=1e-12)


def test_threshold_monotone():
    s = np.linspace(0, 50, 2001)
    t = np.array([nc_threshold_gaussian(x) for x in s])
    assert np.all(np.diff(t) <= 1e-15)
    assert t.min() > 2 / 3


def test_unity_gain_average_is_flat():
    for s2 in (0.0, 1.0, 7.5):
        assert codebook_average_fidelity(1.0, 0.4, s2) == pytest.approx(2 / 2.6, abs=1e-12)


def test_point_codebook():
    assert codebook_average_fidelity(0.3, 0.5, 0.0) == pytest.approx(fidelity_gain_noise(0, 0.3, 0.5))


@settings(max_examples=100, deadline=None)
@given(k=st.floats(0, 4), v=st.floats(0.25, 3), s2=st.floats(0, 20))
def test_quadrature_matches_closed_form(k, v, s2):
    closed = codebook_average_fidelity_closed(k, v, s2)
    assert codebook_average_fidelity(k, v, s2) == pytest.approx(closed, abs=1e-8)


def test_laguerre_rule_agrees():
    assert codebook_average_fidelity(0.6, 0.35, 3.0, method="laguerre") == pytest.approx(
        codebook_average_fidelity_closed(0.6, 0.35, 3.0), abs=1e-8)
    with pytest.raises(ValueError):
        CodebookSpec(1.0, method="simpson")


def test_average_decreases_with_variance():
    vals = [codebook_average_fidelity_closed(0.7, 0.3, s) for s in np.linspace(0, 10, 50)]
    assert np.all(np.diff(vals) < 0)


def test_invalid_domain():
    with pytest.raises(ValueError):
        codebook_average_fidelity(1.0, 0.2, 1.0)
    with pytest.raises(ValueError):
        codebook_average_fidelity(-0.1, 0.3, 1.0)


def test_window_open_for_perfect_channel():
    w = window_for_output(1.0, 0.25)
    assert w.sigma_min == pytest.approx(0.1)
    assert w.sigma_max is None and not w.bounded


def test_window_empty_without_signal():
    w = window_for_output(0.0, 0.4)
    assert w.empty
    assert w.sigma_star is None


def test_window_endpoints_are_roots():
    k, v = 0.61, 0.35
    w = window_for_output(k, v)
    assert w.bounded
    for s in (w.sigma_min, w.sigma_max):
        assert codebook_average_fidelity_closed(k, v, s) - nc_threshold_gaussian(s) == pytest.approx(0, abs=1e-5)
    assert w.sigma_min <= w.sigma_star <= w.sigma_max
    grid = np.linspace(w.sigma_min, w.sigma_max, 500)
    excess = [codebook_average_fidelity_closed(k, v, s) - nc_threshold_gaussian(s) for s in grid]
    assert w.delta_star >= max(excess) - 1e-10


def test_window_of_arbitrary_curve():
    w = security_window(lambda s: 0.9 - 0.03 * s, (0.1, 20))
    assert w.bounded
    assert w.delta_star > 0


def test_mi_check():
    c = mi_security_check(2.0, 1.0)
    assert c.secure and c.margin == 1.0
    assert not mi_security_check(1.0, 1.0).secure


def test_ideal_23_secure_at_6db():
    dev = DeviceModel()
    n_c = collaborator_noise(scheme_channel(6.0, 7.66, (2, 3), dev), dev)
    n_a = collaborator_noise(share_channel(6.0, 1, dev), dev)
    assert mi_security_check(mutual_information(3, n_c), mutual_information(3, n_a)).secure


def _mi(channel, dev):
    return mutual_information(3.0, collaborator_noise(channel, dev))


def test_mi_ordering_holds_with_strong_squeezing():
    dev = DeviceModel()
    for s in range(6, 11):
        mi_adv = _mi(share_channel(s, 1, dev), dev)
        for g in range(4, 11):
            assert _mi(scheme_channel(s, g, (2, 3), dev), dev) > mi_adv


def test_mi_ordering_for_12_scheme():
    dev = DeviceModel()
    for s in range(0, 11):
        assert _mi(scheme_channel(s, 0.0, (1, 2), dev), dev) > _mi(share_channel(s, 3, dev), dev)


def test_mi_ordering_fails_without_entanglement():
    # with no resource squeezing the first share is a clean attenuated copy of the secret
    dev = DeviceModel()
    assert collaborator_noise(share_channel(0.0, 1, dev), dev) == pytest.approx(0.0, abs=1e-12)
    assert _mi(scheme_channel(0.0, 7.0, (2, 3), dev), dev) < _mi(share_channel(0.0, 1, dev), dev)
