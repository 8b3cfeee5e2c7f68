import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cellmatch.matching import Matching, scbs_utility_matrix, user_utility_matrix
from cellmatch.scenario import Config, generate_scenario
from cellmatch.utility import (DeviceClass, load_cost, qos_decay, rate_utility, scbs_utility, scbs_utility_value,
                               target_rate, user_utility, user_utility_value)

K = 1e6


def test_qos_examples():
    assert qos_decay(3.0, 3.0) == 0.5
    assert qos_decay(0.0, 5.0) == pytest.approx(0.99331, abs=1e-5)
    assert qos_decay(1e4, 1.0) == 0.0 or qos_decay(1e4, 1.0) < 1e-300
    assert qos_decay(-1e4, 1.0) == 1.0


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.1, 10))
def test_qos_decreasing(a, b, tau):
    lo, hi = sorted((a, b))
    assert qos_decay(hi, tau) <= qos_decay(lo, tau)


@pytest.mark.parametrize("tau", [15.0, 25.0, 40.0])
def test_qos_drop_after_tau(tau):
    assert qos_decay(2 * tau, tau) / qos_decay(0, tau) == pytest.approx(math.exp(-tau), rel=1e-6)


def test_user_utility_examples():
    # gamma = 0, C - target = K
    for alpha in (0.5, 1, 2):
        assert user_utility_value(2e6, 1e6, K, alpha, 1, 1, 0.0, 4, 2) == pytest.approx(1.0)
    # at the target both branches reduce to -gamma (q - m) under the literal sign
    assert user_utility_value(1e6, 1e6, K, 2, 2, 2, 1.0, 4, 2, sign=1.0) == pytest.approx(-2.0)
    assert user_utility_value(0.5e6, 1e6, K, 1, 1, 2, 0.0, 4, 2) == pytest.approx(-1.0)


def test_load_cost_sign():
    assert load_cost(1.0, 4, 1, sign=1.0) == -3.0
    assert load_cost(1.0, 4, 1, sign=-1.0) == 3.0


shapes = st.tuples(st.floats(0.2, 3), st.floats(0.2, 3), st.floats(0.2, 3))


@given(shapes, st.floats(0, 5e6), st.floats(0, 5e6))
def test_rate_utility_increasing(shape, a, b):
    lo, hi = sorted((a, b))
    assert rate_utility(lo, 1e6, K, *shape) <= rate_utility(hi, 1e6, K, *shape)


@given(shapes, st.floats(0, 1), st.floats(0.1, 5), st.integers(1, 8))
def test_continuous_at_target(shape, gamma, eps_scale, q):
    eps = eps_scale  # bps; well above the ulp of 1e6
    below = user_utility_value(1e6 - eps, 1e6, K, *shape, gamma, q, 1, sign=1.0)
    above = user_utility_value(1e6 + eps, 1e6, K, *shape, gamma, q, 1, sign=1.0)
    a, b, lam = shape
    # no jump: the gap is only the two vanishing power terms
    assert abs(above - below) <= ((eps / K) ** a + lam * (eps / K) ** b) * (1 + 1e-6) + 1e-12
    assert user_utility_value(1e6, 1e6, K, *shape, gamma, q, 1, sign=1.0) == pytest.approx(-gamma * (q - 1))


@given(st.floats(0, 3e6), st.integers(0, 7), st.floats(0.1, 2))
def test_load_direction(rate, m, gamma):
    lit = [user_utility_value(rate, 1e6, K, 1, 1, 1, gamma, 8, k, sign=1.0) for k in (m, m + 1)]
    flip = [user_utility_value(rate, 1e6, K, 1, 1, 1, gamma, 8, k, sign=-1.0) for k in (m, m + 1)]
    assert lit[1] > lit[0]
    assert flip[1] < flip[0]


def test_scbs_examples():
    assert scbs_utility_value(0.0, 1.0, 1.0, 4, 4) == pytest.approx(1.0)
    assert scbs_utility_value(0.0, 1.0, 2.0, 1, 1) == pytest.approx(0.5)
    assert scbs_utility_value(math.pi / 3, 2.0, 1.0, 2, 4) == pytest.approx(0.25 * (1 + math.log(0.5)), rel=1e-12)
    assert scbs_utility_value(math.pi / 3, 2.0, 1.0, 2, 4) == pytest.approx(0.0767, abs=1e-4)
    # empty origin: max(1, 0) keeps the log finite, value may be negative
    assert scbs_utility_value(0.0, 1.0, 1.0, 0, 4) < 0


speed = st.floats(0.5, 20)
tau = st.floats(0.1, 10)


@given(speed, speed, tau, st.integers(1, 10))
def test_scbs_decreasing_in_speed(a, b, t, m):
    lo, hi = sorted((a, b))
    # bracket positive for m >= q/e, so orientation of the inequality is fixed
    assert scbs_utility_value(0.1, hi, t, m + 4, 4) <= scbs_utility_value(0.1, lo, t, m + 4, 4)


@given(speed, tau, tau)
def test_scbs_decreasing_in_tau(v, a, b):
    lo, hi = sorted((a, b))
    assert scbs_utility_value(0.2, v, hi, 3, 4) <= scbs_utility_value(0.2, v, lo, 3, 4)


@given(speed, tau, st.integers(1, 20), st.integers(1, 20))
def test_scbs_increasing_in_origin_load(v, t, a, b):
    lo, hi = sorted((a, b))
    assert scbs_utility_value(0.3, v, t, lo, 20) <= scbs_utility_value(0.3, v, t, hi, 20)


def test_target_rates():
    assert target_rate(DeviceClass.LAPTOP) == 1000e3
    assert target_rate(DeviceClass.TABLET) == 600e3
    assert target_rate("smartphone") == 400e3
    assert [dc.screen for dc in DeviceClass] == [17.0, 10.0, 4.5]
    with pytest.raises(KeyError):
        target_rate("watch")


@given(st.integers(0, 10_000), st.data())
def test_scalar_matches_matrix(seed, data):
    cfg = Config(num_users=8, num_picocells=3, quota=2)
    sc = generate_scenario(cfg, seed)
    assignment = data.draw(st.lists(st.integers(0, 3), min_size=8, max_size=8))
    mu = Matching(tuple(assignment), 4)
    U = user_utility_matrix(mu, sc)
    S = scbs_utility_matrix(mu, sc)
    for i in range(8):
        for j in range(4):
            assert user_utility(mu, i, j, sc) == pytest.approx(U[i, j], rel=1e-12, abs=1e-12)
            if j:
                assert scbs_utility(mu, j, i, sc) == pytest.approx(S[i, j], rel=1e-12, abs=1e-12)


def test_log_base_switch():
    sc = generate_scenario(Config(num_users=4, num_picocells=2, log_base=10.0), 3)
    mu = Matching.all_macro(4, 3)
    S = scbs_utility_matrix(mu, sc)
    u = sc.users[0]
    expected = math.cos(u.directions[0]) / u.speed / u.tau * (1 + math.log10(4 / 4))
    assert S[0, 1] == pytest.approx(expected)
