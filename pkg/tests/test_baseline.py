import numpy as np
from hypothesis import given, strategies as st

from cellmatch.baseline import max_sinr_assignment
from cellmatch.matching import Matching
from cellmatch.scenario import MACRO, Config, generate_scenario
from tests.helpers import make_scenario

FLOOR = 10 ** (9.56 / 10)


def test_single_user_matched():
    sc = make_scenario([[1e-12, 1e-6]], [(50, 0)], [(0, 0)])
    assert max_sinr_assignment(sc).assignment == (1,)


def test_below_floor_stays_on_macro():
    # pico SINR of about 5 dB
    sc = make_scenario([[1e-9, 10 ** 0.5 * 1e-9 * 10 ** 4.6 / 1e3]], [(50, 0)], [(0, 0)])
    assert 1 < sc.sinr[0, 1] < FLOOR
    assert max_sinr_assignment(sc).assignment == (MACRO,)


def test_quota_keeps_strongest():
    strengths = [5, 1, 4, 3, 2]
    gains = [[1e-12, s * 1e-7] for s in strengths]
    sc = make_scenario(gains, [(50, 0)], [(0, 0)] * 5, quota=4)
    assert max_sinr_assignment(sc).assignment == (1, MACRO, 1, 1, 1)
    assert max_sinr_assignment(sc, use_quota=False).assignment == (1, 1, 1, 1, 1)


def replay_ok(sc, mu):
    """No user skipped a stronger pico that still had room at its turn."""
    pico = sc.sinr[:, 1:]
    if pico.shape[1] == 0:
        return all(j == MACRO for j in mu.assignment)
    order = sorted(range(sc.num_users), key=lambda i: (-pico[i].max(), i))
    load = np.zeros(len(sc.cells), dtype=int)
    for i in order:
        j = mu.assignment[i]
        for k in range(1, len(sc.cells)):
            if pico[i, k - 1] >= FLOOR and load[k] < sc.quotas[k]:
                if j == MACRO or pico[i, k - 1] > pico[i, j - 1]:
                    return False
        if j != MACRO:
            load[j] += 1
    return True


@given(st.integers(0, 10_000), st.integers(0, 40), st.integers(0, 10))
def test_greedy_invariants(seed, N, P):
    sc = generate_scenario(Config(num_users=N, num_picocells=P), seed)
    mu = max_sinr_assignment(sc)
    assert isinstance(mu, Matching) and mu.num_users == N
    mu.check(sc.quotas)
    for i, j in enumerate(mu.assignment):
        if j != MACRO:
            assert sc.sinr[i, j] >= FLOOR
    assert replay_ok(sc, mu)
