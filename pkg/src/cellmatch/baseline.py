"""Context-unaware max-SINR association."""

import numpy as np

from cellmatch.channel import db_to_linear
from cellmatch.matching import Matching
from cellmatch.scenario import MACRO


def max_sinr_assignment(scenario, use_quota=None):
    """Greedy strongest-pico association.

    Users are served in decreasing order of their best pico SINR; each takes
    its strongest pico that clears ``min_sinr`` and still has a free slot,
    else stays on the macro. ``use_quota=False`` lifts the pico quotas.
    """
    cfg = scenario.config
    if use_quota is None:
        use_quota = cfg.baseline_quota
    N, C = scenario.num_users, len(scenario.cells)
    assignment = [MACRO] * N
    if N == 0 or C == 1:
        return Matching(tuple(assignment), C)
    pico_sinr = scenario.sinr[:, 1:]
    floor = float(db_to_linear(cfg.min_sinr))
    best = pico_sinr.max(axis=1)
    order = sorted(range(N), key=lambda i: (-best[i], i))
    load = np.zeros(C, dtype=int)
    for i in order:
        for k in sorted(range(C - 1), key=lambda k: (-pico_sinr[i, k], k)):
            if pico_sinr[i, k] < floor:
                break
            j = k + 1
            if not use_quota or load[j] < scenario.quotas[j]:
                assignment[i] = j
                load[j] += 1
                break
    return Matching(tuple(assignment), C)
