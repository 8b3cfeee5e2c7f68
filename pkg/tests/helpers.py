"""Builders shared by the test modules."""

import numpy as np

from cellmatch.scenario import MACRO, Cell, Config, Scenario, Tier, UserEquipment
from cellmatch.utility import DeviceClass


def make_scenario(gains, pico_positions, user_positions, *, config=None, quota=2,
                  speeds=None, taus=None, directions=None, devices=None):
    """Hand-built scenario: macro at the origin, one row of ``gains`` per user.

    Defaults give slow users heading straight for every pico's center, so
    every user is a Candidate wherever the coverage gate lets it in.
    """
    config = config or Config()
    gains = np.asarray(gains, dtype=float)
    N, C = gains.shape
    P = C - 1
    cells = [Cell(MACRO, Tier.MACRO, (0.0, 0.0), config.macro_power, config.macro_radius,
                  config.hf_ratio * config.macro_radius, max(1, N))]
    for k, pos in enumerate(pico_positions, 1):
        cells.append(Cell(k, Tier.PICO, tuple(map(float, pos)), config.pico_power, config.pico_radius,
                          config.hf_ratio * config.pico_radius, quota))
    speeds = speeds or [1.0] * N
    taus = taus or [1.0] * N
    directions = directions or [(0.0,) * P] * N
    devices = devices or [DeviceClass.TABLET] * N
    users = tuple(UserEquipment(i, tuple(map(float, user_positions[i])), speeds[i], devices[i], taus[i],
                                tuple(directions[i]), tuple(config.shape(devices[i]))) for i in range(N))
    cfg = config.replace(num_users=N, num_picocells=P, quota=quota)
    return Scenario(cfg, tuple(cells), users, gains)


