"""Context-aware utilities of users and small cells.

User utility trades the received rate against a device-specific target
rate and charges a load-dependent cost; small-cell utility favors slow,
diametrically crossing, urgent users arriving from congested cells.
"""

import enum
import math

import numpy as np


class DeviceClass(enum.Enum):
    LAPTOP = ("laptop", 17.0, 1000e3)
    TABLET = ("tablet", 10.0, 600e3)
    SMARTPHONE = ("smartphone", 4.5, 400e3)

    def __init__(self, label, screen, rate):
        self.label = label
        self.screen = screen  # inches
        self.rate = rate  # bps

    @classmethod
    def from_label(cls, label):
        for dc in cls:
            if dc.label == label:
                return dc
        raise KeyError(f"unknown device class {label!r}")


DEVICE_CLASSES = tuple(DeviceClass)


def target_rate(device_class):
    if isinstance(device_class, str):
        device_class = DeviceClass.from_label(device_class)
    if not isinstance(device_class, DeviceClass):
        raise KeyError(f"unknown device class {device_class!r}")
    return device_class.rate


def qos_decay(t, tau):
    """Delivery-time QoS ``1 / (1 + exp(t - tau))``; ``t`` and ``tau`` in ms."""
    x = t - tau
    # logistic written to avoid overflow for large |x|
    if x >= 0:
        z = math.exp(-x)
        return z / (1.0 + z)
    return 1.0 / (1.0 + math.exp(x))


def rate_utility(rate, target, K, alpha, beta, lam):
    """Rate part of the user utility (no load cost). Vectorized over ``rate``."""
    rate = np.asarray(rate, dtype=float)
    above = rate >= target
    gap = np.abs(rate - target) / K
    out = np.where(above, gap ** alpha, -lam * gap ** beta)
    return float(out) if out.ndim == 0 else out


def load_cost(gamma, quota, load, sign=1.0):
    """Load term added to the rate utility.

    ``sign=1`` gives ``-gamma * (quota - load)``, which charges users for
    joining a cell with free slots; ``sign=-1`` rewards free capacity.
    """
    return -sign * gamma * (quota - load)


def user_utility_value(rate, target, K, alpha, beta, lam, gamma, quota, load, sign=1.0):
    return rate_utility(rate, target, K, alpha, beta, lam) + load_cost(gamma, quota, load, sign)


def scbs_utility_value(theta, speed, tau, prev_load, prev_quota, log=math.log):
    """Utility a small cell draws from serving a user.

    ``speed`` in m/s, ``tau`` in ms, ``prev_load``/``prev_quota`` describe the
    cell the user is handed over from.
    """
    bracket = 1.0 + log(max(1, prev_load) / prev_quota)
    return math.cos(theta) / speed * bracket / tau


def user_utility(matching, i, j, scenario):
    """Utility of user ``i`` for cell ``j`` given the current ``matching``.

    The load ``m_j`` excludes ``i`` itself. For the macro (cell 0) only the
    rate term applies.
    """
    cfg = scenario.config
    user = scenario.users[i]
    alpha, beta, lam = user.shape
    u = rate_utility(scenario.rates[i, j], user.target_rate, cfg.K, alpha, beta, lam)
    if j == 0:
        return u
    load = sum(1 for k, c in enumerate(matching.assignment) if c == j and k != i)
    return u + load_cost(cfg.gamma, scenario.cells[j].quota, load, cfg.load_sign)


def scbs_utility(matching, j, i, scenario):
    """Utility of small cell ``j`` for user ``i``; the user's current cell is its origin."""
    cfg = scenario.config
    user = scenario.users[i]
    prev = matching.assignment[i]
    prev_load = sum(1 for c in matching.assignment if c == prev)
    prev_quota = scenario.num_users if prev == 0 else scenario.cells[prev].quota
    base = cfg.log_base

    def log(x):
        return math.log(x) / math.log(base)

    return scbs_utility_value(user.directions[j - 1], user.speed, user.tau, prev_load, prev_quota, log)
