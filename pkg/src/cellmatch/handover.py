"""Handover-failure probabilities for macro-to-pico and pico-to-pico moves."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class P2PGeometry:
    """Source/target picocell pair for a pico-to-pico handover.

    Radii are in meters, ``T_p1`` in seconds and speeds in m/s.
    ``r1_exit`` is the distance from the source center beyond which the
    session is lost if the handover has not completed.
    """

    R1: float
    r1_exit: float
    R2: float
    r2: float
    center_distance: float
    T_p1: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not self.r1_exit > self.R1 > 0:
            raise ValueError("need r1_exit > R1 > 0")
        if not 0 < self.r2 < self.R2:
            raise ValueError("need 0 < r2 < R2")
        if self.v_min > self.v_max:
            raise ValueError("need v_min <= v_max")
        if not self.T_p1 > 0:
            raise ValueError("T_p1 must be positive")


def hf_prob_m2p(r, R):
    """Probability that a uniformly oriented path crosses the HF circle.

    The path enters a cell of radius ``R`` whose handover-failure circle has
    radius ``r``; failure occurs when the chord is at least 2*sqrt(R^2 - r^2).
    """
    if r < 0 or r > R:
        raise ValueError(f"need 0 <= r <= R, got r={r!r}, R={R!r}")
    # acos(sqrt(1 - x^2)) == asin(x) on [0, 1]; asin keeps precision for small x
    return (2.0 / math.pi) * math.asin(r / R)


def reliability_ratio(max_prob):
    """Largest r/R whose macro-to-pico failure probability is ``max_prob``."""
    if not 0 <= max_prob <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {max_prob!r}")
    return math.sin(math.pi * max_prob / 2.0)


def p2p_feasible(g):
    return g.R1 + g.r2 <= g.center_distance <= g.r1_exit + g.R2


def trigger_probability(g):
    """P(V < (r1_exit - R1) / T_p1) for V uniform on [v_min, v_max]."""
    v_crit = (g.r1_exit - g.R1) / g.T_p1
    if g.v_max == g.v_min:
        return 1.0 if v_crit >= g.v_min else 0.0
    frac = (v_crit - g.v_min) / (g.v_max - g.v_min)
    return min(1.0, max(0.0, frac))


def hf_prob_p2p(g):
    success = trigger_probability(g) * (1.0 - hf_prob_m2p(g.r2, g.R2))
    return min(1.0, max(0.0, 1.0 - success))
