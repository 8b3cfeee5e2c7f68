"""Chord and dwell-time geometry for a user crossing a circular cell."""

import enum
import math


class Visitor(enum.Enum):
    CANDIDATE = "candidate"
    TEMPORARY_GUEST = "temporary_guest"


def _check_angle(theta):
    if not abs(theta) < math.pi / 2:
        raise ValueError(f"theta must satisfy |theta| < pi/2, got {theta!r}")


def chord_length(R, theta):
    """Length of the chord cut by a straight path entering at angle ``theta``.

    ``theta`` is measured from the line joining the entry point to the cell
    center, so ``theta = 0`` is the diameter.
    """
    _check_angle(theta)
    return 2.0 * R * math.cos(theta)


def interaction_time(R, theta, v):
    """Seconds spent inside a cell of radius ``R`` at constant speed ``v``."""
    if not v > 0:
        raise ValueError(f"speed must be positive, got {v!r}")
    return chord_length(R, theta) / v


def chord_pdf(d, R):
    """Density of the chord length ``d`` when the entry angle is uniform."""
    if d < 0 or d >= 2 * R:
        raise ValueError(f"chord length must lie in [0, 2R), got d={d!r}, R={R!r}")
    return 1.0 / (math.pi * R * math.sqrt(1.0 - d * d / (4.0 * R * R)))


def classify_visitor(t_T, T_p):
    # equality counts as a guest: no handover without strict slack
    if t_T > T_p:
        return Visitor.CANDIDATE
    return Visitor.TEMPORARY_GUEST
