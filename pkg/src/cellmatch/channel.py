"""Link gains, SINR and Shannon rate.

Powers are carried in dBm at the interfaces and converted to linear mW
before any arithmetic.
"""

import numpy as np


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def path_gain(distance, exponent, ref_gain):
    """Distance-power law ``ref_gain * d**-exponent`` with d clamped to >= 1 m."""
    d = np.maximum(np.asarray(distance, dtype=float), 1.0)
    g = ref_gain * d ** (-exponent)
    return float(g) if g.ndim == 0 else g


def sample_fading(rng, size=None, kind="rayleigh", m=2.0):
    """Unit-mean small-scale power gain.

    ``rayleigh`` draws the exponential power of a Rayleigh amplitude;
    ``nakagami`` draws Gamma(m, 1/m), the power of a Nakagami-m amplitude.
    """
    if kind == "rayleigh":
        return rng.exponential(1.0, size=size)
    if kind == "nakagami":
        return rng.gamma(m, 1.0 / m, size=size)
    raise ValueError(f"unknown fading model {kind!r}")


def sinr_from_gains(powers_mw, gains, noise_mw):
    """SINR of every (user, cell) link, all other cells interfering.

    ``gains`` is users x cells, ``powers_mw`` has one entry per cell.
    """
    rx = np.atleast_2d(np.asarray(gains, dtype=float) * np.asarray(powers_mw, dtype=float))
    interference = np.empty_like(rx)
    # summed per column rather than total - own, which cancels badly near a cell
    for j in range(rx.shape[1]):
        interference[:, j] = np.delete(rx, j, axis=1).sum(axis=1)
    return rx / (interference + noise_mw)


def sinr(i, j, scenario):
    """SINR of user ``i`` served by cell ``j`` (index into ``scenario.cells``)."""
    powers = scenario.cell_powers_mw
    rx = scenario.gains[i] * powers
    interference = np.delete(rx, j).sum()
    return float(rx[j] / (interference + scenario.noise_mw))


def shannon_rate(sinr_value, W):
    return W * np.log2(1.0 + np.asarray(sinr_value, dtype=float))
