"""Pure-Python/numpy implementation of the hot kernels.

Same API as the compiled ``_kernels`` extension. Row reductions use
``math.fsum`` (exactly rounded), which makes every result independent of
technology ordering.
"""

import math

import numpy as np

BACKEND = "python"

PREF_MIN = 1e-300
PREF_MAX = 1.0 - 2.0 ** -53


def exact_sum(values):
    return math.fsum(values)


def preference_matrix(median, spread):
    """F[i, j]: probability that a draw of cost i undercuts a draw of cost j."""
    median = np.asarray(median, dtype=float)
    spread = np.asarray(spread, dtype=float)
    var = spread * spread
    diff = median[:, None] - median[None, :]
    scale = np.sqrt(2.0 * (var[:, None] + var[None, :]))
    # math.erfc is the C library erfc, the same one the compiled kernel calls
    z = (diff / scale).ravel()
    pref = 0.5 * np.array([math.erfc(v) for v in z]).reshape(diff.shape)
    return np.clip(pref, PREF_MIN, PREF_MAX)


def pair_flows(shares, freq, pref, gmax, gmin):
    """Antisymmetric matrix of net flows into i from j, per unit time."""
    shares = np.asarray(shares, dtype=float)
    inflow = freq.T * pref * gmax[:, None] * gmin[None, :]
    return np.outer(shares, shares) * (inflow - inflow.T)


def share_deltas(shares, freq, pref, gmax, gmin, dt):
    flows = pair_flows(shares, freq, pref, np.asarray(gmax, float), np.asarray(gmin, float))
    return np.array([math.fsum(row) for row in flows]) * dt
