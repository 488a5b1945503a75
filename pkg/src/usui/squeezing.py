"""Variances and shot-noise-normalized noise of photon-number combinations.

The joint intensity observable is a weighted sum sum_p w_p N_p; its variance
is the quadratic form w K w^T in the photon-number covariance matrix, and
the noise normalized to the shot-noise level is

    R = w K w^T / sum_p |w_p| <N_p>.

``rd_closed_form`` gives the exact normalized noise of the balanced
signal-minus-idler combination over M modes of the seeded interferometer
(same-slot pairing), together with its high-gain approximation
1/M + 1/(8 mu1^2 mu2^2) and the large-M asymptote 1/(2g - 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .builder import UsuiParams
from .photon_stats import IntensityStats


@dataclass(frozen=True)
class CombinationSpec:
    """Weight vector of a joint intensity measurement plus its slot pairing.

    ``pairing_offset`` records the slot delay m of the idler pulses relative
    to the signal pulses in the combination that produced ``weights``.
    """

    weights: np.ndarray
    pairing_offset: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or not np.any(w):
            raise ValueError("weights must be a 1-d vector with some nonzero entry")
        if self.pairing_offset < 0:
            raise ValueError("pairing_offset must be >= 0")


def nd_weights(n_modes, offset=0):
    """Weights of the signal-minus-idler combination over M modes.

    +1 on the signal modes of slots 0..M/2-1 and -1 on the idler modes of
    slots offset..M/2-1+offset; the returned vector spans the M + 2*offset
    mode window needed to hold both sets.
    """
    M = int(n_modes)
    if M < 2 or M % 2 != 0:
        raise ValueError("n_modes must be a positive even integer")
    m = int(offset)
    if m < 0:
        raise ValueError("offset must be >= 0")
    w = np.zeros(M + 2 * m)
    for slot in range(M // 2):
        w[2 * slot] += 1.0
        w[2 * (slot + m) + 1] -= 1.0
    return w


def combination_spec(n_modes, offset=0) -> CombinationSpec:
    return CombinationSpec(nd_weights(n_modes, offset), offset)


def combination_variance(K, w):
    """Quadratic form w K w^T; K must be a covariance so the result is >= 0."""
    K = np.asarray(K, dtype=float)
    w = np.asarray(w, dtype=float)
    if K.shape != (w.size, w.size):
        raise ValueError(f"dimension mismatch: K is {K.shape}, w has length {w.size}")
    return float(w @ K @ w)


def normalized_noise(stats: IntensityStats, spec: CombinationSpec):
    """Variance of the weighted combination normalized to its shot-noise level."""
    w = spec.weights
    snl = float(np.abs(w) @ stats.mean_n)
    if snl <= 0.0:
        raise ValueError("shot-noise denominator sum |w_p| <N_p> is zero")
    return combination_variance(stats.cov_k, w) / snl


def to_db(r):
    """Noise ratio in decibels, 10*log10(R)."""
    return 10.0 * np.log10(r)


def rd_closed_form(params: UsuiParams, n_modes=None):
    """Exact normalized noise of the M-mode same-slot combination (seeded, theta = 0).

    R = 8 (nu1^4 + nu1^2) / (M (2g - 1)) + 1 / (2g - 1),  g = (mu1*mu2 + nu1*nu2)^2.
    """
    params.validate()
    M = params.n_modes if n_modes is None else int(n_modes)
    if M < 2 or M % 2 != 0:
        raise ValueError("n_modes must be a positive even integer")
    den = 2.0 * params.total_gain - 1.0
    return 8.0 * (params.nu1**4 + params.nu1**2) / (M * den) + 1.0 / den


def rd_high_gain_approx(params: UsuiParams, n_modes=None):
    """High-gain approximation 1/M + 1/(8 mu1^2 mu2^2) of the same combination."""
    M = params.n_modes if n_modes is None else int(n_modes)
    return 1.0 / M + 1.0 / (8.0 * params.mu1**2 * params.mu2**2)


def rd_asymptote(params: UsuiParams):
    """Large-M limit 1/(2g - 1) of the normalized noise."""
    return 1.0 / (2.0 * params.total_gain - 1.0)


def two_mode_noise_table(params: UsuiParams):
    """Closed-form normalized intensity noise for single modes and mode pairs.

    Keys: 'single' for one mode alone, then intensity-difference noise of the
    central-slot signal against its five correlated neighbors, and
    'uncorrelated' for a partner more than one slot away.  All values refer
    to the bright-seeded regime with the pump phase at the lock point.
    """
    params.validate()
    v1, v2 = params.v1, params.v2
    c1, c2 = params.c1, params.c2
    den = 2.0 * params.total_gain - 1.0
    cross = 2.0 * c1 * v2 + 2.0 * c2 * v1
    return {
        "single": v1 * v2,
        "0s,0i": (4.0 * (params.nu1**4 + params.nu1**2) + 1.0) / den,
        "0s,1s": v1 * v2 - 2.0 * c1 * c2,
        "0s,-1s": v1 * v2 - 2.0 * c1 * c2,
        "0s,1i": v1 * v2 - 2.0 * c1 * params.nu2**2 * cross / den,
        "0s,-1i": v1 * v2 - 2.0 * c1 * params.mu2**2 * cross / den,
        "uncorrelated": v1 * v2,
    }
