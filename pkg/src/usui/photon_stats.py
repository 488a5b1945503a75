"""Photon-number statistics of Gaussian states: means, covariance matrix K, g2.

For a state with displacement alpha and covariance blocks A, B,

    <N_p> = (A[p, p] - 1)/2 + |alpha_p|^2
    K     = (A o A* + B o B* - I)/4
            + Re[(alpha* alpha^T) o A + (alpha* alpha^+) o B]

with o the elementwise (Hadamard) product, and the normalized second-order
intensity correlation is

    g2(p, q) = K[p, q] / (<N_p><N_q>) - delta_pq / <N_p> + 1.

``closed_form_k`` and ``g2_table_reference`` give the vacuum-input closed
forms for the interferometer state and serve as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .builder import UsuiParams, central_slot, mode_index

# reference-mode pair labels, resolved relative to the central time slot
TABLE_PAIR_LABELS = ("0s", "-1i", "0i", "-1s", "1s", "1i", "others")


@dataclass(frozen=True)
class IntensityStats:
    """Per-mode mean photon numbers and their covariance matrix."""

    mean_n: np.ndarray
    cov_k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean_n", np.asarray(self.mean_n, dtype=float))
        object.__setattr__(self, "cov_k", np.asarray(self.cov_k, dtype=float))
        if self.cov_k.shape != (self.mean_n.size, self.mean_n.size):
            raise ValueError("cov_k shape does not match mean_n length")


def mean_photon_numbers(state):
    return (np.real(np.diag(state.A)) - 1.0) / 2.0 + np.abs(state.d) ** 2


def intensity_covariance(state):
    A, B, alpha = state.A, state.B, state.d
    M = state.n_modes
    K = 0.25 * (np.real(A * A.conj()) + np.real(B * B.conj()) - np.eye(M))
    if np.any(alpha):
        ac = alpha.conj()
        K = K + np.real(np.outer(ac, alpha) * A + np.outer(ac, ac) * B)
    return (K + K.T) / 2.0


def photon_statistics(state) -> IntensityStats:
    return IntensityStats(mean_photon_numbers(state), intensity_covariance(state))


def closed_form_k(params: UsuiParams):
    """Sparse closed-form K of the vacuum-input interferometer state.

    Nonzero pattern (1-based p):
      K[p, p]   = (V1^2 V2^2 - 1)/4
      K[p, p+1] = V1^2 c2^2 (odd p)  or  c1^2 mu2^4 (even p)
      K[p, p+2] = c1^2 c2^2
      K[p, p+3] = c1^2 nu2^4 (odd p only)

    Derived for vacuum input; rejects seeded parameter sets.
    """
    params.validate()
    if params.seed_x != 0.0:
        raise ValueError(
            "closed_form_k is derived for vacuum input; got seed_x ="
            f" {params.seed_x} (use intensity_covariance on the built state)"
        )
    M = params.n_modes
    v1sq, c1sq = params.v1**2, params.c1**2
    c2sq = params.c2**2
    K = np.zeros((M, M))
    np.fill_diagonal(K, (params.v1**2 * params.v2**2 - 1.0) / 4.0)
    for p in range(1, M):
        val = v1sq * c2sq if p % 2 == 1 else c1sq * params.mu2**4
        K[p - 1, p] = K[p, p - 1] = val
    for p in range(1, M - 1):
        K[p - 1, p + 1] = K[p + 1, p - 1] = c1sq * c2sq
    for p in range(1, M - 2):
        if p % 2 == 1:
            K[p - 1, p + 2] = K[p + 2, p - 1] = c1sq * params.nu2**4
    return K


def g2(state, p, q):
    """Normalized second-order intensity correlation between modes p and q."""
    stats = photon_statistics(state)
    return g2_from_stats(stats, p, q)


def g2_from_stats(stats: IntensityStats, p, q):
    np_, nq = stats.mean_n[p], stats.mean_n[q]
    if np_ <= 0.0 or nq <= 0.0:
        raise ValueError(
            f"g2 undefined: mean photon number is zero for mode {p if np_ <= 0 else q}"
        )
    value = stats.cov_k[p, q] / (np_ * nq) + 1.0
    if p == q:
        value -= 1.0 / np_
    return value


def label_to_mode(label, n_modes):
    """Resolve a relative label like '-1i' to a mode index via the central slot."""
    channel = label[-1]
    offset = int(label[:-1])
    slot = central_slot(n_modes) + offset
    if not 0 <= slot < n_modes // 2:
        raise ValueError(f"label {label!r} falls outside the {n_modes}-mode window")
    return mode_index(slot, channel)


def g2_table_reference(params: UsuiParams):
    """Closed-form g2 between the central-slot signal mode and its neighbors.

    Returns a dict over TABLE_PAIR_LABELS: the auto-correlation '0s' (always
    2 for this state family), the five correlated neighbors, and 'others'
    (exactly 1) for any mode outside the three neighboring slots.
    """
    params.validate()
    if params.seed_x != 0.0:
        raise ValueError("g2_table_reference is derived for vacuum input (seed_x = 0)")
    den = params.mu1**2 * params.nu2**2 + params.nu1**2 * params.mu2**2
    if den == 0.0:
        # both pumps off: coherent vacuum, correlations undefined
        raise ValueError("g2 table undefined when both OPA gains are 1")
    c1, c2 = params.c1, params.c2
    return {
        "0s": 2.0,
        "-1i": 1.0 + (c1 * params.mu2**2 / den) ** 2,
        "0i": 1.0 + (c2 * params.v1 / den) ** 2,
        "-1s": 1.0 + (c1 * c2 / den) ** 2,
        "1s": 1.0 + (c1 * c2 / den) ** 2,
        "1i": 1.0 + (c1 * params.nu2**2 / den) ** 2,
        "others": 1.0,
    }


def g2_table_from_state(state):
    """Same label set as ``g2_table_reference`` but evaluated on a state.

    The window must span at least 3 slots (6 modes); 'others' needs an
    uncorrelated partner for the reference mode and therefore a 10-mode
    window, and is reported as None when the window is too small.
    """
    M = state.n_modes
    if M < 6:
        raise ValueError("g2 table needs at least a 6-mode window")
    stats = photon_statistics(state)
    ref = label_to_mode("0s", M)
    out = {}
    for label in TABLE_PAIR_LABELS[:-1]:
        out[label] = g2_from_stats(stats, ref, label_to_mode(label, M))
    out["others"] = None
    if M >= 10:
        out["others"] = g2_from_stats(stats, ref, label_to_mode("-2s", M))
    return out
