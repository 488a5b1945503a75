"""Monte Carlo emulation of pulse-resolved self-homodyne detection.

Mode amplitudes are drawn from the Gaussian quasi-probability (Wigner)
distribution of the state, whose symmetric-ordered moments are

    <alpha_p alpha_q*>_W = A[p, q]/2 + d_p d_q*,
    <alpha_p alpha_q>_W  = B[p, q]/2 + d_p d_q,    mean = d.

Photon-number statistics follow with the ordering corrections
``<N_p> = <|alpha_p|^2> - 1/2`` and ``K[p, p] = Var(|alpha_p|^2) - 1/4``
(off-diagonal covariances need no correction); both are exact for Gaussian
states.  Detection runs integrate per-slot signal-minus-idler differences
``e_n = |alpha_s|^2 - |alpha_i|^2`` plus optional electronic noise, group
consecutive slots, and normalize group variances to the shot-noise level.

Reproducibility contract: all randomness derives from a master seed through
numbered batch streams (``SeedSequence(master_seed, spawn_key=(batch,))``),
and batches are aggregated in index order, so results are bit-identical for
a given master seed at any worker count.

Approximation note: amplitudes for different slot groups are drawn
independently from a window one slot wider than the group.  Within-group
covariances are exact; only the weak correlation between neighboring groups
is dropped, which leaves group-variance estimates unbiased and slightly
perturbs standard errors at window boundaries.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .builder import UsuiParams, build_usui_state
from .gaussian import (
    apply_loss,
    displace,
    quadrature_covariance,
    quadrature_mean,
    vacuum_state,
    validate,
)
from .photon_stats import IntensityStats, mean_photon_numbers
from .squeezing import CombinationSpec

DEFAULT_BATCH = 8192
PULSE_PERIOD = 20e-9  # repetition period of the pulse train, seconds


@dataclass(frozen=True)
class DetectorConfig:
    """Detection efficiency, electronic noise, run length and master seed.

    ``electronic_noise_var`` is the variance of the additive Gaussian noise
    per integrated pulse, in squared photon-number units (the units in which
    the shot-noise variance at detected power P equals P).
    """

    eta: float = 1.0
    electronic_noise_var: float = 0.0
    n_pulses: int = 250_000
    rng_seed: int = 0

    def validate(self, min_pulses=1):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.electronic_noise_var < 0.0:
            raise ValueError("electronic_noise_var must be >= 0")
        if self.n_pulses < min_pulses:
            raise ValueError(f"n_pulses must be >= {min_pulses}")


@dataclass(frozen=True)
class PulseRunRecord:
    """Per-slot integrated detector differences e_n for one simulated run."""

    values: np.ndarray
    slot_period: float = PULSE_PERIOD

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise ValueError("record contains non-finite values")

    @property
    def n_pulses(self):
        return self.values.size

    @property
    def timestamps(self):
        return np.arange(self.n_pulses) * self.slot_period


def _batch_stream(master_seed, batch_index):
    """Independent generator for one batch, fixed by (master seed, index)."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(batch_index,))
    )


def _wigner_cholesky(state, tol=1e-8):
    diag = validate(state)
    if not diag.passed(tol):
        raise ValueError(
            "state is non-physical (uncertainty-relation slack "
            f"{diag.min_physicality_eig:.3e}); refusing to sample"
        )
    cov = quadrature_covariance(state) / 2.0
    cov = (cov + cov.T) / 2.0
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "Wigner covariance factorization failed; the state is "
            "numerically degenerate"
        ) from exc
    return chol, quadrature_mean(state)


def _draw_amplitudes(chol, mean, n, rng):
    M = mean.size // 2
    z = rng.standard_normal((n, 2 * M)) @ chol.T + mean
    return (z[:, :M] + 1j * z[:, M:]) / np.sqrt(2.0)


def sample_wigner(state, n_samples, rng_seed=0):
    """Draw i.i.d. complex amplitude vectors from the state's Wigner distribution.

    ``rng_seed`` may be an integer master seed or a ready numpy Generator.
    Deterministic for a fixed integer seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else _batch_stream(int(rng_seed), 0)
    chol, mean = _wigner_cholesky(state)
    return _draw_amplitudes(chol, mean, int(n_samples), rng)


def estimate_photon_stats(samples) -> IntensityStats:
    """Photon-number means and covariance from Wigner samples.

    Applies the symmetric-to-normal ordering corrections (-1/2 on means,
    -1/4 on covariance diagonal).
    """
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ValueError("need at least 2 samples of shape (n_samples, n_modes)")
    intensity = np.abs(samples) ** 2
    mean_n = intensity.mean(axis=0) - 0.5
    K = np.cov(intensity, rowvar=False)
    K = np.atleast_2d(K) - np.eye(samples.shape[1]) / 4.0
    return IntensityStats(mean_n, K)


def _apply_uniform_loss(state, eta):
    if eta == 1.0:
        return state
    for mode in range(state.n_modes):
        state = apply_loss(state, mode, eta)
    return state


def simulate_detection_run(params: UsuiParams, spec: CombinationSpec,
                           det: DetectorConfig, n_workers=1) -> PulseRunRecord:
    """Emulate one pulse-resolved self-homodyne run.

    Builds the seeded state, applies the detection efficiency to every mode,
    and draws one amplitude vector per slot group from a window one slot
    wider than the group.  Each slot contributes
    ``e_n = |alpha_signal(n)|^2 - |alpha_idler(n+m)|^2`` plus electronic
    noise, with m = ``spec.pairing_offset``.
    """
    params.validate()
    if params.seed_x <= 0.0:
        raise ValueError("self-homodyne emulation needs a bright seed (seed_x > 0)")
    m = spec.pairing_offset
    group_slots = (spec.weights.size - 2 * m) // 2
    det.validate(min_pulses=group_slots)

    window_slots = group_slots + m + 1
    state = _apply_uniform_loss(
        build_usui_state(params.with_modes(2 * window_slots)), det.eta
    )
    chol, mean = _wigner_cholesky(state)

    n_groups = math.ceil(det.n_pulses / group_slots)
    sig_idx = np.array([2 * j for j in range(group_slots)])
    idl_idx = np.array([2 * (j + m) + 1 for j in range(group_slots)])
    noise_sd = math.sqrt(det.electronic_noise_var)

    def run_batch(batch_index, batch_groups):
        rng = _batch_stream(det.rng_seed, batch_index)
        alpha = _draw_amplitudes(chol, mean, batch_groups, rng)
        e = np.abs(alpha[:, sig_idx]) ** 2 - np.abs(alpha[:, idl_idx]) ** 2
        if noise_sd > 0.0:
            e = e + rng.normal(0.0, noise_sd, size=e.shape)
        return e.ravel()

    batches = [(b, min(DEFAULT_BATCH, n_groups - b * DEFAULT_BATCH))
               for b in range((n_groups + DEFAULT_BATCH - 1) // DEFAULT_BATCH)]
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(lambda ab: run_batch(*ab), batches))
    else:
        chunks = [run_batch(*ab) for ab in batches]
    values = np.concatenate(chunks)[: det.n_pulses]
    return PulseRunRecord(values)


def analytic_snl(params: UsuiParams, spec: CombinationSpec, det: DetectorConfig):
    """Shot-noise normalizer sum |w_p| <N_p> per group, from the lossy state."""
    m = spec.pairing_offset
    group_slots = (spec.weights.size - 2 * m) // 2
    state = _apply_uniform_loss(
        build_usui_state(params.with_modes(2 * (group_slots + m + 1))), det.eta
    )
    mean_n = mean_photon_numbers(state)
    w = np.zeros(state.n_modes)
    w[: spec.weights.size] = spec.weights
    return float(np.abs(w) @ mean_n)


def group_and_normalize(record: PulseRunRecord, group_size, snl):
    """Variance of consecutive group sums normalized to ``snl``, with its
    standard error (variance-of-variance for near-Gaussian group sums).

    Unbiased when group boundaries coincide with the independent windows the
    record was drawn in (``simulate_detection_run`` aligns them).
    """
    group_size = int(group_size)
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    if snl <= 0.0:
        raise ValueError("snl must be positive")
    n_groups = record.n_pulses // group_size
    if n_groups < 10:
        raise ValueError(
            f"need at least 10 groups, got {n_groups} "
            f"(record of {record.n_pulses} pulses, group size {group_size})"
        )
    sums = record.values[: n_groups * group_size].reshape(n_groups, group_size).sum(axis=1)
    variance = float(np.var(sums, ddof=1))
    r = variance / snl
    stderr = r * math.sqrt(2.0 / (n_groups - 1))
    return r, stderr


def _coherent_slot_state(power_per_slot, eta):
    """Two-mode coherent state of one slot, split evenly signal/idler."""
    amp = math.sqrt(power_per_slot / 2.0)
    state = displace(displace(vacuum_state(2), 0, amp), 1, amp)
    return _apply_uniform_loss(state, eta)


def simulate_coherent_record(power_per_slot, det: DetectorConfig) -> PulseRunRecord:
    """Balanced-detector record for a coherent (shot-noise-limited) input."""
    det.validate()
    if power_per_slot <= 0.0:
        raise ValueError("power_per_slot must be positive")
    state = _coherent_slot_state(power_per_slot, det.eta)
    chol, mean = _wigner_cholesky(state)
    noise_sd = math.sqrt(det.electronic_noise_var)

    chunks = []
    n_batches = (det.n_pulses + DEFAULT_BATCH - 1) // DEFAULT_BATCH
    for b in range(n_batches):
        count = min(DEFAULT_BATCH, det.n_pulses - b * DEFAULT_BATCH)
        rng = _batch_stream(det.rng_seed, b)
        alpha = _draw_amplitudes(chol, mean, count, rng)
        e = np.abs(alpha[:, 0]) ** 2 - np.abs(alpha[:, 1]) ** 2
        if noise_sd > 0.0:
            e = e + rng.normal(0.0, noise_sd, size=e.shape)
        chunks.append(e)
    return PulseRunRecord(np.concatenate(chunks))


def snl_calibration(powers, det: DetectorConfig):
    """Least-squares fit of per-pulse variance against optical power.

    Simulates a coherent-state run at each power and fits
    variance = slope * power + intercept.  Returns (slope, intercept,
    r_squared); the intercept estimates the electronic noise floor.
    """
    powers = np.asarray(powers, dtype=float)
    if powers.size < 3 or np.unique(powers).size < 3:
        raise ValueError("need at least 3 distinct calibration powers")
    variances = []
    for i, power in enumerate(powers):
        run_det = DetectorConfig(det.eta, det.electronic_noise_var,
                                 det.n_pulses, det.rng_seed + i)
        record = simulate_coherent_record(power, run_det)
        variances.append(np.var(record.values, ddof=1))
    variances = np.asarray(variances)
    slope, intercept = np.polyfit(powers, variances, 1)
    fitted = slope * powers + intercept
    ss_res = float(np.sum((variances - fitted) ** 2))
    ss_tot = float(np.sum((variances - variances.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r_squared


def correlation_coefficient(record: PulseRunRecord, shift):
    """Pearson correlation between e_n and e_(n+shift)."""
    shift = int(abs(shift))
    if shift >= record.n_pulses:
        raise ValueError("shift must be smaller than the record length")
    x = record.values
    if np.var(x) == 0.0:
        raise ValueError("correlation undefined for a constant record")
    if shift == 0:
        return 1.0
    return float(np.corrcoef(x[:-shift], x[shift:])[0, 1])
