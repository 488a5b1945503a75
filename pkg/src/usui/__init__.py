"""Simulation and analysis of multi-mode intensity squeezing from a
pulse-pumped unbalanced SU(1,1) interferometer.

The package covers the Gaussian-state model of the device (covariance
matrices, photon-number statistics, normalized noise of joint intensity
measurements), plus two independent verification routes: a truncated
Fock-space brute force at small gain and Monte Carlo emulation of the
pulse-resolved detection pipeline.
"""

from .builder import (
    ScheduleEntry,
    UsuiParams,
    build_usui_state,
    closed_form_covariance,
    interaction_schedule,
)
from .gaussian import (
    GaussianState,
    SqueezeOp,
    apply_loss,
    displace,
    load_state,
    partial_trace,
    save_state,
    two_mode_squeeze,
    vacuum_state,
    validate,
)
from .fock import FockState, fock_two_mode_squeeze, fock_usui_expectations
from .montecarlo import (
    DetectorConfig,
    PulseRunRecord,
    correlation_coefficient,
    estimate_photon_stats,
    group_and_normalize,
    sample_wigner,
    simulate_detection_run,
    snl_calibration,
)
from .photon_stats import (
    IntensityStats,
    closed_form_k,
    g2,
    g2_table_reference,
    intensity_covariance,
    mean_photon_numbers,
    photon_statistics,
)
from .squeezing import (
    CombinationSpec,
    combination_variance,
    nd_weights,
    normalized_noise,
    rd_closed_form,
    rd_high_gain_approx,
    rd_asymptote,
    to_db,
    two_mode_noise_table,
)

__version__ = "0.1.0"
