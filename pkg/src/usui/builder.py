"""Construction of the multi-mode state behind an unbalanced SU(1,1) interferometer.

The device (USUI) is two pulse-pumped optical parametric amplifiers with a
one-pulse-period delay in the signal arm between them; the second OPA acts
as a nonlinear beam splitter coupling adjacent time slots.  The output state
over M modes (M/2 time slots, one signal and one idler mode per slot) is
obtained by running the ordered two-mode-squeeze schedule on an extended
system padded with boundary time slots, then tracing the padding away.

Mode indexing (0-based everywhere in code): index p belongs to time slot
``p // 2``; even p is the signal channel, odd p the idler channel.  In
1-based math labels this is the usual "signal = odd index" slot-major order.

``closed_form_covariance`` gives the same M-mode covariance directly from
the sparse closed form, and serves as the oracle for the builder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    GaussianState,
    SqueezeOp,
    displace,
    partial_trace,
    two_mode_squeeze,
    vacuum_state,
)

GAIN_TOL = 1e-9


@dataclass(frozen=True)
class UsuiParams:
    """Gains, pump phase, mode count and seed amplitude of the interferometer.

    ``mu1, nu1`` and ``mu2, nu2`` are the amplitude gains of the first and
    second OPA (each pair satisfies mu^2 - nu^2 = 1); ``theta`` is the pump
    phase difference; ``n_modes`` is the even number of analyzed modes;
    ``seed_x`` is the coherent seed amplitude injected into every signal
    mode (0 for vacuum input).
    """

    mu1: float
    nu1: float
    mu2: float
    nu2: float
    theta: float = 0.0
    n_modes: int = 6
    seed_x: float = 0.0

    @classmethod
    def from_power_gains(cls, mu1_sq, mu2_sq, theta=0.0, n_modes=6, seed_x=0.0):
        """Build from OPA power gains mu^2 (>= 1); nu = sqrt(mu^2 - 1)."""
        if mu1_sq < 1.0 or mu2_sq < 1.0:
            raise ValueError("power gains must be >= 1")
        return cls(
            mu1=math.sqrt(mu1_sq),
            nu1=math.sqrt(mu1_sq - 1.0),
            mu2=math.sqrt(mu2_sq),
            nu2=math.sqrt(mu2_sq - 1.0),
            theta=theta,
            n_modes=n_modes,
            seed_x=seed_x,
        )

    def validate(self):
        for mu, nu, tag in ((self.mu1, self.nu1, "OPA1"), (self.mu2, self.nu2, "OPA2")):
            if mu < 1.0 or nu < 0.0:
                raise ValueError(f"{tag}: require mu >= 1 and nu >= 0")
            if abs(mu**2 - nu**2 - 1.0) > max(GAIN_TOL, GAIN_TOL * mu**2):
                raise ValueError(f"{tag}: gains must satisfy mu^2 - nu^2 = 1")
        if self.n_modes < 2 or self.n_modes % 2 != 0:
            raise ValueError("n_modes must be a positive even integer")
        if self.seed_x < 0.0:
            raise ValueError("seed_x must be >= 0")

    # frequently used gain combinations
    @property
    def v1(self):
        return self.mu1**2 + self.nu1**2

    @property
    def v2(self):
        return self.mu2**2 + self.nu2**2

    @property
    def c1(self):
        return self.mu1 * self.nu1

    @property
    def c2(self):
        return self.mu2 * self.nu2

    @property
    def total_gain(self):
        """Overall intensity gain g = (mu1*mu2 + nu1*nu2)^2 of the interferometer."""
        return (self.mu1 * self.mu2 + self.nu1 * self.nu2) ** 2

    def with_modes(self, n_modes):
        return UsuiParams(
            self.mu1, self.nu1, self.mu2, self.nu2, self.theta, n_modes, self.seed_x
        )


@dataclass(frozen=True)
class ScheduleEntry:
    """One two-mode squeeze in the interaction schedule (0-based mode indices)."""

    opa: int
    mode_p: int
    mode_q: int
    order: int


def interaction_schedule(extended_modes):
    """Ordered squeeze schedule on the extended (padded) mode register.

    Two ordering rules fix the sequence: interactions in later time slots
    happen later, and the OPA1 squeeze touching an idler mode precedes the
    OPA2 squeeze touching it.  The resulting pattern interleaves
    OPA1 on (2k-1, 2k) with OPA2 on (2k-1, 2k-2) for k = 1..(E-2)/2 and
    ends with OPA2 on the last mode pair (E-2, E-1).
    """
    E = int(extended_modes)
    if E % 2 != 0:
        raise ValueError("extended mode count must be even")
    if E < 6:
        raise ValueError("extended mode count must be >= 6")
    entries = []
    order = 0
    for k in range(1, (E - 2) // 2 + 1):
        entries.append(ScheduleEntry(1, 2 * k - 1, 2 * k, order))
        order += 1
        entries.append(ScheduleEntry(2, 2 * k - 1, 2 * k - 2, order))
        order += 1
    entries.append(ScheduleEntry(2, E - 2, E - 1, order))
    return entries


def build_usui_state(params: UsuiParams, pad_slots=1) -> GaussianState:
    """Output state over params.n_modes modes, built on a padded register.

    ``pad_slots`` boundary time slots are added on each side (default 1, so
    the register has n_modes + 4 modes) and traced away at the end; deeper
    padding is available to verify it does not affect the kept window.
    If ``seed_x > 0`` every signal mode of the register is displaced by
    seed_x/sqrt(2) before the squeeze schedule runs (the pulse train is
    phase coherent slot to slot), which leaves the covariance untouched.
    """
    params.validate()
    if pad_slots < 1:
        raise ValueError("pad_slots must be >= 1")
    M = params.n_modes
    E = M + 4 * pad_slots
    state = vacuum_state(E)
    if params.seed_x > 0.0:
        amp = params.seed_x / math.sqrt(2.0)
        for p in range(0, E, 2):
            state = displace(state, p, amp)
    for entry in interaction_schedule(E):
        if entry.opa == 1:
            op = SqueezeOp(entry.mode_p, entry.mode_q, params.mu1, params.nu1, 0.0)
        else:
            op = SqueezeOp(entry.mode_p, entry.mode_q, params.mu2, params.nu2, params.theta)
        state = two_mode_squeeze(state, op)
    lo = 2 * pad_slots
    return partial_trace(state, range(lo, lo + M))


def closed_form_covariance(params: UsuiParams):
    """Sparse closed-form covariance blocks (A, B) of the M-mode output state.

    Nonzero pattern (1-based index p, phase factor e = exp(i*theta)):
      A[p, p]   = V1*V2
      A[p, p+2] = 2*c1*c2 * e^(+1 for odd p, -1 for even p)
      B[p, p+1] = 2*V1*c2*e   (odd p)  or  2*c1*mu2^2   (even p)
      B[p, p+3] = 2*c1*nu2^2*e^2   (odd p only)
    with V = mu^2 + nu^2 and c = mu*nu per OPA.
    """
    params.validate()
    M = params.n_modes
    v1, c1 = params.v1, params.c1
    v2, c2 = params.v2, params.c2
    mu2_sq, nu2_sq = params.mu2**2, params.nu2**2
    e = np.exp(1j * params.theta)

    A = np.zeros((M, M), dtype=complex)
    B = np.zeros((M, M), dtype=complex)
    np.fill_diagonal(A, v1 * v2)
    for p in range(1, M - 1):  # 1-based row index of the upper entry
        phase = e if p % 2 == 1 else e.conj()
        A[p - 1, p + 1] = 2 * c1 * c2 * phase
        A[p + 1, p - 1] = 2 * c1 * c2 * phase.conj()
    for p in range(1, M):
        val = 2 * v1 * c2 * e if p % 2 == 1 else 2 * c1 * mu2_sq
        B[p - 1, p] = val
        B[p, p - 1] = val
    for p in range(1, M - 2):
        if p % 2 == 1:
            val = 2 * c1 * nu2_sq * e**2
            B[p - 1, p + 2] = val
            B[p + 2, p - 1] = val
    return A, B


def mode_index(slot, channel):
    """0-based mode index of (0-based slot, 's'|'i') in slot-major order."""
    if channel not in ("s", "i"):
        raise ValueError("channel must be 's' or 'i'")
    return 2 * slot + (0 if channel == "s" else 1)


def central_slot(n_modes):
    """0-based reference slot used to resolve relative labels like '-1i'."""
    return (n_modes // 2 - 1) // 2
