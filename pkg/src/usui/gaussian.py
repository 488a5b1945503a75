"""Multi-mode Gaussian states in the complex (annihilation/creation) basis.

A state of M optical modes is described by a displacement vector ``d`` with
``d[p] = <a_p>`` and a covariance matrix held as two M x M blocks,

    A[p, q] = <a_p a_q^+> + <a_q^+ a_p> - 2 <a_p><a_q^+>
    B[p, q] = 2 <a_p a_q> - 2 <a_p><a_q>,

so the full complex-basis covariance is ``[[A, B], [B*, A*]]`` and the vacuum
has ``A = I``, ``B = 0``.  With this normalization a thermal mode of mean
photon number ``n`` has ``A[p, p] = 2n + 1``.

Quadrature convention used for all physicality checks:

    x = (a + a^+)/sqrt(2),   y = (a - a^+)/(i sqrt(2)),

ordered (x_1..x_M, y_1..y_M).  In this scaling the vacuum quadrature
covariance is the identity, and a covariance is physical iff
``sigma_quad + i*Omega >= 0`` with ``Omega = [[0, I], [-I, 0]]``.

States are immutable values: every operation returns a new state, so they
can be shared freely across threads or parameter sweeps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


class GaussianState:
    """Immutable M-mode Gaussian state (displacement + covariance blocks)."""

    __slots__ = ("n_modes", "d", "A", "B")

    def __init__(self, d, A, B):
        d = np.asarray(d, dtype=complex).copy()
        A = np.asarray(A, dtype=complex).copy()
        B = np.asarray(B, dtype=complex).copy()
        n = d.shape[0]
        if d.ndim != 1 or A.shape != (n, n) or B.shape != (n, n):
            raise ValueError(
                f"inconsistent shapes: d {d.shape}, A {A.shape}, B {B.shape}"
            )
        for arr in (d, A, B):
            arr.setflags(write=False)
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianState is immutable")

    def covariance(self):
        """Full 2M x 2M complex-basis covariance [[A, B], [B*, A*]]."""
        return np.block([[self.A, self.B], [self.B.conj(), self.A.conj()]])

    def mean_vector(self):
        """Length-2M complex-basis mean [d, d*]."""
        return np.concatenate([self.d, self.d.conj()])

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes})"


@dataclass(frozen=True)
class SqueezeOp:
    """Two-mode squeezing between distinct modes with amplitude gains mu, nu.

    ``mu**2 - nu**2 = 1`` is required; ``phase`` is the squeezing angle that
    multiplies the nu coupling as exp(i*phase).
    """

    mode_p: int
    mode_q: int
    mu: float
    nu: float
    phase: float = 0.0

    def validate(self, n_modes, tol=DEFAULT_TOL):
        if self.mode_p == self.mode_q:
            raise ValueError("mode_p and mode_q must differ")
        for m in (self.mode_p, self.mode_q):
            if not 0 <= m < n_modes:
                raise ValueError(f"mode index {m} out of range for {n_modes} modes")
        if not (np.isfinite(self.mu) and np.isfinite(self.nu)):
            raise ValueError("non-finite gain")
        if self.mu < 1.0 - tol or self.nu < -tol:
            raise ValueError(f"require mu >= 1 and nu >= 0, got mu={self.mu}, nu={self.nu}")
        if abs(self.mu**2 - self.nu**2 - 1.0) > max(tol, tol * self.mu**2):
            raise ValueError(
                f"gains must satisfy mu^2 - nu^2 = 1, got {self.mu**2 - self.nu**2}"
            )


def vacuum_state(n_modes) -> GaussianState:
    """M-mode vacuum: A = I, B = 0, d = 0."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    n = int(n_modes)
    return GaussianState(np.zeros(n), np.eye(n), np.zeros((n, n)))


def displace(state, mode, amount) -> GaussianState:
    """Add ``amount`` to the displacement of one mode; covariance unchanged."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode index {mode} out of range")
    d = state.d.copy()
    d[mode] += amount
    return GaussianState(d, state.A, state.B)


def squeeze_matrix(n_modes, op: SqueezeOp):
    """2M x 2M complex-basis transformation matrix of a two-mode squeeze.

    Block form [[S_A, S_B], [S_B*, S_A*]] with S_A diagonal (mu on the two
    squeezed modes, 1 elsewhere) and S_B carrying nu*exp(i*phase) at
    (p, q) and (q, p).
    """
    sa = np.ones(n_modes, dtype=complex)
    sa[op.mode_p] = op.mu
    sa[op.mode_q] = op.mu
    SB = np.zeros((n_modes, n_modes), dtype=complex)
    coupling = op.nu * np.exp(1j * op.phase)
    SB[op.mode_p, op.mode_q] = coupling
    SB[op.mode_q, op.mode_p] = coupling
    SA = np.diag(sa)
    return np.block([[SA, SB], [SB.conj(), SA.conj()]])


def two_mode_squeeze(state, op: SqueezeOp) -> GaussianState:
    """Apply a two-mode squeeze: sigma -> S sigma S^+, mean -> S mean."""
    op.validate(state.n_modes)
    n = state.n_modes
    S = squeeze_matrix(n, op)
    sigma = S @ state.covariance() @ S.conj().T
    mean = S @ state.mean_vector()
    return GaussianState(mean[:n], sigma[:n, :n], sigma[:n, n:])


def partial_trace(state, keep) -> GaussianState:
    """Reduced state of the listed modes, order preserved."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be non-empty")
    if len(set(keep)) != len(keep):
        raise ValueError("keep set contains duplicate indices")
    for m in keep:
        if not 0 <= m < state.n_modes:
            raise ValueError(f"mode index {m} out of range")
    idx = np.asarray(keep, dtype=int)
    sub = np.ix_(idx, idx)
    return GaussianState(state.d[idx], state.A[sub], state.B[sub])


def apply_loss(state, mode, eta) -> GaussianState:
    """Pure-loss channel of transmissivity eta on one mode.

    Equivalent to a beam splitter mixing the mode with vacuum: off-diagonal
    rows/columns scale by sqrt(eta), the A diagonal relaxes toward the
    vacuum value 1, and the displacement scales by sqrt(eta).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode index {mode} out of range")
    root = np.sqrt(eta)
    d = state.d.copy()
    A = state.A.copy()
    B = state.B.copy()
    d[mode] *= root
    A[mode, :] *= root
    A[:, mode] *= root
    B[mode, :] *= root
    B[:, mode] *= root
    # diagonal entries got eta from the two scalings above; fix A's vacuum term
    A[mode, mode] += 1.0 - eta
    return GaussianState(d, A, B)


# --- physicality / diagnostics -------------------------------------------

def _quadrature_map(n_modes):
    """Unitary T mapping [a, a^+] components to (x_1..x_M, y_1..y_M)."""
    I = np.eye(n_modes)
    return np.block([[I, I], [-1j * I, 1j * I]]) / np.sqrt(2)


def symplectic_form(n_modes):
    I = np.eye(n_modes)
    Z = np.zeros((n_modes, n_modes))
    return np.block([[Z, I], [-I, Z]])


def quadrature_covariance(state):
    """Real quadrature covariance (vacuum = identity in this scaling)."""
    T = _quadrature_map(state.n_modes)
    sq = T @ state.covariance() @ T.conj().T
    return sq.real


def quadrature_mean(state):
    """Real quadrature mean vector (x_1..x_M, y_1..y_M)."""
    r = (_quadrature_map(state.n_modes) @ state.mean_vector())
    return r.real


def complex_to_quadrature_transform(S):
    """Quadrature-basis image of a complex-basis linear transformation."""
    n = S.shape[0] // 2
    T = _quadrature_map(n)
    return (T @ S @ T.conj().T).real


@dataclass(frozen=True)
class StateDiagnostics:
    hermiticity_defect: float
    symmetry_defect: float
    min_physicality_eig: float

    def passed(self, tol=DEFAULT_TOL):
        return (
            self.hermiticity_defect <= tol
            and self.symmetry_defect <= tol
            and self.min_physicality_eig >= -tol
        )


def validate(state, tol=DEFAULT_TOL) -> StateDiagnostics:
    """Diagnostics: A-Hermiticity, B-symmetry, and uncertainty-relation slack.

    The physicality eigenvalue is the smallest eigenvalue of
    ``sigma_quad + i*Omega``; physical states keep it >= -tol.
    """
    herm = float(np.abs(state.A - state.A.conj().T).max())
    symm = float(np.abs(state.B - state.B.T).max())
    sq = quadrature_covariance(state)
    test = sq + 1j * symplectic_form(state.n_modes)
    # sq is real symmetric up to rounding, so test is Hermitian up to rounding
    eigs = np.linalg.eigvalsh((test + test.conj().T) / 2)
    return StateDiagnostics(herm, symm, float(eigs.min()))


# --- serialization --------------------------------------------------------

def _complex_to_pairs(arr):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _pairs_to_complex(data):
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(state):
    """JSON-ready dict; complex entries stored row-major as [re, im] pairs."""
    return {
        "n_modes": state.n_modes,
        "displacement": _complex_to_pairs(state.d),
        "block_a": _complex_to_pairs(state.A),
        "block_b": _complex_to_pairs(state.B),
    }


def state_from_dict(data) -> GaussianState:
    state = GaussianState(
        _pairs_to_complex(data["displacement"]),
        _pairs_to_complex(data["block_a"]),
        _pairs_to_complex(data["block_b"]),
    )
    if state.n_modes != data["n_modes"]:
        raise ValueError("n_modes field disagrees with matrix dimensions")
    return state


def save_state(state, path):
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh)


def load_state(path) -> GaussianState:
    with open(path) as fh:
        return state_from_dict(json.load(fh))
