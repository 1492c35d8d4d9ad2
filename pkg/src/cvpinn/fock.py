"""Truncated Fock-basis simulation of a single bosonic mode.

States are complex amplitude vectors over the photon-number basis
``|0>, |1>, ..., |cutoff-1>``; gates are dense ``cutoff x cutoff`` complex
matrices. The quadrature convention is hbar = 2, i.e. ``x = a + a^dag``,
so the vacuum has quadrature variance 1 and a real displacement by beta
shifts the quadrature mean by 2*beta.

States are never renormalized: gate application is a plain matrix-vector
product and the squared norm is tracked so that truncation artifacts
surface as errors instead of being hidden.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .exceptions import TruncationError

#: Squared-norm floor below which a state is considered untrustworthy.
NORM_GUARD = 0.99

#: Slack allowed above 1 for squared norms (round-off only).
NORM_CEILING = 1.0 + 1e-9


@dataclass(frozen=True)
class QuadratureResult:
    """Quadrature mean/variance of a state, plus its squared norm."""

    mean: float
    variance: float
    state_norm: float


def _check_cutoff(cutoff):
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 2:
        raise ValueError(f"cutoff must be an integer >= 2, got {cutoff!r}")


def vacuum(cutoff: int) -> np.ndarray:
    """Zero-photon ground state: amplitude 1 at n = 0."""
    _check_cutoff(cutoff)
    state = np.zeros(cutoff, dtype=complex)
    state[0] = 1.0
    return state


def coherent(alpha: complex, cutoff: int) -> np.ndarray:
    """Coherent state amplitudes c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!).

    Computed with the stable recurrence c_n = c_{n-1} * alpha / sqrt(n).
    Raises TruncationError if the truncated squared norm drops below the
    0.99 guard (the cutoff is too small for this displacement).
    """
    _check_cutoff(cutoff)
    alpha = complex(alpha)
    state = np.empty(cutoff, dtype=complex)
    state[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cutoff):
        state[n] = state[n - 1] * alpha / np.sqrt(n)
    norm = float(np.sum(np.abs(state) ** 2))
    if norm < NORM_GUARD:
        raise TruncationError(
            f"coherent({alpha}) retains squared norm {norm:.6f} < {NORM_GUARD} "
            f"at cutoff {cutoff}; increase the cutoff",
            norm=norm,
            x=alpha,
        )
    return state


@lru_cache(maxsize=16)
def lowering_operator(cutoff: int) -> np.ndarray:
    """Ladder operator a with entries a[n-1, n] = sqrt(n)."""
    _check_cutoff(cutoff)
    a = np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def matrix_exponential(m: np.ndarray) -> np.ndarray:
    """Matrix exponential of a gate generator.

    Delegates to scipy's scaling-and-squaring Pade implementation, which
    meets the <= 1e-12 relative-error contract on the generator norms used
    here.
    """
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix_exponential requires finite entries")
    return expm(m)


@lru_cache(maxsize=512)
def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """Displacement gate exp(alpha a^dag - conj(alpha) a) on the truncated space."""
    _check_cutoff(cutoff)
    alpha = complex(alpha)
    a = lowering_operator(cutoff)
    gen = alpha * a.conj().T - np.conjugate(alpha) * a
    gate = matrix_exponential(gen)
    gate.setflags(write=False)
    return gate


@lru_cache(maxsize=512)
def rotation_matrix(phi: float, cutoff: int) -> np.ndarray:
    """Phase-space rotation: diagonal phases exp(i phi n)."""
    _check_cutoff(cutoff)
    gate = np.diag(np.exp(1j * phi * np.arange(cutoff)))
    gate.setflags(write=False)
    return gate


@lru_cache(maxsize=512)
def squeezing_matrix(r: float, phi: float, cutoff: int) -> np.ndarray:
    """Squeezing gate exp((conj(z) a^2 - z a^dag^2)/2) with z = r exp(i phi).

    For phi = 0 and r > 0 this scales the position quadrature by exp(-r).
    |r| > 3 is rejected: beyond that the truncated representation is
    unreliable at the cutoffs used here.
    """
    _check_cutoff(cutoff)
    if abs(r) > 3.0:
        raise ValueError(f"squeeze magnitude |r|={abs(r)} exceeds the supported limit 3")
    z = r * np.exp(1j * phi)
    a = lowering_operator(cutoff)
    a2 = a @ a
    gen = 0.5 * (np.conjugate(z) * a2 - z * a2.conj().T)
    gate = matrix_exponential(gen)
    gate.setflags(write=False)
    return gate


@lru_cache(maxsize=512)
def kerr_matrix(kappa: float, cutoff: int) -> np.ndarray:
    """Kerr gate: diagonal phases exp(i kappa n^2), the circuit nonlinearity."""
    _check_cutoff(cutoff)
    n = np.arange(cutoff)
    gate = np.diag(np.exp(1j * kappa * n * n))
    gate.setflags(write=False)
    return gate


def apply(gate: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Apply a gate to a state. No renormalization is performed."""
    if gate.shape != (state.shape[0], state.shape[0]):
        raise ValueError(
            f"dimension mismatch: gate {gate.shape} vs state of length {state.shape[0]}"
        )
    return gate @ state


@lru_cache(maxsize=16)
def quadrature_operator(cutoff: int) -> np.ndarray:
    """Position quadrature x = a + a^dag (hbar = 2 convention)."""
    a = lowering_operator(cutoff)
    x = a + a.conj().T
    x.setflags(write=False)
    return x


def quad_expectation(state: np.ndarray) -> QuadratureResult:
    """Quadrature mean and variance of a raw (non-renormalized) state.

    The variance uses the truncated operator squared, i.e. ||x psi||^2,
    which is exact whenever the state has negligible support at the cutoff.
    Raises TruncationError if the squared norm is below the 0.99 guard.
    """
    norm = float(np.sum(np.abs(state) ** 2))
    if norm < NORM_GUARD:
        raise TruncationError(
            f"state squared norm {norm:.6f} < {NORM_GUARD}: cutoff too small "
            "for this circuit/input",
            norm=norm,
        )
    if norm > NORM_CEILING:
        raise ValueError(f"state squared norm {norm} exceeds 1 beyond round-off")
    x = quadrature_operator(state.shape[0])
    xs = x @ state
    mean = float(np.real(np.vdot(state, xs)))
    variance = float(np.real(np.vdot(xs, xs))) - mean**2
    return QuadratureResult(mean=mean, variance=variance, state_norm=norm)
