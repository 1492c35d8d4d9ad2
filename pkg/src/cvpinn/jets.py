"""First and second derivatives of the surrogate with respect to its input.

The collocation point enters the circuit only through the coherent-state
encoding, whose amplitudes have closed-form x-derivatives, so input
derivatives propagate exactly: a jet carries (value, d/dx, d2/dx2) of the
amplitude vector and every x-independent gate acts on all three components
alike. Gradients with respect to circuit parameters are a separate concern
and use central finite differences.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fock
from .exceptions import TruncationError


@dataclass(frozen=True)
class Jet2State:
    """Amplitude vector plus its first two derivatives w.r.t. the input x."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


@dataclass(frozen=True)
class SurrogateJet:
    """Scalar surrogate output and its first two input derivatives."""

    phi: float
    dphi: float
    d2phi: float


def coherent_jet(x: float, cutoff: int) -> Jet2State:
    """Coherent encoding of a real x together with its exact x-derivatives.

    With psi(x) the truncated coherent amplitudes, the entrywise recurrences
    psi' = (a^dag - x I) psi and psi'' = (a^dag - x I) psi' - psi hold for
    every entry, including at x = 0.
    """
    x = float(x)
    value = fock.coherent(x, cutoff)
    adag = fock.lowering_operator(cutoff).conj().T
    d1 = adag @ value - x * value
    d2 = adag @ d1 - x * d1 - value
    return Jet2State(value=value, d1=d1, d2=d2)


def propagate(gate: np.ndarray, jet: Jet2State) -> Jet2State:
    """Apply an x-independent gate to a jet: it commutes with d/dx."""
    if gate.shape != (jet.value.shape[0], jet.value.shape[0]):
        raise ValueError(
            f"dimension mismatch: gate {gate.shape} vs jet of length {jet.value.shape[0]}"
        )
    return Jet2State(value=gate @ jet.value, d1=gate @ jet.d1, d2=gate @ jet.d2)


def quad_jet(jet: Jet2State) -> SurrogateJet:
    """Quadrature mean of a jet's state and its first two input derivatives.

    With X the quadrature operator and psi the state,
        phi   = Re(psi^dag X psi)
        phi'  = 2 Re(psi'^dag X psi)
        phi'' = 2 Re(psi''^dag X psi) + 2 Re(psi'^dag X psi').
    """
    psi = jet.value
    norm = float(np.sum(np.abs(psi) ** 2))
    if norm < fock.NORM_GUARD:
        raise TruncationError(
            f"jet state squared norm {norm:.6f} < {fock.NORM_GUARD}", norm=norm
        )
    x_op = fock.quadrature_operator(psi.shape[0])
    x_psi = x_op @ psi
    phi = float(np.real(np.vdot(psi, x_psi)))
    dphi = 2.0 * float(np.real(np.vdot(jet.d1, x_psi)))
    d2phi = 2.0 * float(np.real(np.vdot(jet.d2, x_psi))) + 2.0 * float(
        np.real(np.vdot(jet.d1, x_op @ jet.d1))
    )
    return SurrogateJet(phi=phi, dphi=dphi, d2phi=d2phi)


def param_gradient(
    loss: Callable[[np.ndarray], float], params: np.ndarray, h: float = 1e-4
) -> np.ndarray:
    """Central-difference gradient of a scalar loss over a parameter vector.

    g_i = (loss(theta + h e_i) - loss(theta - h e_i)) / (2 h). The loss must
    be deterministic across the 2*len(params) probe evaluations (hold any
    sampled batch fixed).
    """
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    params = np.asarray(params, dtype=float)
    grad = np.empty_like(params)
    probe = params.copy()
    for i in range(params.size):
        probe[i] = params[i] + h
        f_plus = loss(probe)
        probe[i] = params[i] - h
        f_minus = loss(probe)
        probe[i] = params[i]
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad
