"""Layered variational circuit acting as the PINN surrogate network.

Each layer is rotation -> squeeze -> rotation -> displacement -> Kerr, seven
real parameters in all, and the scalar output is the quadrature mean of the
circuit state prepared from the coherent encoding of the collocation point.
Layer matrices are independent of the input, so they are cached per
parameter tuple and shared across batch elements and finite-difference
probes that leave them untouched.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fock, jets
from .exceptions import TruncationError

PARAMS_PER_LAYER = 7


@dataclass(frozen=True)
class LayerParams:
    """Seven gate parameters of one quantum neural unit."""

    theta1: float  # first rotation (degenerate beam-splitter)
    sq_r: float  # squeeze magnitude
    sq_phi: float  # squeeze phase
    theta2: float  # second rotation
    d_mag: float  # displacement magnitude
    d_phi: float  # displacement phase
    kappa: float  # Kerr strength

    def as_tuple(self):
        return (
            self.theta1,
            self.sq_r,
            self.sq_phi,
            self.theta2,
            self.d_mag,
            self.d_phi,
            self.kappa,
        )


@dataclass(frozen=True)
class CircuitParams:
    """Stack of layers plus the Fock cutoff the circuit is simulated at."""

    layers: tuple
    cutoff: int

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("a circuit needs at least one layer")

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def to_flat(self) -> np.ndarray:
        """Flatten to a real vector of length 7 * num_layers."""
        return np.array([v for lp in self.layers for v in lp.as_tuple()])

    @classmethod
    def from_flat(cls, flat: np.ndarray, cutoff: int) -> "CircuitParams":
        flat = np.asarray(flat, dtype=float)
        if flat.size % PARAMS_PER_LAYER != 0:
            raise ValueError(
                f"flat parameter vector length {flat.size} is not a multiple of "
                f"{PARAMS_PER_LAYER}"
            )
        layers = tuple(
            LayerParams(*flat[i : i + PARAMS_PER_LAYER])
            for i in range(0, flat.size, PARAMS_PER_LAYER)
        )
        return cls(layers=layers, cutoff=cutoff)


def init_params(num_layers: int, rng_seed, cutoff: int = 50) -> CircuitParams:
    """Draw all 7*num_layers parameters i.i.d. from N(0, 0.05^2).

    rng_seed may be anything numpy's default_rng accepts (int, SeedSequence,
    Generator); the draw is deterministic for a fixed seed.
    """
    if num_layers < 1:
        raise ValueError(f"num_layers must be >= 1, got {num_layers}")
    rng = np.random.default_rng(rng_seed)
    flat = rng.normal(loc=0.0, scale=0.05, size=num_layers * PARAMS_PER_LAYER)
    return CircuitParams.from_flat(flat, cutoff)


@lru_cache(maxsize=256)
def _layer_matrix_cached(layer_tuple, cutoff):
    theta1, sq_r, sq_phi, theta2, d_mag, d_phi, kappa = layer_tuple
    u = fock.rotation_matrix(theta1, cutoff)
    u = fock.squeezing_matrix(sq_r, sq_phi, cutoff) @ u
    u = fock.rotation_matrix(theta2, cutoff) @ u
    u = fock.displacement_matrix(d_mag * np.exp(1j * d_phi), cutoff) @ u
    u = fock.kerr_matrix(kappa, cutoff) @ u
    u.setflags(write=False)
    return u


def layer_matrix(lp: LayerParams, cutoff: int) -> np.ndarray:
    """Single-layer gate product K(kappa) D(d) R(theta2) S(r, phi) R(theta1)."""
    return _layer_matrix_cached(tuple(float(v) for v in lp.as_tuple()), int(cutoff))


def circuit_matrix(params: CircuitParams) -> np.ndarray:
    """Product of all layer matrices, first layer rightmost."""
    u = layer_matrix(params.layers[0], params.cutoff)
    for lp in params.layers[1:]:
        u = layer_matrix(lp, params.cutoff) @ u
    return u


def forward(params: CircuitParams, x: float) -> float:
    """Surrogate output: quadrature mean of the circuit state at input x."""
    state = circuit_matrix(params) @ fock.coherent(x, params.cutoff)
    return fock.quad_expectation(state).mean


def forward_jet(params: CircuitParams, x: float) -> jets.SurrogateJet:
    """Surrogate output with exact first and second input derivatives."""
    jet = jets.propagate(circuit_matrix(params), jets.coherent_jet(x, params.cutoff))
    return jets.quad_jet(jet)


def forward_batch(params: CircuitParams, xs) -> np.ndarray:
    """Elementwise forward over a batch, sharing one circuit matrix."""
    values, _ = _value_batch(params, np.asarray(xs, dtype=float))
    return values


class CircuitSurrogate:
    """Batch evaluation facade over a fixed parameter vector.

    Exposes the value/jet interface the residual assembly consumes, with the
    squared state norms reported alongside so truncation can be monitored.
    """

    def __init__(self, params: CircuitParams):
        self.params = params

    def value_batch(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """(surrogate values, squared state norms) over a batch of inputs."""
        return _value_batch(self.params, np.asarray(xs, dtype=float))

    def jet_batch(self, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(phi, dphi, d2phi, squared norms) over a batch of inputs."""
        return _jet_batch(self.params, np.asarray(xs, dtype=float))


def _encode_batch(xs, cutoff):
    """Columns of coherent jets for each x; reports the offending x on failure.

    Cached on the batch content: finite-difference probes of the circuit
    parameters re-evaluate the same batch dozens of times per iteration and
    the encoding is independent of those parameters.
    """
    return _encode_batch_cached(xs.tobytes(), xs.size, cutoff)


@lru_cache(maxsize=8)
def _encode_batch_cached(xs_bytes, size, cutoff):
    xs = np.frombuffer(xs_bytes, dtype=float, count=size)
    vals = np.empty((cutoff, size), dtype=complex)
    d1s = np.empty_like(vals)
    d2s = np.empty_like(vals)
    for j, x in enumerate(xs):
        try:
            jet = jets.coherent_jet(x, cutoff)
        except TruncationError as exc:
            raise TruncationError(
                f"encoding x={x} failed: {exc}", norm=exc.norm, x=float(x)
            ) from exc
        vals[:, j] = jet.value
        d1s[:, j] = jet.d1
        d2s[:, j] = jet.d2
    for arr in (vals, d1s, d2s):
        arr.setflags(write=False)
    return vals, d1s, d2s


def _guard_norms(norms, xs):
    bad = np.flatnonzero(norms < fock.NORM_GUARD)
    if bad.size:
        j = int(bad[0])
        raise TruncationError(
            f"state for x={xs[j]} has squared norm {norms[j]:.6f} < {fock.NORM_GUARD}",
            norm=float(norms[j]),
            x=float(xs[j]),
        )


def _value_batch(params, xs):
    cutoff = params.cutoff
    u = circuit_matrix(params)
    vals, _, _ = _encode_batch(xs, cutoff)
    psi = u @ vals
    norms = np.sum(np.abs(psi) ** 2, axis=0)
    _guard_norms(norms, xs)
    x_op = fock.quadrature_operator(cutoff)
    values = np.real(np.sum(np.conj(psi) * (x_op @ psi), axis=0))
    return values, norms


def _jet_batch(params, xs):
    cutoff = params.cutoff
    u = circuit_matrix(params)
    vals, d1s, d2s = _encode_batch(xs, cutoff)
    psi = u @ vals
    dpsi = u @ d1s
    d2psi = u @ d2s
    norms = np.sum(np.abs(psi) ** 2, axis=0)
    _guard_norms(norms, xs)
    x_op = fock.quadrature_operator(cutoff)
    x_psi = x_op @ psi
    phi = np.real(np.sum(np.conj(psi) * x_psi, axis=0))
    dphi = 2.0 * np.real(np.sum(np.conj(dpsi) * x_psi, axis=0))
    d2phi = 2.0 * np.real(np.sum(np.conj(d2psi) * x_psi, axis=0)) + 2.0 * np.real(
        np.sum(np.conj(dpsi) * (x_op @ dpsi), axis=0)
    )
    return phi, dphi, d2phi, norms
