"""Poisson test problems, residual/loss assembly, and the error metric.

Two 1-D Dirichlet problems are built in: a quadratic source on [0, 1] and a
sinusoidal source on [0, 2*pi], both with zero boundary values. The loss is
the batch mean of |phi'' - b| at inner collocation points plus the absolute
boundary residuals, each endpoint evaluated once per iteration (the batch
average of a deterministic endpoint value is the value itself).
"""

from dataclasses import dataclass

import numpy as np

from .circuit import CircuitParams, CircuitSurrogate

QUADRATIC = "quadratic"
SINUSOIDAL = "sinusoidal"

#: Grid size of the reported error metric (includes both boundary points).
ERROR_GRID_POINTS = 32


@dataclass(frozen=True)
class PoissonProblem:
    """1-D Poisson problem phi'' = b on [domain_lo, domain_hi], Dirichlet zeros."""

    source: str
    domain_lo: float
    domain_hi: float
    bc_lo: float = 0.0
    bc_hi: float = 0.0

    def __post_init__(self):
        if self.source not in (QUADRATIC, SINUSOIDAL):
            raise ValueError(f"unknown source {self.source!r}")
        if not self.domain_lo < self.domain_hi:
            raise ValueError("domain_lo must be strictly below domain_hi")

    @classmethod
    def from_name(cls, name: str) -> "PoissonProblem":
        if name == QUADRATIC:
            return cls(source=QUADRATIC, domain_lo=0.0, domain_hi=1.0)
        if name == SINUSOIDAL:
            return cls(source=SINUSOIDAL, domain_lo=0.0, domain_hi=2.0 * np.pi)
        raise ValueError(f"unknown problem {name!r}")


@dataclass(frozen=True)
class CollocationBatch:
    """Random inner points of one optimizer iteration; boundaries are implicit."""

    inner_xs: np.ndarray
    problem: PoissonProblem

    def __post_init__(self):
        xs = np.asarray(self.inner_xs, dtype=float)
        if np.any(xs <= self.problem.domain_lo) or np.any(xs >= self.problem.domain_hi):
            raise ValueError("collocation points must lie strictly inside the domain")
        object.__setattr__(self, "inner_xs", xs)


@dataclass(frozen=True)
class LossBreakdown:
    """Loss components of one evaluation; total = inner + bc_lo + bc_hi."""

    total: float
    inner: float
    bc_lo: float
    bc_hi: float
    min_norm: float = 1.0


def _check_domain(problem, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < problem.domain_lo) or np.any(x > problem.domain_hi):
        raise ValueError(
            f"x outside [{problem.domain_lo}, {problem.domain_hi}]"
        )
    return x


def source_term(problem: PoissonProblem, x):
    """Source b(x): x(x-1) for the quadratic problem, sin(2x) for the sinusoidal."""
    x = _check_domain(problem, x)
    if problem.source == QUADRATIC:
        return x * (x - 1.0)
    return np.sin(2.0 * x)


def analytic_solution(problem: PoissonProblem, x):
    """Closed-form solution of phi'' = b with the zero Dirichlet conditions.

    Quadratic: phi = x^4/12 - x^3/6 + x/12; sinusoidal: phi = -sin(2x)/4.
    Both obtained by integrating the source twice and fixing the constants
    from the boundary values.
    """
    x = _check_domain(problem, x)
    if problem.source == QUADRATIC:
        return x**4 / 12.0 - x**3 / 6.0 + x / 12.0
    return -np.sin(2.0 * x) / 4.0


def analytic_derivatives(problem: PoissonProblem, x):
    """(phi, phi', phi'') of the analytic solution; handy as a test double."""
    x = _check_domain(problem, x)
    if problem.source == QUADRATIC:
        return (
            x**4 / 12.0 - x**3 / 6.0 + x / 12.0,
            x**3 / 3.0 - x**2 / 2.0 + 1.0 / 12.0,
            x * (x - 1.0),
        )
    return -np.sin(2.0 * x) / 4.0, -np.cos(2.0 * x) / 2.0, np.sin(2.0 * x)


class FunctionSurrogate:
    """Surrogate built from closed-form (phi, phi', phi'') callables.

    Stands in for the quantum circuit when exercising the residual assembly
    against functions whose derivatives are known exactly; reports unit norms.
    """

    def __init__(self, phi, dphi=None, d2phi=None):
        self.phi = phi
        self.dphi = dphi
        self.d2phi = d2phi

    def value_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        return np.asarray(self.phi(xs), dtype=float), np.ones_like(xs)

    def jet_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        if self.dphi is None or self.d2phi is None:
            raise ValueError("jet_batch needs dphi and d2phi callables")
        return (
            np.asarray(self.phi(xs), dtype=float),
            np.asarray(self.dphi(xs), dtype=float),
            np.asarray(self.d2phi(xs), dtype=float),
            np.ones_like(xs),
        )


def as_surrogate(obj):
    """Accept CircuitParams or anything exposing the surrogate batch methods."""
    if isinstance(obj, CircuitParams):
        return CircuitSurrogate(obj)
    if hasattr(obj, "value_batch") and hasattr(obj, "jet_batch"):
        return obj
    raise TypeError(f"cannot interpret {type(obj).__name__} as a surrogate")


def sample_collocation(rng, batch_size: int, problem: PoissonProblem) -> CollocationBatch:
    """Draw batch_size i.i.d. uniform points from the open domain."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    xs = rng.uniform(problem.domain_lo, problem.domain_hi, size=batch_size)
    # Endpoint draws have probability zero but would violate the open-domain
    # contract; redraw them rather than clamping.
    while np.any((xs <= problem.domain_lo) | (xs >= problem.domain_hi)):
        bad = (xs <= problem.domain_lo) | (xs >= problem.domain_hi)
        xs[bad] = rng.uniform(problem.domain_lo, problem.domain_hi, size=int(bad.sum()))
    return CollocationBatch(inner_xs=xs, problem=problem)


def loss(surrogate, problem: PoissonProblem, batch: CollocationBatch) -> LossBreakdown:
    """Residual loss with exact (jet-propagated) second derivatives.

    inner = mean_i |phi''(x_i) - b(x_i)| over the batch; the two boundary
    residuals are |phi(endpoint) - bc| evaluated once each.
    """
    s = as_surrogate(surrogate)
    _, _, d2phi, inner_norms = s.jet_batch(batch.inner_xs)
    inner = float(np.mean(np.abs(d2phi - source_term(problem, batch.inner_xs))))
    bvals, bnorms = s.value_batch(np.array([problem.domain_lo, problem.domain_hi]))
    bc_lo = float(abs(bvals[0] - problem.bc_lo))
    bc_hi = float(abs(bvals[1] - problem.bc_hi))
    min_norm = float(min(inner_norms.min(), bnorms.min()))
    return LossBreakdown(
        total=inner + bc_lo + bc_hi,
        inner=inner,
        bc_lo=bc_lo,
        bc_hi=bc_hi,
        min_norm=min_norm,
    )


def fd_loss(surrogate, problem: PoissonProblem, grid_n: int) -> LossBreakdown:
    """Residual loss with a second-order central stencil on a fixed uniform grid.

    Grid nodes include both endpoints; the inner term averages the stencil
    residual over the interior nodes, so no input derivatives are needed.
    """
    if grid_n < 3:
        raise ValueError(f"grid_n must be >= 3, got {grid_n}")
    s = as_surrogate(surrogate)
    xs = np.linspace(problem.domain_lo, problem.domain_hi, grid_n)
    dx = (problem.domain_hi - problem.domain_lo) / (grid_n - 1)
    values, norms = s.value_batch(xs)
    stencil = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dx**2
    inner = float(np.mean(np.abs(stencil - source_term(problem, xs[1:-1]))))
    bc_lo = float(abs(values[0] - problem.bc_lo))
    bc_hi = float(abs(values[-1] - problem.bc_hi))
    return LossBreakdown(
        total=inner + bc_lo + bc_hi,
        inner=inner,
        bc_lo=bc_lo,
        bc_hi=bc_hi,
        min_norm=float(norms.min()),
    )


def error_norm(surrogate, problem: PoissonProblem, grid_n: int = ERROR_GRID_POINTS) -> float:
    """Euclidean norm of (surrogate - analytic solution) on the uniform closed grid."""
    s = as_surrogate(surrogate)
    xs = np.linspace(problem.domain_lo, problem.domain_hi, grid_n)
    values, _ = s.value_batch(xs)
    return float(np.linalg.norm(values - analytic_solution(problem, xs)))
