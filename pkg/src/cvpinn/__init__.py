"""Continuous-variable quantum network PINN solver for the 1-D Poisson equation."""

from .circuit import (
    PARAMS_PER_LAYER,
    CircuitParams,
    CircuitSurrogate,
    LayerParams,
    circuit_matrix,
    forward,
    forward_batch,
    forward_jet,
    init_params,
    layer_matrix,
)
from .exceptions import DivergenceError, TruncationError
from .experiments import (
    BATCH_GRID,
    DEPTH_GRID,
    SUITES,
    ExperimentConfig,
    SuiteResult,
    TrainTrace,
    normalize,
    run_experiment,
    run_suite,
)
from .fock import (
    QuadratureResult,
    apply,
    coherent,
    displacement_matrix,
    kerr_matrix,
    quad_expectation,
    quadrature_operator,
    rotation_matrix,
    squeezing_matrix,
    vacuum,
)
from .jets import Jet2State, SurrogateJet, coherent_jet, param_gradient, propagate, quad_jet
from .optimizers import (
    OPTIMIZER_KINDS,
    SPSA,
    Adadelta,
    Adam,
    HybridSchedule,
    LbfgsResult,
    Nadam,
    RMSProp,
    SGD,
    make_optimizer,
    minimize_lbfgs,
    run_hybrid,
    two_loop_direction,
)
from .poisson import (
    ERROR_GRID_POINTS,
    CollocationBatch,
    FunctionSurrogate,
    LossBreakdown,
    PoissonProblem,
    analytic_derivatives,
    analytic_solution,
    error_norm,
    fd_loss,
    loss,
    sample_collocation,
    source_term,
)

__version__ = "0.1.0"
