"""Training runs and study suites with seed control and CSV/JSON trace output.

One master seed derives independent child streams, in order: parameter init,
batch sampling, SPSA perturbations. Changing the batch size therefore never
perturbs the initial parameter draw. Trace rows record the loss breakdown at
the parameters entering each iteration; the CSV is bit-exact under a fixed
seed because floats are written with repr (shortest round-trip form).
"""

import dataclasses
import json
import math
import pathlib
import time
from dataclasses import dataclass

import numpy as np

from . import circuit, poisson
from .exceptions import DivergenceError, TruncationError
from .jets import param_gradient
from .optimizers import OPTIMIZER_KINDS, HybridSchedule, make_optimizer, run_hybrid

PROBLEM_DEFAULT_LR = {"quadratic": 0.01, "sinusoidal": 0.0001}
PROBLEM_DEFAULT_CUTOFF = {"quadratic": 50, "sinusoidal": 125}
TRACE_HEADER = "iter,loss,loss_ip,loss_bc_lo,loss_bc_hi,min_norm"
SUITES = ("optimizers", "ad_vs_fd", "depth", "batch")
DEPTH_GRID = (2, 4, 8)
BATCH_GRID = (32, 64, 128)
RESIDUAL_MODES = ("ad", "fd")


@dataclass(frozen=True)
class ExperimentConfig:
    """One training run; None for learning_rate/cutoff means per-problem default."""

    problem: str = "quadratic"
    optimizer: str = "sgd"
    learning_rate: float | None = None
    residual: str = "ad"
    layers: int = 4
    batch_size: int = 32
    iterations: int = 500
    cutoff: int | None = None
    seed: int = 0
    switch_at: int = 80

    def tag(self) -> str:
        return (
            f"{self.problem}_{self.optimizer}_{self.residual}"
            f"_l{self.layers}_b{self.batch_size}_s{self.seed}"
        )


def normalize(config: ExperimentConfig) -> ExperimentConfig:
    """Fill per-problem defaults and validate every field; ValueError on bad config."""
    if config.problem not in PROBLEM_DEFAULT_LR:
        raise ValueError(f"unknown problem {config.problem!r}")
    if config.optimizer not in OPTIMIZER_KINDS:
        raise ValueError(f"unknown optimizer {config.optimizer!r}")
    if config.residual not in RESIDUAL_MODES:
        raise ValueError(f"residual must be one of {RESIDUAL_MODES}")
    lr = config.learning_rate
    if lr is None:
        lr = PROBLEM_DEFAULT_LR[config.problem]
    cutoff = config.cutoff
    if cutoff is None:
        cutoff = PROBLEM_DEFAULT_CUTOFF[config.problem]
    config = dataclasses.replace(config, learning_rate=lr, cutoff=cutoff)
    for name in ("learning_rate", "layers", "batch_size", "iterations", "cutoff"):
        value = getattr(config, name)
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")
    if config.seed < 0:
        raise ValueError("seed must be non-negative")
    if config.optimizer == "lbfgs" and not 1 <= config.switch_at <= config.iterations:
        raise ValueError("switch_at must lie in [1, iterations]")
    return config


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    loss: float
    loss_ip: float
    loss_bc_lo: float
    loss_bc_hi: float
    min_norm: float

    def as_csv(self) -> str:
        return (
            f"{self.iteration},{self.loss!r},{self.loss_ip!r},"
            f"{self.loss_bc_lo!r},{self.loss_bc_hi!r},{self.min_norm!r}"
        )


@dataclass
class TrainTrace:
    """Per-iteration rows plus the run summary (error norm, timing, config echo)."""

    config: ExperimentConfig
    rows: list
    final_params: np.ndarray
    final_error_norm: float
    wall_seconds: float

    def csv_text(self) -> str:
        lines = [TRACE_HEADER]
        lines.extend(row.as_csv() for row in self.rows)
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "final_error_norm": self.final_error_norm,
            "wall_seconds": self.wall_seconds,
            "config": dataclasses.asdict(self.config),
        }

    def write(self, out_dir, name=None):
        """Write <name>.csv and <name>.json under out_dir; returns both paths."""
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = name or self.config.tag()
        csv_path = out / f"{name}.csv"
        json_path = out / f"{name}.json"
        csv_path.write_text(self.csv_text())
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _attach_iteration(err: TruncationError, iteration: int) -> TruncationError:
    wrapped = TruncationError(
        f"iteration {iteration}: {err}", norm=err.norm, x=err.x
    )
    return wrapped


def run_experiment(config: ExperimentConfig) -> TrainTrace:
    """Train one configuration; deterministic per seed.

    Row k holds the loss at the parameters entering iteration k (1-based);
    the summary's error norm is measured at the final parameters.
    """
    config = normalize(config)
    problem = poisson.PoissonProblem.from_name(config.problem)
    init_seq, batch_seq, spsa_seq = np.random.SeedSequence(config.seed).spawn(3)
    params0 = circuit.init_params(config.layers, init_seq, cutoff=config.cutoff)
    flat = params0.to_flat()
    batch_rng = np.random.default_rng(batch_seq)

    def breakdown_at(vec, batch) -> poisson.LossBreakdown:
        p = circuit.CircuitParams.from_flat(vec, config.cutoff)
        if config.residual == "fd":
            return poisson.fd_loss(p, problem, grid_n=config.batch_size)
        return poisson.loss(p, problem, batch)

    def next_batch():
        if config.residual == "fd":
            return None
        return poisson.sample_collocation(batch_rng, config.batch_size, problem)

    start = time.perf_counter()
    rows: list = []
    if config.optimizer == "lbfgs":
        flat, rows = _run_hybrid_phases(config, breakdown_at, next_batch, flat)
    else:
        opt = make_optimizer(
            config.optimizer,
            config.learning_rate,
            total_iterations=config.iterations,
            rng=np.random.default_rng(spsa_seq),
        )
        if config.optimizer == "spsa":
            calibration_batch = next_batch()
            opt.calibrate(flat, lambda v: breakdown_at(v, calibration_batch).total)
        for k in range(1, config.iterations + 1):
            batch = next_batch()
            try:
                bd = breakdown_at(flat, batch)
            except TruncationError as err:
                raise _attach_iteration(err, k) from err
            if not math.isfinite(bd.total):
                raise DivergenceError("non-finite loss", iteration=k)
            rows.append(
                TraceRow(k, bd.total, bd.inner, bd.bc_lo, bd.bc_hi, bd.min_norm)
            )
            objective = lambda v: breakdown_at(v, batch).total
            try:
                if config.optimizer == "spsa":
                    flat = opt.step(flat, objective)
                else:
                    flat = opt.step(flat, param_gradient(objective, flat))
            except TruncationError as err:
                raise _attach_iteration(err, k) from err

    final = circuit.CircuitParams.from_flat(flat, config.cutoff)
    final_err = poisson.error_norm(final, problem)
    wall = time.perf_counter() - start
    return TrainTrace(
        config=config,
        rows=rows,
        final_params=flat,
        final_error_norm=final_err,
        wall_seconds=wall,
    )


def _run_hybrid_phases(config, breakdown_at, next_batch, flat):
    """SGD then frozen-batch L-BFGS; rebuilds trace rows from the visited params."""
    batches: dict = {}

    def objective_for(k):
        if k not in batches:
            batches[k] = next_batch()
        batch = batches[k]

        def loss_and_grad(vec):
            scalar = lambda v: breakdown_at(v, batch).total
            return scalar(vec), param_gradient(scalar, vec)

        return loss_and_grad

    schedule = HybridSchedule(
        switch_iteration=config.switch_at, learning_rate=config.learning_rate
    )
    result = run_hybrid(schedule, objective_for, flat, config.iterations)
    rows = []
    for k0, vec in enumerate(result.path):
        batch = batches[min(k0, config.switch_at)]
        try:
            bd = breakdown_at(vec, batch)
        except TruncationError as err:
            raise _attach_iteration(err, k0 + 1) from err
        if not math.isfinite(bd.total):
            raise DivergenceError("non-finite loss", iteration=k0 + 1)
        rows.append(
            TraceRow(k0 + 1, bd.total, bd.inner, bd.bc_lo, bd.bc_hi, bd.min_norm)
        )
    return result.params, rows


@dataclass
class CellResult:
    """One suite cell: a finished trace or the error that stopped it."""

    name: str
    config: ExperimentConfig
    trace: TrainTrace | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.trace is not None


@dataclass
class SuiteResult:
    name: str
    cells: list

    def summary_csv(self) -> str:
        lines = ["cell,status,final_error_norm,wall_seconds"]
        for cell in self.cells:
            if cell.ok:
                lines.append(
                    f"{cell.name},ok,{cell.trace.final_error_norm!r},"
                    f"{cell.trace.wall_seconds!r}"
                )
            else:
                lines.append(f"{cell.name},failed,,")
        return "\n".join(lines) + "\n"

    def write(self, out_dir):
        """Write per-cell traces plus <suite>_summary.csv; returns written paths."""
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for cell in self.cells:
            if cell.ok:
                paths.extend(cell.trace.write(out, name=f"{self.name}_{cell.name}"))
            else:
                err_path = out / f"{self.name}_{cell.name}.error.txt"
                err_path.write_text(cell.error + "\n")
                paths.append(err_path)
        summary_path = out / f"{self.name}_summary.csv"
        summary_path.write_text(self.summary_csv())
        paths.append(summary_path)
        return paths


def suite_cells(suite_name: str, base: ExperimentConfig):
    """Expand a suite into (cell_name, config) pairs, all else at the base config."""
    if suite_name == "optimizers":
        return [
            (kind, dataclasses.replace(base, optimizer=kind))
            for kind in OPTIMIZER_KINDS
        ]
    if suite_name == "ad_vs_fd":
        # FD mode pairs with Adam: plain SGD is unstable on the stencil residual.
        return [
            ("ad", dataclasses.replace(base, residual="ad")),
            ("fd", dataclasses.replace(base, residual="fd", optimizer="adam")),
        ]
    if suite_name == "depth":
        return [
            (f"layers{n}", dataclasses.replace(base, layers=n)) for n in DEPTH_GRID
        ]
    if suite_name == "batch":
        return [
            (f"batch{n}", dataclasses.replace(base, batch_size=n)) for n in BATCH_GRID
        ]
    raise ValueError(f"unknown suite {suite_name!r}; expected one of {SUITES}")


def run_suite(suite_name: str, base: ExperimentConfig | None = None) -> SuiteResult:
    """Run every cell of the named study; cell failures are recorded, not raised."""
    base = base or ExperimentConfig()
    cells = []
    for cell_name, config in suite_cells(suite_name, base):
        try:
            trace = run_experiment(config)
            cells.append(CellResult(name=cell_name, config=config, trace=trace))
        except (TruncationError, DivergenceError) as err:
            cells.append(
                CellResult(
                    name=cell_name,
                    config=config,
                    error=f"{type(err).__name__}: {err}",
                )
            )
    return SuiteResult(name=suite_name, cells=cells)
