"""Figure rendering for traces and suites, alongside the CSV/JSON output.

Uses the Agg backend so runs render headless; every function returns the
list of files it wrote.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import circuit, poisson

SOLUTION_GRID = 200


def render_run_figures(trace, out_dir, name=None):
    """Write <name>_loss.png and <name>_solution.png for one finished run."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = name or trace.config.tag()
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    iters = [r.iteration for r in trace.rows]
    ax.semilogy(iters, [r.loss for r in trace.rows], label="total", linewidth=1.6)
    ax.semilogy(iters, [r.loss_ip for r in trace.rows], label="inner", linewidth=0.8)
    bc = [r.loss_bc_lo + r.loss_bc_hi for r in trace.rows]
    ax.semilogy(iters, bc, label="boundary", linewidth=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.set_title(f"{trace.config.problem}, {trace.config.optimizer}")
    ax.legend()
    fig.tight_layout()
    loss_path = out / f"{name}_loss.png"
    fig.savefig(loss_path, dpi=120)
    plt.close(fig)
    paths.append(loss_path)

    problem = poisson.PoissonProblem.from_name(trace.config.problem)
    params = circuit.CircuitParams.from_flat(trace.final_params, trace.config.cutoff)
    xs = np.linspace(problem.domain_lo, problem.domain_hi, SOLUTION_GRID)
    values, _ = circuit.CircuitSurrogate(params).value_batch(xs)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, values, label="trained surrogate")
    ax.plot(xs, poisson.analytic_solution(problem, xs), "--", label="analytic")
    ax.set_xlabel("x")
    ax.set_ylabel("solution")
    ax.set_title(f"final error norm {trace.final_error_norm:.3g}")
    ax.legend()
    fig.tight_layout()
    sol_path = out / f"{name}_solution.png"
    fig.savefig(sol_path, dpi=120)
    plt.close(fig)
    paths.append(sol_path)
    return paths


def render_suite_figures(suite, out_dir):
    """Write an overlaid loss figure and a final-error bar chart for a suite."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for cell in suite.cells:
        if not cell.ok:
            continue
        iters = [r.iteration for r in cell.trace.rows]
        ax.semilogy(iters, [r.loss for r in cell.trace.rows], label=cell.name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.set_title(f"{suite.name} study")
    ax.legend()
    fig.tight_layout()
    loss_path = out / f"{suite.name}_loss.png"
    fig.savefig(loss_path, dpi=120)
    plt.close(fig)
    paths.append(loss_path)

    done = [cell for cell in suite.cells if cell.ok]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(
        [cell.name for cell in done],
        [cell.trace.final_error_norm for cell in done],
    )
    ax.set_ylabel("final error norm (32-point grid)")
    ax.set_title(f"{suite.name} study")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    err_path = out / f"{suite.name}_error.png"
    fig.savefig(err_path, dpi=120)
    plt.close(fig)
    paths.append(err_path)
    return paths
