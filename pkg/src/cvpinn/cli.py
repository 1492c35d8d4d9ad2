"""Command line runner for single experiments and the four study suites.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (state fell
below the truncation guard or the loss/gradient went non-finite).
"""

import argparse
import json
import sys

from . import report
from .exceptions import DivergenceError, TruncationError
from .experiments import (
    SUITES,
    ExperimentConfig,
    normalize,
    run_experiment,
    run_suite,
)
from .optimizers import OPTIMIZER_KINDS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvpinn",
        description=(
            "Train a continuous-variable quantum network as a PINN on the "
            "1-D Poisson equation and write trace CSV/JSON plus figures."
        ),
    )
    parser.add_argument(
        "--problem", choices=("quadratic", "sinusoidal"), default="quadratic"
    )
    parser.add_argument("--optimizer", choices=OPTIMIZER_KINDS, default="sgd")
    parser.add_argument(
        "--lr",
        type=float,
        default=None,
        help="learning rate; default 0.01 (quadratic) or 0.0001 (sinusoidal)",
    )
    parser.add_argument("--residual", choices=("ad", "fd"), default="ad")
    parser.add_argument("--layers", type=int, default=4)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--iters", type=int, default=500)
    parser.add_argument(
        "--cutoff",
        type=int,
        default=None,
        help="Fock cutoff; default 50 (quadratic) or 125 (sinusoidal)",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--switch-at",
        type=int,
        default=80,
        help="iteration at which the lbfgs optimizer takes over from SGD",
    )
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument(
        "--suite",
        choices=SUITES,
        default=None,
        help="run a whole study instead of a single experiment",
    )
    parser.add_argument(
        "--no-figures",
        action="store_true",
        help="skip PNG rendering, write only CSV/JSON",
    )
    return parser


def config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        problem=args.problem,
        optimizer=args.optimizer,
        learning_rate=args.lr,
        residual=args.residual,
        layers=args.layers,
        batch_size=args.batch,
        iterations=args.iters,
        cutoff=args.cutoff,
        seed=args.seed,
        switch_at=args.switch_at,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = normalize(config_from_args(args))
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if args.suite is not None:
        suite = run_suite(args.suite, config)
        paths = suite.write(args.out)
        if not args.no_figures:
            paths.extend(report.render_suite_figures(suite, args.out))
        for path in paths:
            print(f"wrote {path}")
        print(suite.summary_csv(), end="")
        return EXIT_OK

    try:
        trace = run_experiment(config)
    except (TruncationError, DivergenceError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        print(
            "config: " + json.dumps(vars(args), sort_keys=True), file=sys.stderr
        )
        return EXIT_NUMERICAL
    paths = list(trace.write(args.out))
    if not args.no_figures:
        paths.extend(report.render_run_figures(trace, args.out))
    for path in paths:
        print(f"wrote {path}")
    print(json.dumps(trace.summary(), indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
