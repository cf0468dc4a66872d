"""
``seisforge`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 generation error,
4 compatibility error, 5 numerical error, 1 anything else.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from seisforge import __version__
from seisforge.cli.commands import COMMAND_HANDLERS
from seisforge.cli.config import RunConfig
from seisforge.errors import ErrorClassifier
from seisforge.utils.workers import THREADS_ENV

# Logger
logger = logging.getLogger("seisforge.cli.main")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# (flag, config key, argparse options) per command, on top of the common flags
COMMAND_FLAGS: Dict[str, List[Any]] = {
    "gen": [
        ("--workers", "workers", {"type": int, "help": "worker processes (capped by %s)" % THREADS_ENV}),
    ],
    "simulate": [
        ("--building", "building", {"metavar": "PATH", "help": "building, model or dataset model document"}),
        ("--motion", "motion", {"metavar": "PATH", "help": "ground-motion record file"}),
        ("--direction", "direction", {"choices": ["x", "y"], "help": "direction of a building document"}),
        ("--dt", "dt", {"type": float, "help": "integration time step in s (defaults to the record's)"}),
        ("--resample", "resample", {"action": "store_true", "default": None, "help": "resample the record to --dt"}),
        ("--sdr", "sdr", {"action": "store_true", "default": None, "help": "also write the simplified response"}),
        ("--integrator", "integrator", {"choices": ["average_acceleration", "linear_acceleration"], "help": "Newmark preset"}),
        ("--floors", "floors", {"help": "floors to plot, e.g. mid,top or 1,3"}),
        ("--plot", "plot", {"action": "store_true", "default": None, "help": "write one SVG per requested floor"}),
    ],
    "identify": [
        ("--model", "model", {"metavar": "PATH", "help": "model providing masses and the initial stiffness"}),
        ("--motion", "motion", {"metavar": "PATH", "help": "ground-motion record file"}),
        ("--reference", "reference", {"metavar": "PATH", "help": "reference response (.sfrh)"}),
        ("--method", "method", {"choices": ["gauss_newton", "evolutionary"], "help": "identification backend"}),
        ("--budget", "budget", {"type": int, "help": "generations of the evolutionary backend"}),
        ("--target-period", "target_period", {"type": float, "help": "rescale to this fundamental period in s"}),
        ("--workers", "workers", {"type": int, "help": "worker processes for candidate evaluation"}),
    ],
    "train": [
        ("--dataset", "dataset", {"metavar": "DIR", "help": "dataset directory"}),
    ],
    "finetune": [
        ("--checkpoint", "checkpoint", {"metavar": "PATH", "help": "base checkpoint"}),
        ("--dataset", "dataset", {"metavar": "DIR", "help": "dataset directory"}),
        ("--rank", "rank", {"type": int, "help": "adapter rank"}),
        ("--alpha", "alpha", {"type": float, "help": "adapter scale numerator"}),
        ("--split", "split", {"choices": ["train", "validation", "test"], "help": "split to fine-tune on"}),
    ],
    "predict": [
        ("--checkpoint", "checkpoint", {"metavar": "PATH", "help": "base checkpoint"}),
        ("--adapter", "adapter", {"metavar": "PATH", "help": "adapter file trained on the checkpoint"}),
        ("--model", "model", {"metavar": "PATH", "help": "simplified model, dataset model or building document"}),
        ("--motion", "motion", {"metavar": "PATH", "help": "ground-motion record file"}),
        ("--direction", "direction", {"choices": ["x", "y"], "help": "direction of a building document"}),
        ("--resample", "resample", {"action": "store_true", "default": None, "help": "resample the record to the checkpoint dt"}),
        ("--reference", "reference", {"metavar": "PATH", "help": "oracle model to re-simulate and compare against"}),
        ("--floors", "floors", {"help": "floors to plot, e.g. mid,top"}),
        ("--plot", "plot", {"action": "store_true", "default": None, "help": "write one SVG per requested floor"}),
    ],
    "evaluate": [
        ("--checkpoint", "checkpoint", {"metavar": "PATH", "help": "base checkpoint"}),
        ("--adapter", "adapter", {"metavar": "PATH", "help": "adapter file trained on the checkpoint"}),
        ("--dataset", "dataset", {"metavar": "DIR", "help": "dataset directory"}),
        ("--split", "split", {"choices": ["train", "validation", "test"], "help": "split to evaluate"}),
        ("--worst-k", "worst_k", {"type": int, "help": "number of worst cases to list and plot"}),
        ("--limit", "limit", {"type": int, "help": "evaluate only the first N samples of the split"}),
        ("--workers", "workers", {"type": int, "help": "worker processes"}),
    ],
}

COMMAND_HELP = {
    "gen": "generate a dataset",
    "simulate": "simulate a building under a ground motion",
    "identify": "identify story stiffnesses from a reference response",
    "train": "train a base decoder",
    "finetune": "fine-tune low-rank adapters on a base checkpoint",
    "predict": "predict a response history with a checkpoint",
    "evaluate": "evaluate a checkpoint on a dataset split",
}


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per pipeline stage."""
    parser = argparse.ArgumentParser(
        prog="seisforge",
        description="Seismic response datasets, simulation and decoder training.",
        epilog=f"Exit codes: 0 ok, 2 config, 3 generation, 4 compatibility, 5 numerical, 1 other. "
        f"{THREADS_ENV} caps worker parallelism.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level (default INFO)",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command, flags in COMMAND_FLAGS.items():
        sub = subparsers.add_parser(command, help=COMMAND_HELP[command], description=COMMAND_HELP[command])
        sub.add_argument("--config", metavar="PATH", help="configuration document")
        sub.add_argument("--seed", type=int, help="random seed")
        sub.add_argument("--out", metavar="DIR", help="output directory")
        sub.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a configuration value, e.g. training.steps=100",
        )
        for flag, key, options in flags:
            sub.add_argument(flag, dest=key, **options)
    return parser


def configure_logging(level: str) -> None:
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger("seisforge")
    root.handlers[:] = [handler]
    root.setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name (defaults to ``sys.argv``)

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    flags = {"seed": args.seed, "out": args.out}
    for _, key, _ in COMMAND_FLAGS[args.command]:
        flags[key] = getattr(args, key)
    try:
        run = RunConfig.resolve(args.command, args.config, flags, args.overrides)
        result = COMMAND_HANDLERS[args.command](run)
    except Exception as e:
        category = ErrorClassifier.categorize(e)
        code = ErrorClassifier.exit_code(category)
        if category == "FATAL":
            logger.exception(f"{args.command} failed")
        print(f"seisforge {args.command}: error: {e}", file=sys.stderr)
        return code
    print(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
