"""Shared plumbing for the subcommands: logging, config loading, exit codes."""
import argparse
import logging
import os
import sys
from typing import Callable

from config.config_manager import ConfigManager, RunConfig
from core.errors import (BreakdownError, ConfigError, ParameterError, ResourceCapError,
                         SingularityError)
from core.experiments import ExperimentRunner, ProblemChoice, RunOutcome
from core.krylov import GmresOptions
from core.memory_budget import MemoryBudget

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"


def setup_logging(log_level: str, log_dir: str | None = "~/.fidesp") -> None:
    """stderr always; ``<log_dir>/fidesp.log`` too unless log_dir is None."""
    numeric_level = getattr(logging, str(log_level).upper(), logging.INFO)
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_dir:
        log_dir = os.path.expanduser(log_dir)
        os.makedirs(log_dir, exist_ok=True)
        handlers.insert(0, logging.FileHandler(os.path.join(log_dir, "fidesp.log"), mode="a"))
    logging.basicConfig(level=numeric_level, format=LOG_FORMAT, handlers=handlers)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", nargs="?", default=None,
                        help="JSON (or YAML) run configuration; defaults apply when omitted.")
    parser.add_argument("--seed", type=int, default=None,
                        help="Noise seed (overrides output.seed and $FIDESP_SEED).")
    parser.add_argument("--out", default=None, help="Output CSV path (overrides output.csv).")
    parser.add_argument("--mem-budget-mb", type=int, default=None,
                        help="GMRES basis memory budget in MB, 0 = unlimited.")
    parser.add_argument("--jobs", type=int, default=None, help="Concurrent experiment cells.")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")


def load_run_config(args: argparse.Namespace) -> tuple[RunConfig, int]:
    """Merge file, flags and environment; set up logging; return (config, seed)."""
    manager = ConfigManager(args.config)
    if args.out is not None:
        manager.set("output.csv", args.out)
    if args.mem_budget_mb is not None:
        manager.set("output.mem_budget_mb", args.mem_budget_mb)
    if args.jobs is not None:
        manager.set("solver.jobs", args.jobs)
    if args.log_level is not None:
        manager.set("logging_level", args.log_level)
    cfg = manager.validate()
    setup_logging(cfg.logging_level, cfg.log_dir)
    seed = manager.resolve_seed(args.seed)
    logger.debug("config %s validated, seed=%d", args.config or "<defaults>", seed)
    return cfg, seed


def gmres_options(cfg: RunConfig, side: str | None = None) -> GmresOptions:
    return GmresOptions(tol=cfg.solver.tol, maxit=cfg.solver.maxit_value,
                        reorthogonalize=cfg.solver.reorthogonalize,
                        side=side or cfg.solver.side)


def build_runner(cfg: RunConfig, seed: int, side: str | None = None) -> ExperimentRunner:
    problem = cfg.problem
    choice = ProblemChoice(coefficient=problem.coefficient,
                           coefficient_value=problem.coefficient_value,
                           time_profile=problem.time_profile, source=problem.source,
                           initial=problem.initial)
    jobs = cfg.solver.jobs
    return ExperimentRunner(problem.to_params(), choice, gmres_options(cfg, side), seed,
                            MemoryBudget(cfg.output.mem_budget_mb, jobs), jobs)


def run_guarded(command: Callable[[], int], prog: str) -> int:
    """Run a subcommand body and map failures onto exit codes."""
    try:
        return command()
    except (ConfigError, ParameterError) as exc:
        status, kind, message = EXIT_CONFIG, "configuration error", str(exc)
    except (SingularityError, BreakdownError) as exc:
        status, kind, message = EXIT_NUMERIC, "numerical failure", str(exc)
    except ResourceCapError as exc:
        status, kind, message = EXIT_RESOURCE, "resource limit", str(exc)
    logger.error("%s: %s", kind, message)
    print(f"{prog}: {kind}: {message}", file=sys.stderr)
    return status


def outcome_status(outcome: RunOutcome, prog: str) -> int:
    """Exit status once every finished row is written: failed cells beat refused ones."""
    for cell, message in outcome.failed:
        print(f"{prog}: numerical failure: m={cell.m} n={cell.n} {cell.precond.value}: {message}",
              file=sys.stderr)
    for cell, message in outcome.refused:
        print(f"{prog}: resource limit: m={cell.m} n={cell.n} {cell.precond.value}: {message}",
              file=sys.stderr)
    if outcome.failed:
        return EXIT_NUMERIC
    return EXIT_RESOURCE if outcome.refused else EXIT_OK
