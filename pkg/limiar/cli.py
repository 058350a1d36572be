"""limiar CLI

This module provides the command-line interface for limiar.
It exposes two helpers:

- ``build_parser()`` - constructs the ``argparse.ArgumentParser`` with the
  subcommands predict, validate, simulate, sellke-sweep, trajectories, giant
  and survival-curve, all sharing the same flags.
- ``main(argv=None)`` - parses the arguments, loads the config document,
  instantiates :class:`~.app.App`, dispatches the subcommand and returns the
  process exit code.

Exit codes: 0 success, 2 config error, 3 precondition error (including a
failed ``validate``), 1 anything else. The human-readable summary goes to
stdout, logs and errors to stderr, machine output to ``--out``.
"""

import argparse
import sys
from dataclasses import replace

from . import __version__
from .app import App
from .core.giant_component import GiantLawReport
from .core.harness import AggregateResult, TrajectoryRun
from .errors import ConfigError, LimiarError, PreconditionError
from .log import configure_logging, get_logger
from .models import DiagnosticStatus, PredictionReport
from .storage.config_store import ConfigStore

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3

SUBCOMMANDS = {
    "predict": "Criticality constants and final-size predictions",
    "validate": "Finite-n assumption diagnostics",
    "simulate": "Replicated epidemics with outcome classification",
    "sellke-sweep": "Sellke final sizes over a grid of seed counts",
    "trajectories": "Time-changed run against its deterministic limits",
    "giant": "Giant-component law on sampled multigraphs",
    "survival-curve": "Small-outbreak probability against alpha X_I0 targets",
}

DEFAULT_FORMAT = {"sellke-sweep": "csv", "trajectories": "csv"}


def build_parser():
    """Build and return the top-level argument parser for the limiar CLI.

    Every subcommand accepts ``--config PATH`` (required), ``--seed INT``,
    ``--reps INT``, ``--out PATH``, ``--format {csv,json}`` and
    ``--threads INT`` (0 = all cores; results do not depend on it).

    Returns:
        argparse.ArgumentParser: a ready-to-use parser instance.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON config document")
    common.add_argument("--seed", type=int, help="Master seed (overrides rng.seed)")
    common.add_argument("--reps", type=int, help="Replica count (overrides experiment.reps)")
    common.add_argument("--out", metavar="PATH", help="Write machine-readable output here")
    common.add_argument("--format", choices=("csv", "json"), help="Output format for --out")
    common.add_argument("--threads", type=int, default=1, help="Worker threads, 0 = auto")

    limiar_parser = argparse.ArgumentParser(prog="limiar")
    limiar_parser.add_argument("--version", action="version", version=f"limiar {__version__}")
    sub_parsers = limiar_parser.add_subparsers(dest="cmd", required=True)
    for name, help_text in SUBCOMMANDS.items():
        sub_parsers.add_parser(name, parents=[common], help=help_text)
    return limiar_parser


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _summarise(cmd: str, result) -> int:
    """Print the human summary; return the exit code the result implies."""
    if isinstance(result, PredictionReport):
        for key, value in result.to_dict().items():
            print(f"{key:>18}: {_fmt(value)}")
    elif cmd == "validate":
        failed = False
        for d in result:
            failed |= d.status is DiagnosticStatus.FAIL
            line = f"{d.code:<10} {d.status.value.upper():<5} {d.name}: {_fmt(d.value)} (threshold {_fmt(d.threshold)})"
            if d.message:
                line += f" - {d.message}"
            print(line)
        return EXIT_PRECONDITION if failed else EXIT_OK
    elif isinstance(result, AggregateResult):
        print(f"replicas: {len(result.replicas)}/{result.spec.reps} (failures: {len(result.failures)})")
        print(f"p_large: {_fmt(result.p_large.mean)} +- {_fmt(result.p_large.stderr)}")
        print(
            f"large mean ratio ({result.ratio_kind}): "
            f"{_fmt(result.large_mean_ratio.mean)} +- {_fmt(result.large_mean_ratio.stderr)}"
        )
        print(f"degree profile TV: {_fmt(result.degree_profile_tv)}")
        if result.mean_p_small is not None:
            print(f"predicted p_small: {_fmt(result.mean_p_small)} (corrected {_fmt(result.mean_p_small_corrected)})")
    elif isinstance(result, TrajectoryRun):
        print(f"final size: {result.outcome.final_size}")
        print(f"tau_end: {_fmt(result.outcome.duration)} (xi * alpha_bar = {_fmt(result.report.xi * result.report.alpha_bar)})")
        print(f"sup |X_I - f_I| / (n a^2): {_fmt(result.deviation_f_I)}")
        print(f"sup |X_I / (n a^2) - f(t)|: {_fmt(result.deviation_f)}")
    elif isinstance(result, GiantLawReport):
        c = result.constants
        print(f"n = {c.n}, alpha = {_fmt(c.alpha)}, reps = {result.reps}")
        print(f"|C1| / (n alpha): {_fmt(result.c1_over_nalpha.mean)} +- {_fmt(result.c1_over_nalpha.stderr)} (predicted {_fmt(c.c1_prediction)})")
        print(f"|C2| / (n alpha): {_fmt(result.c2_over_nalpha.mean)}")
        print(f"e(C1) / (n alpha): {_fmt(result.e1_over_nalpha.mean)}")
    elif cmd == "survival-curve":
        for p in result:
            print(
                f"x = {_fmt(p.target)}: p_small = {_fmt(p.p_small.mean)} +- {_fmt(p.p_small.stderr)}, "
                f"predicted {_fmt(p.predicted)}, corrected {_fmt(p.predicted_corrected)}"
            )
    else:
        realisations = len({row[0] for row in result})
        print(f"sellke sweep: {len(result)} rows over {realisations} realisation(s)")
    return EXIT_OK


def main(argv=None):
    """CLI entry point: parse arguments and dispatch to :class:`App`.

    Args:
        argv (list[str] | None, optional): Arguments excluding the program
            name; ``None`` reads ``sys.argv``.

    Returns:
        int: Process exit code.

    Raises:
        SystemExit: On argument errors or ``--help`` (raised by ``argparse``,
            code 2 for errors).
    """
    limiar_parser = build_parser()
    args = limiar_parser.parse_args(argv)

    try:
        config = ConfigStore(args.config).load()
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            config = replace(config, seed=args.seed)
        if args.reps is not None:
            config = replace(config, experiment=replace(config.experiment, reps=args.reps))
        configure_logging(config.log_level)
        app = App(config, threads=args.threads)

        handlers = {
            "predict": app.predict,
            "validate": app.validate,
            "simulate": app.simulate,
            "sellke-sweep": app.sellke_sweep,
            "trajectories": app.trajectories,
            "giant": app.giant,
            "survival-curve": app.survival_curve,
        }
        logger.info("running %s with seed %d", args.cmd, config.seed)
        result = handlers[args.cmd]()
        code = _summarise(args.cmd, result)
        if args.out:
            fmt = args.format or DEFAULT_FORMAT.get(args.cmd, "json")
            app.export_result(result, args.out, fmt)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition failed ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except LimiarError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
