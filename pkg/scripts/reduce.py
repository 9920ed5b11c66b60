"""Reduce a failure-inducing input file against an interestingness command.

The command is run on candidate files; exit code 0 means the candidate still
exhibits the behavior of interest. Example:

    python -m scripts.reduce --input bug.c --mode pma \
        --oracle "sh -c 'cc -w \"\$1\" -o a.out && ./a.out | grep -q \"Line 10\"' _"
"""
import argparse
import contextlib
import json
import logging
from pathlib import Path

from monored import data, engine, oracles
from monored.metrics import Report
from monored.utils import logging_utils
from monored.utils.typing import StrSequence

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_INTERESTING = 1
EXIT_USAGE = 2
EXIT_ORACLE_ERROR = 3


def add_reduction_args(parser: argparse.ArgumentParser) -> None:
    """Add args controlling the reduction itself."""
    parser.add_argument(
        "--mode",
        choices=engine.SUPPORTED_MODES,
        default=engine.DEFAULT_MODE,
        help="plain ddmin or ddmin with probabilistic skipping",
    )
    parser.add_argument(
        "--tokenizer",
        choices=data.SUPPORTED_TOKENIZERS,
        default=data.DEFAULT_TOKENIZER,
        help="reduce lines or whitespace-separated tokens",
    )
    parser.add_argument(
        "--seed", type=int, default=engine.DEFAULT_SEED, help="seed for skip draws"
    )
    parser.add_argument(
        "--replay", type=Path, help="file of draws in (0, 1) to replay, one per line"
    )
    parser.add_argument(
        "--initial-granularity",
        type=int,
        default=engine.DEFAULT_INITIAL_GRANULARITY,
        help="number of parts in the first step",
    )
    parser.add_argument(
        "--budget", type=float, help="seconds for the whole reduction (default none)"
    )
    parser.add_argument(
        "--cache",
        action="store_true",
        default=False,
        help="answer exact-duplicate candidates from a cache",
    )


def add_oracle_args(parser: argparse.ArgumentParser) -> None:
    """Add args describing the interestingness command."""
    parser.add_argument(
        "--oracle",
        required=True,
        help="command judging a candidate; '{}' marks the candidate path, "
        "otherwise the path is appended",
    )
    parser.add_argument(
        "--timeout-per-test",
        type=float,
        default=engine.DEFAULT_PER_TEST_TIMEOUT,
        help="seconds before a test is killed and counted as not interesting",
    )
    parser.add_argument(
        "--keep-temps",
        action="store_true",
        default=False,
        help="keep per-test scratch directories",
    )
    parser.add_argument(
        "--env-passthrough",
        nargs="*",
        metavar="NAME",
        help="only forward these environment variables (default: all)",
    )


def add_output_args(parser: argparse.ArgumentParser) -> None:
    """Add args for the files the reducer writes."""
    parser.add_argument(
        "--output", type=Path, help="reduced file (default: <input>.reduced)"
    )
    parser.add_argument("--trace", type=Path, help="JSON Lines trace of every test")
    parser.add_argument("--report", type=Path, help="metrics JSON")
    parser.add_argument("--history", type=Path, help="dump of executed candidates")


def build_parser() -> argparse.ArgumentParser:
    """Build the command line parser."""
    parser = argparse.ArgumentParser(description="reduce a failure-inducing input")
    parser.add_argument("--input", type=Path, required=True, help="file to reduce")
    add_oracle_args(parser)
    add_reduction_args(parser)
    add_output_args(parser)
    logging_utils.add_logging_args(parser)
    return parser


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as handle:
        json.dump(payload, handle, indent=1)


def oracle_spec_for(
    args: argparse.Namespace, config: engine.ReductionConfig
) -> oracles.OracleSpec:
    """Build the external oracle's settings from the parsed flags and config."""
    return oracles.OracleSpec.from_string(
        args.oracle,
        per_test_timeout=config.per_test_timeout,
        candidate_name=args.input.name,
        env_passthrough=(
            None if args.env_passthrough is None else tuple(args.env_passthrough)
        ),
        keep_temps=args.keep_temps,
        capture_output=logging_utils.is_verbose(args),
    )


def main(argv: StrSequence | None = None) -> int:
    """Run the reducer and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_USAGE if error.code else EXIT_OK
    logging_utils.configure(args=args)

    try:
        universe = data.read_universe(args.input, mode=args.tokenizer)
        replay = data.read_draws(args.replay) if args.replay is not None else None
        config = engine.ReductionConfig(
            mode=args.mode,
            initial_granularity=args.initial_granularity,
            per_test_timeout=args.timeout_per_test,
            total_budget=args.budget,
            seed=args.seed,
            replay_draws=replay,
        )
        spec = oracle_spec_for(args, config)
    except (OSError, ValueError) as error:
        logger.error(f"{error}")
        return EXIT_USAGE
    logger.info(f"read {universe.width} {args.tokenizer} from {args.input}")

    output = args.output
    if output is None:
        output = args.input.with_name(f"{args.input.name}.reduced")

    oracle = oracles.caching_wrapper(
        oracles.external_oracle(spec, universe.render), enabled=args.cache
    )
    try:
        initial = oracles.run_external(spec, universe.render(universe.full()))
        if not initial.interesting:
            logger.error(
                f"input is not interesting to begin with (exit code {initial.exit_code}"
                f"{', timed out' if initial.was_timeout else ''})"
            )
            return EXIT_NOT_INTERESTING

        with contextlib.ExitStack() as stack:
            sink = None
            if args.trace is not None:
                sink = stack.enter_context(
                    data.TraceWriter(
                        args.trace, mode=config.mode, seed=config.seed, prng=config.prng
                    )
                )
            try:
                result = engine.reduce(universe.full(), oracle, config, sink=sink)
            except ValueError as error:
                logger.error(f"{error}")
                return EXIT_USAGE

        reduced = universe.render(result.minimal)
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_bytes(reduced)
        logger.info(f"wrote reduced input to {output}")

        verified = oracles.run_external(spec, reduced)
        if not verified.interesting:
            logger.error(f"reduced output {output} is not interesting when re-run")
            return EXIT_NOT_INTERESTING
    except oracles.OracleError as error:
        logger.error(f"{error}")
        return EXIT_ORACLE_ERROR

    metrics = result.metrics
    if args.report is not None:
        report = Report.from_metrics(metrics, mode=config.mode, seed=config.seed)
        _write_json(args.report, report.to_dict())
        logger.info(f"wrote report to {args.report}")
    if args.history is not None:
        args.history.parent.mkdir(parents=True, exist_ok=True)
        with args.history.open("w") as handle:
            result.history.dump(handle)

    logger.info(
        f"{metrics.original_tokens} -> {metrics.reduced_tokens} {args.tokenizer}; "
        f"{metrics.executed_tests} executed, {metrics.skipped_tests} skipped, "
        f"{metrics.cache_hits} cache hits (traced as executed), "
        f"{metrics.wall_seconds:.2f}s"
    )
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
