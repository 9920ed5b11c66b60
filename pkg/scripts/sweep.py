"""Compare plain ddmin and pma on synthetic spaces of several sizes."""
import argparse
import json
import logging
from pathlib import Path

from monored import engine, metrics, simlab
from monored.utils import experiment_utils, logging_utils

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (8, 16, 32, 64)
DEFAULT_SEEDS = 20


def main(args: argparse.Namespace) -> None:
    """Run the sweep and write CSV and summary files."""
    experiment = experiment_utils.setup_experiment(args)
    logging_utils.configure(args=args)

    seeds = args.seeds if args.seeds is not None else range(DEFAULT_SEEDS)
    out = args.out or experiment.results_dir / "sweep.csv"
    rows = simlab.sweep(
        args.sizes,
        args.modes,
        seeds,
        flip_rate=args.flip_rate,
        workers=args.workers,
        out=out,
        progress=True,
    )

    summaries = simlab.summarize(rows)
    for (size, mode), summary in summaries.items():
        executed = summary.executed_tests
        logger.info(
            f"size={size} mode={mode} "
            f"executed={executed.mean:.1f}±{executed.std:.1f} "
            f"skipped={summary.skipped_tests.mean:.1f} "
            f"reduced={summary.reduced_tokens.mean:.1f}"
        )

    for size in args.sizes:
        baseline = summaries.get((size, engine.MODE_DDMIN))
        treated = summaries.get((size, engine.MODE_PMA))
        if baseline is None or treated is None or baseline.executed_tests.mean == 0:
            continue
        saved = metrics.improvement_pct(
            baseline.executed_tests.mean, treated.executed_tests.mean
        )
        logger.info(f"size={size}: pma executes {saved:.1f}% fewer tests than ddmin")

    summary_file = experiment.results_dir / "summary.json"
    logger.info(f"writing summary to {summary_file}")
    with summary_file.open("w") as handle:
        json.dump(
            [summary.without_values().to_dict() for summary in summaries.values()],
            handle,
            indent=1,
        )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="sweep reducers on synthetic spaces")
    parser.add_argument(
        "--sizes",
        type=int,
        nargs="+",
        default=DEFAULT_SIZES,
        help="universe sizes to reduce",
    )
    parser.add_argument(
        "--seeds",
        type=int,
        nargs="*",
        help=f"seeds; each picks a target (default: 0..{DEFAULT_SEEDS - 1})",
    )
    parser.add_argument(
        "--modes",
        nargs="+",
        choices=engine.SUPPORTED_MODES,
        default=engine.SUPPORTED_MODES,
        help="reducer modes",
    )
    parser.add_argument("--out", type=Path, help="CSV file (default: in results dir)")
    parser.add_argument(
        "--flip-rate",
        type=float,
        default=0.0,
        help="fraction of verdicts flipped to make the space non-monotone",
    )
    parser.add_argument("--workers", type=int, default=1, help="worker processes")
    experiment_utils.add_experiment_args(parser, default_name="sweep")
    logging_utils.add_logging_args(parser)
    args = parser.parse_args()
    main(args)
