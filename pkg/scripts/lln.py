"""Check that the compliance counter drifts like 2 * mu - 1 on random streams."""
import argparse
import json
import logging
from pathlib import Path

from monored import simlab
from monored.metrics import Metric
from monored.utils import experiment_utils, logging_utils

logger = logging.getLogger(__name__)

DEFAULT_MUS = (0.6, 0.75, 0.9)
DEFAULT_N = 10_000
DEFAULT_SEEDS = 20


def main(args: argparse.Namespace) -> None:
    """Simulate the streams and report how far m/n lands from 2 * mu - 1."""
    experiment = experiment_utils.setup_experiment(args)
    logging_utils.configure(args=args)

    results = {}
    examples = {}
    for mu in args.mu:
        drifts, errors = [], []
        for seed in range(args.seeds):
            spec = simlab.ComplianceStreamSpec(mu=mu, n=args.n, seed=seed)
            trajectory = simlab.lln_experiment(spec)
            drifts.append(trajectory.mean_drift)
            errors.append(abs(trajectory.mean_drift - (2 * mu - 1)))
            if seed == 0:
                examples[f"mu={mu}"] = trajectory

        drift = Metric.aggregate(drifts, store_values=False)
        logger.info(
            f"mu={mu:.2f}: m/n={drift.mean:.4f}±{drift.std:.4f} "
            f"(expected {2 * mu - 1:.4f}), max error {max(errors):.4f}"
        )
        results[str(mu)] = {
            "expected": 2 * mu - 1,
            "drift": drift.to_dict(),
            "max_error": max(errors),
        }

    results_file = experiment.results_dir / "lln.json"
    logger.info(f"writing results to {results_file}")
    with results_file.open("w") as handle:
        json.dump(results, handle, indent=1)

    if args.plot is not None:
        simlab.plot_trajectories(examples, args.plot)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="simulate compliance streams")
    parser.add_argument(
        "--mu",
        type=float,
        nargs="+",
        default=DEFAULT_MUS,
        help="per-event compliance probabilities",
    )
    parser.add_argument("--n", type=int, default=DEFAULT_N, help="events per stream")
    parser.add_argument(
        "--seeds", type=int, default=DEFAULT_SEEDS, help="streams per mu"
    )
    parser.add_argument("--plot", type=Path, help="save a confidence plot here")
    experiment_utils.add_experiment_args(parser, default_name="lln")
    logging_utils.add_logging_args(parser)
    args = parser.parse_args()
    main(args)
