"""Command-line entry point: train on a corpus JSONL, write a metrics CSV."""

from __future__ import annotations

import argparse
import sys

from tinytrainer.errors import TrainerError
from tinytrainer.training import TASK_CYCLE, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tinytrain", description=__doc__)
    parser.add_argument("--data", required=True, help="corpus JSONL with all three task kinds")
    parser.add_argument("--metrics", required=True, help="output CSV of (step, task, loss)")
    parser.add_argument("--steps", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--lr", type=float, default=3e-3)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = train(
            args.data,
            steps=args.steps,
            seed=args.seed,
            batch_size=args.batch_size,
            lr=args.lr,
            metrics_path=args.metrics,
        )
    except (TrainerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    first = result.probe_losses(0)
    last = result.probe_losses(result.probes[-1][0])
    for task in TASK_CYCLE:
        print(f"{task}: {first[task]:.4f} -> {last[task]:.4f}")
    print(f"pair accuracy: {result.pair_accuracy:.3f}")
    print(f"metrics written to {args.metrics}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
