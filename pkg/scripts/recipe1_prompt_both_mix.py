"""Recipe 1: few-shot prompting for both tasks, mixed into one file.

Prompts validity and novelty separately against the configured
completion provider, joins the two prediction files with ``mix``, and
scores the result. With the stock synthetic config the provider is a
mock that answers every prompt the same way, so the scores here only
exercise the plumbing; point prompting.endpoint at a real service (and
provider at http-openai-compatible) for meaningful numbers.

A first run fills the replay cache. Rerun with --replay afterwards and
the whole recipe reproduces bit for bit without any provider at all.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from valnov.cli import main as valnov


def run(argv: list[str]) -> None:
    code = valnov(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="runs/data", help="make_synthetic_data.py output")
    parser.add_argument("--workdir", default="runs/recipe1-prompt-mix")
    parser.add_argument(
        "--replay",
        action="store_true",
        help="serve every completion from the cache; error on any miss",
    )
    args = parser.parse_args()

    name = "config-replay.json" if args.replay else "config.json"
    config = str(Path(args.data).resolve() / name)
    wd = Path(args.workdir).resolve()

    for task in ("validity", "novelty"):
        run(
            [
                "prompt-predict",
                "--config", config,
                "--run-dir", str(wd / task),
                "--task", task,
            ]
        )
    run(
        [
            "mix",
            "--config", config,
            "--run-dir", str(wd / "mix"),
            "--validity", str(wd / "validity" / "predictions.csv"),
            "--novelty", str(wd / "novelty" / "predictions.csv"),
        ]
    )
    run(
        [
            "evaluate",
            "--config", config,
            "--run-dir", str(wd / "eval"),
            "--predictions", str(wd / "mix" / "predictions.csv"),
        ]
    )


if __name__ == "__main__":
    main()
