"""Recipe 5: the TF-IDF + linear SVM baseline on both tasks."""

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
    parser.add_argument("--workdir", default="runs/recipe5-svm")
    args = parser.parse_args()

    config = str(Path(args.data).resolve() / "config.json")
    wd = Path(args.workdir).resolve()

    run(["baseline", "--config", config, "--run-dir", str(wd / "svm")])
    run(
        [
            "evaluate",
            "--config", config,
            "--run-dir", str(wd / "eval"),
            "--predictions", str(wd / "svm" / "predictions.csv"),
        ]
    )


if __name__ == "__main__":
    main()
