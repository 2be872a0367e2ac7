"""Recipe 3: prompting for validity, the trained classifier for novelty.

The strongest published configuration splits the tasks across
heterogeneous systems: few-shot completions answer validity, the
multi-task model answers novelty, and ``mix`` stitches the two files
into one submission. Mixing never rescores anything, so each task keeps
exactly the macro F1 its source system earned. (On the synthetic config
the validity side is the mock provider; see recipe 1.)
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
    parser.add_argument("--workdir", default="runs/recipe3-heterogeneous")
    args = parser.parse_args()

    config = str(Path(args.data).resolve() / "config.json")
    wd = Path(args.workdir).resolve()

    run(["train", "--config", config, "--run-dir", str(wd / "mtl")])
    run(
        [
            "predict",
            "--config", config,
            "--run-dir", str(wd / "novelty"),
            "--checkpoint", str(wd / "mtl" / "checkpoint.json"),
            "--task", "novelty",
        ]
    )
    run(
        [
            "prompt-predict",
            "--config", config,
            "--run-dir", str(wd / "validity"),
            "--task", "validity",
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
