"""Recipe 4: transfer a contrastively pretrained encoder across corpora.

Pretrains the encoder on triplets extracted from the profile corpus,
then fine-tunes on the separable corpus, once from that encoder and
once from scratch, and prints the two dev combined scores side by side.
The pretraining data shares no topics with the fine-tuning corpus, so
any gap between the two rows is pure encoder transfer.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from valnov.cli import main as valnov


def run(argv: list[str]) -> None:
    code = valnov(argv)
    if code != 0:
        sys.exit(code)


def train_predict_evaluate(config: str, wd: Path, tag: str, init: str | None) -> float:
    cmd = ["train", "--config", config, "--run-dir", str(wd / tag / "mtl")]
    if init is not None:
        cmd += ["--init-encoder", init]
    run(cmd)
    run(
        [
            "predict",
            "--config", config,
            "--run-dir", str(wd / tag / "predict"),
            "--checkpoint", str(wd / tag / "mtl" / "checkpoint.json"),
        ]
    )
    run(
        [
            "evaluate",
            "--config", config,
            "--run-dir", str(wd / tag / "eval"),
            "--predictions", str(wd / tag / "predict" / "predictions.csv"),
        ]
    )
    report = json.loads((wd / tag / "eval" / "report.json").read_text())
    return report["combined"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="runs/data", help="make_synthetic_data.py output")
    parser.add_argument("--workdir", default="runs/recipe4-transfer")
    args = parser.parse_args()

    data = Path(args.data).resolve()
    config = str(data / "config.json")
    wd = Path(args.workdir).resolve()

    run(
        [
            "contrastive-train",
            "--config", config,
            "--run-dir", str(wd / "pretrain"),
            "--triplets", str(data / "profile" / "triplets.jsonl"),
        ]
    )
    scratch = train_predict_evaluate(config, wd, "scratch", None)
    transfer = train_predict_evaluate(
        config, wd, "transfer", str(wd / "pretrain" / "encoder-checkpoint.json")
    )
    print(f"scratch  dev combined F1 {scratch:.4f}")
    print(f"transfer dev combined F1 {transfer:.4f}")


if __name__ == "__main__":
    main()
