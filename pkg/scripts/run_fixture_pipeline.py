#!/usr/bin/env python3
"""Run the full pipeline on the bundled 5-table fixture corpus in a scratch
directory and print the resulting reports."""

import pathlib
import sys
import tempfile

from tabverify.cli import main

HERE = pathlib.Path(__file__).resolve().parent
CORPUS = HERE.parent / "tests" / "fixtures" / "corpus"


def run(argv):
    code = main(argv)
    if code:
        sys.exit(f"step failed ({code}): {' '.join(argv)}")


if __name__ == "__main__":
    work = pathlib.Path(tempfile.mkdtemp(prefix="tabverify-"))
    print(f"working in {work}")
    w = str(work)
    run(["parse", str(CORPUS), f"{w}/corpus.jsonl"])
    run(["stats", f"{w}/corpus.jsonl", "--out", f"{w}/stats.json"])
    run(["augment", f"{w}/corpus.jsonl", f"{w}/augmented.jsonl", "--seed", "7"])
    run(["snapshot", f"{w}/corpus.jsonl", f"{w}/snapshots.jsonl"])
    run(["baseline", f"{w}/corpus.jsonl", f"{w}/snapshots.jsonl", f"{w}/scores.jsonl"])
    run(["ensemble-train", f"{w}/scores.jsonl", "--corpus", f"{w}/corpus.jsonl",
         "--out", f"{w}/layer.json"])
    run(["predict", f"{w}/scores.jsonl", "--layer", f"{w}/layer.json",
         "--out", f"{w}/preds.jsonl"])
    run(["evidence", f"{w}/corpus.jsonl", f"{w}/preds.jsonl", f"{w}/evidence.jsonl"])
    run(["score", "--corpus", f"{w}/corpus.jsonl", "--preds", f"{w}/preds.jsonl",
         "--evidence", f"{w}/evidence.jsonl", "--out", f"{w}/report.json"])
    print(f"report: {work / 'report.json'}")
