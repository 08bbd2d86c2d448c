"""
Command line pipeline
=====================

The same workflow through the ``incoherent-subspaces`` entry point:
generate data, train, evaluate and inspect the learned bank.
"""

import io
import tempfile
from pathlib import Path

from incoherent_subspaces.cli import run


def cli(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out=out)
    print(f"$ incoherent-subspaces {' '.join(str(a) for a in argv[:1])} ... (exit {code})")
    print(out.getvalue())


work = Path(tempfile.mkdtemp())
cli("synth", "--classes", 6, "--dim", 48, "--per-class", 30, "--s", 3,
    "--coeff", "gaussian", "--noise", 0.05, "--coherence", 0.1, "--seed", 1,
    "--out-train", work / "train.csv", "--out-test", work / "test.csv")
cli("train", "--data", work / "train.csv", "--p", "inf", "--s", 3,
    "--mu-fraction", 0.02, "--seed", 1, "--out", work / "model.bin")
cli("evaluate", "--model", work / "model.bin", "--data", work / "test.csv")
cli("diagnose", "--model", work / "model.bin", "--qp", "2,2")
