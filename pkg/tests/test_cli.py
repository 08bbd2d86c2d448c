import io

import numpy as np
import pytest

from incoherent_subspaces.cli import run
from incoherent_subspaces.data_io import read_model


def call(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def synth(tmp_path):
    tr, te = tmp_path / "train.csv", tmp_path / "test.csv"
    code, out = call("synth", "--classes", 4, "--dim", 20, "--per-class", 10, "--s", 2,
                     "--coeff", "gaussian", "--noise", 0, "--coherence", 0, "--seed", 3,
                     "--out-train", tr, "--out-test", te,
                     "--out-planted", tmp_path / "planted.bin")
    assert code == 0
    assert out.strip() == "train=20 test=20 classes=4 dim=20"
    return tmp_path


def _kv(text):
    pairs = {}
    for line in text.splitlines():
        for tok in line.split():
            k, _, v = tok.partition("=")
            pairs.setdefault(k, v)
    return pairs


def test_train_evaluate_classify_diagnose(synth):
    model = synth / "m.bin"
    code, out = call("train", "--data", synth / "train.csv", "--p", "2", "--s", 2,
                     "--mu-fraction", 0, "--seed", 1, "--out", model)
    assert code == 0
    kv = _kv(out)
    assert float(kv["best_distance"]) <= 1e-6
    assert {"within_deficit", "without_excess"} <= kv.keys()
    assert read_model(model).rank == 2

    code, out = call("evaluate", "--model", model, "--data", synth / "train.csv")
    assert code == 0
    assert out.splitlines()[0] == "misclassified=0 total=20 accuracy=1.000000"

    code, out = call("classify", "--model", model, "--data", synth / "test.csv",
                     "--out", synth / "pred.csv")
    assert code == 0
    rows = (synth / "pred.csv").read_text().splitlines()
    assert rows[0] == "row_index,predicted_label,margin"
    assert len(rows) == 21
    idx, lab, margin = rows[1].split(",")
    assert idx == "0" and lab == "c0" and float(margin) > 0

    code, out = call("diagnose", "--model", model, "--qp", "inf,1")
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "coherence,c0,c1,c2,c3"
    mat = np.array([[float(v) for v in ln.split(",")[1:]] for ln in lines[2:6]])
    assert mat.shape == (4, 4)
    assert lines[-1].startswith("grassmann_bound=")


def test_usage_errors(synth):
    code, _ = call("train", "--data", synth / "train.csv", "--p", "2", "--s", 50,
                   "--mu-fraction", 0, "--seed", 1, "--out", synth / "m.bin")
    assert code == 1
    assert call("train", "--unknown")[0] == 1
    assert call("frobnicate")[0] == 1
    assert call("train", "--data", synth / "train.csv", "--p", "3", "--s", 1,
                "--mu-fraction", 0, "--seed", 1, "--out", synth / "m.bin")[0] == 1
    assert call("train", "--data", synth / "train.csv", "--p", "2", "--s", 1,
                "--mu-fraction", 2, "--seed", 1, "--out", synth / "m.bin")[0] == 1


def test_data_errors(synth, capsys):
    bad = synth / "bad.csv"
    bad.write_text("a,1,2\nb,1\n")
    code, out = call("train", "--data", bad, "--p", "2", "--s", 1,
                     "--mu-fraction", 0, "--seed", 1, "--out", synth / "m.bin")
    assert code == 2 and out == ""
    assert "row 2" in capsys.readouterr().err
    (synth / "junk.bin").write_bytes(b"XXXX" + bytes(30))
    assert call("evaluate", "--model", synth / "junk.bin", "--data", synth / "test.csv")[0] == 2
    assert call("evaluate", "--model", synth / "missing.bin", "--data", synth / "test.csv")[0] == 2


def test_diagnose_planted_bank(synth):
    code, out = call("diagnose", "--model", synth / "planted.bin")
    assert code == 0
    assert float(_kv(out)["max_offdiag"]) <= 1e-10
