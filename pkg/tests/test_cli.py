import csv
import json

import pytest

from qmlbench.cli import main
from qmlbench.dataio import bundled_fixture_path


def write_cfg(tmp_path, body, name="c.toml"):
    p = tmp_path / name
    p.write_text(f'output_dir = "{(tmp_path / "out").as_posix()}"\n' + body)
    return p


BLOBS = """models = ["svm"]
fractions = [0.5]
n_features = 2
[data]
synthetic = "blobs"
synthetic_m = 40
synthetic_d = 2
[mlp]
epochs = 30
[vqc]
iterations = 3
"""


def test_usage_errors(capsys, tmp_path):
    assert main([]) == 1
    assert main(["bench", "run", "--config", "x.toml", "--bogus"]) == 1
    assert main(["bench"]) == 1
    bad = write_cfg(tmp_path, "seed = 1\nmodles = []\n")
    assert main(["bench", "run", "--config", str(bad)]) == 1
    assert "modles" in capsys.readouterr().err


def test_missing_dataset_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("QMLBENCH_DATA", raising=False)
    missing = tmp_path / "nowhere.csv"
    cfg = write_cfg(tmp_path, f'[data]\npath = "{missing.as_posix()}"\n')
    assert main(["bench", "run", "--config", str(cfg)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_bench_run_writes_reports(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BLOBS)
    assert main(["bench", "run", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    rows = list(csv.DictReader(open(out / "report.csv")))
    assert len(rows) == 1 and rows[0]["model"] == "svm"
    assert json.loads((out / "report.json").read_text())["rows"][0]["model"] == "svm"
    assert (out / "report_plot.dat").exists()
    assert "wrote csv" in capsys.readouterr().out


def test_seed_override_changes_hash(tmp_path):
    cfg = write_cfg(tmp_path, BLOBS)
    main(["bench", "run", "--config", str(cfg)])
    h1 = json.loads((tmp_path / "out" / "report.json").read_text())["config_hash"]
    main(["bench", "run", "--config", str(cfg), "--seed", "7"])
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    assert doc["config_hash"] != h1 and doc["rows"][0]["seed"] == 7


def test_rank_features_on_fixture(capsys):
    assert main(["rank-features", "--data", str(bundled_fixture_path())]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 32 and lines[0].startswith("MemoryComplaints\t")


def test_rank_features_missing_file(tmp_path, capsys):
    assert main(["rank-features", "--data", str(tmp_path / "gone.csv")]) == 2
    assert "gone.csv" in capsys.readouterr().err


def test_kernel_dump(tmp_path):
    cfg = write_cfg(tmp_path, BLOBS)
    dest = tmp_path / "k.csv"
    assert main(["kernel", "dump", "--config", str(cfg), "--out", str(dest)]) == 0
    rows = list(csv.reader(open(dest)))
    assert len(rows) == 40 and all(len(r) == 40 for r in rows)
    assert all(abs(float(rows[i][i]) - 1) < 1e-12 for i in range(40))


@pytest.mark.parametrize("model", ["mlp", "vqc"])
def test_attack(tmp_path, model):
    cfg = write_cfg(tmp_path, BLOBS + "[attack]\nmax_samples = 10\nepsilons = [0.0, 0.3]\nnoise_levels = [0.0]\n")
    assert main(["attack", "--config", str(cfg), "--model", model]) == 0
    doc = json.loads((tmp_path / "out" / f"attack_{model}.json").read_text())
    kinds = {r["attack"] for r in doc}
    assert "fgsm" in kinds and (("noise" in kinds) == (model == "vqc"))
