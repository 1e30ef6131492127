import json

import pytest

from synthbench import benchmark as bm
from synthbench import fixtures
from synthbench.cli import main


@pytest.fixture
def config_path(tmp_path):
    fixtures.write_csv(fixtures.clustered(0, n=200, d=2), tmp_path / "data" / "toy.csv")
    cfg = {"datasets": [{"path": "data/toy.csv", "label_column": "label",
                         "outlier_value": "outlier"}],
           "pairs": ["unif_unif"], "detectors": ["wknn_5"], "n_synth": 150}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_writes_results_manifest_and_summaries(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_path), "--out", str(out)]) == 0
    rows = bm.read_rows(out / "results.csv")
    assert [(r["problem"], r["pair"]) for r in rows] == [("Real", "real"), ("Synth", "unif_unif")]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_rows"] == 2 and manifest["n_failed"] == 0
    assert set(manifest["versions"]) == {"synthbench", "python", "numpy", "scipy"}
    assert (out / "report.txt").exists()
    assert "wrote 2 rows" in capsys.readouterr().out


def test_seed_override_changes_seeds(config_path, tmp_path):
    main(["run", "--config", str(config_path), "--out", str(tmp_path / "a")])
    main(["run", "--config", str(config_path), "--out", str(tmp_path / "b"), "--seed", "5"])
    a = bm.read_rows(tmp_path / "a" / "results.csv")
    b = bm.read_rows(tmp_path / "b" / "results.csv")
    assert [r["seed"] for r in a] != [r["seed"] for r in b]


def test_report_subcommand(config_path, tmp_path, capsys):
    main(["run", "--config", str(config_path), "--out", str(tmp_path / "o")])
    capsys.readouterr()
    assert main(["report", "--results", str(tmp_path / "o" / "results.csv"),
                 "--out", str(tmp_path / "rep")]) == 0
    assert "Adjusted AUC PR" in capsys.readouterr().out
    assert (tmp_path / "rep" / "summary_detectors.csv").exists()


def test_realness_subcommand(config_path, tmp_path):
    out = tmp_path / "real"
    assert main(["realness", "--config", str(config_path), "--out", str(out),
                 "--ntrees", "5"]) == 0
    rows = bm.read_rows(out / "realness.csv")
    assert list(rows[0]) == list(bm.REALNESS_COLUMNS)
    assert {r["problem"] for r in rows} >= {"Real", "RandomGuess", "Synth"}


def test_missing_subcommand_exits():
    with pytest.raises(SystemExit):
        main([])


def test_empty_dataset_list_exits(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"pairs": ["unif_unif"]}))
    with pytest.raises(SystemExit):
        main(["run", "--config", str(path), "--out", str(tmp_path / "o")])
