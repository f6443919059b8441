import json
import subprocess
import sys

import pytest

from hpcmd.cli import main
from hpcmd.dataset import MALWARE_FAMILIES, parse_csv
from hpcmd.experiment import DEFAULT_MODELS
from hpcmd.metrics import f1_score

SMALL_GEN = {"seed": 5, "benign_count": 150, "families": {f: {"count": 15} for f in MALWARE_FAMILIES}}
FAST = {"mlp": {"epochs": 5}, "svm": {"epochs": 20}, "logistic_regression": {"epochs": 20},
        "bagged_trees": {"T": 3}}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = write_json(d / "gen.json", SMALL_GEN)
    assert main(["generate", "--config", cfg, "--out", str(d)]) == 0
    return d


def test_generate_is_deterministic(data, tmp_path, capsys):
    cfg = write_json(tmp_path / "g.json", SMALL_GEN)
    assert main(["generate", "--config", cfg]) == 0
    first = capsys.readouterr().out
    assert main(["generate", "--config", cfg]) == 0
    assert capsys.readouterr().out == first == (data / "dataset.csv").read_text()


def test_generate_seed_flag_overrides(tmp_path, capsys):
    cfg = write_json(tmp_path / "g.json", SMALL_GEN)
    main(["generate", "--config", cfg])
    a = capsys.readouterr().out
    main(["generate", "--config", cfg, "--seed", "6"])
    assert capsys.readouterr().out != a


def test_select_report(data, capsys):
    assert main(["select", "--data", str(data / "dataset.csv"), "--k", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "feature_name,score_bits" and len(lines) == 9


@pytest.fixture(scope="module")
def trained(data):
    out = data / "models"
    hyper = write_json(data / "h.json", {})
    for m in ("many_rules_oner", "decision_tree", "mlp"):
        extra = ["--config", write_json(data / "mlp.json", FAST["mlp"])] if m == "mlp" else ["--config", hyper]
        assert main(["train", "--data", str(data / "dataset.csv"), "--model", m,
                     "--features", "node-loads,dTLB-stores,branch-instructions,cyclesct",
                     "--out", str(out)] + extra) == 0
    return out


def test_explain_rules_verbatim(data, trained, capsys):
    from hpcmd.persistence import load_model
    assert main(["explain", "--model-file", str(trained / "many_rules_oner.json")]) == 0
    assert capsys.readouterr().out == load_model(trained / "many_rules_oner.json").model.explain()


def test_explain_tree(trained, capsys):
    assert main(["explain", "--model-file", str(trained / "decision_tree.json")]) == 0
    assert capsys.readouterr().out.startswith("if ")


def test_explain_unsupported_model(trained, capsys):
    assert main(["explain", "--model-file", str(trained / "mlp.json")]) == 2
    assert "explain supports" in capsys.readouterr().err


def test_eval_matches_in_memory(data, trained, capsys):
    from hpcmd.metrics import evaluate
    from hpcmd.persistence import load_model
    ds = parse_csv(data / "dataset.csv")
    b = load_model(trained / "decision_tree.json")
    r = evaluate("decision_tree", *b.predict_dataset(ds), ds.y)
    assert main(["eval", "--data", str(data / "dataset.csv"), "--model-file",
                 str(trained / "decision_tree.json")]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(row[1]) == pytest.approx(r.accuracy, abs=5e-7)
    assert int(row[6]) == r.confusion.tp


def test_roc_export(data, trained, capsys):
    assert main(["roc", "--data", str(data / "dataset.csv"), "--model-file", str(trained / "mlp.json")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "threshold,fpr,tpr" and lines[1] == "inf,0,0" and lines[-1].endswith(",1,1")


def test_cost_command(trained, tmp_path):
    out = tmp_path / "c"
    files = [str(trained / f"{m}.json") for m in ("mlp", "decision_tree")]
    assert main(["cost", *files, "--out", str(out)]) == 0
    csv_lines = (out / "cost.csv").read_text().splitlines()
    assert csv_lines[0].startswith("model,latency_cycles")
    assert set(json.loads((out / "cost.json").read_text())) == {"mlp", "decision_tree"}


def test_missing_file_exit_code(capsys):
    assert main(["eval", "--data", "/nonexistent.csv", "--model-file", "/nonexistent.json"]) == 2
    assert capsys.readouterr().err.startswith("hpcmd:")


def test_malformed_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert main(["report", "--config", str(p), "--out", str(tmp_path / "r")]) == 2


def test_unknown_model_type_is_usage_error(data):
    with pytest.raises(SystemExit) as info:
        main(["train", "--data", str(data / "dataset.csv"), "--model", "forest"])
    assert info.value.code == 2


def small_report_config(tmp_path, **over):
    cfg = {"seed": 3, "dataset": {"generator": SMALL_GEN}, "hyperparameters": FAST}
    cfg.update(over)
    return write_json(tmp_path / "report.json", cfg)


def test_report_missing_test_family(tmp_path, capsys):
    gen = {**SMALL_GEN, "families": {f: {"count": 15} for f in MALWARE_FAMILIES if f != "ransomware"}}
    cfg = small_report_config(tmp_path, dataset={"generator": gen})
    assert main(["report", "--config", cfg, "--out", str(tmp_path / "r")]) == 2
    err = capsys.readouterr().err
    assert "stage split" in err and "ransomware" in err


def test_report_small_run(tmp_path, capsys):
    cfg = small_report_config(tmp_path)
    out = tmp_path / "r"
    assert main(["report", "--config", cfg, "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert table.splitlines()[0].split()[:6] == ["model", "accuracy", "precision", "recall", "f1", "auc"]
    rows = (out / "metrics.csv").read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == list(DEFAULT_MODELS)
    for r in rows:
        cells = r.split(",")
        p, rec, f = float(cells[2]), float(cells[3]), float(cells[4])
        assert f == pytest.approx(f1_score(p, rec), abs=2e-6)
    for name in DEFAULT_MODELS:
        assert (out / "roc" / f"{name}.csv").exists() and (out / "models" / f"{name}.json").exists()
    assert (out / "rules.txt").read_text().startswith("model many_rules_oner")


def test_console_script_exit_code(tmp_path):
    r = subprocess.run([sys.executable, "-m", "hpcmd.cli", "explain", "--model-file", str(tmp_path / "x.json")],
                       capture_output=True, text=True)
    assert r.returncode == 2 and "cannot read model file" in r.stderr
