import json
import subprocess
import sys

import pytest

from smpnet.cli import main


@pytest.fixture
def data(tmp_path):
    tr, te = tmp_path / "train.jsonl", tmp_path / "test.jsonl"
    assert main(["generate", "--task", "cycles", "--k", "4", "--n", "8", "--count", "24", "--seed", "0",
                 "--out", str(tr)]) == 0
    assert main(["generate", "--task", "cycles", "--k", "4", "--n", "8", "--count", "10", "--seed", "1",
                 "--out", str(te)]) == 0
    return tr, te


def test_generate_multitask(tmp_path, capsys):
    out = tmp_path / "m.jsonl"
    assert main(["generate", "--task", "multitask", "--count", "5", "--n-min", "5", "--n-max", "6",
                 "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5
    assert "wrote 5 multitask graphs" in capsys.readouterr().out


def test_train_then_evaluate(tmp_path, data, capsys):
    tr, te = data
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"train_path = {tr}\ntest_path = {te}\nlayers = 2\nwidth = 4\nhead_width = 4\n")
    run = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--epochs", "2", "--out-dir", str(run), "--batch_size=8"]) == 0
    out = capsys.readouterr().out
    assert "epoch 1:" in out
    summary = json.loads(out.strip().splitlines()[-1])
    metrics_path = tmp_path / "eval.json"
    assert main(["evaluate", "--checkpoint", str(run / "model.ckpt"), "--dataset", str(te),
                 "--out", str(metrics_path)]) == 0
    assert json.loads(metrics_path.read_text()) == summary["test"]


def test_usage_errors_exit_2(tmp_path, data, capsys):
    tr, te = data
    assert main(["train", "--train-path", str(tmp_path / "missing.jsonl"), "--test-path", str(te)]) == 2
    assert main(["train", "--no-such-key", "1"]) == 2
    assert main(["train", "--epochs"]) == 2
    assert main(["evaluate", "--checkpoint", str(tmp_path / "none.ckpt"), "--dataset", str(te)]) == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"n": 2, "label": 0}\n')
    assert main(["train", "--train-path", str(bad), "--test-path", str(te), "--quiet"]) == 2
    assert "line 1" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["verify", "bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["generate", "--task", "cycles", "--count", "2", "--out", "x", "--extra"])
    assert info.value.code == 2


def test_generation_failure_exits_1(tmp_path):
    assert main(["generate", "--task", "cycles", "--k", "8", "--n", "8", "--count", "40",
                 "--out", str(tmp_path / "x.jsonl")]) == 1


def test_verify_separation(capsys):
    assert main(["verify", "separation"]) == 0
    assert "4/4 checks passed" in capsys.readouterr().out


def test_verify_failure_exits_1(monkeypatch):
    import smpnet.verify as verify

    real = verify.run_suite

    def failing(name, seed=0, report=None):
        results = real(name, seed=seed, report=report)
        results[0].passed = False
        return results

    monkeypatch.setattr(verify, "run_suite", failing)
    assert main(["verify", "separation"]) == 1


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "--sizes", "6", "8", "--repeats", "2", "--width", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "variant,n,m,c,median_us"
    assert len(lines) == 1 + 6
    assert "smp-fast scaling exponent" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "smpnet", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("generate", "train", "evaluate", "verify", "bench"):
        assert cmd in proc.stdout
