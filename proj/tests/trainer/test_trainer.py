"""Interface tests for the Python trainer: dataset contract, causality, CLI."""

import json
import os
import pathlib
import subprocess
import sys

import pytest

torch = pytest.importorskip("torch")

ROOT = pathlib.Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tools" / "trainer"))
from data import DatasetError, load_jsonl, prefix_target  # noqa: E402
from model import NoPETransformer  # noqa: E402

BIN = os.environ.get("CRASPKIT_BIN", str(ROOT / "build" / "tools" / "craspkit"))


def gen_data(path, k, lo, hi, count, seed):
    subprocess.run([BIN, "gen-data", "--k", str(k), "--bin", f"{lo}:{hi}", "--count", str(count),
                    "--seed", str(seed), "--out", str(path)], check=True, capture_output=True)
    return path


def test_prefix_target_example():
    assert prefix_target(3, "aaabbbbaaaaa") == "0000000011111"


def test_accepts_gen_data_output(tmp_path):
    records = load_jsonl(gen_data(tmp_path / "d.jsonl", 3, 5, 12, 40, 1), k=3)
    assert len(records) == 40


@pytest.mark.parametrize("line", [
    '{"k": 3, "source": "aab", "target": "000"}',
    '{"k": 3, "source": "^ab", "target": "000", "extra": 1}',
    '{"k": 2, "source": "^ab", "target": "000"}',
    'not json',
])
def test_rejects_foreign_records(tmp_path, line):
    p = tmp_path / "bad.jsonl"
    p.write_text(line + "\n")
    with pytest.raises(DatasetError):
        load_jsonl(p)


def test_rejects_wrong_k(tmp_path):
    with pytest.raises(DatasetError):
        load_jsonl(gen_data(tmp_path / "d.jsonl", 3, 5, 12, 5, 1), k=4)


def test_future_tokens_do_not_change_earlier_logits():
    torch.manual_seed(0)
    model = NoPETransformer(depth=2, d=16, heads=2).eval()
    a = torch.tensor([[0, 1, 1, 2, 1, 2, 2, 1]])
    b = a.clone()
    b[0, 5:] = torch.tensor([1, 1, 1])
    with torch.no_grad():
        la, lb = model(a), model(b)
    assert torch.allclose(la[0, :5], lb[0, :5], atol=1e-6)
    assert not any(isinstance(m, torch.nn.Embedding) and m.num_embeddings > 3 for m in model.modules())


def test_train_cli_runs(tmp_path):
    train = gen_data(tmp_path / "train.jsonl", 3, 5, 10, 64, 2)
    val = gen_data(tmp_path / "val.jsonl", 3, 5, 10, 16, 3)
    cfg = {"k": 3, "depth": 1, "d": 16, "lr": 1e-3, "epochs": 1, "batch": 16, "seed": 0,
           "train": str(train), "val": str(val), "test": [str(val)]}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    proc = subprocess.run([sys.executable, str(ROOT / "tools" / "trainer" / "train.py"), "--config", str(cfg_path)],
                          capture_output=True, text=True, check=True)
    result = json.loads(proc.stdout)
    assert 0.0 <= result["val_accuracy"] <= 100.0
    assert set(result["test"]) == {str(val)}
