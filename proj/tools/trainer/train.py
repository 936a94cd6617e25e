"""Train one model on gen-data files.

    python train.py --config cfg.json

cfg.json keys: k, depth, d, heads, lr, epochs, batch, seed, train, val,
test (list of paths), checkpoint (optional path).
"""

import argparse
import json
import sys

import torch
from torch import nn

if __package__ in (None, ""):
    sys.path.insert(0, str(__import__("pathlib").Path(__file__).resolve().parent))
    from data import encode, load_jsonl
    from model import NoPETransformer
else:
    from .data import encode, load_jsonl
    from .model import NoPETransformer

DEFAULTS = {"d": 64, "heads": 2, "lr": 1e-4, "epochs": 25, "batch": 32, "seed": 0, "test": [], "checkpoint": None}


def batches(xs, ys, size, shuffle_gen=None):
    order = torch.randperm(len(xs), generator=shuffle_gen).tolist() if shuffle_gen else list(range(len(xs)))
    for start in range(0, len(order), size):
        idx = order[start:start + size]
        n = max(len(xs[i]) for i in idx)
        tok = torch.zeros(len(idx), n, dtype=torch.long)
        lab = torch.full((len(idx), n), -100, dtype=torch.long)
        for row, i in enumerate(idx):
            tok[row, :len(xs[i])] = torch.tensor(xs[i])
            lab[row, :len(ys[i])] = torch.tensor(ys[i])
        yield tok, lab, lab == -100


@torch.no_grad()
def sequence_accuracy(model, xs, ys, batch=64):
    """Percentage of sequences labelled correctly at every position."""
    model.eval()
    correct = 0
    for tok, lab, pad in batches(xs, ys, batch):
        pred = model(tok, pad).argmax(-1)
        ok = (pred == lab) | pad
        correct += int(ok.all(dim=1).sum())
    return 100.0 * correct / len(xs)


def train(cfg):
    cfg = {**DEFAULTS, **cfg}
    torch.manual_seed(cfg["seed"])
    gen = torch.Generator().manual_seed(cfg["seed"])
    train_x, train_y = encode(load_jsonl(cfg["train"], cfg["k"]))
    val_x, val_y = encode(load_jsonl(cfg["val"], cfg["k"]))
    model = NoPETransformer(cfg["depth"], cfg["d"], cfg["heads"])
    opt = torch.optim.Adam(model.parameters(), lr=cfg["lr"])
    loss_fn = nn.CrossEntropyLoss(ignore_index=-100)
    val_acc = 0.0
    for _ in range(cfg["epochs"]):
        model.train()
        for tok, lab, pad in batches(train_x, train_y, cfg["batch"], gen):
            opt.zero_grad()
            loss = loss_fn(model(tok, pad).reshape(-1, 2), lab.reshape(-1))
            loss.backward()
            opt.step()
        val_acc = sequence_accuracy(model, val_x, val_y)
        if val_acc == 100.0:
            break
    result = {"k": cfg["k"], "depth": cfg["depth"], "val_accuracy": val_acc, "test": {}}
    for path in cfg["test"]:
        xs, ys = encode(load_jsonl(path, cfg["k"]))
        result["test"][path] = sequence_accuracy(model, xs, ys)
    if cfg["checkpoint"]:
        torch.save({"config": cfg, "state": model.state_dict()}, cfg["checkpoint"])
    return model, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", required=True)
    args = ap.parse_args(argv)
    with open(args.config) as f:
        cfg = json.load(f)
    _, result = train(cfg)
    print(json.dumps(result))


if __name__ == "__main__":
    main()
