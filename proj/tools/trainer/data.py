"""Loading gen-data JSONL files.

Every line is validated against schemas/dataset-record.schema.json and the
labels are re-derived from the source, so files from anywhere other than
`craspkit gen-data` are rejected.
"""

import json
import pathlib

import jsonschema

SCHEMA_PATH = pathlib.Path(__file__).resolve().parents[2] / "schemas" / "dataset-record.schema.json"
VOCAB = {"^": 0, "a": 1, "b": 2}


class DatasetError(ValueError):
    pass


def prefix_target(k, word):
    """'0' for BOS, then 1 at i iff word[:i] starts with a and has exactly k runs."""
    out = ["0"]
    runs = 0
    for i, c in enumerate(word):
        if i == 0 or c != word[i - 1]:
            runs += 1
        out.append("1" if word[0] == "a" and runs == k else "0")
    return "".join(out)


def load_jsonl(path, k=None, schema_path=SCHEMA_PATH):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    records = []
    with open(path) as f:
        for n, line in enumerate(f, 1):
            try:
                r = json.loads(line)
                jsonschema.validate(r, schema)
            except (json.JSONDecodeError, jsonschema.ValidationError) as e:
                raise DatasetError(f"{path}:{n}: not a gen-data record: {e}") from e
            if k is not None and r["k"] != k:
                raise DatasetError(f"{path}:{n}: record has k={r['k']}, expected {k}")
            if r["target"] != prefix_target(r["k"], r["source"][1:]):
                raise DatasetError(f"{path}:{n}: target does not match the source")
            records.append(r)
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    return records


def encode(records):
    """Token ids and 0/1 labels, one list per record."""
    xs = [[VOCAB[c] for c in r["source"]] for r in records]
    ys = [[int(c) for c in r["target"]] for r in records]
    return xs, ys
