"""End-to-end tests of the craspkit command-line tool.

The binary comes from CRASPKIT_BIN and the schemas from CRASPKIT_SCHEMAS
(both set by ctest).  Expected values are computed here in Python.
"""

import itertools
import json
import os
import pathlib
import subprocess

import jsonschema
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
BIN = os.environ.get("CRASPKIT_BIN", str(ROOT / "build" / "tools" / "craspkit"))
SCHEMAS = pathlib.Path(os.environ.get("CRASPKIT_SCHEMAS", str(ROOT / "schemas")))


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(*args, expect=0):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, timeout=300)
    assert proc.returncode == expect, (args, proc.returncode, proc.stdout, proc.stderr)
    return proc


def run_json(command, *args, expect=0):
    proc = run(command, *args, "--json", expect=expect)
    out = json.loads(proc.stdout)
    jsonschema.validate(out, schema(command))
    assert out["command"] == command
    return out


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text + "\n")
    return p


# Independent reference predicates.

def balanced(w):
    depth = 0
    for c in w:
        depth += 1 if c == "(" else -1
        if depth < 0:
            return False
    return depth == 0


def blocks(w):
    """Number of maximal runs, or None unless w is a non-empty word starting with a."""
    if not w or w[0] != "a":
        return None
    return 1 + sum(1 for x, y in zip(w, w[1:]) if x != y)


def in_altplus(k, w):
    return blocks(w) == k


def words(sigma, max_len):
    for n in range(1, max_len + 1):
        for t in itertools.product(sigma, repeat=n):
            yield "".join(t)


def neutral_pad(w, e, x):
    return e * x + "".join(c + e * (x - 1) for c in w)


DYCK = "(#<[Q(()] = #<[Q())]) && (#<[#<[Q(()] < #<[Q())]] = 0)"


@pytest.fixture
def dyck(tmp_path):
    return write(tmp_path, "dyck.tl", DYCK)


# parse / depth / eval

def test_parse_canonical_form(tmp_path):
    f = write(tmp_path, "f.tl", "#<[Q(a)]   >=   1")
    out = run_json("parse", "--formula", f)
    assert out["formula"] == "#<[Q(a)] >= 1"
    assert out["depth"] == 1
    assert run("parse", "--formula", f).stdout.strip() == "#<[Q(a)] >= 1"


def test_parse_errors_are_domain_errors(tmp_path):
    f = write(tmp_path, "bad.tl", "#<[Q(a) >= 1")
    proc = run("parse", "--formula", f, expect=2)
    assert "error" in proc.stderr
    g = write(tmp_path, "g.tl", "Q(c)")
    run("parse", "--formula", g, "--alphabet", "ab", expect=2)


def test_depth(dyck, tmp_path):
    assert run("depth", "--formula", dyck).stdout.strip() == "2"
    assert run_json("depth", "--formula", dyck)["depth"] == 2
    f = write(tmp_path, "f.tl", "Q(a) && (1 <= 1 + 1)")
    assert run("depth", "--formula", f).stdout.strip() == "0"


def test_eval_dyck_verdicts(dyck):
    assert run("eval", "--formula", dyck, "--word", "(())()").stdout.strip() == "true"
    for w in ["(()", "())(", ")(", "()()"]:
        out = run_json("eval", "--formula", dyck, "--word", w)
        assert out["value"] == balanced(w)
        assert out["position"] == len(w)


def test_eval_trace(dyck):
    out = run_json("eval", "--formula", dyck, "--word", "())()(", "--trace")
    rows = {r["subformula"]: r["values"] for r in out["trace"]}
    assert rows["#<[Q(()]"] == [1, 1, 1, 2, 2, 3]
    assert rows["#<[Q())]"] == [0, 1, 2, 2, 3, 3]
    assert rows[DYCK] == [False, True, False, False, False, False]


def test_eval_position_and_input_errors(tmp_path):
    f = write(tmp_path, "f.tl", "Q(a)")
    assert run_json("eval", "--formula", f, "--word", "ab", "--position", 1)["value"] is True
    run("eval", "--formula", f, "--word", "ab", "--position", 3, expect=2)
    run("eval", "--formula", f, "--word", "", expect=2)
    run("eval", "--formula", f, "--word", "^ab", expect=2)
    run("eval", "--formula", f, "--word", "ac", "--alphabet", "ab", expect=2)


# normalize

@pytest.mark.parametrize("mode", ["--ynf", "--desugar", "--minimal"])
def test_normalize_preserves_language(tmp_path, mode):
    src = write(tmp_path, "f.tl", "Y(!Q(a)) || #[Q(b)] >= 2 * #<[Q(a)]")
    out_file = tmp_path / "g.tl"
    out = run_json("normalize", "--formula", src, mode, "--alphabet", "ab", "--out", out_file)
    assert out["mode"] == mode[2:]
    assert out_file.read_text().strip() == out["formula"]
    for w in words("ab", 3):
        for i in range(1, len(w) + 1):
            a = run_json("eval", "--formula", src, "--word", w, "--position", i)["value"]
            b = run_json("eval", "--formula", out_file, "--word", w, "--position", i)["value"]
            assert a == b, (mode, w, i)


def test_normalize_minimal_is_equivalent_on_all_short_words(tmp_path):
    src = write(tmp_path, "f.tl", "#<[Q(a)] >= #<[Q(b)] || Q(b)")
    out_file = tmp_path / "g.tl"
    run("normalize", "--formula", src, "--minimal", "--out", out_file)
    text = out_file.read_text()
    assert "||" not in text and ">=" not in text
    run("check-equiv", "--a", f"formula:{src}", "--b", f"formula:{out_file}", "--max-len", 8, "--samples", 200)


def test_normalize_neutral_letter(tmp_path):
    src = write(tmp_path, "f.tl", "MOD(2,0) && #<[Q(e)] >= 2")
    out_file = tmp_path / "g.tl"
    out = run_json("normalize", "--formula", src, "--neutral-e", "e", "--alphabet", "abe", "--out", out_file)
    x = out["padding"]
    assert x == 2
    assert "e" not in out["formula"]
    for w in ["a", "ab", "bba", "abab"]:
        padded = neutral_pad(w, "e", x)
        for i in range(1, len(w) + 1):
            small = run_json("eval", "--formula", out_file, "--word", w, "--position", i)["value"]
            big = run_json("eval", "--formula", src, "--word", padded, "--position", i * x + x)["value"]
            assert small == big, (w, i)


def test_normalize_needs_exactly_one_mode(tmp_path):
    src = write(tmp_path, "f.tl", "Q(a)")
    run("normalize", "--formula", src, expect=1)
    run("normalize", "--formula", src, "--ynf", "--minimal", expect=1)


# compile / simulate / decompile

def test_compile_and_simulate_dyck(dyck, tmp_path):
    model = tmp_path / "dyck.json"
    out = run_json("compile", "--formula", dyck, "--precision", "12,4", "--out", model)
    assert out["depth"] == 2
    assert out["precision"] == {"p": 12, "s": 4}
    jsonschema.validate(json.loads(model.read_text()), schema("model"))
    for w in ["(())()", "())()(", "((", "()"]:
        sim = run_json("simulate", "--model", model, "--word", w)
        assert sim["word"] == "^" + w
        assert sim["accept"] == balanced(w)
        assert sim["accept"] == (sim["score"] > 0)
    assert run("simulate", "--model", model, "--word", "^()").stdout.split()[-1] == "accept"


def test_simulate_trace_shapes(dyck, tmp_path):
    model = tmp_path / "dyck.json"
    run("compile", "--formula", dyck, "--out", model)
    sim = run_json("simulate", "--model", model, "--word", "(()", "--trace")
    act = sim["activations"]
    assert len(act["c"]) == 2
    assert all(len(layer) == 4 for layer in act["c"])
    assert act["outputs"][-1] == sim["score"]


def test_compile_refusals(tmp_path):
    f = write(tmp_path, "f.tl", "#>[Q(a)] > 0")
    run("compile", "--formula", f, "--out", tmp_path / "m.json", expect=2)
    g = write(tmp_path, "g.tl", "Q(a)")
    run("compile", "--formula", g, "--precision", "12", "--out", tmp_path / "m.json", expect=1)


def test_decompile_round_trip(tmp_path):
    src = write(tmp_path, "f.tl", "#<[Q(a)] >= 1")
    model = tmp_path / "m.json"
    run("compile", "--formula", src, "--precision", "4,1", "--alphabet", "ab", "--out", model)
    back = tmp_path / "back.tl"
    out = run_json("decompile", "--model", model, "--out", back)
    assert out["depth"] == 1
    run("check-equiv", "--a", f"formula:{back}", "--b", f"model:{model}", "--alphabet", "ab",
        "--max-len", 8, "--samples", 0)
    run("check-equiv", "--a", f"formula:{back}", "--b", f"formula:{src}", "--alphabet", "ab",
        "--max-len", 8, "--samples", 0)


def test_decompile_refuses_large_models(dyck, tmp_path):
    model = tmp_path / "dyck.json"
    run("compile", "--formula", dyck, "--out", model)
    proc = run("decompile", "--model", model, expect=2)
    assert proc.stderr.strip()


def test_simulate_rejects_bad_models(tmp_path):
    bad = write(tmp_path, "bad.json", json.dumps({"precision": {"p": 4, "s": 1}}))
    run("simulate", "--model", bad, "--word", "a", expect=2)
    run("simulate", "--model", tmp_path / "missing.json", "--word", "a", expect=2)


# translate

def test_translate_round_trip(tmp_path):
    src = write(tmp_path, "f.tl", "#<[Q(a)] < #<[Q(b)] + 1 && Q(b)")
    maj = tmp_path / "f.maj2"
    out = run_json("translate", "--to", "maj2", "--in", src, "--out", maj)
    assert out["depth"] <= 1
    back = tmp_path / "back.tl"
    out2 = run_json("translate", "--to", "tl", "--in", maj, "--out", back)
    assert out2["depth"] <= out["depth"]
    run("check-equiv", "--a", f"formula:{src}", "--b", f"maj2:{maj}", "--alphabet", "ab", "--max-len", 7, "--samples", 100)
    run("check-equiv", "--a", f"formula:{src}", "--b", f"formula:{back}", "--alphabet", "ab", "--max-len", 7,
        "--samples", 100)


def test_translate_closed_wrapper(tmp_path):
    src = write(tmp_path, "f.tl", "#<[Q(a)] = #<[Q(b)]")
    out = run_json("translate", "--to", "maj2", "--in", src, "--closed")
    assert out["depth"] == 2
    run("translate", "--to", "maj2", "--in", write(tmp_path, "y.tl", "Y(Q(a))"), expect=2)
    run("translate", "--to", "cnf", "--in", src, expect=1)


# gen-data

def test_gen_data_records(tmp_path):
    out_file = tmp_path / "d.jsonl"
    out = run_json("gen-data", "--k", 3, "--bin", "5:20", "--count", 200, "--seed", 7, "--out", out_file)
    assert out["count"] == 200
    rec_schema = schema("dataset-record")
    lines = out_file.read_text().splitlines()
    assert len(lines) == 200
    for line in lines:
        r = json.loads(line)
        jsonschema.validate(r, rec_schema)
        w = r["source"][1:]
        assert 5 <= len(w) <= 20
        assert in_altplus(3, w)
        assert len(r["target"]) == len(r["source"])
        expect = "0" + "".join("1" if in_altplus(3, w[:i]) else "0" for i in range(1, len(w) + 1))
        assert r["target"] == expect


def test_gen_data_is_deterministic(tmp_path):
    a, b, c = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"
    run("gen-data", "--k", 4, "--bin", "10:30", "--count", 50, "--seed", 11, "--out", a)
    run("gen-data", "--k", 4, "--bin", "10:30", "--count", 50, "--seed", 11, "--out", b)
    run("gen-data", "--k", 4, "--bin", "10:30", "--count", 50, "--seed", 12, "--out", c)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_gen_data_errors(tmp_path):
    run("gen-data", "--k", 3, "--bin", "5-20", "--count", 5, "--out", tmp_path / "x", expect=1)
    run("gen-data", "--k", 9, "--bin", "2:4", "--count", 5, "--out", tmp_path / "x", expect=2)


# langs

def test_langs(tmp_path):
    out = run_json("langs", "--emit", "dyck")
    assert out["formula"] == DYCK and out["depth"] == 2
    for k in range(1, 5):
        assert run_json("langs", "--emit", f"altplus:{k}")["depth"] == k
    assert run_json("langs", "--emit", "prediction:4")["depth"] == 2
    f = tmp_path / "j.tl"
    run("langs", "--emit", "jexpr:abc", "--out", f)
    for w in words("abc", 4):
        value = run_json("eval", "--formula", f, "--word", w)["value"]
        it = iter(w)
        assert value == all(c in it for c in "abc"), w
    run("langs", "--emit", "nope:3", expect=1)
    run("langs", "--emit", "altplus:0", expect=1)


# check-equiv

def test_check_equiv_altplus_against_dfa(tmp_path):
    f = tmp_path / "altplus3.tl"
    run("langs", "--emit", "altplus:3", "--out", f)
    out = run_json("check-equiv", "--a", f"formula:{f}", "--b", "dfa:altplus:3", "--max-len", 12, "--seed", 1)
    assert out["equivalent"] is True
    assert out["exhaustive_words"] == 2 ** 13 - 2
    assert out["counterexample"] is None


def test_check_equiv_counterexample_exit_code(tmp_path):
    a = write(tmp_path, "a.tl", "Q(a)")
    b = write(tmp_path, "b.tl", "Q(b)")
    out = run_json("check-equiv", "--a", f"formula:{a}", "--b", f"formula:{b}", "--max-len", 3, expect=3)
    assert out["equivalent"] is False
    assert out["counterexample"] == "a"
    assert out["verdict_a"] is True and out["verdict_b"] is False


def test_check_equiv_dyck_and_threads(dyck, tmp_path):
    env = dict(os.environ, CRASPKIT_THREADS="2")
    proc = subprocess.run([BIN, "check-equiv", "--a", f"formula:{dyck}", "--b", "dfa:dyck", "--max-len", "10",
                           "--samples", "300", "--seed", "5", "--json"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    first = json.loads(proc.stdout)
    again = run_json("check-equiv", "--a", f"formula:{dyck}", "--b", "dfa:dyck", "--max-len", 10,
                     "--samples", 300, "--seed", 5)
    assert first == again


def test_check_equiv_usage_errors(tmp_path):
    run("check-equiv", "--a", "bogus", "--b", "dfa:dyck", expect=1)
    run("check-equiv", "--a", "dfa:altplus:x", "--b", "dfa:dyck", expect=1)
    run("check-equiv", "--a", f"formula:{tmp_path / 'missing.tl'}", "--b", "dfa:dyck", expect=2)


def test_usage_errors():
    run(expect=1)
    run("frobnicate", expect=1)
    run("eval", "--word", "a", expect=1)
    assert run("--help").stdout
