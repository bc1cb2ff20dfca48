import random
import subprocess
import sys

import pytest

from mbrdep.cli import main
from mbrdep.conllu import CorpusFile, load, save
from mbrdep.synthetic import gold_corpus, noisy_individual

GOLD = [(2, 0, 2), (0, 1, 2, 2)]


def write(tmp_path, name, parses):
    path = tmp_path / f"{name}.conllu"
    save(CorpusFile.from_heads(parses, source=str(path)), path)
    return str(path)


@pytest.fixture
def corpus(tmp_path):
    gold = write(tmp_path, "gold", GOLD)
    a = write(tmp_path, "a", GOLD)
    b = write(tmp_path, "b", [(0, 1, 2), (0, 1, 2, 2)])
    c = write(tmp_path, "c", [(2, 0, 2), (0, 1, 1, 1)])
    return tmp_path, gold, [a, b, c]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_aggregate_writes_file(corpus, capsys):
    tmp, gold, inputs = corpus
    out = tmp / "out.conllu"
    code, _, _ = run(["aggregate", "--inputs", *inputs, "--output", str(out), "--jobs", "1"], capsys)
    assert code == 0
    assert load(out).head_vectors() == GOLD


def test_aggregate_stdout_and_weights(corpus, capsys):
    _, gold, inputs = corpus
    code, out, _ = run(["aggregate", "--inputs", *inputs, "--weights", "0,1,0", "--jobs", "1"], capsys)
    assert code == 0
    assert CorpusFile.from_heads([(0, 1, 2), (0, 1, 2, 2)]).head_vectors() == _parse(out)


def _parse(text):
    import io

    from mbrdep.conllu import read_corpus

    return read_corpus(io.StringIO(text)).head_vectors()


def test_aggregate_weights_from_gold(corpus, capsys):
    _, gold, inputs = corpus
    code, out, err = run(["aggregate", "--inputs", *inputs, "--weights-from-gold", gold, "--jobs", "1"], capsys)
    assert code == 0
    assert err.count("weight\t") == 3
    assert _parse(out) == GOLD


def test_aggregate_f1(corpus, capsys):
    _, _, inputs = corpus
    code, out, _ = run(["aggregate", "--inputs", *inputs, "--objective", "f1", "--jobs", "1"], capsys)
    assert code == 0 and len(_parse(out)) == 2


def test_misaligned_inputs(corpus, capsys):
    tmp, _, inputs = corpus
    short = write(tmp, "short", [(2, 0, 2), (0, 1, 2)])
    code, _, err = run(["aggregate", "--inputs", inputs[0], short, "--jobs", "1"], capsys)
    assert code == 2
    assert "sentence 2" in err


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.conllu"
    bad.write_text("1\tw\t_\t_\t_\t_\tx\t_\t_\t_\n\n")
    code, _, err = run(["evaluate", "--pred", str(bad), "--gold", str(bad)], capsys)
    assert code == 2 and "bad.conllu:1" in err


def test_missing_file(tmp_path, capsys):
    code, _, _ = run(["evaluate", "--pred", str(tmp_path / "no"), "--gold", str(tmp_path / "no")], capsys)
    assert code == 2


def test_usage_errors(corpus, capsys):
    _, _, inputs = corpus
    assert run([], capsys)[0] == 1
    assert run(["aggregate", "--inputs", *inputs, "--weights", "1,2"], capsys)[0] == 1
    assert run(["aggregate", "--inputs", *inputs, "--weights", "a,b,c"], capsys)[0] == 1


def test_evaluate(corpus, capsys):
    _, gold, inputs = corpus
    code, out, _ = run(["evaluate", "--pred", inputs[1], "--gold", gold, "--by-pos"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[:2] == ["metric\tvalue", f"uas\t{5 / 7}"]
    assert lines[2] == "pos\tuas\tsupport"
    code, out, _ = run(["evaluate", "--pred", gold, "--gold", gold, "--metric", "f1"], capsys)
    assert out.splitlines()[1] == "f1\t1.0"


def test_diversity(corpus, capsys):
    _, gold, inputs = corpus
    code, out, _ = run(["diversity", "--inputs", *inputs], capsys)
    assert code == 0 and out.startswith("metric\tvalue\nsociety-entropy\t")
    code, _, err = run(["diversity", "--inputs", *inputs, "--metric", "disagreement"], capsys)
    assert code == 1 and "gold" in err
    code, out, _ = run(["diversity", "--inputs", *inputs, "--metric", "disagreement", "--gold", gold], capsys)
    assert code == 0


def test_diversity_undefined(corpus, capsys):
    _, gold, inputs = corpus
    code, _, _ = run(["diversity", "--inputs", inputs[0], inputs[0], "--metric", "fleiss-kappa", "--gold", gold], capsys)
    assert code == 2


def test_select_and_directory(corpus, capsys):
    tmp, gold, _ = corpus
    cands = tmp / "cands"
    cands.mkdir()
    rng = random.Random(0)
    g = gold_corpus(10, rng)
    gold_path = write(tmp, "vgold", g)
    for i in range(4):
        write(cands, f"p{i}", noisy_individual(g, 0.2 + 0.1 * i, rng))
    code, out, _ = run(["select", "--candidates", str(cands), "--gold", gold_path, "--size", "2", "--alpha", "0.5"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "step\tname\tobjective" and len(lines) == 3
    code, out, _ = run(["select", "--candidates", str(cands), "--gold", gold_path, "--size", "2", "--method", "ensemble-validation"], capsys)
    assert code == 0 and len(out.splitlines()) == 3
    code, out, _ = run(["sweep", "--candidates", str(cands), "--gold", gold_path, "--size", "2", "--grid", "0,1,1"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "alpha\tuas\tchosen" and len(lines) == 3
    code, _, _ = run(["select", "--candidates", str(cands), "--gold", gold_path, "--size", "9"], capsys)
    assert code == 1


def test_curve(corpus, capsys):
    _, gold, inputs = corpus
    code, out, _ = run(["curve", "--inputs", *inputs, "--gold", gold], capsys)
    assert code == 0 and out.splitlines()[0] == "t\tuas" and len(out.splitlines()) == 4


def test_selftest(capsys):
    code, out, _ = run(["selftest", "--max-len", "4", "--cases", "20", "--seed", "1"], capsys)
    assert code == 0
    assert out.startswith("# seed=1") and "FAIL" not in out


def test_deterministic_and_inputs_untouched(corpus, capsys):
    tmp, _, inputs = corpus
    before = [open(p, "rb").read() for p in inputs]
    outs = []
    for jobs in ("1", "2"):
        path = tmp / f"out{jobs}.conllu"
        assert run(["aggregate", "--inputs", *inputs, "--output", str(path), "--jobs", jobs], capsys)[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert [open(p, "rb").read() for p in inputs] == before


def test_module_entry_point(corpus):
    _, gold, _ = corpus
    proc = subprocess.run(
        [sys.executable, "-m", "mbrdep", "evaluate", "--pred", gold, "--gold", gold],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "uas\t1.0" in proc.stdout
