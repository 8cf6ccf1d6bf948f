import json

import numpy as np
import pytest

from corrlab.cli import main
from corrlab.corpus import random_dense, zero_sum_uniform
from corrlab.io import DistFileError, dumps, load, loads, save
from corrlab.space import JointDist, ProductSpace


def test_round_trip_bit_identical(tmp_path):
    d = random_dense(3, [2, 3, 2], seed=5)
    path = save(d, tmp_path / "d.json")
    back = load(path)
    assert np.array_equal(back.pmf, d.pmf)
    assert dumps(back) == path.read_text()


def test_round_trip_weighted_metric():
    met = np.array([[0, 0.5], [0.5, 0]])
    s = ProductSpace([("x", "y"), ("0", "1")], [met, None])
    d = JointDist(s, np.array([[0.1, 0.2], [0.3, 0.4]]))
    back = loads(dumps(d))
    assert back.space == s and np.array_equal(back.pmf, d.pmf)


def test_parse_diagnostics():
    with pytest.raises(DistFileError, match=r":2:"):
        loads('{"format_version": 1,\n  "alphabets": [[0, 1]],, }')
    with pytest.raises(DistFileError, match="pmf"):
        loads('{"format_version": 1, "alphabets": [["0", "1"]], "pmf": [1.0]}')
    with pytest.raises(DistFileError, match="format_version"):
        loads('{"format_version": 2, "alphabets": [["0"]], "pmf": [1.0]}')


def _example(tmp_path, *args):
    out = tmp_path / "f.json"
    assert main(["example", *args, "--out", str(out)]) == 0
    return out


def test_measure_zero_sum_bits(tmp_path, capsys):
    f = _example(tmp_path, "zero-sum", "3", "2")
    capsys.readouterr()
    assert main(["measure", str(f), "--base", "2"]) == 0
    out = capsys.readouterr().out
    assert "TC = 1.000000" in out and "DTC = 2.000000" in out
    assert main(["measure", str(f), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema_version"] == 1 and doc["dtc"] == pytest.approx(2 * np.log(2))


def test_measure_product_and_bad_files(tmp_path, capsys):
    f = _example(tmp_path, "random-dense", "2", "2", "0", "1000000000")
    assert main(["measure", str(f)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": 1, "alphabets": [["0", "1"]], "pmf": [0.5, 0.25, 0.25]}')
    assert main(["measure", str(bad)]) == 2
    assert "pmf" in capsys.readouterr().err


def test_measure_capacity(tmp_path, monkeypatch):
    f = _example(tmp_path, "zero-sum", "3", "2")
    monkeypatch.setenv("CORRLAB_CAPACITY", "4")
    assert main(["measure", str(f)]) == 3


def test_example_kinds(tmp_path, capsys):
    _example(tmp_path, "dirac-spike", "2", "3", "0.5")
    assert "TC = 1.039721" in capsys.readouterr().out
    assert main(["example", "no-such-kind"]) == 2
    assert main(["example", "zero-sum", "3"]) == 2
    assert main(["example", "zero-sum", "3", "1"]) == 2


def test_decompose_exit_codes(tmp_path, capsys):
    prod = tmp_path / "prod.json"
    save(random_dense(3, 2, 0, concentration=1e12), prod)
    assert main(["decompose", str(prod), "--mode", "a", "--delta", "0.5"]) == 0
    z9 = tmp_path / "z9.json"
    save(zero_sum_uniform(9, 2), z9)
    out_dir = tmp_path / "out"
    capsys.readouterr()
    assert main(["decompose", str(z9), "--mode", "a", "--delta", "0.9", "--out", str(out_dir), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["transport_err"] < 1.8 and doc["guarantees_hold"]
    assert (out_dir / "report.json").exists() and (out_dir / "component_0000.json").exists()
    z3 = tmp_path / "z3.json"
    save(zero_sum_uniform(3, 2), z3)
    assert main(["decompose", str(z3), "--mode", "a", "--delta", "0.3"]) == 1
    assert "not asserted" in capsys.readouterr().err
    assert main(["decompose", str(z3), "--mode", "a2", "--delta", "0.5"]) == 2
    assert main(["decompose", str(z3), "--mode", "a-prime", "--delta", "0.8"]) == 0


def test_verify(tmp_path, capsys):
    assert main(["verify", "--random", "3", "2", "20", "7", "--suite", "identities"]) == 0
    assert "[identities] pass" in capsys.readouterr().out
    assert main(["verify", "--random", "3", "2", "10", "7", "--suite", "transport", "--oracle-runs", "5"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": 1, "alphabets": [["0", "1"]], "pmf": [0.6, 0.6]}')
    assert main(["verify", str(bad)]) == 2
    good = tmp_path / "good.json"
    save(random_dense(3, 2, 1), good)
    assert main(["verify", str(good), "--suite", "inequalities"]) == 0
    assert main(["verify"]) == 2


def test_verify_dumps_counterexample(tmp_path, monkeypatch, capsys):
    import corrlab.suites as suites

    monkeypatch.setattr(suites, "_sandwich", lambda d: 1.0)
    dump = tmp_path / "dump"
    assert main(["verify", "--random", "2", "2", "3", "1", "--suite", "inequalities", "--dump", str(dump)]) == 1
    files = list(dump.iterdir())
    assert files and load(files[0]).n == 2
