import json
import math
import subprocess
import sys

import pytest

from tribilliard.cli import main, parse_angle


def run(args, cache, capsys):
    code = main([*args, "--cache-dir", str(cache)])
    out, err = capsys.readouterr()
    return code, out, err


def artifacts(cache):
    return sorted(p for p in (cache / "artifacts").glob("*.json") if p.name != "latest.json")


def strip_timestamp(path):
    data = json.loads(path.read_text())
    data.pop("metadata")
    return data


@pytest.mark.parametrize("text,value,frac", [("1/3pi", math.pi / 3, "1/3"), ("2/5 pi", 2 * math.pi / 5, "2/5"),
                                             ("pi/4", math.pi / 4, "1/4"), ("0.7", 0.7, None)])
def test_parse_angle(text, value, frac):
    v, f = parse_angle(text)
    assert v == pytest.approx(value)
    assert (None if f is None else str(f)) == frac


def test_constants(tmp_path, capsys):
    code, out, _ = run(["constants"], tmp_path, capsys)
    assert code == 0
    assert "0.732050807568877" in out
    code, out, _ = run(["constants", "--format", "json"], tmp_path, capsys)
    assert json.loads(out)["mu_star"] == pytest.approx(math.sqrt(3) - 1, abs=1e-15)


def test_admissibility_error_exit_1(tmp_path, capsys):
    code, _, err = run(["enumerate", "--alpha", "0.9", "--beta", "0.9", "--delta", "2.0"], tmp_path, capsys)
    assert code == 1
    assert "must exceed delta" in err


def test_infeasible_constants_exit_1(tmp_path, capsys):
    code, _, err = run(["constants", "--mu", "0.5"], tmp_path, capsys)
    assert code == 1 and "sqrt(3) - 1" in err


@pytest.mark.parametrize("argv", [["frobnicate"], [], ["enumerate", "--alpha", "x", "--beta", "1"],
                                  ["enumerate", "--beta", "1"], ["constants", "--threads", "0"]])
def test_usage_errors_exit_2(tmp_path, capsys, argv):
    code, _, err = run(argv, tmp_path, capsys)
    assert code == 2
    assert "usage" in err


def test_enumerate_csv_and_cache(tmp_path, capsys):
    argv = ["enumerate", "--alpha", "1/3pi", "--beta", "1/3pi", "--n-max", "8", "--format", "csv"]
    code, out, _ = run(argv, tmp_path, capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,P_n" and lines[-1] == "8,15"
    assert len(list((tmp_path / "enumeration").glob("*.json"))) == 3
    code, out, _ = run(argv[:-2], tmp_path, capsys)
    assert "v0=yes" in out


def test_reproducible_artifacts(tmp_path, capsys):
    argv = ["report", "--alpha", "0.7312", "--beta", "1.0123", "--n-max", "16"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv, a, capsys)[0] == 0
    assert run(argv, b, capsys)[0] == 0
    (pa,), (pb,) = artifacts(a), artifacts(b)
    assert pa.name == pb.name
    assert strip_timestamp(pa) == strip_timestamp(pb)
    ta, tb = pa.read_text().splitlines(), pb.read_text().splitlines()
    assert [x for x in ta if "timestamp" not in x] == [x for x in tb if "timestamp" not in x]
    index = json.loads((a / "artifacts" / "latest.json").read_text())
    assert index["report"] == index["latest"] == pa.name
    data = json.loads(pa.read_text())
    assert data["schema_version"] == 1 and data["command"] == "report"


def test_env_cache_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TRIBILLIARD_CACHE_DIR", str(tmp_path / "env"))
    assert main(["constants"]) == 0
    capsys.readouterr()
    assert artifacts(tmp_path / "env")


def test_partitions_and_good_triples(tmp_path, capsys):
    shape = ["--alpha", "0.7312", "--beta", "1.0123", "--n-max", "12"]
    code, out, _ = run(["partitions", *shape, "--vertex", "1", "--format", "csv"], tmp_path, capsys)
    assert code == 0 and out.startswith("angle,index\n")
    code, out, _ = run(["good-triples", *shape, "--format", "json"], tmp_path, capsys)
    data = json.loads(out)
    assert code == 0 and data["triples"] and data["zero_area"] == 0


def test_symbolic_check(tmp_path, capsys):
    code, out, _ = run(["symbolic-check", "--samples", "100", "--format", "json"], tmp_path, capsys)
    assert code == 0 and json.loads(out)["ok"]


def test_area_poly(tmp_path, capsys):
    code, out, _ = run(["area-poly", "--edges", "0,1,0,2", "--times", "1,2,4", "--alpha", "0.7",
                        "--beta", "1.0", "--format", "json"], tmp_path, capsys)
    data = json.loads(out)
    assert code == 0 and data["degree"] <= 4 * data["kites"]
    code, _, _ = run(["area-poly", "--edges", "0,0", "--times", "1,2,3"], tmp_path, capsys)
    assert code == 1


def test_measure_decay_small(tmp_path, capsys):
    code, out, _ = run(["measure-decay", "--degrees", "4,8", "--samples", "5000", "--family-size", "5",
                        "--format", "csv"], tmp_path, capsys)
    assert code == 0 and out.splitlines()[0].startswith("m,eps")


def test_verify_insertion_exit_codes(tmp_path, capsys):
    code, out, _ = run(["verify-lemma21", "--c", "1,2"], tmp_path, capsys)
    assert code == 0 and "holds" in out
    code, _, err = run(["verify-lemma21", "--c", "1", "--seed-points", "4"], tmp_path, capsys)
    assert code == 3 and "counterexample" in err
    assert any("verify-lemma21" in p.name for p in artifacts(tmp_path))


def test_console_script_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tribilliard.cli", "constants", "--cache-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "mu* = 0.732050807568877" in proc.stdout
