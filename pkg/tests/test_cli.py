import csv
import json
import math

import pytest

from colombeau.cli import main

SHORT = "0.5,0.7,12"


def phi0_of(center, width):
    s = -center / width
    return math.exp(-1.0 / (1.0 - s * s))


def run(tmp_path, capsys, *argv, grid=SHORT):
    code = main(["--grid", grid, "--out", str(tmp_path), *argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_classify_delta_is_moderate_of_order_one(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "classify", '(iota "delta" x)', "--box", "-1,1")
    doc = json.loads(out)
    assert code == 0 and doc["answer"] == "yes" and doc["order"] == 1
    rows = read_csv(tmp_path / "classify.csv")
    assert rows[0] == ["eps", "sup_alpha=0"] and len(rows) == 13


def test_classify_negligible_examples(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "classify", "0", "--box", "-1,1", "--mode", "negligible")
    assert code == 0 and json.loads(out)["answer"] == "yes"
    code, out, _ = run(tmp_path, capsys, "classify", '(- (^ (iota "H" x) 2) (iota "H" x))', "--box", "-1,1",
                       "--mode", "negligible")
    assert code == 1 and json.loads(out)["answer"] == "no"


def test_classify_reads_expression_files(tmp_path, capsys):
    src = tmp_path / "e.txt"
    src.write_text('(* x (iota "delta" x))\n')
    code, out, _ = run(tmp_path, capsys, "classify", str(src), "--box", "-1,1")
    assert code == 0 and json.loads(out)["order"] == 0


@pytest.mark.parametrize("argv", [
    ["classify", "(+ x", "--box", "-1,1"],
    ["classify", "x", "--box", "1"],
    ["classify", "x"],
    ["bogus"],
    ["--grid", "0.5,2,3", "classify", "x", "--box", "-1,1"],
])
def test_usage_and_parse_errors_exit_64(tmp_path, capsys, argv):
    code, _, err = run(tmp_path, capsys, *argv)
    assert code == 64
    doc = json.loads(err.strip().splitlines()[-1])
    assert doc["error"]["exit_code"] == 64 and doc["error"]["message"]


def test_internal_errors_exit_70(tmp_path, capsys):
    # a box outside the declared chart is a domain error raised by the library
    code, _, err = run(tmp_path, capsys, "classify", "x", "--box", "-1,1", "--domain", "0,0.5")
    assert code == 70 and json.loads(err)["error"]["type"] == "DomainError"


def test_embed_table(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "embed", "H", "--x", "-1,1,5")
    rows = read_csv(tmp_path / "embed.csv")
    assert code == 0 and rows[0] == ["eps", "x", "value"] and len(rows) == 1 + 12 * 5
    assert float(rows[-1][2]) == 1.0 and float(rows[1][2]) == 0.0


def test_pair_examples(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "pair", '(iota "delta" x)')
    doc = json.loads(out)
    assert code == 0 and doc["converged"] and doc["limit"] == pytest.approx(phi0_of(0.1, 0.6), abs=1e-9)
    code, out, _ = run(tmp_path, capsys, "pair", '(* x (iota "delta" x))')
    assert code == 0 and abs(json.loads(out)["limit"]) <= 1e-6
    code, out, _ = run(tmp_path, capsys, "pair", "(sin x)")
    column = {row[1] for row in read_csv(tmp_path / "pair.csv")[1:]}
    assert code == 0 and len(column) == 1


def test_associate(tmp_path, capsys):
    # the pairing limits need the full grid; on a short one they are inconclusive
    code, _, _ = run(tmp_path, capsys, "associate", '(^ (iota "H" x) 3)', '(iota "H" x)')
    assert code == 2
    code, _, _ = run(tmp_path, capsys, "associate", '(^ (iota "H" x) 3)', '(iota "H" x)', grid="0.5,0.7,24")
    assert code == 0
    code, _, _ = run(tmp_path, capsys, "associate", '(iota "delta" x)', "0")
    assert code == 1
    code, _, _ = run(tmp_path, capsys, "associate", '(iota "H" x)', '(iota "H" x)', "--ck", "1")
    assert code == 0


def test_flow_with_field_document(tmp_path, capsys):
    field = json.dumps({"names": ["x", "y"], "domain": [[-5, 5], [-5, 5]], "xi": ["1", "(* -1 y)"]})
    code, out, _ = run(tmp_path, capsys, "flow", "--field", field, "--lattice", "0,1;0.5,-1",
                       "--tspan", "0,1", "--times", "3")
    rows = read_csv(tmp_path / "flow.csv")
    assert code == 0 and rows[0] == ["eps", "t", "x0", "y0", "x", "y"]
    assert len(rows) == 1 + 12 * 3 * 2
    assert json.loads(out)["max_group"] <= 1e-8


def test_geodesic_rejects_degenerate_metric(tmp_path, capsys):
    metric = json.dumps({"names": ["x", "y"], "domain": [[-1, 1], [-1, 1]], "g": [["(^ x 2)", 0], [0, 1]]})
    code, _, err = run(tmp_path, capsys, "geodesic", "--metric", metric, "--p0", "0.5,0", "--v0", "1,0",
                       "--tspan", "0,0.1")
    assert code == 70 and json.loads(err)["error"]["type"] == "MetricError"


def test_demo_pointvalue(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "demo", "pointvalue")
    assert code == 0 and "FAIL" not in out
    assert (tmp_path / "pointvalue" / "summary.json").exists()


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid = 0.5,0.7,30\n")
    code = main(["--config", str(cfg), "--grid", "0.5,0.7,8", "--out", str(tmp_path),
                 "embed", "H", "--x", "0,1,2"])
    capsys.readouterr()
    assert code == 0 and len(read_csv(tmp_path / "embed.csv")) == 1 + 8 * 2
