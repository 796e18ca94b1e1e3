import csv
import json

import pytest

from convexsmooth.cli import main, parse_grid
from convexsmooth.config import RunConfig, load_config
from convexsmooth.errors import DomainError
from convexsmooth.structures.symbolic import SymbolicMap, coord, fnode, phi


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# convexsmooth")
    return lines[0], list(csv.reader(lines[1:]))


def test_eval_single_point_above_support(tmp_path):
    assert main(["eval", "--point", "0,3", "--out", str(tmp_path)]) == 0
    stamp, rows = read_csv(tmp_path / "eval.csv")
    assert f"config_hash={RunConfig().hash()}" in stamp
    assert rows[0] == ["x", "y", "status", "f_lo", "f_hi"]
    assert rows[1][3:] == ["0.0", "0.0"]


def test_eval_grid_rows(tmp_path):
    assert main(["eval", "--grid=-2:2:5,0:2:3", "--order", "1", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "eval.csv")
    head, body = rows[0], rows[1:]
    assert len(body) == 15 and "d10_lo" in head
    for r in body:
        x, y = float(r[0]), float(r[1])
        if y >= 2:
            assert r[3] == r[4] == "0.0"
        if y == 0 and x < 0:
            assert r[2].startswith("domain")
        else:
            # full-precision decimals round-trip the enclosure exactly
            lo, hi = float(r[3]), float(r[4])
            assert repr(lo) == r[3] and lo <= hi


def test_eval_empty_grid(tmp_path):
    assert main(["eval", "--grid", "0:1:0,0:1:0", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "eval.csv")
    assert rows == [["x", "y", "status", "f_lo", "f_hi"]]


def test_blowup_certificate(tmp_path):
    assert main(["blowup", "--k", "1", "--grid", "1e-1:1e-6:6", "--out", str(tmp_path)]) == 0
    cert = json.loads((tmp_path / "blowup_k1.json").read_text())["certificate"]
    assert abs(cert["slope"] + 0.5) <= 0.02
    assert main(["blowup", "--k", "1", "--grid", "0.25:0.25:1", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "blowup_k1.csv")
    assert float(rows[1][1]) == pytest.approx(1.5, rel=1e-12)


@pytest.mark.parametrize("argv", [
    ["blowup", "--k", "99"],
    ["blowup", "--grid", "0.5:1.5:4"],
    ["eval", "--grid", "nonsense"],
    ["eval", "--point", "1"],
    ["suite", "nosuchsuite"],
    ["structure-check", "--handle", "nope"],
])
def test_usage_errors_exit_2(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_suite_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["suite", "reflexivity", "--out", str(a)]) == 0
    assert main(["suite", "reflexivity", "--out", str(b)]) == 0
    ra = (a / "suite-reflexivity.json").read_bytes()
    assert ra == (b / "suite-reflexivity.json").read_bytes()
    rep = json.loads(ra)
    assert rep["ok"] and rep["config_hash"] == RunConfig().hash()
    assert "seconds" in json.loads((a / "suite-reflexivity.timings.json").read_text())


def test_kriegl_cases(tmp_path):
    assert main(["kriegl", "--case", "f-X", "--out", str(tmp_path)]) == 0
    # the expected failure counts as an expected outcome
    assert main(["kriegl", "--case", "phi1-halfspace", "--out", str(tmp_path)]) == 0
    g = SymbolicMap.of(phi(1, coord(0)), n_in=2)
    path = tmp_path / "g.json"
    path.write_text(g.to_json())
    assert main(["kriegl", "--map", str(path), "--set", "X", "--out", str(tmp_path)]) == 1


def test_structure_check(tmp_path):
    assert main(["structure-check", "--handle", "C_ns", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "structure_check.json").read_text())["rows"]
    ident = next(r for r in rows if r["query"] == "x0")
    assert ident["expected"] == "reject" and ident["verdict"]["status"] == "FAILED"
    f = SymbolicMap.of(fnode(coord(0), coord(1)), n_in=2)
    path = tmp_path / "f.json"
    path.write_text(f.to_json())
    assert main(["structure-check", "--handle", "D_X", "--map", str(path),
                 "--out", str(tmp_path)]) == 2  # functions are not plots


def test_config_file(tmp_path):
    cfg = RunConfig(tol=1e-6, seed=3)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = load_config(path)
    assert back == cfg and back.hash() == cfg.hash()
    assert RunConfig(seed=4).hash() != cfg.hash()
    # storage locations do not change the hash
    assert cfg.with_overrides(out="elsewhere").hash() == cfg.hash()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tol": 1e-6, "colour": "blue"}))
    with pytest.raises(DomainError):
        load_config(bad)
    assert main(["eval", "--point", "0,3", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_parse_grid_order():
    P = parse_grid("0:1:2,5:6:3")
    assert P.tolist() == [[0, 5], [0, 5.5], [0, 6], [1, 5], [1, 5.5], [1, 6]]
