import json
import math
from fractions import Fraction

import numpy as np
import pytest

from toroidal_lab.cli import main
from toroidal_lab.errors import ConfigError
from toroidal_lab.reals import LiouvilleSum, QuadraticSurd
from toroidal_lab.report import RunConfig, canonical_json, csv_text, parse_config

FAST_SOLVE = "grid_x=32\ngrid_v=128\ntrunc=16\n"


def test_config_round_trip():
    cfg = parse_config("q=sqrt(3)\ntheta2=2/5\ntau_re=1/2\nbox=7\ntol=1e-7\n# comment\n\nrecipe=rough\n")
    assert cfg.q == QuadraticSurd.sqrt(3) and cfg.theta2 == Fraction(2, 5)
    assert parse_config(cfg.serialize()) == cfg
    assert parse_config(cfg.serialize()).serialize() == cfg.serialize()


def test_config_canonical_tau():
    assert parse_config("tau_re=0.5").tau_re == "1/2"
    assert parse_config("tau_re=0.5").serialize() == parse_config("tau_re=2/4").serialize()


def test_config_liouville_token():
    cfg = parse_config("q=liouville(3,10)")
    assert isinstance(cfg.q, LiouvilleSum)
    assert parse_config(cfg.serialize()) == cfg


@pytest.mark.parametrize("text", ["nope=1", "box=1\nbox=2", "box", "box=x", "tau_im=0", "tau_re=abc",
                                  "precision_bits=10", "delta0=1.5", "tol=0", "format=xml", "q=banana"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_canonical_json():
    doc = {"b": 1.0, "a": [float("nan"), math.inf, 0.1], "c": 1 + 2j, "d": np.float64(1 / 3), "e": Fraction(1, 3)}
    text = canonical_json(doc)
    assert text == canonical_json(dict(reversed(list(doc.items()))))
    back = json.loads(text)
    assert back["a"] == [None, None, 0.1]
    assert back["c"] == {"re": 1.0, "im": 2.0}
    assert back["d"] == 1 / 3 and back["e"] == "1/3"
    assert list(back) == sorted(back)


def test_csv_text():
    assert csv_text(["a", "b"], [[1, 0.5], ["x", float("nan")]]) == "a,b\n1,0.5\nx,null\n"


def run(capsys, tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / "run.cfg"
        path.write_text(config)
        argv += ["--config", str(path)]
    code = main(argv)
    out = capsys.readouterr()
    return code, out


def test_divisors_command(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "divisors", "--box", "3")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["schema"] == "toroidal-lab/1" and doc["exit_code"] == 0
    assert (tmp_path / "divisors.csv").read_text().startswith("m,n,re,im,abs")
    assert json.loads((tmp_path / "report.json").read_text()) == doc


def test_divisors_csv_stdout(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "divisors", "--box", "2", "--format", "csv")
    assert code == 0 and out.out.startswith("m,n,re,im,abs")


def test_classify_quadratic(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "classify", "--N", "300", "--box", "3")
    assert code == 0
    res = json.loads(out.out)["result"]
    assert res["toroidal"]["toroidal"] is True
    assert (tmp_path / "distances.csv").read_text().startswith("kind,n,d_n,err")


def test_classify_rational_is_not_toroidal(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "classify", "--N", "300", "--box", "3", config="q=1/2\ntheta2=0\n")
    assert code == 0
    res = json.loads(out.out)["result"]
    assert res["toroidal"]["toroidal"] is False


def test_deterministic_reports(capsys, tmp_path):
    a = json.loads(run(capsys, tmp_path / "a", "classify", "--N", "200", "--box", "2")[1].out)
    b = json.loads(run(capsys, tmp_path / "b", "classify", "--N", "200", "--box", "2")[1].out)
    a["config"].pop("out"), b["config"].pop("out")
    assert canonical_json(a) == canonical_json(b)
    assert (tmp_path / "a" / "distances.csv").read_bytes() == (tmp_path / "b" / "distances.csv").read_bytes()


def test_solve_ok_and_grid_dump(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "solve", config=FAST_SOLVE)
    assert code == 0, out.out
    res = json.loads(out.out)["result"]
    assert res["passed"] and res["residuals"]["dbar"] < 1e-6
    assert (tmp_path / "grid.csv").read_text().startswith("u,alpha,v,beta,re,im")


def test_solve_obstruction_exit_4(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "solve", config=FAST_SOLVE + "theta2=0\n")
    assert code == 4
    assert json.loads(out.out)["result"]["obstruction"]


def test_solve_tolerance_exit_5(capsys, tmp_path):
    code, _ = run(capsys, tmp_path, "solve", "--tol", "1e-18", config=FAST_SOLVE)
    assert code == 5


def test_config_error_exit_2(capsys, tmp_path):
    assert run(capsys, tmp_path, "solve", config="bogus=1\n")[0] == 2
    assert run(capsys, tmp_path, "divisors", "--precision", "10")[0] == 2
    assert run(capsys, tmp_path, "solve", config=FAST_SOLVE + "recipe=weird\n")[0] == 2
    assert run(capsys, tmp_path, "frobnicate")[0] == 2
    assert run(capsys, tmp_path, "verify", "--suite", "99")[0] == 2


def test_precision_exhausted_exit_3(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "classify", "--N", "50", config="q=~1.414\n")
    assert code == 3
    assert "precision" in out.err


def test_vacuous_verify(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "verify", "--suite", "none")
    assert code == 0
    assert "vacuous" in out.err
    assert json.loads(out.out)["result"]["vacuous"] is True


def test_verify_single_criterion(capsys, tmp_path):
    code, out = run(capsys, tmp_path, "verify", "--suite", "1")
    assert code == 0
    res = json.loads(out.out)["result"]
    assert [r["id"] for r in res["criteria"]] == [1]


def test_verify_designed_failure_exit_1(capsys, tmp_path):
    # refinement drift of the slab integrals cannot reach 1e-18
    code, out = run(capsys, tmp_path, "verify", "--suite", "3", config="quad_tol=1e-18\n")
    assert code == 1
    assert json.loads(out.out)["result"]["failed"] == [3]
