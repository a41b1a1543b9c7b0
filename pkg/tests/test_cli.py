import csv
import io
import json
import math
import subprocess
import sys

import pytest

from lpsld import cli, sld
from lpsld.errors import NumericalBreakdown
from lpsld.gengauss import PqParams

P21 = PqParams(2, 1)


def run_ok(argv):
    status, text = cli.run(argv)
    assert status == 0, text
    return text


def test_sld_cone_record_matches_library():
    (rec,) = json.loads(run_ok(["sld-cone", "--p", "2", "--q", "1", "--n", "100", "--z", "0.9"]))
    est = sld.tail_cone(100, 0.9, P21)
    assert rec["rate"] == est.rate
    assert rec["xi"] == est.terms["xi"] and rec["kappa"] == est.terms["kappa"]
    assert rec["probability"] == est.probability
    assert rec["regime"] == "valid-asymptotic"


def test_sld_ball_has_gamma():
    (rec,) = json.loads(run_ok(["sld-ball", "--p", "2", "--q", "1", "--n", "100", "--z", "0.9"]))
    assert rec["gamma"] == sld.gamma(0.9, P21)
    assert rec["measure"] == "uniform"


def test_rate_curve_csv():
    text = run_ok(["rate-curve", "--p", "2", "--q", "1", "--z-grid", "0.85:0.99:50", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 50
    rates = [float(r["rate"]) for r in rows]
    assert all(a < b for a, b in zip(rates, rates[1:]))
    assert float(rows[0]["z"]) == 0.85 and float(rows[-1]["z"]) == 0.99


def test_rate_curve_past_one_not_admissible():
    status, text = cli.run(["rate-curve", "--p", "2", "--q", "1", "--z-grid", "0.85:1.5:50"])
    assert status == 3
    assert json.loads(text)["error"] == "NotAdmissible"


def test_json_and_csv_agree():
    argv = ["sld-cone", "--p", "3", "--q", "2", "--n", "50,100", "--z", "0.92,0.95"]
    js = json.loads(run_ok(argv))
    rows = list(csv.DictReader(io.StringIO(run_ok(argv + ["--format", "csv"]))))
    assert len(js) == len(rows) == 4
    for a, b in zip(js, rows):
        for k, v in a.items():
            if isinstance(v, float):
                assert float(b[k]) == v
            else:
                assert b[k] == str(v)


def test_compare_byte_identical(tmp_path):
    argv = ["compare", "--p", "2", "--q", "1", "--n", "100", "--z", "0.9", "--samples", "20000", "--seed", "7"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(argv + ["--output", str(a)]) == 0
    assert cli.main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    (rec,) = json.loads(a.read_text())
    assert "ratio_cone" in rec and "ratio_ball" in rec


def test_env_seed(monkeypatch):
    argv = ["mc", "--p", "2", "--q", "1", "--n", "20", "--z", "0.85", "--samples", "2000"]
    monkeypatch.setenv(cli.SEED_ENV, "13")
    (rec,) = json.loads(run_ok(argv))
    assert rec["seed"] == 13
    assert json.loads(run_ok(argv + ["--seed", "13"])) == [rec]
    monkeypatch.setenv(cli.SEED_ENV, "x")
    assert cli.run(argv)[0] == 2


@pytest.mark.parametrize(
    "argv,status,code",
    [
        (["sld-cone", "--p", "1", "--q", "2", "--n", "10", "--z", "0.9"], 2, "InvalidParameter"),
        (["sld-cone", "--p", "2", "--q", "1", "--n", "ten", "--z", "0.9"], 2, "InvalidParameter"),
        (["sld-cone", "--p", "2", "--q", "1", "--n", "10"], 2, "InvalidParameter"),
        (["sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z-grid", "0.8:0.9"], 2, "InvalidParameter"),
        (["nonsense"], 2, "InvalidParameter"),
        (["sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z", "1.2"], 3, "NotAdmissible"),
        (["intersect", "--p", "2", "--q", "1", "--n", "100", "--At", "0.7"], 4, "RegimeViolation"),
        (["mc", "--measure", "cone", "--n", "10", "--z", "0.9"], 2, "InvalidParameter"),
        (["project", "--q-proj", "2", "--n", "10", "--z", "1.9"], 2, "InvalidParameter"),
    ],
)
def test_error_statuses(argv, status, code):
    got, text = cli.run(argv)
    rec = json.loads(text)
    assert got == status and rec["error"] == code and rec["exit_status"] == status
    assert rec["message"]


def test_offending_flag_named():
    _, text = cli.run(["sld-cone", "--p", "2", "--q", "1", "--n", "ten", "--z", "0.9"])
    assert "--n" in json.loads(text)["message"]


def test_numerical_failure_status(monkeypatch):
    def boom(*a, **k):
        raise NumericalBreakdown("forced")

    monkeypatch.setattr(sld, "tail_cone", boom)
    status, text = cli.run(["sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z", "0.9"])
    assert status == 5 and json.loads(text)["error"] == "NumericalBreakdown"


def test_grid_syntax():
    assert cli.parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert cli.parse_grid("0.5:0.5:1") == [0.5]


def test_other_commands():
    (c,) = json.loads(run_ok(["constants", "--p", "2", "--q", "1", "--n", "2"]))
    assert math.exp(c["log_vol"]) == pytest.approx(math.pi, rel=1e-12)
    bc = sld.ball_constants(100, P21)
    (r,) = json.loads(run_ok(["intersect", "--p", "2", "--q", "1", "--n", "100", "--At", "1.1", "--samples", "2000", "--seed", "1"]))
    assert r["A_t"] == pytest.approx(1.1) and r["t"] == pytest.approx(1.1 / bc.A_pq)
    assert "mc_p_hat" in r
    (pr,) = json.loads(run_ok(["project", "--q-proj", "inf", "--n", "100", "--z", "1.8"]))
    assert pr["probability"] == sld.tail_cone(100, 0.9, P21).probability
    (m,) = json.loads(run_ok(["mc", "--measure", "project", "--q-proj", "4", "--n", "30", "--z", "1.8", "--samples", "2000", "--seed", "3"]))
    assert 0 <= m["mc_p_hat"] <= 1
    (m,) = json.loads(run_ok(["mc", "--measure", "intersect", "--p", "2", "--q", "1", "--n", "30", "--t", "1.3", "--samples", "2000"]))
    assert 0 <= m["mc_p_hat"] <= 1


def test_entry_points(tmp_path):
    out = tmp_path / "c.csv"
    for cmd in ([sys.executable, "-m", "lpsld"], ["lpsld"]):
        res = subprocess.run(cmd + ["constants", "--p", "2", "--q", "1", "--n", "5", "--format", "csv", "--output", str(out)],
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        assert out.read_text().startswith("p,q,n,log_vol")
    res = subprocess.run([sys.executable, "-m", "lpsld", "sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z", "1.2"],
                         capture_output=True, text=True)
    assert res.returncode == 3 and res.stdout == "" and "NotAdmissible" in res.stderr
