import json

import pytest

from ccapm import cli
from ccapm.errors import DataError
from ccapm.io import SeriesFormatError, fixture_path, load_series, load_summary
from ccapm.reports import ReportDocument, digest, dumps, load_report


def write(tmp_path, text, name="series.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(argv, capsys):
    code = cli.run_cli(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_load_well_formed(tmp_path):
    s = load_series(write(tmp_path, "year,consumption\n1990,100\n1991,102\n1992,103\n"))
    assert len(s) == 3
    assert s.periods == (1990, 1991, 1992)


def test_load_tab_and_decimal_comma(tmp_path):
    p = write(tmp_path, "consumption\tequity_return\n100,5\t1,05\n102\t1,07\n")
    s = load_series(p, decimal=",")
    assert s.consumption == (100.5, 102.0)
    assert s.equity_return == (1.05, 1.07)
    assert s.periods == (0, 1)


def test_load_missing_column(tmp_path):
    with pytest.raises(SeriesFormatError, match="consumption") as exc:
        load_series(write(tmp_path, "year,income\n1,2\n2,3\n"))
    assert exc.value.column == "consumption"


def test_load_zero_consumption_row(tmp_path):
    rows = "\n".join(f"{1900 + i},{100 + i}" for i in range(6))
    p = write(tmp_path, f"year,consumption\n{rows}\n1906,0\n")
    with pytest.raises(SeriesFormatError, match="row 7") as exc:
        load_series(p)
    assert exc.value.row == 7
    assert "never optimal" in str(exc.value)


def test_load_ragged_and_short(tmp_path):
    with pytest.raises(SeriesFormatError, match="row 2 has 1 fields"):
        load_series(write(tmp_path, "year,consumption\n1,100\n2\n"))
    with pytest.raises(SeriesFormatError, match="at least 2"):
        load_series(write(tmp_path, "consumption\n100\n"))
    with pytest.raises(SeriesFormatError, match="not a number"):
        load_series(write(tmp_path, "consumption\n100\nabc\n"))
    with pytest.raises(SeriesFormatError, match="increasing"):
        load_series(write(tmp_path, "year,consumption\n2,100\n1,101\n"))


def test_load_summary(tmp_path):
    p = write(tmp_path, json.dumps({"mean_equity_return": 1.0698, "risk_free_rate": 1.008,
                                    "mean_growth": 1.018, "sd_growth": 0.036}), "s.json")
    assert load_summary(p).mean_premium == pytest.approx(0.0618)
    with pytest.raises(DataError, match="sd_growth"):
        load_summary(write(tmp_path, '{"mean_equity_return": 1.07}', "bad.json"))


def test_dumps_precision_and_round_trip():
    text = dumps({"a": 0.1, "b": [1.0, 2], "c": None, "display": {"x": 0.1}})
    assert '"a": 0.10000000000000001' in text
    assert '"x": 0.1' in text
    assert json.loads(text) == {"a": 0.1, "b": [1.0, 2], "c": None, "display": {"x": 0.1}}
    with pytest.raises(ValueError):
        dumps({"a": float("nan")})


def test_report_round_trip(tmp_path):
    doc = ReportDocument.build("pricing", ["price"], {"beta": 0.99},
                               {"price_dividend_ratio": 19.65, "expected_equity_return": 1.0698,
                                "risk_free_rate": 1.0 / 3.0, "equity_premium": 0.06,
                                "log_equity_premium": 0.0595})
    assert ReportDocument.from_json(doc.to_json()) == doc
    assert doc.input_digest == digest({"beta": 0.99})
    tampered = json.loads(doc.to_json())
    tampered["inputs"]["beta"] = 0.98
    with pytest.raises(DataError, match="digest"):
        ReportDocument.from_dict(tampered)
    del tampered["payload"]
    with pytest.raises(DataError, match="schema"):
        ReportDocument.from_dict(tampered)


def test_cli_calibrate_pinned(capsys):
    code, out, _ = run(["calibrate", "--table1", "--beta", "0.99", "--rho", "1.033526",
                        "--rounded"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["display"]["result"]["point"] == {"zeta": 0.961745, "xi": 1.019392, "rho": 1.033526}
    code, out, _ = run(["calibrate", "--table1", "--beta", "0.99", "--rho", "1.033526"], capsys)
    point = json.loads(out)["payload"]["result"]["point"]
    assert point["zeta"] == pytest.approx(0.961745, abs=1e-5)
    assert point["xi"] == pytest.approx(1.019392, abs=1e-5)


def test_cli_calibrate_full_reports_family(capsys):
    code, out, _ = run(["calibrate", "--table1"], capsys)
    assert code == 0
    res = json.loads(out)["payload"]["result"]
    assert res["jacobian_rank"] == 2
    assert res["certificate"]["verdict"] == "one-parameter solution family"
    assert res["initial_guess_dependent"] is True
    assert res["family"]["lnzeta_coeffs"]
    code, out, _ = run(["calibrate", "--table1", "--initial", "0,0,5"], capsys)
    assert json.loads(out)["payload"]["result"]["point"]["rho"] == pytest.approx(5.0, abs=0.1)


def test_cli_price(capsys):
    code, out, _ = run(["price", "--table1", "--beta", "0.99", "--zeta", "0.961745",
                        "--xi", "1.019392", "--rho", "1.033526", "--display-decimals", "4"], capsys)
    assert code == 0
    disp = json.loads(out)["display"]
    assert disp["expected_equity_return"] == 1.0698
    assert disp["risk_free_rate"] == 1.008


def test_cli_price_divergent_is_numerical_error(capsys):
    code, _, err = run(["price", "--mu-x", "0", "--var-x", "0", "--beta", "1",
                        "--zeta", "1.1", "--rho", "0"], capsys)
    assert code == 3
    assert "no finite equilibrium" in err


def test_cli_classify(capsys):
    code, out, _ = run(["classify", "--certain-utility", "-0.5", "--expected-utility", "-0.45455",
                        "--beta", "0.99", "--eta", "0.9"], capsys)
    assert code == 0
    assert json.loads(out)["payload"]["classification"] == "risk_loving"
    code, out, _ = run(["classify", "--wealth", "2", "--future-wealth", "2.2", "--rho", "0.5",
                        "--eta", "0.9"], capsys)
    assert json.loads(out)["payload"]["classification"] == "risk_averse"


def test_cli_moments_series(capsys):
    code, out, _ = run(["moments", "--series", str(fixture_path())], capsys)
    assert code == 0
    summary = json.loads(out)["payload"]["summary"]
    assert summary["mean_growth"] == pytest.approx(1.018, abs=1e-10)
    assert summary["sd_growth"] == pytest.approx(0.036, abs=1e-10)


def test_cli_calibrate_from_series_matches_table1(capsys):
    _, a, _ = run(["calibrate", "--series", str(fixture_path()), "--rho", "1.033526"], capsys)
    _, b, _ = run(["calibrate", "--table1", "--rho", "1.033526"], capsys)
    pa = json.loads(a)["payload"]["result"]["point"]
    pb = json.loads(b)["payload"]["result"]["point"]
    assert pa == pytest.approx(pb, abs=1e-9)


def test_cli_simulate(capsys):
    code, out, _ = run(["simulate", "--table1", "--zeta", "0.961745", "--xi", "1.019392",
                        "--rho", "1.033526", "--draws", "100000", "--seed", "1"], capsys)
    assert code == 0
    doc = ReportDocument.from_json(out)
    assert doc.payload["euler_residual"]["value"] <= 1e-12


def test_cli_curves(tmp_path, capsys):
    out_file = tmp_path / "curves.tsv"
    code, _, _ = run(["curves", "--rho", "0.5", "--eta", "0.9", "--beta", "0.99",
                      "--points", "5", "--delimiter", "tab", "--out", str(out_file)], capsys)
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0].split("\t") == ["w", "u", "eta_u", "beta_eta_u"]
    assert len(lines) == 6


def test_cli_usage_and_data_errors(tmp_path, capsys):
    assert run(["calibrate", "--bogus"], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1
    assert run(["classify", "--eta", "0.9"], capsys)[0] == 1
    bad = write(tmp_path, "year,consumption\n1,100\n2,0\n")
    code, _, err = run(["moments", "--series", str(bad)], capsys)
    assert code == 2 and "row 2" in err


def test_cli_writes_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(["calibrate", "--table1", "--rho", "1", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert load_report(target).kind == "calibration"


def test_cli_check(capsys):
    code, out, err = run(["check", "--no-timestamp"], capsys)
    assert code == 0
    assert json.loads(out)["payload"]["passed"] is True
    assert "FAIL" not in err
