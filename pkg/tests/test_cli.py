from pathlib import Path

import pytest

from eqtax.cli import dispatch, main
from eqtax.ingest import capital_bins, emit_bins_csv, labor_bins, parse_schedule_csv, BinTable
from eqtax.distributions import CapitalModel, LaborModel

import numpy as np

DATA = Path(__file__).parents[1] / "data"
SCN = str(DATA / "belgium.scn")


def test_gamma_command(capsys):
    assert main(["gamma", SCN]) == 0
    out = capsys.readouterr().out
    assert "gamma              = 2.40515" in out


def test_schedule_command(tmp_path):
    out = tmp_path / "s.csv"
    res = dispatch(["schedule", SCN, "--delta-m-geur", "16.4", "--out", str(out)])
    assert res.exit_code == 0
    assert "eta                = 2.65779" in res.summary
    assert "tau                = 0.847603" in res.summary
    rows = parse_schedule_csv(out.read_text())
    assert len(rows) == 200 and rows[0][1] == 0.0
    assert res.files == [str(out)]


def test_schedule_grid_and_stream(tmp_path, capsys):
    code = main(["schedule", SCN, "--tau", "0.85", "--grid", "100:1000:5", "--csv",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 0
    cap = capsys.readouterr()
    assert cap.out.splitlines()[0] == "income_keur,tax_rate,post_tax_keur"
    assert len(cap.out.splitlines()) == 6
    assert "tau (given)" in cap.err and "tau (given)" not in cap.out


def test_infeasible_levy(capsys):
    code = main(["schedule", SCN, "--delta-m-geur", "50", "--out", "/dev/null"])
    assert code == 1
    assert "maximum feasible delta_m: 42.7 GEUR" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["bogus"], ["gamma"], ["gamma", SCN, "--nope"],
                                  ["simulate-tax", SCN], ["schedule", SCN, "--tau", "0.8",
                                                           "--delta-m-geur", "1"],
                                  ["schedule", SCN, "--grid", "1:2"]])
def test_usage_errors(argv):
    assert dispatch(argv).exit_code == 2


def test_domain_errors(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text("n_lab = 1\n")
    assert dispatch(["gamma", str(bad)]).exit_code == 1
    assert dispatch(["gamma", str(tmp_path / "missing.scn")]).exit_code == 1
    assert dispatch(["schedule", SCN, "--tau", "1.5", "--out", "/dev/null"]).exit_code == 1


def test_revenue_and_report():
    r = dispatch(["revenue", SCN])
    assert r.exit_code == 0
    assert "poverty gap        = 16.4 GEUR" in r.summary
    rep = dispatch(["report", str(DATA / "belgium_share.scn")])
    assert rep.exit_code == 0
    for key in ("gamma", "eta", "tau", "flat labor alpha", "T(120k)"):
        assert key in rep.summary


def test_fit_command(tmp_path):
    edges = np.concatenate([np.arange(0, 100) * 1e3, 1e5 * np.geomspace(1, 1e3, 200)])
    lab = labor_bins(LaborModel(28013.0, 6.09e6), edges[:101])
    cap = capital_bins(CapitalModel(2.3, 1e5, 1.73e5), edges[100:])
    table = BinTable(lab.rows + cap.rows)
    f = tmp_path / "bins.csv"
    f.write_text(emit_bins_csv(table))
    out = tmp_path / "fit.csv"
    res = dispatch(["fit", str(f), "--x-pov-keur", "13.25", "--x-c-keur", "100",
                    "--m-declared-geur", "60", "--out", str(out)])
    assert res.exit_code == 0, res.summary
    vals = dict(line.split(",") for line in out.read_text().splitlines()[1:])
    assert float(vals["x_bar_hat_keur"]) == pytest.approx(28.013, rel=1e-6)
    assert float(vals["gamma_hat"]) == pytest.approx(2.3, abs=1e-6)
    assert float(vals["evasion_gap_geur"]) == pytest.approx(14.97, rel=2e-3)
    assert dispatch(["fit", str(f), "--x-pov-keur", "13.25", "--x-c-keur", "100",
                     "--bootstrap", "20"]).exit_code == 2


@pytest.mark.parametrize("argv", [
    ["simulate-tax", SCN, "--n", "20000", "--seed", "7"],
    ["simulate-exchange", "--model", "additive", "--agents", "1000", "--steps", "100000", "--seed", "3"],
    ["simulate-exchange", "--model", "multiplicative", "--agents", "1000", "--steps", "50", "--seed", "3"],
])
def test_seeded_csv_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert dispatch(argv + ["--out", str(a)]).exit_code == 0
    assert dispatch(argv + ["--out", str(b)]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("wealth_keur_lo,wealth_keur_hi,count\n")
