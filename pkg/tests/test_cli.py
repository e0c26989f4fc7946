import json

import pytest

from pointpair.cli import TABLE_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("metric, extra, y, expected", [
    ("gpp", ["--alpha", "4"], "2,1", "0.707106781186548"),
    ("jstar", [], "2,1", "0.5"),
    ("gpp", ["--alpha", "4"], "0,1", "0"),
])
def test_eval_examples(capsys, metric, extra, y, expected):
    code, out, _ = run(capsys, "eval", "--domain", "halfspace", "--dim", "2", "--metric", metric, *extra,
                       "--x", "0,1", "--y", y)
    assert code == 0
    assert out.strip() == expected


def test_eval_outside_domain_reports_witness(capsys):
    code, out, err = run(capsys, "eval", "--metric", "jstar", "--x", "0,-1", "--y", "1,1")
    assert code == 2
    assert "witness" in err and out == ""


def test_eval_gpp_without_alpha_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--metric", "gpp", "--x", "0,1", "--y", "1,1"])
    assert exc.value.code == 2


def test_unknown_bound_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--bound", "thm9.9", "--alpha", "1", "--samples", "10"])
    assert exc.value.code == 2
    assert "unknown bound" in capsys.readouterr().err


def test_bad_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--domain", "torus"])
    assert exc.value.code == 2


def test_plot_without_out_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["specfun", "--K", "0.5", "--plot"])
    assert exc.value.code == 2


def _strip_time(text):
    doc = json.loads(text)
    doc.pop("wall_time")
    return doc


def test_verify_report_is_deterministic(capsys):
    argv = ["verify", "--bound", "thm3.1,lem4.1", "--domain", "strip", "--alphas", "1,9",
            "--samples", "2000", "--seed", "3", "--no-refine"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert _strip_time(out1) == _strip_time(out2)
    doc = json.loads(out1)
    assert doc["schema_version"] == 1
    assert doc["seed"] == 3
    assert doc["domain"]["type"] == "strip"
    assert [r["bound_id"] for r in doc["reports"]] == ["thm3.1", "thm3.1", "lem4.1", "lem4.1"]


def test_seed_defaults_to_zero_and_is_echoed(capsys):
    _, out, _ = run(capsys, "verify", "--bound", "lem4.3", "--alpha", "1", "--samples", "500")
    assert json.loads(out)["seed"] == 0


def test_table_export_header_and_rows(capsys):
    code, out, _ = run(capsys, "verify", "--bound", "thm3.1", "--alphas", "1,4", "--samples", "1000",
                       "--format", "table")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == ",".join(TABLE_COLUMNS)
    assert len(lines) == 3
    assert all(line.endswith(",true") for line in lines[1:])


def test_inapplicable_bounds_are_skipped_and_listed(capsys):
    code, out, err = run(capsys, "verify", "--bound", "lem3.3,thm5.2,thm3.1", "--domain", "strip",
                         "--alpha", "1", "--samples", "500")
    doc = json.loads(out)
    assert code == 0
    assert {s["bound_id"] for s in doc["skipped"]} == {"lem3.3", "thm5.2"}
    assert "skipped lem3.3" in err
    assert [r["bound_id"] for r in doc["reports"]] == ["thm3.1"]


def test_disk_only_bounds_skipped_elsewhere(capsys):
    code, out, _ = run(capsys, "verify", "--bound", "cor5.3", "--alpha", "1", "--samples", "100")
    assert code == 0
    assert json.loads(out)["skipped"][0]["bound_id"] == "cor5.3"


def test_cor34_report_carries_discrepancy(capsys):
    code, out, _ = run(capsys, "verify", "--bound", "cor3.4", "--alphas", "1,9", "--samples", "20000",
                       "--no-refine")
    doc = json.loads(out)
    assert code in (0, 3)
    low, high = doc["reports"]
    assert low["discrepancy"] is False and high["discrepancy"] is True
    assert high["stated_constant"] < high["proof_chain_constant"]
    assert any("proof" in n or "chain" in n for n in high["notes"])
    assert all(r["passed"] for r in doc["reports"])


def test_disk_campaign_conformal_and_quasiregular(capsys):
    code, out, _ = run(capsys, "verify", "--bound", "cor5.3,cor5.7", "--domain", "ball", "--alpha", "4",
                       "--samples", "2000", "--K", "1,2", "--a", "0.5,0.2+0.3j")
    doc = json.loads(out)
    assert code == 0
    labels = [r["bound_id"] for r in doc["reports"]]
    assert labels == ["cor5.3", "cor5.3", "cor5.7", "cor5.7"]
    k1 = doc["reports"][2]
    assert k1["K"] == 1 and k1["conformal_upper_factor"] == pytest.approx(2.0)


def test_sharpness_thm31(capsys):
    code, out, _ = run(capsys, "sharpness", "--bound", "thm3.1", "--alpha", "1", "--samples", "5000",
                       "--starts", "8")
    doc = json.loads(out)
    assert code == 0
    upper = doc["sharpness"][0]["sides"]["upper"]
    assert upper["ratio"] >= 0.98


def test_conjecture_small_scan(capsys, tmp_path):
    out_path = tmp_path / "conj.json"
    code, _, _ = run(capsys, "conjecture", "--alpha", "4", "--a", "0.5", "--samples", "20000",
                     "--out", str(out_path), "--plot")
    doc = json.loads(out_path.read_text())
    assert code == 0
    scan = doc["scans"][0]
    assert scan["sup_ratio"] <= 1.5 + 1e-6
    assert scan["inf_ratio"] >= 1 / 1.5 - 1e-6
    assert doc["figures"] == [str(tmp_path / "conj_conjecture.png")]
    assert (tmp_path / "conj_conjecture.png").stat().st_size > 0


def test_specfun_lambda2(capsys):
    code, out, _ = run(capsys, "specfun", "--lambda2", "--tmax", "1e8", "--K", "0", "--gamma2", "1.4142135623730951")
    doc = json.loads(out)
    assert code == 0
    assert 3.99 <= doc["lambda2"]["lambda2"] <= 4.01
    assert doc["ell_K"][0]["K"] == pytest.approx(1.5707963267949, abs=1e-12)
    assert doc["gamma2"][0]["gamma2"] == pytest.approx(4.0, abs=1e-10)


def test_specfun_table_and_plot(capsys, tmp_path):
    out_path = tmp_path / "lam.csv"
    code, _, _ = run(capsys, "specfun", "--lambda2", "--format", "table", "--out", str(out_path), "--plot")
    lines = out_path.read_text().splitlines()
    assert code == 0
    assert lines[0] == "quantity,argument,value"
    assert lines[-1].startswith("lambda2,")
    assert (tmp_path / "lam_lambda2.png").exists()


def test_verify_plot_writes_quotient_figure(capsys, tmp_path):
    out_path = tmp_path / "run.json"
    run(capsys, "verify", "--bound", "thm3.1", "--alphas", "1,4", "--samples", "500", "--out", str(out_path),
        "--plot")
    assert (tmp_path / "run_quotients.png").exists()


def test_numbers_have_fifteen_significant_digits(capsys):
    _, out, _ = run(capsys, "eval", "--metric", "t", "--x", "0,1", "--y", "1,2")
    assert len(out.strip().replace("0.", "", 1).lstrip("0")) <= 15
