import json
import math

import pytest

from ssrchain.cli import main
from ssrchain.output import read_csv_table


def run(tmp_path, name, args):
    out = tmp_path / name
    rc = main(args + ["-o", str(out)])
    return rc, out


def data_section(path):
    """File contents with the volatile 'generated' metadata line dropped."""
    with open(path, encoding="utf-8") as fh:
        return [ln for ln in fh if not ln.startswith("# generated=")]


class TestPoles:
    def test_single_qubit_row(self, tmp_path):
        rc, out = run(tmp_path, "p.csv", ["poles", "--n", "1", "--sep", "0.3", "--mode", "sr", "--sr-index", "1"])
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        assert len(rows) == 1
        assert float(rows[0]["re_gamma"]) == pytest.approx(1.0, abs=1e-10)

    def test_two_qubit_ssr_row(self, tmp_path):
        rc, out = run(tmp_path, "p.csv", ["poles", "--n", "2", "--sep", "0.56", "--mode", "sr"])
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        assert any(abs(float(r["re_gamma"]) - 4.59) < 0.05 for r in rows)

    def test_general_matches_sr_on_condition(self, tmp_path):
        sep = str(math.pi / 50.0)
        rc1, out1 = run(tmp_path, "sr.csv", ["poles", "--n", "2", "--sep", sep, "--mode", "sr"])
        rc2, out2 = run(
            tmp_path, "gen.csv",
            ["poles", "--n", "2", "--sep", sep, "--mode", "general", "--omega", "50"],
        )
        assert rc1 == rc2 == 0
        _, _, sr_rows = read_csv_table(str(out1))
        _, _, gen_rows = read_csv_table(str(out2))
        sr_g = sorted(float(r["re_gamma"]) for r in sr_rows)
        gen_g = sorted(float(r["re_gamma"]) for r in gen_rows if abs(float(r["re_delta"])) > 1e-9 or abs(float(r["im_delta"])) > 1e-9)
        assert gen_g == pytest.approx(sr_g, rel=1e-9)

    def test_incomplete_window_rejected(self, tmp_path):
        rc, _ = run(tmp_path, "p.csv", ["poles", "--n", "1", "--sep", "0.3", "--re-min", "-1"])
        assert rc == 2

    def test_json_format(self, tmp_path):
        rc, out = run(tmp_path, "p.json", ["poles", "--n", "1", "--sep", "0.3", "--format", "json"])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["meta"]["command"] == "poles"
        assert doc["data"][0]["re_gamma"] == pytest.approx(1.0, abs=1e-10)


class TestSSR:
    def test_two_qubits(self, tmp_path):
        rc, out = run(tmp_path, "s.csv", ["ssr", "--n", "2"])
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        assert float(rows[0]["l_critical"]) == pytest.approx(0.56, abs=0.01)
        assert float(rows[0]["re_gamma_ssr"]) == pytest.approx(4.59, abs=0.02)

    def test_three_qubits_beats_dicke(self, tmp_path):
        rc, out = run(tmp_path, "s.csv", ["ssr", "--n", "3"])
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        assert float(rows[0]["re_gamma_ssr"]) > 3.0

    def test_single_qubit_rejected(self, tmp_path):
        rc, _ = run(tmp_path, "s.csv", ["ssr", "--n", "1"])
        assert rc == 2


class TestSweepAndFit:
    def test_small_sweep_monotone(self, tmp_path):
        rc, out = run(tmp_path, "sweep.csv", ["sweep", "--n-min", "2", "--n-max", "10"])
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        assert len(rows) == 9
        rates = [float(r["re_gamma_ssr"]) for r in rows]
        assert all(b > a for a, b in zip(rates, rates[1:]))
        assert all(r["status"] == "ok" for r in rows)

    def test_empty_range_rejected(self, tmp_path):
        rc, _ = run(tmp_path, "sweep.csv", ["sweep", "--n-min", "5", "--n-max", "2"])
        assert rc == 2

    def test_fit_round_trip(self, tmp_path):
        rc, sweep_out = run(
            tmp_path, "sweep.csv",
            ["sweep", "--n-min", "20", "--n-max", "40", "--n-step", "10"],
        )
        assert rc == 0
        rc, fit_out = run(
            tmp_path, "fit.json", ["fit", "--input", str(sweep_out), "--n-min-fit", "20"]
        )
        assert rc == 0
        doc = json.loads(fit_out.read_text())
        assert abs(doc["data"]["alpha"] - 2.277) / 2.277 < 0.005

    def test_fit_exact_synthetic_law(self, tmp_path):
        path = tmp_path / "synthetic.csv"
        lines = ["n_qubits,l_critical,re_gamma_ssr,im_gamma_ssr,coalescence,residual,evaluations,status"]
        for n in (20, 30, 40, 50):
            lines.append(f"{n},{1.5 / n**2!r},{2.5 * n!r},0,true,0,1,ok")
        path.write_text("\n".join(lines) + "\n")
        rc, fit_out = run(tmp_path, "fit.json", ["fit", "--input", str(path)])
        assert rc == 0
        doc = json.loads(fit_out.read_text())
        assert doc["data"]["alpha"] == pytest.approx(2.5, abs=1e-11)
        assert doc["data"]["beta"] == pytest.approx(1.5, abs=1e-11)
        assert all(p["gamma_deviation"] < 1e-12 for p in doc["data"]["points"])

    def test_fit_malformed_csv_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("n_qubits,l_critical\n2,0.5,EXTRA\n")
        rc = main(["fit", "--input", str(path), "-o", str(tmp_path / "f.json")])
        assert rc == 2
        assert ":2:" in capsys.readouterr().err

    def test_env_override_echoed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SSRCHAIN_JOBS", "2")
        rc, out = run(
            tmp_path, "sweep.csv",
            ["sweep", "--n-min", "2", "--n-max", "4", "--jobs", "7"],
        )
        assert rc == 0
        meta, _, _ = read_csv_table(str(out))
        assert meta["jobs"] == "2"


class TestAsym:
    def test_critical(self, tmp_path):
        rc, out = run(tmp_path, "c.json", ["asym", "--critical"])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert abs(doc["data"]["product"] - 4.0) < 1e-10

    def test_contour(self, tmp_path):
        rc, out = run(
            tmp_path, "contour.csv",
            ["asym", "--contour", "--beta-min", "0.1", "--beta-max", "2.5", "--steps", "200"],
        )
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        top = max(float(r["beta"]) for r in rows)
        assert top == pytest.approx(1.7569, abs=0.02)

    def test_single_step_rejected(self, tmp_path):
        rc, _ = run(tmp_path, "c.csv", ["asym", "--contour", "--steps", "1"])
        assert rc == 2

    def test_needs_exactly_one_mode(self, tmp_path):
        rc, _ = run(tmp_path, "c.csv", ["asym"])
        assert rc == 2


class TestFieldmap:
    def test_minimum_at_two_qubit_pole(self, tmp_path):
        rc, out = run(
            tmp_path, "map.csv",
            [
                "fieldmap", "--n", "2", "--sep", "0.56", "--mode", "sr",
                "--re-range", "-1", "1", "--im-range", "-3.2", "-1.4",
                "--resolution", "101",
            ],
        )
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        best = min(rows, key=lambda r: float(r["log10_abs_f"]))
        z = complex(float(best["re_delta"]), float(best["im_delta"]))
        cell = 2.0 / 100
        pole = 0.2117 - 2.2773j  # conjugate pair: either mirror member counts
        assert min(abs(z - pole), abs(z + pole.conjugate())) < 1.5 * cell

    def test_single_qubit_minimum(self, tmp_path):
        rc, out = run(
            tmp_path, "map.csv",
            [
                "fieldmap", "--n", "1", "--sep", "0.7", "--mode", "sr",
                "--re-range", "-0.6", "0.6", "--im-range", "-1.0", "-0.1",
                "--resolution", "81",
            ],
        )
        assert rc == 0
        _, _, rows = read_csv_table(str(out))
        best = min(rows, key=lambda r: float(r["log10_abs_f"]))
        assert abs(complex(float(best["re_delta"]), float(best["im_delta"])) + 0.5j) < 0.03

    def test_zero_area_window_rejected(self, tmp_path):
        rc, _ = run(
            tmp_path, "map.csv",
            ["fieldmap", "--n", "1", "--sep", "0.7", "--re-range", "1", "1", "--im-range", "-1", "0"],
        )
        assert rc == 2

    def test_resolution_cap(self, tmp_path):
        rc, _ = run(
            tmp_path, "map.csv",
            [
                "fieldmap", "--n", "1", "--sep", "0.7", "--re-range", "-1", "1",
                "--im-range", "-1", "0", "--resolution", "5000",
            ],
        )
        assert rc == 2


class TestDeterminism:
    def test_identical_flags_identical_data(self, tmp_path):
        args = ["poles", "--n", "2", "--sep", "0.4", "--mode", "sr"]
        _, out1 = run(tmp_path, "a.csv", args)
        _, out2 = run(tmp_path, "b.csv", args)
        assert data_section(out1) == data_section(out2)

    def test_worker_count_does_not_change_data(self, tmp_path):
        base = ["sweep", "--n-min", "2", "--n-max", "5"]
        _, seq = run(tmp_path, "seq.csv", base + ["--jobs", "1"])
        _, par = run(tmp_path, "par.csv", base + ["--jobs", "2"])
        seq_lines = [ln for ln in data_section(seq) if not ln.startswith("# jobs")]
        par_lines = [ln for ln in data_section(par) if not ln.startswith("# jobs")]
        assert seq_lines == par_lines
