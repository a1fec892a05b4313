import json

import numpy as np
import pytest

from armamonitor.arma import simulate_path
from armamonitor.cli import main, parse_series, read_config
from armamonitor.detectors import MonitorConfig, run_monitor
from armamonitor.estimation import fit
from armamonitor.exceptions import ParseError
from armamonitor.harness import EEG_MODEL


@pytest.fixture
def series_file(tmp_path):
    y = simulate_path(EEG_MODEL, 1504, rng=8, family="laplace")
    path = tmp_path / "eeg.txt"
    path.write_text("# simulated\n" + "\n".join(repr(float(v)) for v in y) + "\n")
    return path, y


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParsing:
    def test_bad_row_names_line(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_series("1.0\n# note\nabc\n")

    def test_timestamps(self):
        s = parse_series("t1, 1.5\nt2,2.5\n")
        assert s.values.tolist() == [1.5, 2.5] and s.timestamps == ["t1", "t2"]

    def test_logdiff_length(self):
        raw = "\n".join(str(100 + i) for i in range(369))
        s = parse_series(raw, "logdiff")
        assert s.values.size == 368
        assert s.values[0] == pytest.approx(np.log(101 / 100))

    def test_logdiff_needs_positive(self):
        with pytest.raises(ParseError):
            parse_series("1\n0\n2\n", "logdiff")

    def test_config(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# design\nreplications = 10\nn-jobs = 2  # inline\n")
        assert read_config(p) == {"replications": "10", "n_jobs": "2"}
        p.write_text("oops\n")
        with pytest.raises(ParseError, match="line 1"):
            read_config(p)


class TestFitMonitor:
    def test_fit_report_near_truth(self, series_file, tmp_path, capsys):
        path, _ = series_file
        out = tmp_path / "model.json"
        code, text, _ = run(capsys, "fit", path, "--p", 4, "--m", 1000, "--out", out)
        assert code == 0 and "ARMA(4,0)" in text
        rep = json.loads(out.read_text())
        se = np.array(rep["standard_errors"][1:])
        assert np.all(np.abs(np.array(rep["phi"]) - EEG_MODEL.phi) < 4 * se)
        assert rep["m"] == 1000 and rep["presample"] == 4

    def test_round_trip_bit_exact(self, series_file, tmp_path, capsys):
        path, y = series_file
        model_file, report_file = tmp_path / "m.json", tmp_path / "r.json"
        run(capsys, "fit", path, "--p", 4, "--m", 1000, "--out", model_file)
        code, _, _ = run(capsys, "monitor", path, "--model", model_file, "--gamma", 0.25,
                         "--threshold", 1.9, "--json", report_file)
        cli = json.loads(report_file.read_text())
        fitted = fit(y[:1004], 4, 0)
        cfg = MonitorConfig(0.25, 0.05, "page", "general", 1000, 1.9)
        lib = run_monitor(fitted, y[1004:], cfg).to_dict()
        lib["absolute_index"] = None if lib["stop_index"] is None else 1004 + lib["stop_index"]
        assert cli == json.loads(json.dumps(lib))
        assert code == (0 if cli["stopped"] else 1)

    def test_exit_codes(self, series_file, tmp_path, capsys):
        path, _ = series_file
        model_file = tmp_path / "m.json"
        run(capsys, "fit", path, "--p", 4, "--m", 1000, "--out", model_file)
        code, text, _ = run(capsys, "monitor", path, "--model", model_file, "--threshold", 1e9,
                            "--horizon", 100)
        assert code == 1 and "no detection within horizon" in text
        code, text, _ = run(capsys, "monitor", path, "--model", model_file, "--threshold", 1e-3)
        assert code == 0 and "detected at lag 1 (observation 1005)" in text
        bad = tmp_path / "bad.txt"
        bad.write_text("1\n2\nx\n")
        code, _, err = run(capsys, "fit", bad, "--m", 2)
        assert code == 2 and "line 3" in err
        assert run(capsys, "monitor")[0] == 2

    def test_break_is_detected_after_change(self, tmp_path, capsys):
        out = tmp_path / "sim.txt"
        run(capsys, "simulate", "--mu", -207, "--phi", "1.65,-0.75,-0.12,0.18",
            "--sigma", 5.6 * 2 ** 0.5, "--family", "laplace", "--n", 3004, "--seed", 4,
            "--break-at", 2505, "--break-kind", "scale", "--delta", 5.1 * 2 ** 0.5, "--out", out)
        model = tmp_path / "m.json"
        run(capsys, "fit", out, "--p", 4, "--m", 1000, "--out", model)
        code, text, _ = run(capsys, "monitor", out, "--model", model, "--threshold", 1e9,
                            "--horizon", 10)
        assert code == 1
        rpt = tmp_path / "r.json"
        code, _, _ = run(capsys, "monitor", out, "--model", model, "--threshold", 2.5,
                         "--json", rpt)
        rep = json.loads(rpt.read_text())
        assert code == 0 and 2505 <= rep["absolute_index"] <= 2505 + 400

    def test_simulate_break_position(self, tmp_path, capsys):
        out = tmp_path / "s.txt"
        run(capsys, "simulate", "--n", 10, "--break-at", 4, "--break-kind", "mean",
            "--delta", 1000, "--out", out)
        y = parse_series(out.read_text()).values
        assert np.all(np.abs(y[:3]) < 100) and np.all(y[3:] > 500)
        code, _, _ = run(capsys, "simulate", "--n", 10, "--break-at", 11)
        assert code == 2


class TestTables:
    def test_critical_values_csv(self, capsys):
        code, text, _ = run(capsys, "critical-values", "--gammas", "0,0.25", "--alphas",
                            "0.05,0.1", "--R", 2000, "--G", 200, "--format", "csv")
        lines = text.strip().splitlines()
        assert code == 0 and lines[0] == "gamma,alpha,scheme,c,R,G,seed"
        assert len(lines) == 1 + 2 * 2 * 2

    def test_table4_small(self, capsys, tmp_path):
        cfg = tmp_path / "t4.cfg"
        cfg.write_text("replications = 6\ngammas = 0\n")
        code, text, _ = run(capsys, "table4", "--config", cfg, "--orders", "2,2",
                            "--format", "csv")
        lines = text.strip().splitlines()
        assert code == 0 and len(lines) == 3
        assert lines[0].startswith("case,gamma,scheme,median")
