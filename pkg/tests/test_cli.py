"""End-to-end tests of the command-line interface."""

import numpy as np
import pytest

from dzc_ranging.cli import main
from dzc_ranging.iqfile import read_iq


def run(*argv):
    return main([str(a) for a in argv])


class TestGenSimulateEstimate:
    def test_gen_writes_iq_and_sidecar(self, tmp_path):
        out = tmp_path / "code.iq"
        assert run("gen", "--n", 63, "--m", 1, "--out", out) == 0
        samples, meta = read_iq(out)
        assert samples.size == 63
        assert meta["fs"] == 192_000.0

    def test_full_chain_diff(self, tmp_path):
        code = tmp_path / "code.iq"
        rx = tmp_path / "rx.iq"
        report = tmp_path / "est.csv"
        assert run("gen", "--n", 63, "--m", 1, "--length", 64,
                   "--out", code) == 0
        assert run("simulate", "--in", code, "--tau", 12, "--out", rx) == 0
        assert run("estimate", "--in", rx, "--n", 63, "--m", 1,
                   "--algo", "diff", "--out", report) == 0
        lines = report.read_text().strip().split("\n")
        algo, tau_hat = lines[2].split(",")[:2]
        assert algo == "diff" and int(tau_hat) == 12

    def test_full_chain_ml(self, tmp_path):
        code = tmp_path / "code.iq"
        rx = tmp_path / "rx.iq"
        report = tmp_path / "est.csv"
        run("gen", "--n", 21, "--m", 1, "--out", code)
        run("simulate", "--in", code, "--tau", 5, "--out", rx)
        assert run("estimate", "--in", rx, "--n", 21, "--m", 1,
                   "--algo", "ml", "--out", report) == 0
        tau_hat = report.read_text().strip().split("\n")[2].split(",")[1]
        assert int(tau_hat) == 5

    def test_estimate_rejects_short_input(self, tmp_path):
        code = tmp_path / "code.iq"
        run("gen", "--n", 21, "--m", 1, "--out", code)
        assert run("estimate", "--in", code, "--n", 63, "--m", 1,
                   "--algo", "diff") == 2


class TestAmbiguity:
    def test_csv_to_stdout(self, capsys):
        assert run("ambiguity", "--n", 21, "--m", 1, "--tau", 10,
                   "--nu", 0.0) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0].startswith("# dzc-ranging v")
        assert len(lines) == 2 + 21  # header rows + one row per delay
        # the peak row is the true delay
        data = np.array([[float(v) for v in l.split(",")[1:]]
                         for l in lines[2:]])
        assert np.unravel_index(np.argmax(data), data.shape)[0] == 10


class TestBench:
    CFG = "n=21\nm=1\nsnr_grid=0;20\ntrials=4\nalgorithms=xcorr_zc;diff_dzc\ntau=10\n"

    def test_bench_writes_csvs(self, tmp_path):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text(self.CFG)
        out = tmp_path / "out"
        assert run("bench", "--config", cfg, "--out-dir", out) == 0
        trials = (out / "trials.csv").read_text()
        summary = (out / "summary.csv").read_text()
        assert len(trials.strip().split("\n")) == 2 + 4 * 2 * 2
        assert len(summary.strip().split("\n")) == 2 + 2 * 2

    def test_bench_deterministic_bytes(self, tmp_path):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text(self.CFG)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            run("bench", "--config", cfg, "--out-dir", out)
            outs.append((out / "trials.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_config_exits_2(self, tmp_path):
        assert run("bench", "--config", tmp_path / "nope.cfg",
                   "--out-dir", tmp_path) == 2

    def test_invalid_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text("algorithms=quantum_ranging\n")
        assert run("bench", "--config", cfg, "--out-dir", tmp_path) == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
