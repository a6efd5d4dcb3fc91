"""Tests for the command-line harness: output contents, config handling,
exit codes, and byte-level determinism."""

import json

import numpy as np
import pytest

from rpsdm.cli import main
from rpsdm.detection import QamConstellation
from rpsdm.metrics import worst_case_papr
from rpsdm.ramanujan import build_transform
from rpsdm.transforms import Scheme


def run(*argv) -> int:
    return main(list(argv))


class TestPaprWorstCommand:
    def test_table_values(self, tmp_path, capsys):
        out = tmp_path / "worst.csv"
        assert run("papr-worst", "--n", "8,16,32,64,128,256,512", "--m", "16",
                   "--output", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "n,scheme,worst_case_papr_db"
        assert len(lines) == 1 + 14
        qam = QamConstellation.from_order(16)
        for line in lines[1:]:
            n, scheme, value = line.split(",")
            expected = worst_case_papr(Scheme(scheme), int(n), qam)
            assert float(value) == pytest.approx(expected, abs=1e-12)
        assert "11.58" in capsys.readouterr().out

    def test_json_format(self, tmp_path):
        out = tmp_path / "worst.json"
        assert run("papr-worst", "--n", "8", "--output", str(out),
                   "--format", "json") == 0
        payload = json.loads(out.read_text())
        assert payload["command"] == "papr-worst"
        assert payload["config"] == {"n": [8], "m": 16}
        assert len(payload["rows"]) == 2


class TestComplexityCommand:
    def test_table_values(self, tmp_path):
        out = tmp_path / "complexity.csv"
        assert run("complexity", "--n", "4,16,64,256", "--output", str(out)) == 0
        rows = {}
        for line in out.read_text().splitlines()[1:]:
            n, op, scheme, mults, adds = line.split(",")
            rows[(int(n), op, scheme)] = (int(mults), int(adds))
        assert rows[(4, "modulator_fast", "ofdm")] == (16, 24)
        assert rows[(4, "modulator_fast", "rpsdm")] == (24, 16)
        assert rows[(64, "modulator_fast", "ofdm")] == (768, 1152)
        assert rows[(256, "modulator_fast", "rpsdm")] == (4608, 4096)


class TestSpectrumCommand:
    def test_supports_for_n8(self, tmp_path, capsys):
        out = tmp_path / "spectrum.json"
        assert run("spectrum", "--n", "8", "--output", str(out),
                   "--format", "json") == 0
        payload = json.loads(out.read_text())
        supports = {entry["q"]: entry["support"] for entry in payload["subspaces"]}
        assert supports == {1: [0], 2: [4], 4: [2, 6], 8: [1, 3, 5, 7]}
        # union covers every bin exactly once
        flattened = sorted(k for bins in supports.values() for k in bins)
        assert flattened == list(range(8))
        for entry in payload["subspaces"]:
            magnitude = np.array(entry["magnitude"])
            on = np.zeros(8, dtype=bool)
            on[entry["support"]] = True
            assert (magnitude[on] > 1e-9).all()
            assert (magnitude[~on] < 1e-9).all()

    def test_csv_rows(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        assert run("spectrum", "--n", "4", "--output", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "q,k,magnitude"
        assert len(lines) == 1 + 3 * 4  # three divisors, four bins each


class TestDumpBasisCommand:
    def test_matrices_round_trip(self, tmp_path):
        prefix = str(tmp_path / "basis")
        assert run("dump-basis", "--n", "12", "--output", prefix) == 0
        transform = build_transform(12)
        e_t = np.array([[int(v) for v in line.split(",")]
                        for line in open(prefix + "_et.csv")])
        np.testing.assert_array_equal(e_t, transform.e_t)
        q_norm = np.array([float(line) for line in open(prefix + "_qnorm.csv")])
        np.testing.assert_allclose(q_norm, transform.q_norm, rtol=1e-15)
        e_r = np.array([[float(v) for v in line.split(",")]
                        for line in open(prefix + "_er.csv")])
        np.testing.assert_allclose(e_r, transform.e_r, rtol=1e-15)


class TestDecomposeCommand:
    def test_json_report(self, tmp_path):
        out = tmp_path / "dec.json"
        assert run("decompose", "--n", "8", "--l", "3", "--seed", "5",
                   "--scheme", "rpsdm", "--output", str(out)) == 0
        payload = json.loads(out.read_text())
        assert payload["config"] == {"n": 8, "l": 3, "seed": 5, "scheme": "rpsdm"}
        assert payload["report"]["stair_block_ok"] is True
        assert [b["size"] for b in payload["report"]["blocks"]] == [1, 1, 2, 4]
        assert len(payload["matrix_real"]) == 8

    def test_ofdm_variant(self, tmp_path):
        out = tmp_path / "dec.json"
        assert run("decompose", "--n", "8", "--l", "3", "--seed", "5",
                   "--scheme", "ofdm", "--output", str(out)) == 0
        payload = json.loads(out.read_text())
        assert payload["report"]["structure"] == "diagonal"

    def test_rejects_csv(self, tmp_path):
        code = run("decompose", "--n", "8", "--l", "3", "--seed", "5",
                   "--scheme", "rpsdm", "--format", "csv")
        assert code == 2


class TestCurveCommands:
    def test_ccdf_output(self, tmp_path):
        out = tmp_path / "ccdf.csv"
        assert run("papr-ccdf", "--n", "8", "--m", "16", "--trials", "400",
                   "--seed", "3", "--thresholds", "0:10:1", "--output", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "scheme,n,threshold_db,ccdf,ci_low,ci_high"
        assert len(lines) == 1 + 2 * 11  # both schemes, 11 thresholds

    def test_ber_json_metadata(self, tmp_path):
        out = tmp_path / "ber.json"
        assert run("ber", "--n", "8", "--l", "2", "--m", "16", "--snr", "10,20",
                   "--trials", "10", "--seed", "4", "--scheme", "rpsdm",
                   "--detector", "zf", "--output", str(out), "--format", "json") == 0
        payload = json.loads(out.read_text())
        (curve,) = payload["curves"]
        assert curve["config"]["scheme"] == "rpsdm"
        assert "resampled_trials" in curve["metadata"]
        assert len(curve["values"]) == 2


class TestDeterminism:
    def test_ccdf_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["papr-ccdf", "--n", "8", "--trials", "500", "--seed", "11",
                "--thresholds", "0:12:0.5"]
        assert main(argv + ["--output", str(a)]) == 0
        assert main(argv + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_ber_independent_of_worker_count(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["ber", "--n", "8", "--l", "3", "--snr", "5,15", "--trials", "25",
                "--seed", "12"]
        monkeypatch.setenv("RPSDM_THREADS", "1")
        assert main(argv + ["--output", str(a)]) == 0
        monkeypatch.setenv("RPSDM_THREADS", "4")
        assert main(argv + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_file_supplies_values_and_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# ber experiment\nn = 8\nl = 2\nseed = 9\n"
                       "trials = 50\nsnr = 10,20\nscheme = rpsdm\ndetector = zf\n")
        out_file = tmp_path / "file.csv"
        out_flag = tmp_path / "flag.csv"
        assert run("ber", "--config", str(cfg), "--output", str(out_file)) == 0
        # --trials overrides the file entry
        assert run("ber", "--config", str(cfg), "--trials", "10",
                   "--output", str(out_flag)) == 0
        file_lines = out_file.read_text().splitlines()
        flag_lines = out_flag.read_text().splitlines()
        assert len(file_lines) == len(flag_lines) == 1 + 2
        assert file_lines[1] != flag_lines[1]  # different trial counts

    def test_missing_file_is_config_error(self, tmp_path):
        assert run("ber", "--config", str(tmp_path / "nope.cfg")) == 2

    def test_malformed_line_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n 8\n")
        assert run("spectrum", "--config", str(cfg)) == 2


class TestConfigErrors:
    def test_missing_seed(self, tmp_path):
        out = tmp_path / "never.csv"
        code = run("papr-ccdf", "--n", "8", "--trials", "10", "--output", str(out))
        assert code == 2
        assert not out.exists()  # no partial files on config errors

    @pytest.mark.parametrize("argv", [
        ("papr-worst", "--n", "8", "--m", "32"),
        ("ber", "--n", "8", "--l", "9", "--seed", "1"),
        ("ber", "--n", "8", "--l", "2", "--seed", "1", "--trials", "0"),
        ("papr-ccdf", "--n", "8", "--seed", "1", "--thresholds", "junk"),
        ("spectrum", "--n", "8,16"),
        ("complexity", "--n", "0"),
    ])
    def test_invalid_configs_exit_2(self, argv):
        assert run(*argv) == 2

    def test_unknown_command_exits_2(self, capsys):
        assert run("frobnicate") == 2

    def test_numerical_exit_path_exists(self):
        # numerical failures map to exit 3; the residual check cannot be
        # tripped by valid input, so just pin the exit-code contract
        from rpsdm.cli import ConfigError, NumericalError
        assert issubclass(ConfigError, ValueError)
        assert issubclass(NumericalError, RuntimeError)
