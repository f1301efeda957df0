import json
import math

import pytest

from photonlink.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, RunConfig, load_config, main


def run_cli(*argv):
    return main(list(argv))


class TestConfigHandling:
    def test_defaults_reproduce_headline_setup(self):
        cfg = RunConfig()
        assert (cfg.detector_width, cfg.detector_height, cfg.bin_size) == (896, 648, 8)
        assert cfg.fwhm_x == cfg.fwhm_y == 8.0
        assert cfg.signal_to_dark_ratio == 10.07
        assert cfg.events_per_symbol == 7
        v = cfg.validate()
        assert v.grid.n_symbols == 9072
        assert v.chain.throughput == pytest.approx(0.449 * 0.76 * 0.70 * 0.05)

    def test_flags_override_config_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"bin_size": 12, "seed": 9}))
        cfg = load_config(str(path), {"seed": 4})
        assert cfg.bin_size == 12
        assert cfg.seed == 4

    def test_unknown_config_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"bin_siez": 12}))
        with pytest.raises(Exception):
            load_config(str(path), {})

    def test_config_file_run_matches_flag_run(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "detector_width": 224, "detector_height": 160, "bin_size": 8, "seed": 13,
        }))
        out_cfg, out_flags = tmp_path / "via_config", tmp_path / "via_flags"
        assert run_cli("simulate", "--config", str(cfg_path), "--out", str(out_cfg)) == EXIT_OK
        assert run_cli("simulate", "--detector", "224x160", "--seed", "13",
                       "--out", str(out_flags)) == EXIT_OK
        assert (out_cfg / "joint_counts.csv").read_bytes() == (out_flags / "joint_counts.csv").read_bytes()
        assert (out_cfg / "report.json").read_bytes() == (out_flags / "report.json").read_bytes()

    def test_missing_config_file_exits_3(self, tmp_path):
        assert run_cli("simulate", "--config", str(tmp_path / "nope.json"),
                       "--out", str(tmp_path / "out")) == EXIT_IO

    def test_invalid_json_config_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli("simulate", "--config", str(bad), "--out", str(tmp_path / "out")) == EXIT_CONFIG

    def test_invalid_values_fail_validation(self):
        with pytest.raises(Exception):
            RunConfig(bin_size=0).validate()
        with pytest.raises(Exception):
            RunConfig(signal_to_dark_ratio=-1.0).validate()
        with pytest.raises(Exception):
            RunConfig(losses={"fiber": 1.0}).validate()
        with pytest.raises(Exception):
            RunConfig(crossovers=[0.7]).validate()


class TestSimulate:
    def test_small_run_outputs(self, tmp_path, capsys):
        out = tmp_path / "run"
        rc = run_cli("simulate", "--detector", "224x160", "--seed", "3", "--out", str(out))
        assert rc == EXIT_OK
        text = capsys.readouterr().out
        assert "mi_bits=" in text and "capacity_sent_bits=" in text
        assert (out / "joint_counts.csv").exists()
        report = json.loads((out / "report.json").read_text())
        assert report["parameters"]["seed"] == 3
        for key in ("mi_bits", "max_bits", "throughput", "capacity_sent_bits"):
            assert key in report["results"]
        assert report["results"]["max_bits"] == pytest.approx(math.log2(560))

    def test_default_run_reproduces_headline_numbers(self, tmp_path):
        out = tmp_path / "default"
        rc = run_cli("simulate", "--out", str(out))
        assert rc == EXIT_OK
        results = json.loads((out / "report.json").read_text())["results"]
        assert results["mi_bits"] == pytest.approx(10.5, abs=1.0)
        assert results["capacity_sent_bits"] == pytest.approx(0.125, abs=0.03)
        assert results["max_bits"] == pytest.approx(13.15, abs=0.01)
        assert "expected_mi_bits" in results

    def test_single_symbol_grid_gives_zero_information(self, tmp_path):
        out = tmp_path / "single"
        rc = run_cli("simulate", "--detector", "648x648", "--bin-size", "648", "--out", str(out))
        assert rc == EXIT_OK
        results = json.loads((out / "report.json").read_text())["results"]
        assert results["mi_bits"] == 0.0

    def test_byte_identical_reruns_and_worker_independence(self, tmp_path):
        outs = []
        for name, workers in (("a", "1"), ("b", "1"), ("c", "2")):
            out = tmp_path / name
            rc = run_cli("simulate", "--detector", "224x160", "--seed", "11",
                         "--out", str(out), "--workers", workers)
            assert rc == EXIT_OK
            outs.append((out / "joint_counts.csv").read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_invalid_geometry_exits_2(self, tmp_path):
        rc = run_cli("simulate", "--detector", "64x64", "--bin-size", "100",
                     "--out", str(tmp_path / "x"))
        assert rc == EXIT_CONFIG

    def test_unwritable_output_exits_3(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        rc = run_cli("simulate", "--detector", "224x160", "--out", str(blocker / "sub"))
        assert rc == EXIT_IO


class TestSweepBins:
    def test_csv_schema_and_monotone_alphabet(self, tmp_path):
        out = tmp_path / "sweep"
        rc = run_cli("sweep-bins", "--detector", "448x324", "--bins", "4,8,12",
                     "--out", str(out))
        assert rc == EXIT_OK
        lines = (out / "bin_sweep.csv").read_text().splitlines()
        assert lines[0] == "bin,n_symbols,i_max_bits,hit_prob,mi_rlow_bits,mi_rhigh_bits"
        i_max = [float(line.split(",")[2]) for line in lines[1:]]
        assert i_max == sorted(i_max, reverse=True)

    def test_default_bin_list(self, tmp_path):
        out = tmp_path / "defaults"
        rc = run_cli("sweep-bins", "--out", str(out))
        assert rc == EXIT_OK
        lines = (out / "bin_sweep.csv").read_text().splitlines()
        assert [int(line.split(",")[0]) for line in lines[1:]] == [2, 4, 6, 8, 10, 12, 16, 24, 32]
        i_max = [float(line.split(",")[2]) for line in lines[1:]]
        assert i_max == sorted(i_max, reverse=True)

    def test_empty_bins_exit_2(self, tmp_path):
        rc = run_cli("sweep-bins", "--bins", "", "--out", str(tmp_path / "x"))
        assert rc == EXIT_CONFIG

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run_cli("sweep-bins", "--detector", "224x160", "--bins", "8,16",
                           "--out", str(out)) == EXIT_OK
        assert (a / "bin_sweep.csv").read_bytes() == (b / "bin_sweep.csv").read_bytes()
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


class TestCodedBer:
    def test_csv_schema_and_reference_column(self, tmp_path):
        out = tmp_path / "coded"
        rc = run_cli("coded-ber", "--crossovers", "0.001,0.45", "--frames", "1",
                     "--seed", "5", "--out", str(out))
        assert rc == EXIT_OK
        lines = (out / "coded_ber.csv").read_text().splitlines()
        assert lines[0] == "ber_in,ber_out,frames,converged_frac"
        ber_in = [float(line.split(",")[0]) for line in lines[1:]]
        assert ber_in == [0.001, 0.45]

    def test_crossover_domain_exit_2(self, tmp_path):
        assert run_cli("coded-ber", "--crossovers", "0.6", "--out", str(tmp_path / "x")) == EXIT_CONFIG
        assert run_cli("coded-ber", "--crossovers", "", "--out", str(tmp_path / "y")) == EXIT_CONFIG

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run_cli("coded-ber", "--crossovers", "0.01", "--frames", "1",
                           "--seed", "2", "--out", str(out)) == EXIT_OK
        assert (a / "coded_ber.csv").read_bytes() == (b / "coded_ber.csv").read_bytes()


class TestMi:
    def test_identity_counts(self, tmp_path, capsys):
        path = tmp_path / "counts.csv"
        rows = ["sent,received,count"] + [f"{i},{i},6" for i in range(64)]
        path.write_text("\n".join(rows) + "\n")
        rc = run_cli("mi", str(path), "--out", str(tmp_path / "out"))
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        mi = float([ln for ln in out.splitlines() if ln.startswith("mi_bits=")][0].split("=")[1])
        assert mi == pytest.approx(6.0, abs=1e-12)

    def test_two_by_two_example(self, tmp_path, capsys):
        path = tmp_path / "counts.csv"
        path.write_text("sent,received,count\n0,0,3\n0,1,1\n1,0,1\n1,1,3\n")
        rc = run_cli("mi", str(path), "--out", str(tmp_path / "out"))
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        mi = float([ln for ln in out.splitlines() if ln.startswith("mi_bits=")][0].split("=")[1])
        assert mi == pytest.approx(0.1887, abs=5e-5)

    def test_malformed_row_exit_2_with_line_number(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("sent,received,count\n0,0,3\nnot,a,row\n")
        rc = run_cli("mi", str(path), "--out", str(tmp_path / "out"))
        assert rc == EXIT_CONFIG
        assert "line 3" in capsys.readouterr().err

    def test_missing_file_exit_3(self, tmp_path):
        assert run_cli("mi", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "out")) == EXIT_IO
