import numpy as np
import pytest
import yaml

from mppsim.main import main

QUIET_RUN = {
    "payloads": ["Hello1!\n", "Hello2!\n"],
    "noise": {},
    "snr_grid_db": [16.0],
    "modes": ["dual"],
    "repetitions": 2,
    "probe_messages": 1,
    "guard_slots": 4,
    "rms_window_s": 0.001,
    "rms_traces": 1,
}


def run_file(tmp_path, **changes) -> str:
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({**QUIET_RUN, **changes}), encoding="utf-8")
    return str(path)


def encode_hex(capsys, *args) -> str:
    assert main(["encode", *args]) == 0
    return capsys.readouterr().out.strip()


class TestParser:
    def test_missing_command(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 1

    def test_bad_arguments_exit_one(self):
        with pytest.raises(SystemExit) as info:
            main(["encode"])
        assert info.value.code == 1

    def test_seed_beyond_63_bits_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["hallucinate", "--seed", str(2**63), "--trials", "1"])
        assert info.value.code == 1
        assert "seed must lie" in capsys.readouterr().err

    def test_negative_seed_is_a_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["gen-noise", "--awgn", "0.5", "--seed", "-3"])
        assert info.value.code == 1

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert capsys.readouterr().out.startswith("mppsim ")


class TestCodecCommands:
    def test_encode_ascii(self, capsys):
        packet = encode_hex(capsys, "--ascii", "Hello1!\\n")
        assert len(packet) == 64
        int(packet, 16)

    def test_round_trip(self, capsys):
        packet = encode_hex(capsys, "--ascii", "Hello1!\\n")
        assert main(["decode", packet]) == 0
        assert capsys.readouterr().out == "48656c6c6f31210a\n"
        assert main(["decode", packet, "--ascii-out"]) == 0
        assert capsys.readouterr().out == "Hello1!\\n\n"

    def test_empty_packet_prints_nothing(self, capsys):
        assert main(["decode", "0" * 64]) == 0
        assert capsys.readouterr().out == ""

    def test_malformed_hex(self, capsys):
        assert main(["decode", "zz"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_wrong_message_length(self, capsys):
        assert main(["encode", "--hex", "beef"]) == 1

    def test_union(self, capsys):
        first = encode_hex(capsys, "--hex", "beef", "--k", "16", "--c", "8")
        second = encode_hex(capsys, "--hex", "0001", "--k", "16", "--c", "8")
        assert main(["decode", "--union", first, second, "--k", "16", "--c", "8", "--verify"]) == 0
        lines = capsys.readouterr().out.split()
        assert "beef" in lines and "0001" in lines

    def test_packet_from_file(self, capsys, tmp_path):
        packet = encode_hex(capsys, "--ascii", "Hello2!\\n")
        path = tmp_path / "packet.hex"
        path.write_text(packet + "\n", encoding="utf-8")
        assert main(["decode", str(path), "--first"]) == 0
        assert capsys.readouterr().out == "48656c6c6f32210a\n"

    def test_invalid_codec_flags(self):
        assert main(["encode", "--hex", "beef", "--k", "16", "--c", "8", "--n", "10"]) == 1

    def test_hallucinate_csv(self, capsys):
        assert main(["hallucinate", "--densities", "0", "1", "--trials", "5"]) == 0
        assert capsys.readouterr().out == (
            "density,trials,measured_rate,independence_estimate\n"
            "0.0,5,0.0,0.0\n"
            "1.0,5,1024.0,1024.0\n"
        )

    def test_cost_profile_csv(self, tmp_path):
        out = tmp_path / "cost.csv"
        code = main(["cost-profile", "--k", "10", "--c", "5", "--densities", "1.0", "--trials", "2",
                     "--out", str(out)])
        assert code == 0
        assert out.read_text(encoding="utf-8").splitlines() == [
            "density,trials,mean_node_expansions,truncated_fraction",
            "1.0,2,7166.0,0.0",
        ]


class TestNoiseCommands:
    def test_needs_a_component(self, tmp_path):
        assert main(["gen-noise", "--out", str(tmp_path / "n.csv")]) == 1

    def test_awgn_csv(self, tmp_path):
        out = tmp_path / "n.csv"
        assert main(["gen-noise", "--awgn", "0.5", "--duration", "0.0001", "--seed", "3", "--out", str(out)]) == 0
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert data.shape == (4100, 2)
        assert out.read_text(encoding="utf-8").startswith("time_s,volts\n")

    def test_same_seed_same_file(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            main(["gen-noise", "--burst", "--duration", "0.0001", "--seed", "1", "--out", str(path)])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_binary_output(self, tmp_path):
        out = tmp_path / "n.bin"
        assert main(["gen-noise", "--awgn", "0.1", "--duration", "0.0001", "--binary", "--out", str(out)]) == 0
        assert out.stat().st_size == 8 + 8 * 4100
        assert (tmp_path / "n.json").exists()

    def test_fit_needs_enough_samples(self, tmp_path):
        path = tmp_path / "few.csv"
        path.write_text("volts\n" + "\n".join(str(v) for v in range(100)) + "\n", encoding="utf-8")
        assert main(["fit-noise", str(path)]) == 1


class TestExperimentCommands:
    def test_per_curve_writes_curve_and_manifest(self, capsys, tmp_path):
        out = tmp_path / "curve.csv"
        assert main(["per-curve", "--config", run_file(tmp_path), "--out", str(out)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("16.0,dual,4,4,0,0.0,0,")
        assert (tmp_path / "curve.manifest.json").exists()
        assert "Eb/Nb dB" in capsys.readouterr().out

    def test_rerun_is_byte_identical(self, tmp_path):
        config = run_file(tmp_path)
        out = tmp_path / "curve.csv"
        snapshots = []
        for _ in range(2):
            assert main(["per-curve", "--config", config, "--out", str(out), "--seed", "4"]) == 0
            snapshots.append((out.read_bytes(), (tmp_path / "curve.manifest.json").read_bytes()))
        assert snapshots[0] == snapshots[1]

    def test_dump_config(self, tmp_path):
        dumped = tmp_path / "effective.yaml"
        code = main(["per-curve", "--config", run_file(tmp_path), "--out", str(tmp_path / "c.csv"),
                     "--repetitions", "1", "--dump-config", str(dumped)])
        assert code == 0
        assert yaml.safe_load(dumped.read_text(encoding="utf-8"))["repetitions"] == 1

    def test_unknown_key(self, capsys, tmp_path):
        assert main(["per-curve", "--config", run_file(tmp_path, repetitons=3)]) == 1
        assert "repetitons" in capsys.readouterr().err

    def test_calibrate_noiseless(self, capsys, tmp_path):
        sweep = tmp_path / "sweep.csv"
        assert main(["calibrate", "--config", run_file(tmp_path), "--sweep-log", str(sweep)]) == 0
        assert capsys.readouterr().out.strip() == "upper=2100 lower=1900 mode=dual"
        assert sweep.read_text(encoding="utf-8").startswith("step,upper,lower,decodes,gibberish\n")

    def test_failed_calibration_keeps_the_log(self, tmp_path):
        sweep = tmp_path / "sweep.csv"
        code = main(["calibrate", "--config", run_file(tmp_path, signal_gain=0.0), "--sweep-log", str(sweep)])
        assert code == 2
        assert len(sweep.read_text(encoding="utf-8").splitlines()) == 1 + 20
